"""
Diagonal completion of a 2-norm Cauchy array of representative sequences.
"""

import logging
from typing import Sequence

from errors import ExactnessError, NonCauchyError, ShapeError
from .sequence import RepSequence, TailFilter

logger = logging.getLogger(__name__)

# Slack on the Cauchy bounds for rounding in the 2-norms
CAUCHY_MARGIN = 1e-12


def _check_rows(rows: Sequence[RepSequence]) -> None:
    if not rows:
        raise ShapeError("diagonal completion needs at least one row")
    size = len(rows[0])
    for n, row in enumerate(rows, start=1):
        if len(row) != size:
            raise ShapeError(f"row {n} has {len(row)} indices, row 1 has {size}", row=n)
        if row.dims != rows[0].dims:
            raise ShapeError(f"row {n} lives in different algebras than row 1", row=n)


def validate_cauchy(rows: Sequence[RepSequence], filt: TailFilter, margin: float = CAUCHY_MARGIN) -> None:
    """
    Check ||A_ni - A_mi||_2 <= 4^-min(n, m) + margin for n < m and i in E_n.

    Raises:
        NonCauchyError: At the first violating (n, m, i), all 1-based
    """
    algebras = rows[0].algebras
    for n in range(1, len(rows) + 1):
        for m in range(n + 1, len(rows) + 1):
            for i in sorted(filt.level(n)):
                dist = algebras[i - 1].two_norm(rows[n - 1].at(i) - rows[m - 1].at(i))
                if dist > 4.0 ** -n + margin:
                    raise NonCauchyError(
                        f"rows {n} and {m} differ by {dist:.6g} at index {i}, above 4^-{n}",
                        n=n,
                        m=m,
                        index=i,
                        distance=dist,
                    )


def cauchy_sets(rows: Sequence[RepSequence], filt: TailFilter) -> list[frozenset[int]]:
    """
    Nested sets F_1 > F_2 > ... of indices i in E_n with
    ||A_ki - A_ni||_2 < 4^-n + 4^-k for every k <= n.
    """
    algebras = rows[0].algebras
    sets: list[frozenset[int]] = []
    previous = filt.level(1)
    for n in range(1, len(rows) + 1):
        current = set()
        for i in filt.level(n) & previous:
            alg = algebras[i - 1]
            a_n = rows[n - 1].at(i)
            if all(alg.two_norm(rows[k - 1].at(i) - a_n) < 4.0 ** -n + 4.0 ** -k for k in range(1, n)):
                current.add(i)
        previous = frozenset(current)
        sets.append(previous)
    return sets


def diagonal_completion(rows: Sequence[RepSequence], filt: TailFilter) -> RepSequence:
    """
    Telescoping diagonal sequence X_i = A_{k(i), i}, k(i) the last level with i in F_k.

    Args:
        rows: Rows A_n = (A_n1, ..., A_nN) of the Cauchy array, n = 1..R
        filt: Tail filter with at least R levels

    Returns:
        X with ||A_ni - X_i||_2 <= 2 / 4^n on F_n

    Raises:
        ShapeError: On mismatched rows or a filter with fewer levels than rows
        NonCauchyError: If the array is not 2-norm Cauchy on the filter
    """
    _check_rows(rows)
    if filt.size != len(rows[0]):
        raise ShapeError("filter size differs from the sequence length", size=filt.size, length=len(rows[0]))
    if filt.depth < len(rows):
        raise ShapeError(f"filter has {filt.depth} levels for {len(rows)} rows", depth=filt.depth)
    validate_cauchy(rows, filt)

    sets = cauchy_sets(rows, filt)
    reps = []
    for i in range(1, len(rows[0]) + 1):
        level = max((n for n, f in enumerate(sets, start=1) if i in f), default=1)
        x = rows[level - 1].at(i)
        alg = rows[0].algebras[i - 1]
        for n in range(1, level + 1):
            dist = alg.two_norm(rows[n - 1].at(i) - x)
            if dist > 2.0 / 4.0 ** n + CAUCHY_MARGIN:
                raise ExactnessError(f"completion bound fails at row {n}, index {i}", n=n, index=i, distance=dist)
        reps.append(x)

    logger.info(f"Diagonal completion over {len(rows)} rows: |F_n| = {[len(f) for f in sets]}")
    return RepSequence(rows[0].algebras, tuple(reps), max(r.bound for r in rows))
