"""
JSON and CSV file handling for the command line.

All files are UTF-8 with LF line endings. Writing to no path means stdout.
"""

import csv
import json
import logging
import sys
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from errors import SchemaError, UsageError

logger = logging.getLogger(__name__)


def read_json(path: Optional[str], name: str = "input") -> Any:
    """
    Load a JSON document.

    Raises:
        UsageError: Missing path or unreadable file
        SchemaError: The file is not valid JSON
    """
    if not path:
        raise UsageError(f"--{name} is required", field=name)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}", field=name)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}", field=name)


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(data: Any, path: Optional[str] = None) -> None:
    """Write a JSON document to path, or stdout when path is empty."""
    text = dumps(data)
    if not path:
        sys.stdout.write(text)
        return
    try:
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror or e}", field="out")
    logger.info(f"Wrote {path}")


def write_csv(rows: Iterable[dict[str, Any]], columns: Sequence[str], path: str) -> None:
    """Write rows with a fixed column order."""
    try:
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=list(columns), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror or e}", field="output")
    logger.info(f"Wrote {path}")
