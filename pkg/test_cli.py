"""
End-to-end tests for the command line, run in-process through main().
"""

import csv
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from config import VERSION, config
from main import main
from matcore import mat_from_dict, mat_to_dict, mats_to_list
from correct import MatrixUnitSystem
from ultra import GluedGenerators, InclusionData, restrict_units, standard_units


def _write(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def _read(path):
    return json.loads(path.read_text(encoding="utf-8"))


def _car_chain():
    return [
        InclusionData((1,), (2,), ((2,),)).to_dict(),
        InclusionData((2,), (4,), ((2,),)).to_dict(),
        InclusionData((4,), (8,), ((2,),)).to_dict(),
    ]


@pytest.fixture
def sweep_config():
    return {
        "corrector": "projection",
        "ensemble": {"kind": "near_projection"},
        "deltas": [0.01, 0.02],
        "dims": [4, 6],
        "trials": 2,
        "seed": 7,
    }


# ============================================================================
# correct / defect / gen
# ============================================================================

def test_correct_projection(tmp_path):
    src = _write(tmp_path / "in.json", [mat_to_dict(np.diag([0.95, 0.05]))])
    out = tmp_path / "out.json"
    assert main(["correct", "--op", "projection", "--in", src, "--out", str(out)]) == 0
    report = _read(out)
    assert_allclose(mat_from_dict(report["outputs"][0]), np.diag([1.0, 0.0]), atol=1e-15)
    assert report["before"]["op"] == pytest.approx(0.0475)
    assert report["after"]["satisfied"]
    assert report["distance"]["op"] == pytest.approx(0.05)
    assert report["op"] == "correct:projection"


def test_correct_reports_spectral_gap(tmp_path):
    src = _write(tmp_path / "in.json", [mat_to_dict(np.diag([0.5, 1.0]))])
    out = tmp_path / "out.json"
    assert main(["correct", "--op", "projection", "--in", src, "--out", str(out)]) == 2
    error = _read(out)["error"]
    assert error["code"] == "spectral_gap"
    assert error["details"]["eigenvalue"] == pytest.approx(0.5)


def test_correct_usage_errors(tmp_path):
    src = _write(tmp_path / "in.json", [mat_to_dict(np.eye(2))])
    out = tmp_path / "out.json"
    assert main(["correct", "--op", "no_such_op", "--in", src, "--out", str(out)]) == 1
    assert _read(out)["error"]["code"] == "invalid_parameter"
    assert main(["correct", "--op", "projection", "--in", str(tmp_path / "missing.json"), "--out", str(out)]) == 1
    assert main(["correct"]) == 1


def test_correct_with_params(tmp_path):
    qc = np.diag([0.95, 0.9, 0.05])
    s = np.diag([0.97, 0.02, 0.1])
    src = _write(tmp_path / "in.json", {"matrices": mats_to_list([s, qc]), "params": {"m": 1}})
    out = tmp_path / "out.json"
    assert main(["correct", "--op", "direct_sum", "--in", src, "--out", str(out)]) == 0
    report = _read(out)
    assert_allclose(mat_from_dict(report["outputs"][-1]), np.diag([1.0, 1.0, 0.0]), atol=1e-15)
    assert report["after"]["satisfied"]


GLUE_PARAMS = {
    "sources": [{"family": "two_projections", "c": 0.5, "indices": [0, 1]}, {"family": "projection", "indices": [2]}],
    "ranges": [{"family": "projection", "indices": [0, 1, 2]}],
}


def _glue_triple():
    e = np.eye(5)
    u = (e[0] + e[1]) / np.sqrt(2.0)
    q3 = (e[2] + e[3] + e[4]) / np.sqrt(3.0)
    return [np.outer(e[2], e[0]), np.outer(e[3], u), np.outer(e[0], e[0]) + np.outer(q3, e[1])]


def test_correct_glue_with_family_params(tmp_path):
    gen = np.random.default_rng(35)
    noisy = []
    for v in _glue_triple():
        z = gen.standard_normal((5, 5)) + 1j * gen.standard_normal((5, 5))
        noisy.append(v + 0.005 * z / np.linalg.norm(z, 2))
    src = _write(tmp_path / "in.json", {"matrices": mats_to_list(noisy), "params": GLUE_PARAMS})
    out = tmp_path / "out.json"
    assert main(["correct", "--op", "glue", "--in", src, "--out", str(out)]) == 0
    report = _read(out)
    assert report["after"]["satisfied"]
    labels = [s["label"] for s in report["after"]["summands"]]
    assert "source_two_projections@0,1_angle_0" in labels
    assert "range_projection@0,1,2_idempotent_2" in labels
    assert report["before"]["op"] > report["after"]["op"]
    ws = [mat_from_dict(m) for m in report["outputs"]]
    p0, p1 = (w.conj().T @ w for w in ws[:2])
    assert_allclose(p0 @ p1 @ p0, 0.5 * p0, atol=1e-9)


def test_correct_glue_rejects_uncovered_indices(tmp_path):
    params = {"sources": [{"family": "projection", "indices": [0, 1]}]}
    src = _write(tmp_path / "in.json", {"matrices": mats_to_list(_glue_triple()), "params": params})
    out = tmp_path / "out.json"
    assert main(["correct", "--op", "glue", "--in", src, "--out", str(out)]) == 1
    assert _read(out)["error"]["code"] == "invalid_parameter"


def test_defect(tmp_path):
    src = _write(tmp_path / "in.json", [mat_to_dict(np.array([[0.5]]))])
    out = tmp_path / "out.json"
    assert main(["defect", "--op", "projection", "--in", src, "--out", str(out), "--p", "1"]) == 0
    report = _read(out)
    assert report["report"]["op"] == pytest.approx(0.0625)
    assert report["report"]["p"]["1.0"] == pytest.approx(0.0625)
    assert not report["satisfied"]


def test_gen_then_correct(tmp_path):
    generated = tmp_path / "gen.json"
    assert main([
        "gen", "--op", "near_matrix_units", "--dim", "6", "--delta", "0.05", "--seed", "3",
        "--out", str(generated),
    ]) == 0
    instance = _read(generated)
    assert instance["structure"] == [2]
    assert 0.025 <= instance["measured"] <= 0.1

    out = tmp_path / "out.json"
    assert main(["correct", "--op", "matrix_units", "--in", str(generated), "--out", str(out)]) == 0
    assert _read(out)["after"]["satisfied"]


def test_gen_is_deterministic(tmp_path):
    outs = [tmp_path / "a.json", tmp_path / "b.json"]
    for out in outs:
        assert main(["gen", "--op", "near_unitary", "--dim", "5", "--delta", "0.1", "--seed", "9", "--out", str(out)]) == 0
    assert outs[0].read_bytes() == outs[1].read_bytes()


def test_version(capsys):
    assert main(["version"]) == 0
    assert capsys.readouterr().out.strip() == f"liftkit {VERSION}"


# ============================================================================
# sweep
# ============================================================================

def test_sweep_is_reproducible(tmp_path, sweep_config):
    cfg = _write(tmp_path / "sweep.json", sweep_config)
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        assert main(["sweep", "--config", cfg, "--out", str(path)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()

    with open(paths[0], newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == [
        "dim", "delta", "trial", "defect_in_op", "defect_in_2", "defect_out_op",
        "dist_op", "dist_2", "runtime_ms", "error",
    ]
    assert [(r["dim"], r["delta"], r["trial"]) for r in rows[:3]] == [("4", "0.01", "0"), ("4", "0.01", "1"), ("4", "0.02", "0")]
    assert len(rows) == 8
    assert all(r["error"] == "" for r in rows)
    assert all(float(r["defect_out_op"]) <= config.exact_tol(int(r["dim"])) for r in rows)

    summary = _read(tmp_path / "a.summary.json")
    assert summary["rows"] == 8
    assert len(summary["cells"]) == 4


def test_sweep_extra_norm_column(tmp_path, sweep_config):
    sweep_config["p_norms"] = [1.0]
    cfg = _write(tmp_path / "sweep.json", sweep_config)
    path = tmp_path / "p.csv"
    assert main(["sweep", "--config", cfg, "--out", str(path)]) == 0
    header = path.read_text(encoding="utf-8").splitlines()[0]
    assert header.split(",")[8] == "dist_p1"


@pytest.mark.parametrize("field, value", [
    ("deltas", []),
    ("deltas", [0.05, 0.01]),
    ("deltas", [0.5]),
    ("dims", [1]),
    ("trials", 0),
    ("corrector", "no_such_corrector"),
])
def test_sweep_rejects_bad_config(tmp_path, capsys, sweep_config, field, value):
    sweep_config[field] = value
    cfg = _write(tmp_path / "sweep.json", sweep_config)
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report["error"]["code"] == "schema"
    assert report["error"]["details"]["field"] == field
    assert not (tmp_path / "x.csv").exists()


def test_sweep_rejects_mismatched_kind(tmp_path, capsys, sweep_config):
    sweep_config["ensemble"] = {"kind": "near_unitary"}
    cfg = _write(tmp_path / "sweep.json", sweep_config)
    assert main(["sweep", "--config", cfg]) == 1
    assert json.loads(capsys.readouterr().out)["error"]["details"]["field"] == "ensemble.kind"


# ============================================================================
# ultra
# ============================================================================

def _sequence(mats):
    return {"reps": mats_to_list(mats)}


def test_ultra_tail_norm(tmp_path):
    src = _write(tmp_path / "x.json", _sequence([np.diag([1.0, 0.0]), np.diag([1.0, 0.0, 0.0, 0.0])]))
    out = tmp_path / "out.json"
    assert main(["ultra", "tail-norm", "--in", src, "--out", str(out), "--theta", "0.6"]) == 0
    report = _read(out)
    assert report["estimate"] == pytest.approx(0.5)
    assert report["in_ideal"]


def test_ultra_diagonal_completion(tmp_path):
    base, h = np.diag([1.0, 0.0]), np.array([[0.0, 1.0], [1.0, 0.0]])
    rows = [_sequence([base + 0.5 * 4.0 ** -(n + 1) * h for _ in range(3)]) for n in range(2)]
    src = _write(tmp_path / "rows.json", {"rows": rows})
    out = tmp_path / "out.json"
    assert main(["ultra", "diagonal-completion", "--in", src, "--out", str(out)]) == 0
    report = _read(out)
    reps = [mat_from_dict(r) for r in report["completion"]["reps"]]
    assert_allclose(reps[0], base + 0.125 * h)
    assert_allclose(reps[2], base + 0.03125 * h)
    assert report["filter"]["sets"] == [[1, 2, 3], [2, 3]]


def test_ultra_diagonal_completion_non_cauchy(tmp_path):
    rows = [_sequence([np.eye(2)] * 2), _sequence([np.zeros((2, 2))] * 2)]
    src = _write(tmp_path / "rows.json", {"rows": rows})
    out = tmp_path / "out.json"
    assert main(["ultra", "diagonal-completion", "--in", src, "--out", str(out)]) == 2
    assert _read(out)["error"]["code"] == "non_cauchy"


def test_ultra_lift_projection(tmp_path):
    src = _write(tmp_path / "a.json", _sequence([np.diag([1.0, 0.0, 0.0, 0.0])]))
    out = tmp_path / "out.json"
    assert main(["ultra", "lift-projection", "--in", src, "--out", str(out), "--t", "0.5"]) == 0
    assert _read(out)["traces"] == [pytest.approx(0.5)]


def test_ultra_lift_chain(tmp_path):
    src = _write(tmp_path / "t.json", _sequence([np.diag([0.0, 1 / 3, 2 / 3, 1.0])]))
    out = tmp_path / "out.json"
    assert main(["ultra", "lift-chain", "--in", src, "--out", str(out), "--grid", "0.25", "0.5", "0.75"]) == 0
    assert _read(out)["chains"][0]["ranks"] == [1, 2, 3]


def test_ultra_extend_units(tmp_path):
    inc = InclusionData((2, 3), (4, 5), ((2, 0), (1, 1)))
    gen = np.random.default_rng(5)
    z = gen.standard_normal((18, 18)) + 1j * gen.standard_normal((18, 18))
    w, _ = np.linalg.qr(z)
    pi = inc.standard_embedding(2).conjugate(w)
    args = [
        "ultra", "extend-units",
        "--inclusion", _write(tmp_path / "inc.json", inc.to_dict()),
        "--pi", _write(tmp_path / "pi.json", {"systems": [pi.to_dict()]}),
        "--out", str(tmp_path / "out.json"),
    ]
    assert main(args) == 0
    report = _read(tmp_path / "out.json")
    assert report["systems"][0]["structure"] == [4, 5]
    assert report["restriction"][0]["restriction_defect"] <= config.exact_tol(18)


def test_ultra_extend_units_with_targets(tmp_path):
    inc = InclusionData((2, 3), (4, 5), ((2, 0), (1, 1)))
    gen = np.random.default_rng(6)
    z = gen.standard_normal((18, 18)) + 1j * gen.standard_normal((18, 18))
    w, _ = np.linalg.qr(z)
    exact = standard_units((4, 5), 2).conjugate(w)
    targets = {"targets": [GluedGenerators.of(inc, exact).to_dict()]}
    args = [
        "ultra", "extend-units",
        "--inclusion", _write(tmp_path / "inc.json", inc.to_dict()),
        "--pi", _write(tmp_path / "pi.json", {"systems": [restrict_units(inc, exact).to_dict()]}),
        "--targets", _write(tmp_path / "targets.json", targets),
        "--out", str(tmp_path / "out.json"),
    ]
    assert main(args) == 0
    rho = MatrixUnitSystem.from_dict(_read(tmp_path / "out.json")["systems"][0])
    assert max(np.linalg.norm(rho[k] - exact[k], 2) for k in exact.keys()) <= 1e-8


def test_ultra_extend_units_rejects_malformed_targets(tmp_path):
    inc = InclusionData((2, 3), (4, 5), ((2, 0), (1, 1)))
    args = [
        "ultra", "extend-units",
        "--inclusion", _write(tmp_path / "inc.json", inc.to_dict()),
        "--pi", _write(tmp_path / "pi.json", {"systems": [inc.standard_embedding(1).to_dict()]}),
        "--targets", _write(tmp_path / "targets.json", {"targets": "e12+e34+f12"}),
    ]
    assert main(args) == 1


def test_ultra_bratteli(tmp_path):
    chain = _write(tmp_path / "car.json", {"chain": _car_chain()})
    out = tmp_path / "out.json"
    assert main(["ultra", "bratteli", "--chain", chain, "--depth", "3", "--ambient", "64", "--out", str(out)]) == 0
    levels = _read(out)["levels"]
    assert [lv["structure"] for lv in levels] == [[2], [4], [8]]
    assert [lv["minimal_traces"][0][0] for lv in levels] == pytest.approx([0.5, 0.25, 0.125])

    assert main(["ultra", "bratteli", "--chain", chain, "--depth", "3", "--ambient", "6", "--out", str(out)]) == 2
    assert _read(out)["error"]["code"] == "resolution"
