import json

from gaussbell.cli import run
from gaussbell.report import VerificationReport


def _load(path):
    with open(path) as fh:
        return json.load(fh)


def test_verify_bellman_happy_path(tmp_path):
    out = tmp_path / "r.json"
    code = run(["verify-bellman", "--q", "2", "--samples", "1000",
                "--seed", "7", "--aux-grid-n", "10", "--out", str(out)])
    assert code == 0
    report = _load(out)
    assert report["tool_version"]
    by_name = {c["name"]: c for c in report["checks"]}
    assert by_name["size[Q=2]"]["count"] == 1000
    assert by_name["size[Q=2]"]["failures"] == 0
    assert report["config_echo"]["seed"] == 7
    # lossless round trip
    rep = VerificationReport.loads(out.read_text())
    assert rep.to_dict() == report


def test_verify_bellman_rejects_q_below_one(tmp_path):
    out = tmp_path / "nope.json"
    code = run(["verify-bellman", "--q", "0.5", "--samples", "10",
                "--out", str(out)])
    assert code == 2
    assert not out.exists()       # usage errors never write partial output


def test_determinism_modulo_timestamp(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    argv = ["verify-bellman", "--q", "1,2", "--samples", "100", "--seed",
            "11", "--aux-grid-n", "8"]
    assert run(argv + ["--out", str(a)]) == 0
    assert run(argv + ["--out", str(b)]) == 0
    da, db = _load(a), _load(b)
    da.pop("timestamp")
    db.pop("timestamp")
    assert da == db


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"samples": 50, "seed": 3}))
    out = tmp_path / "r.json"
    # flag overrides file, file overrides default
    code = run(["verify-bellman", "--q", "2", "--config", str(cfg),
                "--seed", "4", "--aux-grid-n", "8", "--out", str(out)])
    assert code == 0
    echo = _load(out)["config_echo"]
    assert echo["samples"] == 50          # from file
    assert echo["seed"] == 4              # flag wins


def test_config_file_unknown_keys_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sample": 50}))
    code = run(["verify-bellman", "--q", "2", "--config", str(cfg)])
    assert code == 2


def test_a2_reports_q2_lower(tmp_path):
    out = tmp_path / "q.json"
    code = run(["a2", "--weight", "exp:a=1", "--gl-order", "256",
                "--out", str(out)])
    assert code == 0
    report = _load(out)
    q2 = next(m for m in report["measurements"] if m["name"] == "q2_lower")
    assert q2["value"] >= 2.718281828459045 - 1e-6
    prod = next(c for c in report["checks"]
                if c["name"] == "flow_product_ge_1")
    assert prod["failures"] == 0


def test_a2_rejects_bad_weight():
    assert run(["a2", "--weight", "exp:a=9"]) == 2
    assert run(["a2", "--weight", "gauss:s=1"]) == 2


def test_riesz_norm_subcommand(tmp_path):
    out = tmp_path / "n.json"
    code = run(["riesz-norm", "--weight", "const:c=1", "--n", "16",
                "--gl-order", "128", "--out", str(out)])
    assert code == 0
    report = _load(out)
    norm = next(m for m in report["measurements"]
                if m["name"] == "weighted_norm")
    assert abs(norm["value"] - 1.0) < 1e-10


def test_embedding_subcommand(tmp_path):
    out = tmp_path / "e.json"
    code = run(["embedding", "--f", "h1+h3", "--g", "h2",
                "--weight", "exp:a=0.5", "--gl-order", "128",
                "--out", str(out)])
    assert code == 0
    report = _load(out)
    assert next(c for c in report["checks"]
                if c["name"] == "embedding_bound")["failures"] == 0


def test_embedding_rejects_bad_hermite_sum():
    assert run(["embedding", "--f", "x1", "--g", "h0"]) == 2


def test_repr_check_subcommand(tmp_path):
    out = tmp_path / "rc.json"
    assert run(["repr-check", "--n", "1,2,4,9", "--out", str(out)]) == 0
    report = _load(out)
    assert all(c["failures"] == 0 for c in report["checks"])
    assert len(report["checks"]) == 4


def test_sweep_csv(tmp_path):
    out = tmp_path / "s.csv"
    code = run(["sweep", "--family", "exp", "--params", "0,1", "--n", "8",
                "--gl-order", "128", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "param,q2_lower,weighted_norm,bound_ratio,trunc_n,q2_trunc"
    assert len(lines) == 11               # 2 params x 5 ladder levels


def test_csv_rejected_outside_sweep():
    assert run(["a2", "--weight", "const:c=1", "--format", "csv"]) == 2
