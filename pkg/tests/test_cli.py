import json
import math
import os

import numpy as np
import pytest

from bmtm.cli import run

from conftest import FIG_NEWICK

STAR3 = "((1:1.0,2:1.0,3:1.0):1.0)0:0.0;"


@pytest.fixture
def files(tmp_path):
    (tmp_path / "fig_proc.nwk").write_text(FIG_NEWICK)
    (tmp_path / "star3.nwk").write_text(STAR3)
    (tmp_path / "x.csv").write_text("-5, -2\n4 8\n")
    return tmp_path


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_mle(files, capsys):
    assert run(["mle", "--tree", str(files / "fig_proc.nwk"), "--data-inline", "-5,-2,4,8"]) == 0
    out = _json(capsys)
    assert math.isclose(out["objective_log"], math.log(96), rel_tol=1e-12)
    assert out["sparsity"] == [2, 3, 5] and out["tie_count"] == 1


def test_mle_data_file(files, capsys):
    assert run(["mle", "--tree", str(files / "fig_proc.nwk"), "--data", str(files / "x.csv")]) == 0
    assert math.isclose(_json(capsys)["objective_log"], math.log(96))


def test_ddm_mle(capsys):
    assert run(["ddm-mle", "--data-inline", "-5,-2,4,8"]) == 0
    K = np.array(_json(capsys)["K"])
    assert math.isclose(K[1, 1], 13 / 36) and math.isclose(K[2, 3], -1 / 16)


def test_ddm_jitter(capsys):
    assert run(["ddm-mle", "--data-inline", "1,1,2"]) == 1
    assert run(["ddm-mle", "--data-inline", "1,1,2", "--jitter", "--seed", "3"]) == 0


def test_domain_error(files, capsys):
    code = run(["mle", "--data-inline", "1,1,2", "--tree", str(files / "star3.nwk")])
    assert code == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and json.loads(err[0])["error"] == "DuplicateValue"


def test_usage_errors(files, capsys):
    assert run([]) == 2
    assert run(["mle", "--data-inline", "1,2,3"]) == 2
    assert run(["mle", "--data-inline", "1", "--data", "x"]) == 2
    assert run(["estimate", "--method", "bogus", "--data-inline", "1,2"]) == 2


def test_estimate_and_contrast(files, capsys):
    assert run(["estimate", "--method", "upgma", "--data-inline", "1,2,10"]) == 0
    assert _json(capsys)["tree"]["theta"][3] == 4.25
    for m in ("ls", "ots", "mxshrink"):
        assert run(["estimate", "--method", m, "--tree", str(files / "star3.nwk"), "--data-inline", "1,6,4"]) == 0
        capsys.readouterr()
    assert run(["contrast-mle", "--tree", str(files / "star3.nwk"), "--data-inline", "1,6,4"]) == 0
    assert math.isclose(_json(capsys)["objective_log"], math.log(6))


def test_witness(capsys):
    assert run(["plgtm-witness", "--data-inline", "2,2"]) == 0
    w = _json(capsys)["witness"]
    assert len(w) == 7 and w[-1]["loglik"] > w[0]["loglik"]
    assert run(["plgtm-witness", "--data-inline", "1,2"]) == 1


def test_out_is_atomic_and_deterministic(files, capsys):
    out = files / "res.csv"
    args = ["simulate", "--d", "3", "--trials", "3", "--seed", "4", "--bias-replicates", "3",
            "--beta-sq-replicates", "3", "--out", str(out)]
    assert run(args) == 0
    first = out.read_bytes()
    assert run(args) == 0
    assert out.read_bytes() == first
    assert [p for p in os.listdir(files) if p.endswith(".tmp")] == []


def test_failed_command_leaves_no_file(files):
    out = files / "never.json"
    assert run(["mle", "--tree", str(files / "star3.nwk"), "--data-inline", "1,1,2", "--out", str(out)]) == 1
    assert not out.exists()


def test_verify(capsys):
    assert run(["verify", "--suite", "oracle", "--instances", "5", "--seed", "7"]) == 0
    assert run(["verify", "--suite", "kkt", "--instances", "50"]) == 0
    assert run(["verify", "--suite", "curvature", "--instances", "20"]) == 0
    out = capsys.readouterr()
    assert "curvature: 20 passed, 0 failed" in out.err
