import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from proxsplit.cli import main, read_matrix, read_vector, write_matrix, write_vector


def _write(path, rows):
    path.write_text("".join(",".join(repr(float(v)) for v in np.atleast_1d(r)) + "\n" for r in rows))
    return str(path)


@pytest.fixture
def lasso1d(tmp_path):
    return _write(tmp_path / "A.csv", [[1.0]]), _write(tmp_path / "b.csv", [1.0])


@pytest.fixture
def segment(tmp_path):
    return _write(tmp_path / "A2.csv", [[1.0, 1.0]]), _write(tmp_path / "b2.csv", [2.0])


@pytest.fixture
def identity(tmp_path):
    return _write(tmp_path / "I.csv", np.eye(2)), _write(tmp_path / "bI.csv", [1.0, 0.0])


def test_solve_one_dimensional(tmp_path, lasso1d):
    A, b = lasso1d
    out, log = tmp_path / "x.csv", tmp_path / "log.csv"
    code = main(["solve", "--problem", "lasso", "--matrix", A, "--rhs", b, "--mu", "0.5", "--sigma", "1",
                 "--theta", "0.5", "--tol", "1e-10", "--out", str(out), "--log", str(log)])
    assert code == 0
    assert abs(read_vector(str(out))[0] - 0.5) <= 1e-8
    lines = log.read_text().splitlines()
    assert lines[0] == "k,alpha,objective,residual,descent_slack,fejer_slack,dist_to_ref"
    assert all(len(line.split(",")) == 7 for line in lines[1:])


def test_missing_file_exit_1(tmp_path, capsys):
    code = main(["solve", "--problem", "lasso", "--matrix", str(tmp_path / "nope.csv"),
                 "--rhs", str(tmp_path / "nope.csv"), "--mu", "1"])
    assert code == 1
    assert "nope.csv" in capsys.readouterr().err


def test_max_iter_exit_2(tmp_path, segment):
    A, b = segment
    code = main(["solve", "--problem", "lasso", "--matrix", A, "--rhs", b, "--mu", "0.5",
                 "--max-iter", "1", "--out", str(tmp_path / "x.csv")])
    assert code == 2


def test_diverging_exit_3(tmp_path):
    # l1smooth with H = 0 and c = 2 > mu: F(x) = 2x + |x| is unbounded below
    H = _write(tmp_path / "H.csv", [[0.0]])
    c = _write(tmp_path / "c.csv", [2.0])
    code = main(["solve", "--problem", "l1smooth", "--matrix", H, "--rhs", c, "--mu", "1",
                 "--sigma", "1e8", "--out", str(tmp_path / "x.csv")])
    assert code == 3


def test_usage_errors_exit_1(tmp_path, lasso1d, capsys):
    A, b = lasso1d
    assert main([]) == 1
    assert main(["solve", "--problem", "ridge", "--matrix", A, "--rhs", b]) == 1
    assert main(["solve", "--problem", "lasso", "--matrix", A, "--rhs", b]) == 1  # no --mu
    assert main(["solve", "--problem", "lasso", "--matrix", A, "--rhs", b, "--mu", "0.5", "--theta", "2"]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("1,x\n")
    assert main(["solve", "--problem", "lasso", "--matrix", str(bad), "--rhs", b, "--mu", "1"]) == 1
    assert capsys.readouterr().err


def _analyze(tmp_path, A, b, point, mu="0.5", problem="lasso"):
    out = tmp_path / "report.json"
    code = main(["analyze", "--problem", problem, "--matrix", A, "--rhs", b, "--mu", mu,
                 "--point", point, "--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_analyze_segment(tmp_path, segment):
    A, b = segment
    code, rep = _analyze(tmp_path, A, b, _write(tmp_path / "x.csv", [1.5, 0.0]))
    assert code == 0
    u = rep["uniqueness"]
    assert not (u["ii"] or u["iii"] or u["iv"] or u["oracle"]) and u["consistent"]
    assert rep["active_sets"] == {"E": [0, 1], "J": [0], "K": [1], "signs": [-1.0]}


def test_analyze_identity(tmp_path, identity):
    A, b = identity
    code, rep = _analyze(tmp_path, A, b, _write(tmp_path / "x.csv", [0.5, 0.0]))
    assert code == 0
    u = rep["uniqueness"]
    assert u["ii"] and u["iii"] and u["iv"] and u["oracle"] and u["consistent"]
    assert rep["subregularity"]["holds"]
    assert set(rep) == {"active_sets", "uniqueness", "subregularity", "rate"}


def test_analyze_json_point(tmp_path, identity):
    A, b = identity
    pt = tmp_path / "x.json"
    pt.write_text("[0.5, 0.0]")
    assert _analyze(tmp_path, A, b, str(pt))[0] == 0
    pt.write_text("[0.5, 0.0")
    assert _analyze(tmp_path, A, b, str(pt))[0] == 1


def test_analyze_non_optimal_exit_5(tmp_path, identity, capsys):
    A, b = identity
    assert _analyze(tmp_path, A, b, _write(tmp_path / "x.csv", [0.0, 0.0]))[0] == 5
    assert "not optimal" in capsys.readouterr().err


def test_analyze_rate_and_poisson(tmp_path):
    A = _write(tmp_path / "P.csv", [[1.0, 0.5], [0.2, 1.0], [0.3, 0.3]])
    b = _write(tmp_path / "pb.csv", [1.0, 2.0, 0.5])
    x = tmp_path / "x.csv"
    assert main(["solve", "--problem", "poisson", "--matrix", A, "--rhs", b, "--tol", "1e-12",
                 "--out", str(x)]) == 0
    out = tmp_path / "r.json"
    assert main(["analyze", "--problem", "poisson", "--matrix", A, "--rhs", b, "--point", str(x),
                 "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["uniqueness"] is None
    assert 0 < rep["rate"]["monotone_q"] < 1


def test_analyze_l1smooth_example(tmp_path):
    H = _write(tmp_path / "H.csv", [[1.0, 1.0], [1.0, 1.0]])
    c = _write(tmp_path / "c.csv", [1.0, 1.0])
    code, rep = _analyze(tmp_path, H, c, _write(tmp_path / "x.csv", [0.0, 0.0]), mu="1", problem="l1smooth")
    assert code == 0
    assert rep["subregularity"]["holds"] and rep["subregularity"]["K"] == [0, 1]


def test_analyze_reports_disagreement_exit_4(tmp_path, identity, monkeypatch):
    import proxsplit.cli as cli

    real = cli.check_uniqueness

    def broken(*args, **kwargs):
        rep = real(*args, **kwargs)
        rep.condition_iv = not rep.condition_iv
        rep.consistent = False
        return rep

    monkeypatch.setattr(cli, "check_uniqueness", broken)
    A, b = identity
    assert _analyze(tmp_path, A, b, _write(tmp_path / "x.csv", [0.5, 0.0]))[0] == 4


def test_outputs_byte_identical(tmp_path, segment):
    A, b = segment
    outs = []
    for i in range(2):
        x, log = tmp_path / f"x{i}.csv", tmp_path / f"log{i}.csv"
        main(["solve", "--problem", "lasso", "--matrix", A, "--rhs", b, "--mu", "0.5",
              "--out", str(x), "--log", str(log)])
        outs.append((x.read_bytes(), log.read_bytes()))
    assert outs[0] == outs[1]


def test_bench_uniqueness_suite(tmp_path):
    out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
    assert main(["bench", "--suite", "uniqueness", "--instances", "30", "--out", str(out1)]) == 0
    assert main(["bench", "--suite", "uniqueness", "--instances", "30", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    assert lines[0] == "suite,criterion,value,threshold,passed,detail"
    assert lines[1].startswith("uniqueness,agreement rate == 1,1,1,true")


def test_bench_failure_exit_6(tmp_path, monkeypatch, capsys):
    import proxsplit.cli as cli
    from proxsplit.suites import SuiteRow

    monkeypatch.setattr(cli, "run_suites", lambda *a, **k: [SuiteRow("lasso", "monotone_q < 1", 1.2, 1.0, False)])
    assert main(["bench", "--out", str(tmp_path / "s.csv")]) == 6
    assert "monotone_q < 1" in capsys.readouterr().err


finite = st.floats(allow_nan=False, allow_infinity=False)


@given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 4)), elements=finite))
def test_csv_round_trip_bit_exact(A):
    import io
    import os
    import tempfile

    buf = io.StringIO()
    write_matrix(A, buf)
    fd, path = tempfile.mkstemp(suffix=".csv")
    with os.fdopen(fd, "w") as fh:
        fh.write(buf.getvalue())
    try:
        assert read_matrix(path).tobytes() == A.tobytes()
        buf = io.StringIO()
        write_vector(A[:, 0], buf)
        with open(path, "w") as fh:
            fh.write(buf.getvalue())
        back = read_vector(path)
        assert back.tobytes() == np.ascontiguousarray(A[:, 0]).tobytes()
    finally:
        os.unlink(path)
