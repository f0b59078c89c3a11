import json
import math

import numpy as np
import pytest

from augdist.cli import main
from augdist.io import load_projection, write_json
from augdist.measures import AffineProjection, DiscreteMeasure, GaussianMeasure, measure_to_spec, pushforward


def spec_file(tmp_path, name, measure):
    path = tmp_path / name
    write_json(measure if isinstance(measure, dict) else measure_to_spec(measure), path)
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dist_ball_question(tmp_path, capsys):
    a = spec_file(tmp_path, "ball.json", {"type": "uniform_ball", "dim": 1})
    b = spec_file(tmp_path, "g.json", GaussianMeasure(np.zeros(3), np.eye(3)))
    code, out, _ = run(["dist", a, b, "--metric", "kl"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert abs(rep["value"] - (0.5 * math.log(math.pi / 2) + 1 / 6)) <= 1e-12
    assert rep["method"] == "closed_form" and "wall_ms" not in rep


def test_dist_middle_branch(tmp_path, capsys):
    a = spec_file(tmp_path, "a.json", GaussianMeasure([0.0], [[1.0]]))
    b = spec_file(tmp_path, "b.json", GaussianMeasure([0.0, 0.0], np.diag([1.0, 4.0])))
    code, out, _ = run(["dist", a, b, "--metric", "w2"], capsys)
    assert code == 0 and json.loads(out)["value"] == 0.0


def test_dist_timing_flag(tmp_path, capsys):
    a = spec_file(tmp_path, "a.json", GaussianMeasure([0.0], [[1.0]]))
    b = spec_file(tmp_path, "b.json", GaussianMeasure([0.0, 0.0], np.eye(2)))
    code, out, _ = run(["dist", a, b, "--timing"], capsys)
    assert code == 0 and json.loads(out)["wall_ms"] >= 0


def test_exit_codes(tmp_path, capsys):
    d1 = spec_file(tmp_path, "d1.json", DiscreteMeasure([[0.0]], [1.0]))
    d2 = spec_file(tmp_path, "d2.json", DiscreteMeasure([[0.0, 1.0], [1.0, 0.0]], [0.5, 0.5]))
    assert run(["dist", d1, d2, "--metric", "kl"], capsys)[0] == 3
    assert run(["dist", d2, d1, "--metric", "kl"], capsys)[0] == 4
    bad = spec_file(tmp_path, "bad.json", {"type": "discrete", "points": [[0.0]], "weights": [0.3]})
    code, _, err = run(["dist", bad, d2], capsys)
    assert code == 2 and "augdist: error" in err
    assert run(["dist", str(tmp_path / "missing.json"), d2], capsys)[0] == 2
    off = spec_file(tmp_path, "off.json", DiscreteMeasure([[7.0]], [1.0]))
    proj = tmp_path / "p.json"
    write_json({"V": [[1.0, 0.0]], "b": [0.0]}, proj)
    assert run(["witness", off, d2, "--tv", "--projection", str(proj)], capsys)[0] == 5


def test_symmetric_metric_swaps(tmp_path, capsys):
    d1 = spec_file(tmp_path, "d1.json", DiscreteMeasure([[0.0]], [1.0]))
    d2 = spec_file(tmp_path, "d2.json", DiscreteMeasure([[0.0, 1.0], [1.0, 0.0]], [0.5, 0.5]))
    code, out, _ = run(["dist", d2, d1, "--metric", "w2", "--restarts", "4"], capsys)
    assert code == 0 and json.loads(out)["swapped"] is True


def test_projection_round_trip(tmp_path, capsys):
    rng = np.random.default_rng(2)
    low = DiscreteMeasure(rng.standard_normal((3, 1)), np.full(3, 1 / 3))
    high = DiscreteMeasure(rng.standard_normal((4, 3)), np.full(4, 0.25))
    a, b = spec_file(tmp_path, "a.json", low), spec_file(tmp_path, "b.json", high)
    report = tmp_path / "rep.json"
    assert run(["dist", a, b, "--restarts", "4", "-o", str(report)], capsys)[0] == 0
    first = json.loads(report.read_text())
    code, out, _ = run(["dist", a, b, "--projection", str(report)], capsys)
    assert code == 0
    again = json.loads(out)
    assert again["method"] == "fixed_projection"
    assert abs(again["value"] - first["value"]) <= 1e-10


def test_dist_is_bitwise_deterministic(tmp_path, capsys):
    rng = np.random.default_rng(3)
    a = spec_file(tmp_path, "a.json", GaussianMeasure(rng.standard_normal(2), np.diag([1.0, 0.3])))
    b = spec_file(tmp_path, "b.json", GaussianMeasure(rng.standard_normal(4), np.diag([2.0, 1.0, 0.5, 0.1])))
    outs = [run(["dist", a, b, "--restarts", "6", "--seed", "9"], capsys)[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_witness_command(tmp_path, capsys):
    nu = DiscreteMeasure([[0, 0], [0, 1], [1, 0], [1, 1]], [0.1, 0.2, 0.3, 0.4])
    phi = AffineProjection([[1.0, 0.0]], [0.0])
    mu = pushforward(nu, phi)
    a, b = spec_file(tmp_path, "mu.json", mu), spec_file(tmp_path, "nu.json", nu)
    proj = tmp_path / "p.json"
    write_json({"V": phi.V.tolist(), "b": phi.b.tolist()}, proj)
    code, out, _ = run(["witness", a, b, "--projection", str(proj)], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["lhs"] <= 1e-12 and rep["rhs"] <= 1e-12
    code, out, _ = run(["witness", a, b, "--seed", "4", "--p", "1"], capsys)
    rep = json.loads(out)
    assert code == 0 and abs(rep["diff"]) <= 1e-8


def test_sample_stiefel(capsys, tmp_path):
    code, out, _ = run(["sample-stiefel", "2", "4", "--seed", "3"], capsys)
    assert code == 0
    data = json.loads(out)
    V = np.array(data["V"])
    assert np.max(np.abs(V @ V.T - np.eye(2))) <= 1e-10
    assert run(["sample-stiefel", "2", "4", "--seed", "3"], capsys)[1] == out
    path = tmp_path / "s.json"
    main(["sample-stiefel", "1", "3", "-o", str(path)])
    assert load_projection(path).n == 3


def test_verify_single_suite(capsys):
    code, out, _ = run(["verify", "--suite", "pinsker"], capsys)
    assert code == 0
    assert "pinsker" in out and "PASS" in out and "hellinger" not in out
    assert run(["verify", "--suite", "pinsker"], capsys)[1] == out


def test_verify_failure_replay(tmp_path, capsys):
    failures = tmp_path / "fail.json"
    code, out, _ = run(["verify", "--suite", "hellinger", "--count", "5", "--failures", str(failures)], capsys)
    assert code == 1 and "replay the first with" in out
    viol = json.loads(failures.read_text())["violations"][0]
    code, again, _ = run(["verify", "--suite", "hellinger", "--instance", str(viol["instance"]), "--failures",
                          str(tmp_path / "again.json")], capsys)
    assert code == 1
    assert json.loads((tmp_path / "again.json").read_text())["violations"][0] == viol


def test_verify_unknown_suite(capsys):
    assert run(["verify", "--suite", "nope"], capsys)[0] == 2


@pytest.mark.parametrize("argv", [["dist"], ["witness", "a"], []])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
