import json
import subprocess
import sys

import numpy as np
import pytest

from phcorder import DiscreteMeasure, check_cx, check_phc, io, same_measure
from phcorder.cli import run
from phcorder.geometry import ConvexPolyhedralFunction, PolyhedralSupportFunction, SphericalFunctionSamples
from phcorder.kernels import DiscreteKernel

from _instances import random_measure


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


# -- round trips ------------------------------------------------------------------

def test_measure_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    for _ in range(20):
        m = random_measure(rng, int(rng.integers(1, 4)))
        p = tmp_path / "m.json"
        io.write(m, p)
        back = io.read_measure(p)
        assert np.array_equal(back.points, m.points) and np.array_equal(back.weights, m.weights)


def test_other_formats_round_trip(tmp_path):
    k = DiscreteKernel([[0.1, 0.2]], [[1 / 3, 2.0], [0.0, -1.0]], [[0.25, 0.75]])
    back = io.kernel_from_dict(json.loads(io.dumps(io.to_dict(k))))
    assert np.array_equal(back.Q, k.Q) and np.array_equal(back.targets, k.targets)
    f = PolyhedralSupportFunction([[1.0, -1 / 7]])
    assert np.array_equal(io.support_function_from_dict(io.to_dict(f)).gradients, f.gradients)
    g = ConvexPolyhedralFunction([[1.0], [-1.0]], [0.5, -0.25])
    back = io.convex_function_from_dict(io.to_dict(g))
    assert np.array_equal(back.offsets, g.offsets)
    s = SphericalFunctionSamples([[1.0, 0.0], [0.0, -1.0]], [2.0, 3.0])
    assert np.array_equal(io.samples_from_dict(io.to_dict(s)).values, s.values)


def test_verdict_serialization_is_stable():
    m = DiscreteMeasure([[1.0, 0.0]], [1.0])
    n = DiscreteMeasure([[0.0, 1.0]], [1.0])
    a = io.dumps(io.verdict_to_dict(check_phc(m, n)))
    b = io.dumps(io.verdict_to_dict(check_phc(m, n)))
    assert a == b
    assert json.loads(a)["stats"]["runtime_ms"] is None
    timed = io.verdict_to_dict(check_cx(m, m), timing=True)
    assert timed["stats"]["runtime_ms"] >= 0


# -- parse errors -----------------------------------------------------------------

@pytest.mark.parametrize("text, needle", [
    ('{"dim": 2, "atoms": [{"x": [1, 0], "w": 1}, {"x": [1], "w": 1}]}', "atoms[1].x: expected length 2, got 1"),
    ('{"dim": 2, "atoms": [{"x": [1, 0], "w": -1}]}', "atoms[0].w: negative weight"),
    ('{"dim": 2, "atoms": [{"x": [1, 0]}]}', "atoms[0]: missing field 'w'"),
    ('{"dim": 0, "atoms": []}', "dim: expected a positive integer"),
    ('{"dim": 1, "atoms": [{"x": [NaN], "w": 1}]}', "non-finite number NaN"),
    ('{"dim": 1, "atoms": [{"x": ["a"], "w": 1}]}', "atoms[0].x[0]: expected a number"),
    ('{"dim": 1, "atoms": [', "line 1, column"),
])
def test_measure_parse_errors(tmp_path, text, needle):
    p = write(tmp_path, "bad.json", text)
    with pytest.raises(io.FormatError) as exc:
        io.read_measure(p)
    assert needle in str(exc.value)
    assert "bad.json" in str(exc.value)


def test_missing_file(tmp_path):
    with pytest.raises(io.FormatError):
        io.read_measure(tmp_path / "nope.json")


def test_kernel_parse_errors():
    with pytest.raises(io.FormatError, match=r"Q\[0\]\[0\]: negative"):
        io.kernel_from_dict({"dim": 1, "source": [[0]], "targets": [[1]], "Q": [[-1]]})
    with pytest.raises(io.FormatError, match="expected 2 rows"):
        io.kernel_from_dict({"dim": 1, "source": [[0], [1]], "targets": [[1]], "Q": [[1]]})


def test_samples_reject_non_unit_directions():
    with pytest.raises(io.FormatError, match="samples"):
        io.samples_from_dict({"dim": 2, "directions": [[2, 0]], "values": [1]})


# -- CLI -------------------------------------------------------------------------

E1 = {"dim": 2, "atoms": [{"x": [1, 0], "w": 1}]}
E2 = {"dim": 2, "atoms": [{"x": [0, 1], "w": 1}]}


def test_cli_exit_codes(tmp_path, capsys):
    a, b = write(tmp_path, "a.json", E1), write(tmp_path, "b.json", E2)
    assert run(["check-order", a, a]) == 0
    assert run(["check-order", a, b]) == 1
    assert run(["check-order", "--relation", "cx", a, b]) == 1
    assert run(["check-order", a, str(tmp_path / "missing.json")]) == 2
    assert run(["check-order", "--relation", "nope", a, b]) == 2
    assert run(["no-such-command"]) == 2
    one_d = write(tmp_path, "c.json", {"dim": 1, "atoms": [{"x": [1], "w": 1}]})
    assert run(["check-order", a, one_d]) == 2
    capsys.readouterr()


def test_cli_numerical_breakdown_exit_code(tmp_path, capsys, monkeypatch):
    from phcorder import cli
    from phcorder.errors import NumericalBreakdown

    def boom(*args, **kwargs):
        raise NumericalBreakdown("forced")

    monkeypatch.setattr(cli.order, "check_phc", boom)
    a = write(tmp_path, "a.json", E1)
    assert run(["check-order", a, a]) == 3
    assert "numerical breakdown" in capsys.readouterr().err


def test_cli_subcommands(tmp_path, capsys):
    a, b = write(tmp_path, "a.json", E1), write(tmp_path, "b.json", E2)

    def out(argv, code=0):
        assert run(argv) == code
        return json.loads(capsys.readouterr().out)

    assert out(["barcost", a, b])["value"] == pytest.approx(2)
    assert out(["barcost", "--norm", "l2", a, b])["upper_bound"] is True
    assert out(["w1", "--norm", "l1", a, b])["value"] == pytest.approx(2)
    assert out(["find-kernel", a, a])["Q"] == [[1.0]]
    assert out(["find-kernel", a, b], 1)["holds"] is False
    assert out(["coarsen", "--n", "2", a])["atoms"][0]["w"] == 1
    lifted = out(["lift", a])
    assert lifted["dim"] == 3
    lp = write(tmp_path, "l.json", lifted)
    assert out(["project", lp])["atoms"][0]["x"] == [1, 0]
    assert out(["marginal", a])["atoms"][0]["x"] == [1, 0]
    origin = write(tmp_path, "o.json", {"dim": 2, "atoms": [{"x": [0, 0], "w": 1}]})
    assert out(["sphere-kernels", origin])["inverse_sphere_kernel"] is None
    assert run(["flatten", origin]) == 2
    capsys.readouterr()
    assert out(["probe", "--trials", "0", a, b])["passed"] is True

    sq = write(tmp_path, "f.json", {"dim": 2, "directions": [[1, 0], [-1, 0], [0, 1], [0, -1]],
                                    "values": [1, 1, 1, 1]})
    assert out(["wulff", sq, "--omega", "1", "1"])["value"] == pytest.approx(2)
    ray = write(tmp_path, "r.json", {"dim": 2, "directions": [[1, 0]], "values": [1]})
    assert run(["wulff", ray, "--omega", "0", "1"]) == 2
    capsys.readouterr()


def test_cli_glue(tmp_path, capsys):
    p = write(tmp_path, "p.json", {"dim": 1, "source": [[0]], "targets": [[1]], "Q": [[2]]})
    q = write(tmp_path, "q.json", {"dim": 1, "source": [[1]], "targets": [[5]], "Q": [[3]]})
    assert run(["glue", p, q]) == 0
    assert json.loads(capsys.readouterr().out)["Q"] == [[6]]
    bad = write(tmp_path, "bad.json", {"dim": 1, "source": [[7]], "targets": [[5]], "Q": [[3]]})
    assert run(["glue", p, bad]) == 2


def test_module_entry_point(tmp_path):
    a = write(tmp_path, "a.json", E1)
    res = subprocess.run([sys.executable, "-m", "phcorder", "check-order", a, a],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["holds"] is True
    assert "holds" in res.stderr


def test_cli_output_reparses_to_identical_measure(tmp_path, capsys):
    rng = np.random.default_rng(3)
    m = random_measure(rng, 2)
    a = tmp_path / "a.json"
    io.write(m, a)
    assert run(["marginal", str(a)]) == 0
    back = io.measure_from_dict(json.loads(capsys.readouterr().out))
    from phcorder import homogeneous_marginal
    expect = homogeneous_marginal(m)
    assert np.array_equal(back.points, expect.points)
    assert same_measure(back, expect, tol=0)
