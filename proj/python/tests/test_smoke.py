import math
import os
import subprocess

import numpy as np
import pytest

import floquetcm as fc


def test_cylinder_multipliers():
    r = fc.floquet("cylinder")
    vals = sorted(abs(m["value"]) for m in r["multipliers"])
    assert vals[0] == pytest.approx(math.exp(-4 * math.pi), abs=1e-7)
    assert r["center_dim"] == 2
    assert r["rates"]["b"] is None
    assert np.asarray(r["monodromy"]).shape == (3, 3)


def test_missing_parameter_is_value_error():
    with pytest.raises(ValueError):
        fc.floquet("mobius")


def test_driven2d_expansion():
    r = fc.expand("driven2d", 4)
    a2 = r["terms"][0]
    assert a2["degree"] == 2
    assert a2["harmonics"] == [(1, 0.5, -0.5)]


def test_resonances():
    res = fc.driven3d_resonances(8)
    assert res == pytest.approx([1 / 8, 1 / 6, 1 / 4, 1 / 2], abs=1e-12)
    assert fc.expand("driven3d", 4, 0.25)["resonances"][0][0] == 4


def test_family_branches_differ():
    assert abs(fc.family_residual(0.0, 0.2, 1, 1)) < 1e-5
    assert abs(fc.family(0.0, 0.2, 1, 1) - fc.family(0.0, 0.2, 2, 3)) > 1e-6


def test_fixed_point():
    r = fc.lp_fixed_point("driven2d", y0=[1e-2, 0.0], delta=0.01)
    assert r["H"][1] == pytest.approx(-0.5e-4, rel=0.1)
    assert r["rate"] < 0.3


def test_reproduce_and_suite():
    rep = fc.reproduce("example-5.2")
    assert rep["pass"]
    assert len(rep["reports"]) == 2
    empty = fc.run_suite("cylinder", [])
    assert empty["pass"] and empty["reports"][0]["checks"] == []


def test_torus_root():
    x = fc.torus_root(1.0)
    u = x[0]
    assert abs(0.5 * u * u - math.log(u) - 1.5) < 1e-12


@pytest.mark.skipif("FLOQUETCM_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_exit_code():
    cli = os.environ["FLOQUETCM_CLI"]
    assert subprocess.run([cli, "floquet", "--system", "mobius"], capture_output=True).returncode == 2
