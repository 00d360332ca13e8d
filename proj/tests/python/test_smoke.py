import math

import numpy as np
import pytest

import rtsource

SMALL = {"domain": {"grid_n": 32, "boundary_n": 64, "dir_n": 32}}


def test_config_echo_and_errors():
    m = rtsource.Model(SMALL)
    cfg = m.config
    assert cfg["domain"]["grid_n"] == 32
    assert rtsource.Model(cfg).config == cfg
    with pytest.raises(rtsource.ConfigError, match="/domain/grid_n"):
        rtsource.Model({"domain": {"grid_n": "big"}})
    with pytest.raises(rtsource.ConfigError, match="/domian"):
        rtsource.Model({"domian": {}})


def test_format_double_round_trip():
    for v in (0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23):
        assert float(rtsource.format_double(v)) == v
    assert rtsource.format_double(0.1) == "0.1"


def test_exit_time_unit_disk():
    m = rtsource.Model(SMALL)
    fwd, bwd = m.exit_time(0.3, -0.2, 0.7)
    # c = 1 on the unit disk: chord length through the point.
    d = np.array([math.cos(0.7), math.sin(0.7)])
    p = np.array([0.3, -0.2])
    b = p @ d
    disc = math.sqrt(b * b - (p @ p - 1))
    assert fwd == pytest.approx(-b + disc, abs=1e-6)
    assert bwd == pytest.approx(b + disc, abs=1e-6)


def test_geometry_summary():
    g = rtsource.Model(SMALL).geometry()
    assert g["simple"]
    assert g["santalo_volume"] == pytest.approx(2 * math.pi**2, rel=1e-2)


def test_forward_and_measure_shapes():
    m = rtsource.Model(SMALL)
    grid = m.grid()
    assert grid["mask"].shape == (32, 32)
    u, iters, res = m.forward("1")
    assert iters >= 1 and res[-1] < 1e-6
    assert all(a.shape == (32, 32) and a.dtype == np.complex128 for a in u.values())
    assert 0 in u and -1 in u and 1 in u
    fan = m.measure("1")
    n = len(fan["s"])
    assert n > 0 and fan["values"].shape == (n,)
    assert np.all(fan["tau"] > 0)
    assert np.linalg.norm(fan["values"]) > 0


def test_reconstruct_case2_oracle():
    results, fields, fan = rtsource.Model(SMALL | {"reconstruct": {"case": "2"}}).reconstruct()
    assert results["case"] == "2"
    assert results["errors"]["f1"] < 0.02
    assert "f1" in fields
    assert len(fan["s"]) > 0


def test_lsq_refuses_singular_system():
    cfg = SMALL | {"reconstruct": {"case": "1", "backend": "lsq"}}
    with pytest.raises(rtsource.NumericalError):
        rtsource.Model(cfg).reconstruct()


def test_acceptance_single_criterion():
    (r,) = rtsource.run_acceptance([2])
    assert r["id"] == 2 and r["pass"], r["detail"]
