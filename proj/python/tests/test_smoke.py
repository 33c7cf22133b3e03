import cmath
import math

import numpy as np
import pytest

import hermrt


def test_velocity_sets():
    assert set(hermrt.builtin_velocity_sets()) == {"D1Q3", "D2Q9", "D2Q37"}
    s = hermrt.velocity_set("D2Q37")
    assert (s.dim, s.count, s.degree, s.max_order) == (2, 37, 9, 4)
    assert math.isclose(sum(s.weights), 1.0, abs_tol=1e-14)
    assert s.velocities.shape == (37, 2)
    rep = hermrt.validate(s)
    assert rep["passed"] and rep["max_defect"] <= 1e-12
    bad = hermrt.validate(hermrt.velocity_set("D1Q3"), degree=6)
    assert not bad["passed"]
    assert bad["first_failure"] == [6]


def test_transport_and_dispersion():
    t = hermrt.transport(hermrt.RelaxationSpec(tau22=1.0), 1.0, hermrt.GasSpec(S=3, D=2))
    assert math.isclose(t["nu"], 0.5)
    assert math.isclose(t["nu_b"], 0.3)
    assert math.isclose(t["gamma"], 1.4)
    w = hermrt.theoretical_dispersion(0.1, 0.0, 0.1, 2.0, 2, 0.2)
    assert math.isclose(w["viscous"].real, -0.004)
    assert w["acoustic_minus"] == w["acoustic_plus"].conjugate()
    with pytest.raises(ValueError):
        hermrt.theoretical_dispersion(0.1, 0.0, 0.0, 2.0, 2, 0.2)


def test_fit():
    omega = complex(-0.01, 0.3)
    series = [cmath.exp(omega * t) for t in range(200)]
    r = hermrt.fit_frequencies([series], 1)
    assert abs(r["omega"][0] - omega) < 1e-8
    assert not r["ill_conditioned"]


def test_shear_run():
    e = hermrt.ModeExperiment(
        velocity_set="D2Q9", grid=[32, 32, 1], spec=hermrt.RelaxationSpec(tau21=0.8), jobs=1
    )
    r = hermrt.run_mode_experiment(e)
    assert r["rel_error"]["viscous"] <= 0.01
    assert math.isclose(r["nu"], 0.3)
    assert r["series"].shape == (r["steps"] + 1, 4)


def test_simulation_conserves():
    e = hermrt.ModeExperiment(
        velocity_set="D2Q37", grid=[12, 8, 1], kind="all", amplitude=1e-4, gas=hermrt.GasSpec(S=2), jobs=1
    )
    sim = hermrt.Simulation(e)
    before = sim.totals()
    a0 = sim.amplitudes()
    assert abs(a0[0] - 1e-4) < 1e-12
    f = sim.fields()
    assert f["rho"].shape == (8, 12)
    assert np.allclose(f["rho"].mean(), 1.0, atol=1e-14)
    sim.run(50)
    assert sim.time == 50
    after = sim.totals()
    assert math.isclose(after["mass"], before["mass"], rel_tol=1e-13)
    assert math.isclose(after["energy"], before["energy"], rel_tol=1e-13)


def test_invalid_experiment():
    e = hermrt.ModeExperiment(velocity_set="D2Q9", grid=[16, 16, 1], amplitude=0.1)
    with pytest.raises(ValueError, match="amplitude"):
        e.validate()
