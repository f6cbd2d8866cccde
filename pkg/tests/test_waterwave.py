import numpy as np
import pytest

from holowaves import waterwave as ww
from holowaves.diagnostics import weighted_energy
from holowaves.spectral import GridSpec, SpectralField

G2PI = GridSpec(32, 2 * np.pi)
A = G2PI.alpha
GRID = GridSpec(512, 200.0)


def single_mode_state(w=0.0, q=0.0, m=-1, grid=G2PI):
    e = np.exp(1j * m * grid.alpha)
    return ww.WaterState(
        0.0,
        SpectralField.from_values(grid, w * e, True),
        SpectralField.from_values(grid, q * e, True),
    )


def sup(x):
    x = x.values if isinstance(x, SpectralField) else x
    return float(np.max(np.abs(x)))


def exponent(eps, vals):
    return np.polyfit(np.log(eps), np.log(vals), 1)[0]


# ---------------------------------------------------------------- states


def test_water_state_requires_holomorphic_fields():
    with pytest.raises(ValueError):
        ww.WaterState(0.0, SpectralField.from_values(G2PI, np.cos(A)), SpectralField.zeros(G2PI))


def test_from_coeffs_drops_positive_frequencies():
    s = ww.WaterState.from_coeffs(G2PI, np.ones(32), np.ones(32))
    assert np.all(s.W.coeffs[G2PI.xi > 0] == 0)


# ---------------------------------------------------------------- auxiliary fields


def test_aux_of_zero_state():
    aux = ww.compute_aux(ww.WaterState.zeros(G2PI))
    assert sup(aux.F) == 0 and np.all(aux.J == 1)
    for x in (aux.b, aux.a, aux.M, aux.Y.values):
        assert sup(x) == 0


def test_aux_single_mode_potential():
    eps = 1e-2
    aux = ww.compute_aux(single_mode_state(q=eps))
    e = np.exp(-1j * A)
    assert np.allclose(aux.R.values, -1j * eps * e, atol=1e-15)
    assert np.allclose(aux.J, 1.0, atol=1e-15)
    assert np.allclose(aux.F.values, -1j * eps * e, atol=1e-15)


def test_frequency_shift_two_mode_value():
    # R = eps e^{-i a}: conj(R) R_a = -i eps^2 (mean only, removed by Pbar),
    # R conj(R_a) = i eps^2 (kept by P), so a = i (0 - i eps^2) = eps^2.
    eps = 1e-2
    aux = ww.compute_aux(single_mode_state(q=1j * eps))
    assert np.allclose(aux.R.values, eps * np.exp(-1j * A), atol=1e-15)
    assert np.allclose(aux.a, eps**2, atol=1e-15)


def test_aux_invariants_on_localized_data():
    s = ww.amplitude_data(0.05, 5.0, GRID)
    aux = ww.compute_aux(s)
    assert np.all(aux.J > 0)
    assert np.max(np.abs(aux.J - np.abs(1 + aux.bW.values) ** 2)) <= 1e-12
    for x in (aux.b, aux.a, aux.M, aux.M_alt):
        assert np.isrealobj(x)
    # both expressions for M agree
    assert np.max(np.abs(aux.M - aux.M_alt)) <= 1e-8 * max(1e-12, np.max(np.abs(aux.M)))


def test_chord_arc_violation():
    s = ww.amplitude_data(1.0, 1.0, GRID, carrier=3.0)
    assert s.chord_arc_min() < 0.5
    with pytest.raises(ww.ChordArcViolation):
        ww.compute_aux(s)
    with pytest.raises(ww.ChordArcViolation):
        ww.rhs_wq(s)


# ---------------------------------------------------------------- right-hand sides


def test_rhs_zero_state():
    dW, dQ = ww.rhs_wq(ww.WaterState.zeros(G2PI))
    assert sup(dW) == 0 and sup(dQ) == 0
    d = ww.DiffState.from_coeffs(G2PI, np.zeros(32), np.zeros(32))
    dbW, dR = ww.rhs_diff(d)
    assert sup(dbW) == 0 and sup(dR) == 0


def test_rhs_single_elevation_mode():
    eps = 1e-2
    dW, dQ = ww.rhs_wq(single_mode_state(w=eps))
    assert sup(dW) <= 1e-17
    assert np.allclose(dQ.values, 1j * eps * np.exp(-1j * A), atol=1e-16)


def test_rhs_linearization_is_quadratic():
    eps = np.array([0.02, 0.01, 0.005])
    wq, dr = [], []
    for e in eps:
        s = ww.amplitude_data(e, 5.0, GRID)
        dW, dQ = ww.rhs_wq(s)
        Wa = 1j * GRID.xi * s.Q.coeffs
        wq.append(np.linalg.norm(np.r_[dW.coeffs + Wa, dQ.coeffs - 1j * s.W.coeffs]))
        d = ww.to_diff_state(s)
        dbW, dR = ww.rhs_diff(d)
        dr.append(np.linalg.norm(dR.coeffs - 1j * d.bW.coeffs))
    assert abs(exponent(eps, wq) - 2) <= 0.2
    assert abs(exponent(eps, dr) - 2) <= 0.2


def test_cross_system_consistency():
    s = ww.amplitude_data(1e-3, 5.0, GRID)
    d0 = ww.to_diff_state(s)
    for t in (2.0, 10.0):
        st = ww.evolve(s, t, 0.1)
        dt = ww.evolve(d0, t, 0.1, system="diff")
        ref = ww.to_diff_state(st)
        assert sup(dt.bW.values - ref.bW.values) <= 1e-8
        assert sup(dt.R.values - ref.R.values) <= 1e-8


# ---------------------------------------------------------------- linear propagator


def test_linear_propagator_single_mode():
    s = single_mode_state(w=1.0)
    e = np.exp(-1j * A)
    for t in (0.3, 1.0, 7.5):
        out = ww.linear_propagator(s, t)
        assert np.allclose(out.W.values, np.cos(t) * e, atol=1e-13)
        assert np.allclose(out.Q.values, 1j * np.sin(t) * e, atol=1e-13)
        assert out.time == t


def test_linear_propagator_identity_and_group():
    s = ww.amplitude_data(0.1, 5.0, GRID)
    same = ww.linear_propagator(s, 0.0)
    assert np.array_equal(same.W.coeffs, s.W.coeffs)
    back = ww.linear_propagator(ww.linear_propagator(s, 3.7), -3.7)
    assert sup(back.W.values - s.W.values) <= 1e-13
    assert sup(back.Q.values - s.Q.values) <= 1e-13


# ---------------------------------------------------------------- stepping


def test_step_zero_state():
    out = ww.step(ww.WaterState.zeros(G2PI), 0.1)
    assert sup(out.W) == 0 and sup(out.Q) == 0


def test_step_linear_regime_matches_propagator():
    s = single_mode_state(w=1e-8)
    a = ww.step(s, 0.1)
    b = ww.linear_propagator(s, 0.1)
    assert sup(a.W.values - b.W.values) <= 1e-18
    assert sup(a.Q.values - b.Q.values) <= 1e-18


def test_step_rejects_large_dt():
    with pytest.raises(ValueError):
        ww.LawsonRK4(GRID, 10 * ww.dt_max(GRID))


def test_dt_max_advection_bound():
    assert ww.dt_max(GRID, b_max=100.0) == pytest.approx(0.25 * GRID.dalpha / 100.0)


def test_nan_detected():
    bad = np.full((2, GRID.n_points), np.nan + 0j)
    with pytest.raises((ww.NaNDetected, ww.ChordArcViolation)):
        ww.LawsonRK4(GRID, 0.1).advance(bad)


def test_holomorphy_preserved_by_stepper():
    s = ww.amplitude_data(0.1, 5.0, GRID)
    U = s.U
    stepper = ww.LawsonRK4(GRID, 0.1)
    for _ in range(50):
        U = stepper.advance(U)
    pos = GRID.xi > 0
    assert np.max(np.abs(U[:, pos])) <= 1e-10 * np.max(np.abs(U[0]))


def test_scaling_law_equivariance():
    lam = 2.0
    g1 = GridSpec(512, 200.0)
    g2 = GridSpec(512, 200.0 / lam**2)
    s1 = ww.amplitude_data(0.05, 5.0, g1)
    # (lam^-2 W0(lam^2 a), lam^-3 Q0(lam^2 a)) on the shrunk torus shares the samples
    s2 = ww.WaterState(
        0.0,
        SpectralField.from_values(g2, s1.W.values / lam**2, True),
        SpectralField.from_values(g2, s1.Q.values / lam**3, True),
    )
    t = 4.0
    a = ww.evolve(s2, t, 0.1 / lam)
    b = ww.evolve(s1, lam * t, 0.1)
    assert sup(a.W.values - b.W.values / lam**2) <= 1e-4 * sup(a.W)
    assert sup(a.Q.values - b.Q.values / lam**3) <= 1e-4 * sup(a.Q)


# ---------------------------------------------------------------- data


def test_make_localized_data_zero():
    s = ww.make_localized_data(0.0, 5.0, GRID)
    assert sup(s.W) == 0 and sup(s.Q) == 0


@pytest.mark.parametrize("eps", [1e-4, 1e-2])
def test_make_localized_data_hits_target(eps):
    s = ww.make_localized_data(eps, 5.0, GRID)
    assert 0.99 <= weighted_energy(s) / eps <= 1.01
    pos = GRID.xi > 0
    assert np.all(s.W.coeffs[pos] == 0) and np.all(s.Q.coeffs[pos] == 0)


def test_make_localized_data_infeasible():
    with pytest.raises(ww.InfeasibleData):
        ww.make_localized_data(1e12, 5.0, GRID)
    with pytest.raises(ValueError):
        ww.make_localized_data(0.1, -1.0, GRID)
