import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holowaves import normalform as nfm
from holowaves import waterwave as ww
from holowaves.spectral import GridSpec, SpectralField

GRID = GridSpec(512, 200.0)
SMALL = GridSpec(128, 40.0)


def random_holomorphic(rng, grid=SMALL, band=None):
    n = grid.n_points
    band = band or n // 8
    c = np.zeros(n, complex)
    c[n - band :] = rng.normal(size=band) + 1j * rng.normal(size=band)
    c[0] = rng.normal()
    return grid.to_values(0.05 * c)


def random_triple(seed):
    rng = np.random.default_rng(seed)
    return tuple(random_holomorphic(rng) for _ in range(3))


def test_normal_form_of_zero_state():
    nf = nfm.to_normal_form(ww.WaterState.zeros(SMALL))
    assert np.all(nf.W.coeffs == 0) and np.all(nf.Q.coeffs == 0)


def test_normal_form_is_near_identity():
    s = ww.amplitude_data(0.01, 5.0, GRID)
    nf = nfm.to_normal_form(s)
    dW = np.linalg.norm(nf.W.coeffs - s.W.coeffs)
    assert 0 < dW <= 0.05 * np.linalg.norm(s.W.coeffs)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=15, deadline=None)
def test_cubic_split_identity(seed):
    W, bW, R = random_triple(seed)
    cs = nfm.sources_from_fields(SMALL, W, bW, R)
    G, K = cs.split_sum()
    scale = max(np.max(np.abs(cs.G3.values)), np.max(np.abs(cs.K3.values)))
    assert np.max(np.abs(G.values - cs.G3.values)) <= 1e-12 * scale
    assert np.max(np.abs(K.values - cs.K3.values)) <= 1e-12 * scale


def test_conjugation_count():
    W, bW, R = random_triple(11)
    th = np.pi / 2
    ph = np.exp(1j * th)
    a = nfm.sources_from_fields(SMALL, W, bW, R)
    b = nfm.sources_from_fields(SMALL, ph * W, ph * bW, ph * R)
    close = lambda x, y: np.max(np.abs(x.values - y.values)) <= 1e-12 * max(1e-30, np.max(np.abs(y.values)))  # noqa: E731
    # resonant: exactly one conjugate
    assert close(b.G3r, a.G3r * ph)
    # nonresonant: none or two conjugates
    assert close(b.G3nr, a.G3nr * ph**3)
    assert close(b.K3nr, a.K3nr * np.conj(ph))
    assert np.max(np.abs(a.G3r.values)) > 0


def test_cubic_sources_variable_choice():
    s = ww.amplitude_data(0.01, 5.0, GRID)
    a = nfm.cubic_sources(s, "WR")
    b = nfm.cubic_sources(s, "tilde")
    rel = np.linalg.norm(a.G3.coeffs - b.G3.coeffs) / np.linalg.norm(a.G3.coeffs)
    assert 0 < rel < 0.1
    with pytest.raises(ValueError):
        nfm.cubic_sources(s, "bogus")


def test_fd_weights_are_exact_on_polynomials():
    for order in (2, 4):
        offs, wts = nfm.fd_weights(order)
        for p in range(order + 1):
            val = sum(w * o**p for o, w in zip(offs, wts))
            assert val == pytest.approx(1.0 if p == 1 else 0.0, abs=1e-14)
    with pytest.raises(ValueError):
        nfm.fd_weights(3)


def test_nf_residual_linear_regime():
    s = ww.amplitude_data(1e-8, 5.0, GRID)
    G, K = nfm.nf_residual(s)
    assert max(G.sup_norm(), K.sup_norm()) <= 1e-20


def test_null_check_zero_and_random():
    z = SpectralField.zeros(GRID)
    assert nfm.null_cancellation_check(z, z) == 0
    rng = np.random.default_rng(2)
    ratios = []
    for _ in range(3):
        W = SpectralField.from_values(GRID, random_holomorphic(rng, GRID, 60), True)
        Q = SpectralField.from_values(GRID, random_holomorphic(rng, GRID, 60), True)
        ratios.append(nfm.null_cancellation_check(W, Q))
    assert min(ratios) >= 0.3


def test_null_forms_suppressed_on_ansatz():
    # the null forms decay like 1/t relative to their leading terms
    grid = GridSpec(16384, 3200.0)
    gam = lambda v: np.exp(-(((v - 1.0) / 0.15) ** 2))  # noqa: E731
    nf = nfm.packet_ansatz(grid, 800.0, gam)
    assert nfm.null_cancellation_check(nf.W, nf.Q) <= 0.1


def test_packet_ansatz_shape():
    grid = GridSpec(8192, 1600.0)
    gam = lambda v: np.exp(-(((v - 1.0) / 0.15) ** 2))  # noqa: E731
    for t in (200.0, 400.0):
        nf = nfm.packet_ansatz(grid, t, gam)
        assert nf.W.holomorphic and nf.Q.holomorphic
        assert nf.W.sup_norm() == pytest.approx(t**-0.5, rel=0.05)
