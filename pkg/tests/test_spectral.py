import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holowaves import spectral as sp
from holowaves.spectral import GridSpec, SpectralField

G2PI = GridSpec(32, 2 * np.pi)
A = G2PI.alpha


def mode(m, grid=G2PI):
    return SpectralField.from_values(grid, np.exp(1j * m * grid.alpha))


def random_field(seed, grid=G2PI, mean_zero=False):
    rng = np.random.default_rng(seed)
    f = SpectralField.from_values(grid, rng.normal(size=grid.n_points) + 1j * rng.normal(size=grid.n_points))
    if mean_zero:
        f = f - f.coeffs[0]
    return f


def close(f, g, tol):
    a = f.values if isinstance(f, SpectralField) else np.asarray(f)
    b = g.values if isinstance(g, SpectralField) else np.asarray(g)
    return np.max(np.abs(a - b)) <= tol


seeds = st.integers(0, 2**31 - 1)


# ---------------------------------------------------------------- GridSpec


def test_grid_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        GridSpec(48, 1.0)
    with pytest.raises(ValueError):
        GridSpec(32, -1.0)
    with pytest.raises(ValueError):
        GridSpec(32, 1.0, 0.0)


def test_frequency_grid_covers_minus_half_to_half():
    g = GridSpec(16, 8.0)
    k = np.sort(np.round(g.xi * g.length / (2 * np.pi)).astype(int))
    assert list(k) == list(range(-8, 8))


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_values_coeffs_round_trip(seed):
    f = random_field(seed)
    back = SpectralField.from_coeffs(f.grid, f.coeffs)
    assert np.max(np.abs(back.values - f.values)) <= 1e-13 * np.max(np.abs(f.values))


def test_parseval_convention():
    f = random_field(1)
    direct = f.grid.integrate(np.abs(f.values) ** 2).real
    assert f.l2_norm() ** 2 == pytest.approx(direct, rel=1e-13)


def test_holomorphic_flag_is_enforced():
    with pytest.raises(ValueError):
        SpectralField.from_values(G2PI, np.exp(1j * A), holomorphic=True)
    assert SpectralField.from_values(G2PI, np.exp(-1j * A), holomorphic=True).holomorphic


# ---------------------------------------------------------------- projections


def test_project_neg_examples():
    assert close(sp.project_neg(mode(-1)), mode(-1), 1e-14)
    assert close(sp.project_neg(mode(1)), 0, 1e-14)
    cos = SpectralField.from_values(G2PI, np.cos(A))
    assert close(sp.project_neg(cos), 0.5 * np.exp(-1j * A), 1e-14)
    assert sp.project_neg(cos).holomorphic


def test_project_neg_keeps_zero_mode():
    f = SpectralField.from_values(G2PI, np.full(32, 3.0 + 0j))
    assert close(sp.project_neg(f), f, 1e-14)
    assert close(sp.project_pos(f), 0, 1e-14)


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_projection_properties(seed):
    f = random_field(seed)
    P = sp.project_neg(f)
    assert close(sp.project_neg(P), P, 0.0)
    assert close(P + sp.project_pos(f), f, 1e-13)


def test_conj_mirror_is_conjugated_projection():
    # the Nyquist mode is its own conjugate partner; it is always dealiased away
    f = sp.dealias(random_field(3))
    lhs = sp.conj_mirror(f).values
    rhs = np.conj(sp.project_neg(f.conj()).values)
    assert close(lhs, rhs, 1e-13)
    # P[x] + Pbar[conj x] is real up to the imaginary part of the mean
    pair = sp.project_neg(f).values + sp.project_pos(f.conj()).values
    assert np.max(np.abs(pair.imag - f.coeffs[0].imag)) <= 1e-13


# ---------------------------------------------------------------- multipliers


def test_hilbert_examples():
    for k in (1, 2, 5):
        assert close(sp.hilbert(SpectralField.from_values(G2PI, np.cos(k * A))), np.sin(k * A), 1e-13)
    assert close(sp.hilbert(SpectralField.from_values(G2PI, np.ones(32))), 0, 1e-15)


def test_hilbert_matches_dft_oracle_n16():
    from holowaves.harness.oracle import direct_multiplier

    g = GridSpec(16, 2 * np.pi)
    f = random_field(7, g)
    ref = direct_multiplier(f.values, lambda xi: -1j * np.sign(xi), g.length)
    assert close(sp.hilbert(f), ref, 1e-12)


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_hilbert_squares_to_minus_identity(seed):
    f = random_field(seed, mean_zero=True)
    assert close(sp.hilbert(sp.hilbert(f)), -f.values, 1e-13)


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_projection_via_hilbert(seed):
    f = random_field(seed)
    P = 0.5 * (f.coeffs - 1j * sp.hilbert(f).coeffs)
    P[0] = f.coeffs[0]
    assert np.max(np.abs(P - sp.project_neg(f).coeffs)) <= 1e-15


def test_frac_deriv_examples():
    assert close(sp.frac_deriv(mode(-4), 0.5), 2 * mode(-4).values, 1e-13)
    assert close(sp.frac_deriv(SpectralField.from_values(G2PI, np.ones(32)), 0.5), 0, 1e-15)
    d1 = sp.frac_deriv(mode(-1), 1.0)
    assert np.allclose(np.abs(d1.values), np.abs(sp.derivative(mode(-1)).values), atol=1e-13)
    f = random_field(2)
    assert sp.frac_deriv(f, 0) is f
    with pytest.raises(ValueError):
        sp.frac_deriv(f, -1)


@given(seeds, st.floats(0.1, 2.0), st.floats(0.1, 2.0))
@settings(max_examples=20, deadline=None)
def test_frac_deriv_semigroup(seed, a, b):
    f = random_field(seed)
    lhs = sp.frac_deriv(sp.frac_deriv(f, a), b)
    rhs = sp.frac_deriv(f, a + b)
    assert np.max(np.abs(lhs.values - rhs.values)) <= 1e-12 * max(1.0, np.max(np.abs(rhs.values)))


def test_derivative_examples():
    assert close(sp.derivative(mode(-1)), -1j * mode(-1).values, 1e-13)
    assert close(sp.derivative(SpectralField.from_values(G2PI, np.ones(32))), 0, 1e-15)
    assert close(sp.derivative(SpectralField.from_values(G2PI, np.sin(3 * A))), 3 * np.cos(3 * A), 1e-13)


# ---------------------------------------------------------------- dealiasing


def test_dealias_examples():
    low = SpectralField.from_values(G2PI, np.cos(2 * A) + np.exp(-3j * A))
    assert close(sp.dealias(low), low, 1e-14)
    nyq = SpectralField.from_values(G2PI, np.cos(16 * A))
    assert close(sp.dealias(nyq), 0, 1e-14)


def test_dealiased_product_matches_fine_grid():
    rng = np.random.default_rng(4)
    n, kmax = 32, 10
    coeffs = []
    for _ in range(2):
        c = np.zeros(n, complex)
        idx = np.r_[0 : kmax + 1, n - kmax : n]
        c[idx] = rng.normal(size=idx.size) + 1j * rng.normal(size=idx.size)
        coeffs.append(c)
    f, g = (SpectralField.from_coeffs(G2PI, c) for c in coeffs)
    fine = GridSpec(2 * n, 2 * np.pi)

    def up(c):
        k = np.fft.fftfreq(n, 1.0 / n).astype(int)
        out = np.zeros(2 * n, complex)
        out[k % (2 * n)] = c
        return fine.to_values(out)

    exact = fine.to_coeffs(up(coeffs[0]) * up(coeffs[1]))
    kf = np.fft.fftfreq(2 * n, 1.0 / (2 * n)).astype(int)
    keep = np.abs(kf) <= n // 3
    ref = np.zeros(n, complex)
    ref[kf[keep] % n] = exact[keep]
    got = sp.product(f, g)
    assert np.max(np.abs(got.coeffs - ref)) <= 1e-13


def test_holomorphic_products_stay_holomorphic():
    g = GridSpec(64, 2 * np.pi)
    rng = np.random.default_rng(5)
    fs = []
    for _ in range(2):
        c = np.zeros(64, complex)
        c[-10:] = rng.normal(size=10) + 1j * rng.normal(size=10)
        fs.append(SpectralField.from_coeffs(g, c, True))
    prod = fs[0].values * fs[1].values
    assert close(sp.project_neg(SpectralField.from_values(g, prod)), prod, 1e-12)


# ---------------------------------------------------------------- Littlewood-Paley


def test_lp_block_examples():
    assert close(sp.lp_block(mode(-4), 2), mode(-4), 1e-14)
    assert close(sp.lp_block(mode(-4), 1), 0, 1e-14)


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_lp_reconstruction(seed):
    f = random_field(seed, GridSpec(64, 10.0))
    total = sum((sp.lp_block(f, j).coeffs for j in sp.lp_indices(f.grid)), np.zeros(64, complex))
    total[0] += f.coeffs[0]
    assert np.max(np.abs(f.grid.to_values(total) - f.values)) <= 1e-13 * max(1, np.max(np.abs(f.values)))


# ---------------------------------------------------------------- serialization


@given(seeds)
@settings(max_examples=10, deadline=None)
def test_checkpoint_round_trip_is_bit_exact(seed):
    f = sp.project_neg(random_field(seed))
    buf = io.BytesIO()
    sp.write_field(buf, f, time=1.25)
    buf.seek(0)
    g, t = sp.read_field(buf)
    assert t == 1.25 and g.holomorphic
    assert np.array_equal(g.coeffs, f.coeffs)


def test_complex64_record_round_trips_its_own_precision():
    f = SpectralField.from_coeffs(G2PI, np.asarray(random_field(9).coeffs, np.complex64))
    buf = io.BytesIO()
    sp.write_field(buf, f, single=True)
    buf.seek(0)
    g, _ = sp.read_field(buf)
    assert np.array_equal(g.coeffs, f.coeffs)
    again = io.BytesIO()
    sp.write_field(again, g, single=True)
    assert again.getvalue() == buf.getvalue()


def test_truncated_record_raises():
    buf = io.BytesIO()
    sp.write_field(buf, mode(-1))
    with pytest.raises(EOFError):
        sp.read_field(io.BytesIO(buf.getvalue()[:-3]))
    with pytest.raises(ValueError):
        sp.read_field(io.BytesIO(b"XXXX" + buf.getvalue()[4:]))
