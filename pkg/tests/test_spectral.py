import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wwbnf.spectral import (
    SpectralField,
    TruncationError,
    ZeroModeError,
    abs_d,
    apply_multiplier,
    convolve,
    from_complex,
    pointwise_product,
    quadrature,
    sobolev_norm,
    to_complex,
)


def test_zero_mode_rejected():
    with pytest.raises(ZeroModeError):
        SpectralField.from_modes(3, {0: 1.0})
    c = np.zeros(7, complex)
    c[3] = 1.0
    with pytest.raises(ZeroModeError):
        SpectralField(3, c)


def test_mode_beyond_truncation():
    with pytest.raises(TruncationError):
        SpectralField.from_modes(2, {3: 1.0})


def test_grid_roundtrip_and_parseval(rng):
    c = rng.normal(size=11) + 1j * rng.normal(size=11)
    c[5] = 0
    f = SpectralField(5, c)
    vals = f.to_grid(32)
    assert np.allclose(SpectralField.from_grid(vals, 5).coeffs, c)
    assert quadrature(np.abs(vals) ** 2) == pytest.approx(np.sum(np.abs(c) ** 2))


def test_cosine_amplitudes():
    x = 2 * np.pi * np.arange(16) / 16
    f = SpectralField.from_grid(np.cos(2 * x), 4)
    assert f[2] == pytest.approx(np.sqrt(2 * np.pi) / 2)
    assert f.real


def test_sobolev_norm_single_mode():
    f = SpectralField.from_modes(4, {3: 2.0})
    assert sobolev_norm(f, 1.5) == pytest.approx(2 * 3 ** 1.5)


def test_multiplier_and_product_against_grid(rng):
    M = 6
    x = 2 * np.pi * np.arange(64) / 64
    f = SpectralField.from_grid(np.sin(x) + 0.3 * np.cos(3 * x), M)
    g = SpectralField.from_grid(np.cos(2 * x), M)
    df = apply_multiplier(f, abs_d(1))
    assert np.allclose(df.to_grid(64), np.sin(x) + 0.9 * np.cos(3 * x))
    h = pointwise_product(f, g, 2 * M)
    assert np.allclose(h.to_grid(64), (np.sin(x) + 0.3 * np.cos(3 * x)) * np.cos(2 * x))


def test_convolve_is_exact_for_full_band(rng):
    a = rng.normal(size=9) + 1j * rng.normal(size=9)
    b = rng.normal(size=5) + 1j * rng.normal(size=5)
    out = convolve(a, b)
    ref = np.convolve(a, b) / np.sqrt(2 * np.pi)
    assert np.allclose(out, ref)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2 ** 31))
def test_complex_variable_roundtrip(M, seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=2 * M + 1) + 1j * rng.normal(size=2 * M + 1)
    c[M] = 0
    u = SpectralField(M, c)
    eta, psi = from_complex(u)
    assert eta.real and psi.real
    assert np.allclose(to_complex(eta, psi).coeffs, c)


def test_sobolev_half_derivative_mode_four():
    assert sobolev_norm(SpectralField.from_modes(4, {4: 1.0}), 0.5) == pytest.approx(2.0)


def test_product_of_single_modes_lands_on_sum_mode():
    a = 0.7
    f = SpectralField.from_modes(4, {1: a})
    h = pointwise_product(f, f)
    assert h[2] == pytest.approx(a * a / np.sqrt(2 * np.pi))
    assert np.sum(np.abs(h.coeffs) > 1e-14) == 1


def test_complex_variable_of_unit_cosine_mode():
    c = np.zeros(9, complex)
    c[3] = c[5] = 1.0
    eta = SpectralField(4, c, real=True)
    psi = SpectralField(4, np.zeros(9, complex), real=True)
    u = to_complex(eta, psi)
    assert u[1] == pytest.approx(1 / np.sqrt(2))
    assert u[-1] == pytest.approx(1 / np.sqrt(2))
