import numpy as np
import pytest

from conftest import random_complex_field
from wwbnf.expansion import (
    build_hamiltonian,
    closed_form_coefficients,
    dn_apply,
    extract_bilinear,
    hamiltonian_gradients,
    rhs_quadratic,
)
from oracles import grid_ops, h3_oracle, h4_oracle, on_grid
from wwbnf.spectral import SpectralField, from_complex

def test_h3_fixture_cos():
    x = 2 * np.pi * np.arange(32) / 32
    eta = SpectralField.from_grid(np.cos(2 * x), 4)
    psi = SpectralField.from_grid(np.cos(x), 4)
    assert h3_oracle(eta, psi) == pytest.approx(-np.pi / 2)
    from wwbnf.spectral import to_complex
    assert build_hamiltonian(4, 3).evaluate(to_complex(eta, psi)) == pytest.approx(-np.pi / 2, abs=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_hamiltonians_match_quadrature(seed):
    rng = np.random.default_rng(seed)
    M = 8
    u = random_complex_field(M, rng, 0.3)
    eta, psi = from_complex(u)
    assert build_hamiltonian(M, 3).evaluate(u).real == pytest.approx(h3_oracle(eta, psi), rel=1e-10)
    assert build_hamiltonian(M, 4).evaluate(u).real == pytest.approx(h4_oracle(eta, psi), rel=1e-10)


def test_built_hamiltonians_are_real(rng):
    for d in (2, 3, 4):
        H = build_hamiltonian(6, d)
        assert H.is_real(1e-13)
        assert H.max_mode == 6


def test_dn_operator_orders(rng):
    M = 6
    eta, psi = from_complex(random_complex_field(M, rng, 0.3))
    e, _, _, _ = grid_ops(eta)
    _, px, pd, _ = grid_ops(psi)
    g1 = -on_grid(lambda k: 1j * k, e * px) - on_grid(np.abs, e * pd)
    assert np.allclose(dn_apply(1, eta, psi).coeffs, SpectralField.from_grid(g1, M).coeffs)
    assert np.allclose(dn_apply(0, eta, psi).coeffs, np.abs(psi.k) * psi.coeffs)
    with pytest.raises(ValueError):
        dn_apply(3, eta, psi)


def test_gradients_match_finite_differences(rng):
    M = 5
    u = random_complex_field(M, rng, 0.3)
    eta, psi = from_complex(u)
    H = build_hamiltonian(M, 2) + build_hamiltonian(M, 3) + build_hamiltonian(M, 4)
    ge, gp = hamiltonian_gradients(eta.coeffs, psi.coeffs, 4)
    from wwbnf.spectral import to_complex
    h = 1e-6
    for k in (1, 3, -4):
        # perturb the real field eta by h cos(kx)-type mode pair
        d = np.zeros(2 * M + 1, complex)
        d[k + M] = h
        d[-k + M] = h
        ep = SpectralField(M, eta.coeffs + d, real=True)
        em = SpectralField(M, eta.coeffs - d, real=True)
        fd = (H.evaluate(to_complex(ep, psi)) - H.evaluate(to_complex(em, psi))).real / (2 * h)
        # variation of H is sum_k grad_k conj(delta_k)
        assert fd == pytest.approx(2 * np.real(ge[k + M]), rel=1e-6)
        pp = SpectralField(M, psi.coeffs + d, real=True)
        pm = SpectralField(M, psi.coeffs - d, real=True)
        fd = (H.evaluate(to_complex(eta, pp)) - H.evaluate(to_complex(eta, pm))).real / (2 * h)
        assert fd == pytest.approx(2 * np.real(gp[k + M]), rel=1e-6)


def test_rhs_quadratic_linear_part():
    eta = SpectralField.from_modes(3, {2: 0.5, -2: 0.5}, real=True)
    psi = SpectralField.zeros(3)
    et, pt = rhs_quadratic(eta, psi)
    assert np.allclose(et.coeffs, 0)
    assert np.allclose(pt.coeffs, -eta.coeffs)


@pytest.mark.parametrize("n", [1, 2, 5, 16, -3])
def test_probe_coefficients(n):
    ref = closed_form_coefficients(n)
    assert extract_bilinear("V1", n) == pytest.approx(ref["V1"], abs=1e-12)
    assert extract_bilinear("a1", n) == pytest.approx(ref["a1"], abs=1e-12)
    assert extract_bilinear("F2", n, 1, -n, -1) == pytest.approx(ref["F2_n_-n"], abs=1e-10)
    assert extract_bilinear("V2", n, 1, n, -1) == pytest.approx(ref["V2_n_n"], abs=1e-10)
    assert abs(extract_bilinear("V2", n, 1, -n, -1)) < 1e-12
    assert extract_bilinear("a2", n, 1, n, -1) == pytest.approx(ref["a2_n_n"], abs=1e-10)


def test_probe_errors():
    with pytest.raises(KeyError):
        extract_bilinear("V3", 1)
    with pytest.raises(ValueError):
        extract_bilinear("V2", 0, 1, 1, -1)


def _grid_field(fn, M=4, n=32):
    x = 2 * np.pi * np.arange(n) / n
    return SpectralField.from_grid(fn(x), M)


def test_dn_first_order_cos_fixtures():
    psi = _grid_field(np.cos)
    zero = dn_apply(1, _grid_field(np.cos), psi)
    assert np.max(np.abs(zero.coeffs)) < 1e-13
    out = dn_apply(1, _grid_field(lambda x: np.cos(2 * x)), psi)
    assert np.allclose(out.coeffs, _grid_field(lambda x: -np.cos(x)).coeffs, atol=1e-13)


def test_rhs_quadratic_cos_fixture():
    eta = _grid_field(lambda x: 0 * x)
    et, pt = rhs_quadratic(eta, _grid_field(np.cos))
    assert np.allclose(et.coeffs, _grid_field(np.cos).coeffs, atol=1e-13)
    assert np.allclose(pt.coeffs, _grid_field(lambda x: 0.5 * np.cos(2 * x)).coeffs, atol=1e-13)
