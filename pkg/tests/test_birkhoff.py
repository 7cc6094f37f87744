import numpy as np
import pytest

from conftest import random_complex_field
from wwbnf.birkhoff import (
    compute_normal_form,
    explicit_hzd4,
    normal_form_hamiltonian,
    verify_identity,
    verify_null_condition,
    zd_frequencies,
    zd_frequency,
    zeta,
)
from wwbnf.poly import Monomial, hamiltonian_vector_field, project_kernel
from wwbnf.resonance import SignedTuple, classify
from wwbnf.spectral import SpectralField


def pair(a, b):
    return Monomial.of((1, 1, -1, -1), (a, b, a, b))


def test_explicit_coefficients():
    H = explicit_hzd4(4)
    assert H.coefficient(pair(1, 1)) == pytest.approx(1 / (4 * np.pi))
    assert H.coefficient(pair(2, 1)) == pytest.approx(2 / np.pi)
    # |z_k|^2 |z_-k|^2 collects the k and -k summands
    assert H.coefficient(pair(3, -3)) == pytest.approx(-27 / np.pi)
    assert H.coefficient(pair(-2, 1)) == pytest.approx(-2 / np.pi)
    assert H.is_real()


@pytest.fixture(scope="module")
def nf12():
    return compute_normal_form(12)


def test_normal_form_coefficients(nf12):
    assert nf12.coefficient(pair(2, 2)).real == pytest.approx(2 / np.pi, rel=1e-12)
    assert nf12.coefficient(pair(5, -5)).real == pytest.approx(-125 / np.pi, rel=1e-12)
    assert nf12.is_real(1e-13)
    assert project_kernel(nf12) == nf12
    assert nf12.degrees == [4]


def test_small_truncation_is_trivial():
    nf = compute_normal_form(2)
    assert nf.max_mode <= 2
    for m, _ in nf.terms():
        assert classify(SignedTuple.of(m.signs, m.modes)).kind == "Trivial"


@pytest.mark.parametrize("M", [2, 4, 8])
def test_verify_identity_small(M):
    rep = verify_identity(M, 1e-9)
    assert rep.passed
    assert rep.max_offresonant_leak < 1e-12


def test_verify_identity_detects_corruption(nf12):
    bad = nf12.map_coefficients(lambda s, k, c: np.where(np.arange(len(c)) == 0, 1.01 * c, c))
    assert not verify_identity(12, 1e-9, normal_form=bad).passed
    assert not verify_identity(12, 0.0, normal_form=nf12).passed


def test_null_condition(nf12):
    assert verify_null_condition(8) == []
    rows = verify_null_condition(12, nf12)
    assert {(lam, b) for lam, b, _ in rows} == {(1, 1), (-1, 1)}
    assert all(c <= 1e-10 for _, _, c in rows)


def test_report_json():
    import json
    d = json.loads(verify_identity(4).to_json())
    assert set(d) >= {"M", "max_resonant_coeff_error", "max_offresonant_leak", "bf", "pass"}


def test_zd_field_is_diagonal(rng):
    M = 6
    spec = hamiltonian_vector_field(explicit_hzd4(M))
    for _ in range(5):
        u = random_complex_field(M, rng)
        ratio = spec(u).coeffs / np.where(u.coeffs == 0, 1, u.coeffs)
        assert np.max(np.abs(ratio.real)) < 1e-12


def test_frequency_examples():
    assert zd_frequency(3, {}, 4) == pytest.approx(np.sqrt(3))
    assert zd_frequency(5, {2: 0.7}) == pytest.approx(np.sqrt(5) + 5 * 4 * 0.7 / np.pi)
    assert zd_frequency(5, {2: 0.7, 1: 0.0}) == zd_frequency(5, {2: 0.7})


def test_frequency_matches_finite_difference(rng):
    M = 5
    H = normal_form_hamiltonian(M)
    I = rng.random(2 * M) * 0.3
    modes = [k for k in range(-M, M + 1) if k]

    def energy(actions):
        c = np.zeros(2 * M + 1, complex)
        for k, a in zip(modes, actions):
            c[k + M] = np.sqrt(a)
        return H.evaluate(SpectralField(M, c)).real

    om = zd_frequencies(I, M)
    h = 1e-6
    for j in range(len(modes)):
        e = np.zeros_like(I)
        e[j] = h
        fd = (energy(I + e) - energy(I - e)) / (2 * h)
        assert om[j] == pytest.approx(fd, rel=1e-6)


def test_zeta():
    assert zeta({2: 1.0}) == pytest.approx(4 / np.pi)
    assert zeta({3: 0.4, -3: 0.4, 1: 2.0, -1: 2.0}) == 0.0
