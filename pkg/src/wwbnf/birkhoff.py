"""Quartic Birkhoff normal form of the water-waves Hamiltonian.

The cubic part is removed by the time-one flow of F3 solving
{F3, H2} + H3 = 0; the resonant quartic remainder is

    H_ZD = Pi_ker(H4 + 1/2 {F3, H3}),

which coincides with the integrable Zakharov-Dyachenko Hamiltonian

    1/(4 pi) sum_k |k|^3 (|z_k|^4 - 2 |z_k|^2 |z_{-k}|^2)
    + 1/pi sum_{sign k1 = sign k2, |k2| < |k1|} |k1| |k2|^2 (|z_{k1}|^2 - |z_{-k1}|^2) |z_{k2}|^2.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Mapping

import numpy as np

from .expansion import build_hamiltonian
from .poly import (
    Monomial,
    PolyHamiltonian,
    decode,
    poisson_bracket,
    project_kernel,
    quadratic_hamiltonian,
    solve_cohomological,
)
from .resonance import benjamin_feir_family
from .spectral import SpectralField, dispersion


def _action_pair(a: int, b: int) -> Monomial:
    """|z_a|^2 |z_b|^2 (or |z_a|^4 when a == b)."""
    return Monomial.of((1, 1, -1, -1), (a, b, a, b))


def compute_normal_form(M: int, threads: int = 1) -> PolyHamiltonian:
    """Pi_ker(H4 + 1/2 {F3, H3}) restricted to |k| <= M.

    H3 and F3 are built at truncation 2M, which holds every intermediate mode
    of a cubic-cubic contraction whose four external modes lie in |k| <= M.
    ``threads`` is accepted for interface symmetry; the bracket is vectorized.
    """
    if M < 2:
        raise ValueError("normal form needs M >= 2")
    H3 = build_hamiltonian(2 * M, 3)
    F3 = solve_cohomological(H3)
    bracket = poisson_bracket(F3, H3, max_mode=M, prune=0.0)
    H4 = build_hamiltonian(M, 4)
    return project_kernel(H4 + bracket * 0.5).restrict(M)


def explicit_hzd4(M: int) -> PolyHamiltonian:
    """Closed-form Zakharov-Dyachenko quartic Hamiltonian for |k| <= M."""
    if M < 1:
        raise ValueError("M must be positive")
    terms: dict[Monomial, float] = {}

    def add(m: Monomial, c: float) -> None:
        terms[m] = terms.get(m, 0.0) + c

    ks = [k for k in range(-M, M + 1) if k]
    for k in ks:
        a3 = abs(k) ** 3 / (4 * np.pi)
        add(_action_pair(k, k), a3)
        add(_action_pair(k, -k), -2 * a3)
    for k1 in ks:
        for k2 in ks:
            if np.sign(k1) == np.sign(k2) and abs(k2) < abs(k1):
                c = abs(k1) * k2 * k2 / np.pi
                add(_action_pair(k1, k2), c)
                add(_action_pair(-k1, k2), -c)
    return PolyHamiltonian.from_terms(terms)


@dataclass
class NormalFormReport:
    M: int
    max_resonant_coeff_error: float
    max_offresonant_leak: float
    max_value_error: float
    bf_coefficients: list = field(default_factory=list)
    passed: bool = False

    def to_json(self) -> str:
        d = {
            "M": self.M,
            "max_resonant_coeff_error": self.max_resonant_coeff_error,
            "max_offresonant_leak": self.max_offresonant_leak,
            "max_value_error": self.max_value_error,
            "bf": [{"lambda": lam, "b": b, "coeff_abs": c} for lam, b, c in self.bf_coefficients],
            "pass": self.passed,
        }
        return json.dumps(d, indent=2)


def random_field(M: int, rng: np.random.Generator, scale: float = 1.0) -> SpectralField:
    c = scale * (rng.normal(size=2 * M + 1) + 1j * rng.normal(size=2 * M + 1)) / np.sqrt(2 * M)
    c[M] = 0
    return SpectralField(M, c)


def compare_hamiltonians(computed: PolyHamiltonian, reference: PolyHamiltonian, M: int,
                         samples: int = 20, seed: int = 0) -> tuple[float, float, float]:
    """(max relative error on shared monomials, max leak, max relative value error).

    The leak is the largest coefficient present in only one of the two, scaled
    by the largest reference coefficient.
    """
    a, b = computed.as_dict(), reference.as_dict()
    scale = max(reference.max_abs(), 1e-300)
    rel = 0.0
    leak = 0.0
    for m, cb in b.items():
        ca = a.get(m)
        if ca is None:
            leak = max(leak, abs(cb) / scale)
        else:
            rel = max(rel, abs(ca - cb) / abs(cb))
    for m, ca in a.items():
        if m not in b:
            leak = max(leak, abs(ca) / scale)
    rng = np.random.default_rng(seed)
    verr = 0.0
    for _ in range(samples):
        u = random_field(M, rng)
        va, vb = computed.evaluate(u), reference.evaluate(u)
        verr = max(verr, abs(va - vb) / max(abs(vb), 1e-300))
    return rel, leak, verr


def verify_null_condition(M: int, normal_form: PolyHamiltonian | None = None) -> list[tuple[int, int, float]]:
    """|coefficient| / max|coefficient| of every Benjamin-Feir monomial fitting in |k| <= M."""
    fam = benjamin_feir_family(M)
    if not fam:
        return []
    nf = compute_normal_form(M) if normal_form is None else normal_form
    scale = nf.max_abs()
    out = []
    for t, (lam, b) in sorted(fam.items(), key=lambda kv: (kv[1][1], abs(kv[1][0]), kv[1][0])):
        c = nf.coefficient(Monomial.of(t.signs, t.modes))
        out.append((lam, b, abs(c) / scale))
    return out


def verify_identity(M: int, tol: float = 1e-9, normal_form: PolyHamiltonian | None = None,
                    null_tol: float = 1e-10) -> NormalFormReport:
    """Compare the computed normal form with the closed form, coefficient by coefficient.

    ``normal_form`` overrides the computed Hamiltonian (used to check that the
    comparison detects corrupted inputs). Passing requires every error to be
    strictly below ``tol``, so ``tol = 0`` always fails.
    """
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    nf = compute_normal_form(M) if normal_form is None else normal_form
    ref = explicit_hzd4(M)
    rel, leak, verr = compare_hamiltonians(nf, ref, M)
    bf = verify_null_condition(M, nf)
    ok = rel < tol and leak < tol and verr < tol and all(c <= null_tol for _, _, c in bf)
    return NormalFormReport(M, rel, leak, verr, bf, bool(ok))


# integrable flow -------------------------------------------------------------------

def frequency_matrix(M: int) -> tuple[np.ndarray, np.ndarray]:
    """(modes, A) with Omega_n(I) = omega_n + sum_k A[n, k] I_k under H2 + H_ZD.

    Read off the action monomials of the closed form: a term c I_a I_b
    contributes c I_b to Omega_a and c I_a to Omega_b (2c I_a when a = b).
    """
    modes = np.array([k for k in range(-M, M + 1) if k])
    idx = {int(k): i for i, k in enumerate(modes)}
    A = np.zeros((len(modes), len(modes)))
    H = explicit_hzd4(M)
    rows, coeffs = H.block(4)
    k, s = decode(rows)
    for row_k, row_s, c in zip(k, s, coeffs):
        plus = sorted(int(x) for x, y in zip(row_k, row_s) if y > 0)
        a, b = plus
        A[idx[a], idx[b]] += c.real
        A[idx[b], idx[a]] += c.real
    return modes, A


def _action_vector(actions: Mapping[int, float] | np.ndarray, modes: np.ndarray) -> np.ndarray:
    if isinstance(actions, np.ndarray):
        return actions.astype(float)
    I = np.zeros(len(modes))
    M = int(modes.max())
    for n, v in actions.items():
        if n == 0 or abs(n) > M:
            raise ValueError(f"action mode {n} outside 0 < |n| <= {M}")
        I[n + M - (n > 0)] = v
    return I


def zd_frequencies(actions: Mapping[int, float] | np.ndarray, M: int) -> np.ndarray:
    """Omega_n(I) for all 0 < |n| <= M (ordered -M..-1, 1..M)."""
    modes, A = frequency_matrix(M)
    I = _action_vector(actions, modes)
    return dispersion(modes) + A @ I


def zd_frequency(n: int, actions: Mapping[int, float], M: int | None = None) -> float:
    """Rotation frequency of z_n under the flow of H2 + H_ZD, given the actions."""
    if n == 0:
        raise ValueError("mode must be nonzero")
    M = M or max([abs(n)] + [abs(k) for k in actions])
    om = zd_frequencies(actions, M)
    return float(om[n + M - (n > 0)])


def zeta(actions: Mapping[int, float]) -> float:
    """zeta = (1/pi) sum_n n |n| I_n."""
    return float(sum(n * abs(n) * v for n, v in actions.items()) / np.pi)


def normal_form_hamiltonian(M: int) -> PolyHamiltonian:
    """H2 + explicit H_ZD at truncation M."""
    return quadratic_hamiltonian(M) + explicit_hzd4(M)
