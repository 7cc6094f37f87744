"""Water-waves Hamiltonian up to quartic order in the complex variables.

With G(eta) = |D| + G1(eta) + G2(eta) + ..., the energy
H = 1/2 int psi G(eta) psi + 1/2 int eta^2 splits as

    H2 = 1/2 int (eta^2 + psi |D| psi)
    H3 = 1/2 int eta (psi_x^2 - (|D| psi)^2)
    H4 = 1/2 int eta^2 psi_xx |D| psi + 1/2 int (eta |D| psi) |D| (eta |D| psi)

(the last two are 1/2 int psi G1 psi and 1/2 int psi G2 psi after
integrating by parts).  Substituting
eta_k = |k|^{1/4} (u_k + conj u_{-k}) / sqrt2 and
psi_k = |k|^{-1/4} (u_k - conj u_{-k}) / (i sqrt2) gives polynomials in
(u, conj u).
"""

from __future__ import annotations

import itertools
from typing import Callable

import numpy as np

from .poly import PolyHamiltonian, encode, quadratic_hamiltonian
from .spectral import SQRT_2PI, SpectralField, TruncationError, coeffs_to_grid, convolve, grid_to_coeffs

# coefficient tables ----------------------------------------------------------


def _eta_factor(k, s):
    return np.abs(k) ** 0.25 / np.sqrt(2.0) + 0j


def _psi_factor(k, s):
    return s * np.abs(k) ** -0.25 / (1j * np.sqrt(2.0))


_FACTORS = {"eta": _eta_factor, "psi": _psi_factor}


def _nonzero(L: int) -> np.ndarray:
    r = np.arange(-L, L + 1)
    return r[r != 0]


def multilinear_hamiltonian(fields: tuple[str, ...], kernel: Callable, L: int) -> PolyHamiltonian:
    """Complex form of sum_{k1+..+kp=0} kernel(k1..kp) prod field_i(k_i).

    ``fields`` names each slot ('eta' or 'psi'); ``kernel`` takes p integer
    arrays. All modes are restricted to 0 < |k| <= L.
    """
    p = len(fields)
    grids = np.meshgrid(*([_nonzero(L)] * (p - 1)), indexing="ij")
    ks = [g.ravel() for g in grids]
    last = -np.sum(ks, axis=0)
    keep = (last != 0) & (np.abs(last) <= L)
    ks = [k[keep] for k in ks] + [last[keep]]
    base = np.asarray(kernel(*ks), dtype=complex)
    nz = base != 0
    ks = [k[nz] for k in ks]
    base = base[nz]

    rows, coeffs = [], []
    for signs in itertools.product((1, -1), repeat=p):
        c = base.copy()
        cols = []
        for f, k, s in zip(fields, ks, signs):
            c = c * _FACTORS[f](k, s)
            cols.append(encode(s * k, s))  # factor u^s_{s k}
        rows.append(np.stack(cols, axis=1))
        coeffs.append(c)
    return PolyHamiltonian({p: (np.concatenate(rows), np.concatenate(coeffs))})


def _cubic_kernel(k1, k2, k3):
    # eta_{k1} psi_{k2} psi_{k3}
    return 0.5 / SQRT_2PI * (-k2 * k3 - np.abs(k2) * np.abs(k3))


def _quartic_kernel(k1, k2, k3, k4):
    # eta_{k1} eta_{k2} psi_{k3} psi_{k4}
    a3, a4 = np.abs(k3), np.abs(k4)
    return (-(k3 ** 2) * a4 + a3 * a4 * np.abs(k1 + k3)) / (4.0 * np.pi)


def build_hamiltonian(M: int, degree: int) -> PolyHamiltonian:
    """Homogeneous component of the given degree, Galerkin-truncated at M."""
    if M < 1:
        raise ValueError("truncation must be positive")
    if degree == 2:
        return quadratic_hamiltonian(M)
    if degree == 3:
        return multilinear_hamiltonian(("eta", "psi", "psi"), _cubic_kernel, M)
    if degree == 4:
        return multilinear_hamiltonian(("eta", "eta", "psi", "psi"), _quartic_kernel, M)
    raise ValueError(f"degree must be 2, 3 or 4, got {degree}")


# pseudo-spectral operators on dense amplitude arrays -----------------------------


def _k(c: np.ndarray) -> np.ndarray:
    L = (len(c) - 1) // 2
    return np.arange(-L, L + 1)


def _absd(c: np.ndarray) -> np.ndarray:
    return np.abs(_k(c)) * c


def _dx(c: np.ndarray) -> np.ndarray:
    return 1j * _k(c) * c


def _mul(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    return convolve(f, g)


def _project(c: np.ndarray, M: int) -> np.ndarray:
    L = (len(c) - 1) // 2
    out = np.zeros(2 * M + 1, dtype=complex)
    m = min(L, M)
    out[M - m:M + m + 1] = c[L - m:L + m + 1]
    out[M] = 0.0
    return out


def _real(c: np.ndarray) -> np.ndarray:
    return 0.5 * (c + np.conj(c[::-1]))


def g1_apply(eta: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """G1(eta) psi = -d_x(eta psi_x) - |D|(eta |D| psi), full band."""
    return -_dx(_mul(eta, _dx(psi))) - _absd(_mul(eta, _absd(psi)))


def g2_apply(eta: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """G2(eta) psi = -1/2 (D^2 eta^2 |D| + |D| eta^2 D^2 - 2 |D| eta |D| eta |D|) psi."""
    e2 = _mul(eta, eta)
    d2 = lambda c: _k(c) ** 2 * c  # noqa: E731
    t1 = d2(_mul(e2, _absd(psi)))
    t2 = _absd(_mul(e2, d2(psi)))
    t3 = _absd(_mul(eta, _absd(_mul(eta, _absd(psi)))))
    n = max(len(t1), len(t2), len(t3))
    pad = lambda c: _project(c, (n - 1) // 2) if len(c) < n else c  # noqa: E731
    return -0.5 * (pad(t1) + pad(t2) - 2.0 * pad(t3))


def dn_apply(order: int, eta: SpectralField, psi: SpectralField) -> SpectralField:
    """Order-0, 1 or 2 term of the Dirichlet-Neumann expansion, projected to |k| <= M."""
    if eta.M != psi.M:
        raise TruncationError(f"truncation mismatch: {eta.M} vs {psi.M}")
    if not (eta.real and psi.real):
        raise ValueError("dn_apply expects real fields")
    M = psi.M
    if order == 0:
        out = _absd(psi.coeffs)
    elif order == 1:
        out = g1_apply(eta.coeffs, psi.coeffs)
    elif order == 2:
        out = g2_apply(eta.coeffs, psi.coeffs)
    else:
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    return SpectralField(M, _real(_project(out, M)), real=True)


def hamiltonian_gradients(eta: np.ndarray, psi: np.ndarray, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """L2 gradients (dH/deta, dH/dpsi) of H2 + ... + H_degree, projected to |k| <= M.

    Inputs and outputs are dense amplitude arrays of equal length 2M+1. The
    projection makes these the exact gradients of the Galerkin-truncated
    Hamiltonian.
    """
    M = (len(eta) - 1) // 2
    grad_eta = eta.astype(complex).copy()
    grad_psi = _absd(psi)
    if degree >= 3:
        px, pd = _dx(psi), _absd(psi)
        grad_eta = grad_eta + _project(0.5 * (_mul(px, px) - _mul(pd, pd)), M)
        grad_psi = grad_psi + _project(g1_apply(eta, psi), M)
    if degree >= 4:
        pd = _absd(psi)
        pxx = -(_k(psi) ** 2) * psi
        inner = _absd(_mul(eta, pd))
        grad_eta = grad_eta + _project(_mul(eta, _mul(pxx, pd)), M) + _project(_mul(pd, inner), M)
        grad_psi = grad_psi + _project(g2_apply(eta, psi), M)
    return _real(grad_eta), _real(grad_psi)


def energy_density_integral(eta: np.ndarray, psi: np.ndarray, degree: int) -> float:
    """H2 + ... + H_degree evaluated exactly on dense real amplitude arrays."""
    k = _k(eta)
    total = 0.5 * np.sum(np.abs(eta) ** 2 + np.abs(k) * np.abs(psi) ** 2)
    M = (len(eta) - 1) // 2
    npts = 8 * M + 8
    if degree >= 3:
        e = coeffs_to_grid(eta, npts).real
        px = coeffs_to_grid(_dx(psi), npts).real
        pd = coeffs_to_grid(_absd(psi), npts).real
        total += 0.5 * np.sum(e * (px ** 2 - pd ** 2)) * (2 * np.pi / npts)
    if degree >= 4:
        pxx = coeffs_to_grid(-(k ** 2) * psi, npts).real
        f = e * pd
        fd = coeffs_to_grid(_absd(grid_to_coeffs(f, 2 * M)), npts).real
        total += 0.5 * np.sum(e * e * pxx * pd + f * fd) * (2 * np.pi / npts)
    return float(np.real(total))


def rhs_quadratic(eta: SpectralField, psi: SpectralField) -> tuple[SpectralField, SpectralField]:
    """Quadratic water-waves system truncated at M.

    d_t eta = |D| psi - d_x(eta psi_x) - |D|(eta |D| psi)
    d_t psi = -eta - psi_x^2 / 2 + (|D| psi)^2 / 2
    """
    if eta.M != psi.M:
        raise TruncationError(f"truncation mismatch: {eta.M} vs {psi.M}")
    ge, gp = hamiltonian_gradients(eta.coeffs, psi.coeffs, 3)
    return SpectralField(eta.M, gp, real=True), SpectralField(eta.M, _real(-ge), real=True)


# coefficient probes ------------------------------------------------------------------


def _probe_fields(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(eta, psi) amplitude arrays from a complex amplitude array u."""
    k = _k(u)
    a = np.where(k != 0, np.abs(k), 1).astype(float)
    ubar = np.conj(u[::-1])
    eta = a ** 0.25 * (u + ubar) / np.sqrt(2.0)
    psi = a ** -0.25 * (u - ubar) / (1j * np.sqrt(2.0))
    eta[k == 0] = 0
    psi[k == 0] = 0
    return eta, psi


def _v1(eta, psi):
    return _dx(psi)


def _v2(eta, psi):
    return -_mul(_dx(eta), _absd(psi))


def _a1(eta, psi):
    return -0.5 * _absd(eta)


def _a2(eta, psi):
    d2 = lambda c: _k(c) ** 2 * c  # noqa: E731
    M = (len(eta) - 1) // 2
    terms = [
        -0.5 * _mul(eta, d2(eta)),
        0.5 * _absd(_mul(eta, _absd(eta))),
        -0.25 * _absd(_mul(_dx(psi), _dx(psi)) + _mul(_absd(psi), _absd(psi))),
        0.5 * _mul(_absd(psi), d2(psi)),
        0.5 * _mul(_dx(psi), _dx(_absd(psi))),
    ]
    return sum(_project_full(t, 2 * M) for t in terms)


def _f2(eta, psi):
    """Quadratic part of du/dt divided by i."""
    M = (len(eta) - 1) // 2
    ge, gp = hamiltonian_gradients(eta, psi, 3)
    ge = ge - eta
    gp = gp - _absd(psi)
    # |D|^{-1/4} eta_t + i |D|^{1/4} psi_t over sqrt2, with eta_t = gp, psi_t = -ge,
    # evaluated on the doubled band so that the output mode 2n is resolved
    k = _k(ge)
    a = np.where(k != 0, np.abs(k), 1).astype(float)
    udot = (a ** -0.25 * gp + 1j * a ** 0.25 * (-ge)) / np.sqrt(2.0)
    udot[k == 0] = 0
    return udot / 1j


def _project_full(c: np.ndarray, L: int) -> np.ndarray:
    """Like _project but keeps the zero mode."""
    Lc = (len(c) - 1) // 2
    out = np.zeros(2 * L + 1, dtype=complex)
    m = min(L, Lc)
    out[L - m:L + m + 1] = c[Lc - m:Lc + m + 1]
    return out


_FUNCTIONALS = {"V1": (_v1, 1), "a1": (_a1, 1), "V2": (_v2, 2), "a2": (_a2, 2), "F2": (_f2, 2)}


def extract_bilinear(tag: str, n1: int, s1: int = 1, n2: int | None = None, s2: int | None = None) -> complex:
    """Expansion coefficient of a water-waves functional read off single-mode probes.

    Linear tags ('V1', 'a1') return (f)^{s1}_{n1} in
    f = (2pi)^{-1/2} sum f^s_n u^s_n e^{i s n x}. Quadratic tags ('V2', 'a2',
    'F2') return (f)^{s1 s2}_{n1, n2} in
    f = sum f^{s s'}_{n1 n2} u^s_{n1} u^{s'}_{n2} e^{i(s n1 + s' n2)x} / (2pi);
    for equal signs the symmetric half is reported. F2 is read from the
    quadratic part of du/dt = -i omega(D) u + i F2 with the good unknown
    replaced by psi (exact at this order).
    """
    if tag not in _FUNCTIONALS:
        raise KeyError(f"unknown functional {tag!r}; expected one of {sorted(_FUNCTIONALS)}")
    fn, order = _FUNCTIONALS[tag]
    if n1 == 0 or (order == 2 and not n2):
        raise ValueError("probe modes must be nonzero")
    L = 2 * max(abs(n1), abs(n2 or 0)) + 1
    if order == 1:
        u = np.zeros(2 * L + 1, dtype=complex)
        u[n1 + L] = 1.0
        eta, psi = _probe_fields(u)
        out = fn(eta, psi)
        Lo = (len(out) - 1) // 2
        return complex(out[s1 * n1 + Lo])

    s2 = 1 if s2 is None else s2
    target = s1 * n1 + s2 * n2
    nth = 8
    th = 2 * np.pi * np.arange(nth) / nth
    acc = 0j
    same = n1 == n2
    for t1 in th:
        for t2 in ([t1] if same else th):
            u = np.zeros(2 * L + 1, dtype=complex)
            u[n1 + L] += np.exp(1j * t1)
            if not same:
                u[n2 + L] += np.exp(1j * t2)
            eta, psi = _probe_fields(u)
            out = fn(eta, psi)
            Lo = (len(out) - 1) // 2
            val = out[target + Lo] if abs(target) <= Lo else 0.0
            acc += val * np.exp(-1j * (s1 * t1 + s2 * t2))
    acc /= nth if same else nth * nth
    coeff = SQRT_2PI * acc
    if s1 == s2 and not same:
        coeff /= 2.0
    return complex(coeff)


def closed_form_coefficients(n: int) -> dict[str, float]:
    """Closed-form values of the probed coefficients at mode n."""
    a = abs(n)
    return {
        "V1": n * a ** -0.25 / np.sqrt(2.0),
        "a1": -(a ** 1.25) / (2.0 * np.sqrt(2.0)),
        "F2_n_-n": 2.0 ** -0.25 * a ** 1.75,
        "V2_n_n": float(n * a),
        "V2_n_-n": 0.0,
        "a2_n_n": 0.5 * a ** 2.5,
    }
