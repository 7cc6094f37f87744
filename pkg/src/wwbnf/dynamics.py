"""Time integration of truncated water-waves and Zakharov-Dyachenko flows.

Both flows are written in the complex variable u as du/dt = -i omega(D) u + N(u).
The linear rotation is always integrated exactly:

* ``rk4`` is the integrating-factor (Lawson) RK4 scheme;
* ``implicit-midpoint`` is the symmetric splitting
  exp(-i omega dt/2) o Phi_dt o exp(-i omega dt/2), where Phi_dt is the implicit
  midpoint rule for du/dt = N(u), solved by fixed-point iteration.

Each step of the second scheme is a composition of symplectic maps.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .birkhoff import explicit_hzd4, zd_frequencies
from .poly import hamiltonian_vector_field, quadratic_hamiltonian
from .spectral import SpectralField, dispersion

SCHEMES = ("rk4", "implicit-midpoint")
AMPLITUDE_GUARD = 0.5
BLOWUP_FACTOR = 10.0


class BlowupError(RuntimeError):
    """Raised when a trajectory leaves the guarded region; carries the partial record."""

    def __init__(self, message: str, record: "TrajectoryRecord"):
        super().__init__(message)
        self.record = record


class ConvergenceError(RuntimeError):
    """Raised when the implicit-midpoint fixed point does not converge."""


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: str = "implicit-midpoint"
    dt: float = 0.01
    T: float = 1.0
    record_every: int = 1
    s_values: tuple[float, ...] = (0.0,)
    tol: float = 1e-13
    max_iter: int = 50

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not self.dt > 0 or not self.T > 0:
            raise ValueError("dt and T must be positive")
        if not self.dt < self.T:
            raise ValueError("dt must be smaller than T")
        if self.record_every < 1:
            raise ValueError("record_every must be a positive integer")

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))


def _hs(u: np.ndarray, s: float) -> float:
    M = (len(u) - 1) // 2
    k = np.abs(np.arange(-M, M + 1)).astype(float)
    w = np.where(k > 0, k, 0.0) ** (2 * s)
    return float(np.sqrt(np.sum(w * np.abs(u) ** 2)))


def momentum(u: np.ndarray) -> float:
    """sum_k k |u_k|^2."""
    M = (len(u) - 1) // 2
    return float(np.sum(np.arange(-M, M + 1) * np.abs(u) ** 2))


@dataclass
class TrajectoryRecord:
    M: int
    s_values: tuple[float, ...]
    times: list[float] = field(default_factory=list)
    norms: list[list[float]] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    momentum: list[float] = field(default_factory=list)
    actions: list[np.ndarray] = field(default_factory=list)
    momentum_scale: float = 0.0
    final: np.ndarray | None = None
    aborted: str | None = None

    def append(self, t: float, u: np.ndarray, energy: float) -> None:
        self.times.append(float(t))
        self.norms.append([_hs(u, s) for s in self.s_values])
        self.energy.append(float(energy))
        self.momentum.append(momentum(u))
        if not self.times[:-1]:
            k = np.abs(np.arange(-self.M, self.M + 1))
            self.momentum_scale = float(np.sum(k * np.abs(u) ** 2))
        self.actions.append(np.abs(u) ** 2)

    @property
    def action_array(self) -> np.ndarray:
        return np.array(self.actions)

    @property
    def norm_array(self) -> np.ndarray:
        return np.array(self.norms)

    def momentum_drift(self) -> float:
        """max_t |P(t) - P(0)| / sum_k |k| |u_k(0)|^2.

        P itself vanishes for data symmetric in k -> -k, so it is measured
        against the unsigned sum of the same terms.
        """
        p = np.asarray(self.momentum)
        return float(np.max(np.abs(p - p[0])) / max(self.momentum_scale, 1e-300))

    def relative_drift(self, name: str) -> float:
        """max_t |q(t) - q(0)| / |q(0)|, maximised over columns for 'norms'."""
        v = np.asarray(getattr(self, name), dtype=float)
        ref = np.maximum(np.abs(v[0]), 1e-300)
        return float(np.max(np.abs(v - v[0]) / ref))

    def to_csv(self, path, with_actions: bool = False, header: str | None = None) -> None:
        modes = [k for k in range(-self.M, self.M + 1) if k]
        names = ["t"] + [f"norm_{s:g}" for s in self.s_values] + ["energy", "momentum"]
        if with_actions:
            names += [f"I_{k}" for k in modes]
        with open(path, "w", newline="") as fh:
            if header:
                fh.write(f"# {header}\n")
            w = csv.writer(fh)
            w.writerow(names)
            for i, t in enumerate(self.times):
                row = [t] + self.norms[i] + [self.energy[i], self.momentum[i]]
                if with_actions:
                    a = self.actions[i]
                    row += [a[k + self.M] for k in modes]
                w.writerow([repr(float(x)) for x in row])


# vector fields ------------------------------------------------------------------


class WaterWavesField:
    """Nonlinear part of the truncated water-waves field in the u variable.

    Products are formed on a grid of 4M+4 points, enough for every product of
    at most four band-M factors projected back to |k| <= M to be alias free.
    """

    def __init__(self, M: int, degree: int):
        if degree not in (2, 3, 4):
            raise ValueError("degree must be 2, 3 or 4")
        self.M, self.degree = M, degree
        self.N = 4 * M + 4
        self.k = np.arange(-M, M + 1)
        a = np.abs(self.k).astype(float)
        self.a = a
        self.a14 = np.where(a > 0, a, 1.0) ** 0.25
        self.a14[M] = 0.0
        self.am14 = np.where(a > 0, a, 1.0) ** -0.25
        self.am14[M] = 0.0
        self.omega = dispersion(self.k)
        self._idx = self.k % self.N
        self.k2 = np.arange(-2 * M, 2 * M + 1)
        self._idx2 = self.k2 % self.N
        self._norm = self.N / np.sqrt(2 * np.pi)

    # transforms on stacks of dense coefficient arrays
    def _grid_band(self, c: np.ndarray, idx: np.ndarray) -> np.ndarray:
        buf = np.zeros(c.shape[:-1] + (self.N,), dtype=complex)
        buf[..., idx] = c
        return np.fft.ifft(buf, axis=-1).real * self._norm

    def _grid(self, c: np.ndarray) -> np.ndarray:
        return self._grid_band(c, self._idx)

    def _coef(self, v: np.ndarray) -> np.ndarray:
        spec = np.fft.fft(v, axis=-1)[..., self._idx] / self._norm
        spec[..., self.M] = 0.0
        return spec

    def split(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ub = np.conj(u[::-1])
        eta = self.a14 * (u + ub) / np.sqrt(2.0)
        psi = self.am14 * (u - ub) / (1j * np.sqrt(2.0))
        return eta, psi

    def combine(self, eta_t: np.ndarray, psi_t: np.ndarray) -> np.ndarray:
        return (self.am14 * eta_t + 1j * self.a14 * psi_t) / np.sqrt(2.0)

    def nonlinear_gradients(self, eta: np.ndarray, psi: np.ndarray):
        """Cubic-and-higher parts of (dH/deta, dH/dpsi), projected to |k| <= M."""
        k, a = self.k, self.a
        g = self._grid(np.stack([eta, 1j * k * psi, a * psi, -(k ** 2) * psi]))
        e, px, pd, pxx = g
        ge = np.zeros_like(eta)
        gp = np.zeros_like(psi)
        if self.degree >= 3:
            c = self._coef(np.stack([0.5 * (px * px - pd * pd), e * px, e * pd]))
            ge = ge + c[0]
            gp = gp - 1j * k * c[1] - a * c[2]
        if self.degree >= 4:
            ee = e * e
            # |D|(eta |D| psi) needs the full band-2M product, resolved since N > 4M
            q = np.fft.fft(e * pd)[self._idx2]
            qd = self._grid_band(np.abs(self.k2) * q, self._idx2) / self._norm
            c = self._coef(np.stack([ee * pd, ee * self._grid(k ** 2 * psi), e * qd, e * pxx * pd + pd * qd]))
            gp = gp - 0.5 * (k ** 2 * c[0] + a * c[1] - 2.0 * a * c[2])
            ge = ge + c[3]
        return ge, gp

    def __call__(self, u: np.ndarray) -> np.ndarray:
        eta, psi = self.split(u)
        ge, gp = self.nonlinear_gradients(eta, psi)
        return self.combine(gp, -ge)

    def energy(self, u: np.ndarray) -> float:
        """H2 + ... + H_degree of the truncated Hamiltonian (exact quadrature)."""
        total = float(np.sum(self.omega * np.abs(u) ** 2))
        if self.degree < 3:
            return total
        eta, psi = self.split(u)
        k, a = self.k, self.a
        e, px, pd, pxx = self._grid(np.stack([eta, 1j * k * psi, a * psi, -(k ** 2) * psi]))
        w = 2 * np.pi / self.N
        total += 0.5 * w * float(np.sum(e * (px * px - pd * pd)))
        if self.degree >= 4:
            f = e * pd
            q = np.fft.fft(f)[self._idx2]
            fd = self._grid_band(np.abs(self.k2) * q, self._idx2) / self._norm
            total += 0.5 * w * float(np.sum(e * e * pxx * pd + f * fd))
        return total


class ZakharovDyachenkoField:
    """Nonlinear part of the field of H2 + H_ZD, evaluated through its polynomial form."""

    def __init__(self, M: int):
        self.M = M
        self.H4 = explicit_hzd4(M)
        self.H = quadratic_hamiltonian(M) + self.H4
        self._vf = hamiltonian_vector_field(self.H4)
        self.omega = dispersion(np.arange(-M, M + 1))

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self._vf.apply(u, self.M)

    def energy(self, u: np.ndarray) -> float:
        return float(self.H.evaluate(SpectralField(self.M, u)).real)


# integrators ---------------------------------------------------------------------


def _step_rk4(N: Callable, u: np.ndarray, omega: np.ndarray, dt: float, cfg) -> np.ndarray:
    # integrating factor: v = exp(i omega t) u
    h = np.exp(-0.5j * omega * dt)
    f = np.exp(-1j * omega * dt)
    k1 = N(u)
    k2 = N(h * (u + 0.5 * dt * k1))
    k3 = N(h * u + 0.5 * dt * k2)
    k4 = N(f * u + dt * h * k3)
    return f * u + dt / 6.0 * (f * k1 + 2.0 * h * (k2 + k3) + k4)


def _step_midpoint(N: Callable, u: np.ndarray, omega: np.ndarray, dt: float, cfg) -> np.ndarray:
    h = np.exp(-0.5j * omega * dt)
    v0 = h * u
    v1 = v0 + dt * N(v0)
    scale = max(float(np.max(np.abs(v0))), 1e-300)
    for _ in range(cfg.max_iter):
        nxt = v0 + dt * N(0.5 * (v0 + v1))
        res = float(np.max(np.abs(nxt - v1)))
        v1 = nxt
        if res <= cfg.tol * scale:
            break
    else:
        raise ConvergenceError(f"fixed point residual {res:.3e} after {cfg.max_iter} iterations")
    return h * v1


_STEPPERS = {"rk4": _step_rk4, "implicit-midpoint": _step_midpoint}


def _as_array(initial) -> np.ndarray:
    if isinstance(initial, SpectralField):
        return np.array(initial.coeffs, dtype=complex)
    u = np.array(initial, dtype=complex)
    if u.ndim != 1 or len(u) % 2 == 0:
        raise ValueError("initial datum must be a SpectralField or odd-length amplitude array")
    if u[(len(u) - 1) // 2] != 0:
        raise ValueError("initial datum has a zero-mode amplitude")
    return u


def _run(field_, u0: np.ndarray, cfg: IntegratorConfig, guard_s: float = 0.0) -> TrajectoryRecord:
    M = (len(u0) - 1) // 2
    rec = TrajectoryRecord(M, tuple(cfg.s_values))
    step = _STEPPERS[cfg.scheme]
    n0 = _hs(u0, guard_s)
    if n0 > AMPLITUDE_GUARD:
        raise ValueError(f"initial norm {n0:.3g} exceeds the small-amplitude guard {AMPLITUDE_GUARD}")
    u = u0.copy()
    rec.append(0.0, u, field_.energy(u))
    for i in range(1, cfg.steps + 1):
        u_new = step(field_, u, field_.omega, cfg.dt, cfg)
        n = _hs(u_new, guard_s)
        if not np.isfinite(n) or n > BLOWUP_FACTOR * max(n0, 1e-300) and n0 > 0:
            rec.final = u
            rec.aborted = f"norm {n:.3g} exceeded {BLOWUP_FACTOR:g} x initial at t = {i * cfg.dt:.6g}"
            raise BlowupError(rec.aborted, rec)
        u = u_new
        if i % cfg.record_every == 0 or i == cfg.steps:
            rec.append(i * cfg.dt, u, field_.energy(u))
    rec.final = u
    return rec


def integrate_ww(initial, degree: int, cfg: IntegratorConfig) -> TrajectoryRecord:
    """Flow of H2 + H3 (+ H4) truncated at the size of ``initial``.

    ``degree = 2`` switches off the nonlinear terms (exact linear flow).
    """
    u0 = _as_array(initial)
    return _run(WaterWavesField((len(u0) - 1) // 2, degree), u0, cfg)


def integrate_zd_numeric(initial, cfg: IntegratorConfig) -> TrajectoryRecord:
    """Numerical flow of H2 + H_ZD."""
    u0 = _as_array(initial)
    return _run(ZakharovDyachenkoField((len(u0) - 1) // 2), u0, cfg)


def integrate_zd_exact(initial, T: float) -> np.ndarray:
    """z_n(T) = exp(-i Omega_n(I) T) z_n(0) with I the initial actions."""
    u0 = _as_array(initial)
    M = (len(u0) - 1) // 2
    nz = np.arange(-M, M + 1) != 0
    I = np.abs(u0[nz]) ** 2
    om = zd_frequencies(I, M)
    out = np.zeros_like(u0)
    out[nz] = np.exp(-1j * om * T) * u0[nz]
    return out


# experiments -----------------------------------------------------------------------


def random_initial(eps: float, s: float, M: int, seed: int = 0) -> np.ndarray:
    """Random phases, |u_k| proportional to exp(-|k|/4), Hdot^s norm equal to eps."""
    rng = np.random.default_rng(seed)
    k = np.arange(-M, M + 1)
    u = np.exp(-np.abs(k) / 4.0) * np.exp(2j * np.pi * rng.random(2 * M + 1))
    u[M] = 0.0
    n = _hs(u, s)
    return u * (eps / n)


def norm_growth_experiment(eps: float, s: float, M: int, horizon: float, cfg: IntegratorConfig,
                           seed: int = 0, wall_budget: float | None = None, c: float = 1.0,
                           shift: float = 0.0) -> dict:
    """sup_t ||u(t)||_s / ||u(0)||_s along the quartic water-waves flow.

    Runs up to min(horizon, c eps^-3), stopping early once ``wall_budget``
    seconds have elapsed. Exploratory: blowup is reported, not raised.
    ``shift`` translates the initial datum in x (u_k -> exp(i k shift) u_k),
    which is a symmetry of the flow; a global phase u -> exp(i a) u is not,
    since the cubic part is not gauge invariant.
    """
    if eps > 0.1:
        raise ValueError("eps must be at most 0.1")
    if eps == 0:
        return {"ratio": 1.0, "t_reached": 0.0, "T_target": 0.0, "blowup": None}
    T = min(horizon, c * eps ** -3)
    u = random_initial(eps, s, M, seed) * np.exp(1j * np.arange(-M, M + 1) * shift)
    F = WaterWavesField(M, 4)
    step = _STEPPERS[cfg.scheme]
    n0 = _hs(u, s)
    ratio, t = 1.0, 0.0
    start = time.perf_counter()
    blowup = None
    nsteps = int(round(T / cfg.dt))
    for i in range(1, nsteps + 1):
        u = step(F, u, F.omega, cfg.dt, cfg)
        r = _hs(u, s) / n0
        if not np.isfinite(r) or r > BLOWUP_FACTOR:
            blowup = f"ratio {r:.3g} at t = {i * cfg.dt:.6g}"
            break
        ratio = max(ratio, r)
        t = i * cfg.dt
        if wall_budget is not None and time.perf_counter() - start > wall_budget:
            break
    return {"ratio": ratio, "t_reached": t, "T_target": T, "blowup": blowup}
