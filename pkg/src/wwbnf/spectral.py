"""Truncated Fourier fields on the torus T = R / 2piZ.

Convention: a zero-average function is written

    f(x) = sum_{0 < |k| <= M} f_k exp(i k x) / sqrt(2 pi),
    f_k  = (2 pi)^(-1/2) int_T f(x) exp(-i k x) dx,

so that int_T |f|^2 dx = sum_k |f_k|^2 (Parseval without extra factors).
Coefficients are stored in a dense array of length 2M+1 indexed by k + M;
the centre slot (k = 0) is always zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

SQRT_2PI = np.sqrt(2.0 * np.pi)


class ZeroModeError(ValueError):
    """Raised when a field is given a nonzero k = 0 amplitude."""


class TruncationError(ValueError):
    """Raised when fields with incompatible truncations are combined."""


def mode_numbers(M: int) -> np.ndarray:
    """Integer wavenumbers -M..M (including the unused zero slot)."""
    return np.arange(-M, M + 1)


def dispersion(k) -> np.ndarray:
    """Linear frequency omega(k) = sqrt(|k|) of deep-water gravity waves."""
    return np.sqrt(np.abs(np.asarray(k, dtype=float)))


def _abs_power(k: np.ndarray, p: float) -> np.ndarray:
    # |k|^p with the k = 0 slot mapped to 0 (it never carries amplitude)
    out = np.zeros(k.shape, dtype=float)
    nz = k != 0
    out[nz] = np.abs(k[nz]).astype(float) ** p
    return out


@dataclass(frozen=True)
class SpectralField:
    """Zero-average periodic field truncated at |k| <= M.

    Parameters
    ----------
    M : int
        Truncation.
    coeffs : ndarray
        Complex amplitudes, ``coeffs[k + M] = f_k``. The k = 0 entry must
        vanish.
    real : bool
        Whether the field is real valued, i.e. ``f_{-k} = conj(f_k)``.
    """

    M: int
    coeffs: np.ndarray = field(repr=False)
    real: bool = False

    def __post_init__(self):
        if self.M < 1:
            raise ValueError(f"truncation must be positive, got {self.M}")
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (2 * self.M + 1,):
            raise ValueError(f"expected {2 * self.M + 1} coefficients, got shape {c.shape}")
        if c[self.M] != 0:
            raise ZeroModeError("zero-mode amplitude is not allowed")
        if self.real and not np.allclose(c, np.conj(c[::-1]), rtol=0, atol=1e-12 * max(1.0, np.abs(c).max())):
            raise ValueError("reality flag set but f_{-k} != conj(f_k)")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, M: int, real: bool = True) -> "SpectralField":
        return cls(M, np.zeros(2 * M + 1, dtype=complex), real)

    @classmethod
    def from_modes(cls, M: int, amplitudes: Mapping[int, complex], real: bool = False) -> "SpectralField":
        """Build from a sparse ``{k: f_k}`` mapping."""
        c = np.zeros(2 * M + 1, dtype=complex)
        for k, a in amplitudes.items():
            if k == 0:
                raise ZeroModeError("zero-mode amplitude is not allowed")
            if abs(k) > M:
                raise TruncationError(f"mode {k} exceeds truncation {M}")
            c[k + M] = a
        return cls(M, c, real)

    @classmethod
    def from_grid(cls, values: np.ndarray, M: int, real: bool | None = None) -> "SpectralField":
        """Project grid samples on [0, 2pi) onto modes 0 < |k| <= M.

        The mean of ``values`` is discarded.
        """
        full = grid_to_coeffs(values, M)
        full[M] = 0.0
        if real is None:
            real = bool(np.isrealobj(values))
        if real:
            full = 0.5 * (full + np.conj(full[::-1]))
        return cls(M, full, real)

    # accessors ----------------------------------------------------------
    @property
    def k(self) -> np.ndarray:
        return mode_numbers(self.M)

    def __getitem__(self, k: int) -> complex:
        if k == 0 or abs(k) > self.M:
            raise TruncationError(f"mode {k} not in 0 < |k| <= {self.M}")
        return complex(self.coeffs[k + self.M])

    def to_grid(self, npts: int | None = None) -> np.ndarray:
        """Values on the uniform grid x_j = 2 pi j / npts."""
        npts = npts or 4 * self.M + 2
        vals = coeffs_to_grid(self.coeffs, npts)
        return vals.real if self.real else vals

    def conj(self) -> "SpectralField":
        """The field conj(f(x)), whose k-th amplitude is conj(f_{-k})."""
        return SpectralField(self.M, np.conj(self.coeffs[::-1]), self.real)

    def resize(self, M: int) -> "SpectralField":
        """Zero-pad or truncate to a new truncation."""
        c = np.zeros(2 * M + 1, dtype=complex)
        m = min(M, self.M)
        c[M - m:M + m + 1] = self.coeffs[self.M - m:self.M + m + 1]
        return SpectralField(M, c, self.real)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same(self, other)
        return SpectralField(self.M, self.coeffs + other.coeffs, self.real and other.real)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same(self, other)
        return SpectralField(self.M, self.coeffs - other.coeffs, self.real and other.real)

    def __mul__(self, a: complex) -> "SpectralField":
        real = self.real and np.isreal(a)
        return SpectralField(self.M, self.coeffs * a, bool(real))

    __rmul__ = __mul__


def _check_same(f: SpectralField, g: SpectralField) -> None:
    if f.M != g.M:
        raise TruncationError(f"truncation mismatch: {f.M} vs {g.M}")


# grid transforms --------------------------------------------------------

def coeffs_to_grid(coeffs: np.ndarray, npts: int) -> np.ndarray:
    """Evaluate ``sum_k c_k e^{ikx}/sqrt(2pi)`` on ``npts`` equispaced points.

    ``coeffs`` has odd length 2L+1 (index k + L); requires npts > 2L.
    """
    L = (len(coeffs) - 1) // 2
    if npts <= 2 * L:
        raise ValueError(f"grid of {npts} points cannot resolve |k| <= {L}")
    buf = np.zeros(npts, dtype=complex)
    k = np.arange(-L, L + 1)
    buf[k % npts] = coeffs
    return np.fft.ifft(buf) * (npts / SQRT_2PI)


def grid_to_coeffs(values: np.ndarray, L: int) -> np.ndarray:
    """Fourier amplitudes ``f_k`` for |k| <= L (zero mode included) from samples."""
    npts = len(values)
    if npts <= 2 * L:
        raise ValueError(f"grid of {npts} points cannot resolve |k| <= {L}")
    spec = np.fft.fft(values) * (SQRT_2PI / npts)
    k = np.arange(-L, L + 1)
    return spec[k % npts]


def quadrature(values: np.ndarray) -> complex:
    """Trapezoid rule for int_T f dx on a uniform periodic grid."""
    return np.sum(values) * (2.0 * np.pi / len(values))


# operations --------------------------------------------------------------

def sobolev_norm(f: SpectralField, s: float) -> float:
    """Homogeneous norm (sum_k |k|^{2s} |f_k|^2)^{1/2}."""
    w = _abs_power(f.k, 2.0 * s)
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))


def apply_multiplier(f: SpectralField, m: Callable[[np.ndarray], np.ndarray]) -> SpectralField:
    """Fourier multiplier: ``(m(D) f)_k = m(k) f_k``.

    ``m`` is called with the integer array of nonzero modes. The result is
    flagged real when ``f`` is real and ``m(-k) = conj(m(k))``.
    """
    k = f.k
    nz = k != 0
    vals = np.zeros(k.shape, dtype=complex)
    vals[nz] = np.asarray(m(k[nz]), dtype=complex)
    out = f.coeffs * vals
    real = f.real and np.allclose(vals, np.conj(vals[::-1]), rtol=1e-14, atol=0)
    return SpectralField(f.M, out, bool(real))


def abs_d(p: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """Multiplier symbol of |D|^p."""
    return lambda k: np.abs(k).astype(float) ** p


def d_dx(k: np.ndarray) -> np.ndarray:
    """Multiplier symbol of the x-derivative."""
    return 1j * k


def convolve(fc: np.ndarray, gc: np.ndarray, L: int | None = None) -> np.ndarray:
    """Alias-free Fourier amplitudes of the product f g, for |k| <= L.

    Inputs are dense amplitude arrays (index k + M, any odd length); the
    output includes the zero mode.
    """
    Mf = (len(fc) - 1) // 2
    Mg = (len(gc) - 1) // 2
    L = Mf + Mg if L is None else L
    npts = max(Mf + Mg + L + 1, 2 * max(Mf, Mg, L) + 1)
    npts += npts % 2
    vals = coeffs_to_grid(fc, npts) * coeffs_to_grid(gc, npts)
    return grid_to_coeffs(vals, L)


def pointwise_product(f: SpectralField, g: SpectralField, out_truncation: int | None = None) -> SpectralField:
    """Spectral product projected onto 0 < |k| <= out_truncation.

    ``result_k = (2pi)^{-1/2} sum_{k1+k2=k} f_{k1} g_{k2}``, computed on a
    padded grid so that no aliased mode reaches the output. The mean of the
    product is dropped (fields live in the zero-average space).
    """
    L = out_truncation or max(f.M, g.M)
    c = convolve(f.coeffs, g.coeffs, L)
    c[L] = 0.0
    real = f.real and g.real
    if real:
        c = 0.5 * (c + np.conj(c[::-1]))
    return SpectralField(L, c, real)


# real <-> complex symplectic variables -------------------------------------

def to_complex(eta: SpectralField, psi: SpectralField) -> SpectralField:
    """u = (|D|^{-1/4} eta + i |D|^{1/4} psi) / sqrt(2)."""
    _check_same(eta, psi)
    if not (eta.real and psi.real):
        raise ValueError("to_complex expects real eta and psi")
    k = eta.k
    u = (_abs_power(k, -0.25) * eta.coeffs + 1j * _abs_power(k, 0.25) * psi.coeffs) / np.sqrt(2.0)
    return SpectralField(eta.M, u, real=False)


def from_complex(u: SpectralField) -> tuple[SpectralField, SpectralField]:
    """Inverse of :func:`to_complex`; returns real ``(eta, psi)``."""
    k = u.k
    c = u.coeffs
    cbar = np.conj(c[::-1])  # amplitudes of conj(u(x))
    eta = _abs_power(k, 0.25) * (c + cbar) / np.sqrt(2.0)
    psi = -1j * _abs_power(k, -0.25) * (c - cbar) / np.sqrt(2.0)
    # symmetrize away rounding so the reality flag holds exactly
    eta = 0.5 * (eta + np.conj(eta[::-1]))
    psi = 0.5 * (psi + np.conj(psi[::-1]))
    return SpectralField(u.M, eta, real=True), SpectralField(u.M, psi, real=True)
