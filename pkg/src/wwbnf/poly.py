"""Sparse homogeneous polynomials in the complex mode variables u_k, conj(u_k).

A monomial is a multiset of signed modes (k, s): s = +1 stands for u_k and
s = -1 for conj(u_k).  Internally a signed mode is an integer code whose
natural order is the (k, s) order, so a monomial is a sorted row of codes and
a degree-d block of a Hamiltonian is an (n, d) code array plus a coefficient
vector.  Up to four codes are packed into one int64 key for aggregation.

Bracket convention: {F, H} is the time derivative of F along the flow
du_k/dt = -i dH/d(conj u_k), i.e.

    {F, H} = i sum_k (dH/du_k dF/d(conj u_k) - dH/d(conj u_k) dF/du_k).

With it, {m, H2} = -i (sum s_j omega(k_j)) m for H2 = sum_k omega_k |u_k|^2.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .resonance import exact_zero_rows
from .spectral import SpectralField, TruncationError, dispersion

MAX_MODE = 4095
_BITS = 16
_MASK = (1 << _BITS) - 1
_PACKED_DEGREE = 4  # rows of up to four codes fit one int64 key


class ResonantDivisorError(ArithmeticError):
    """A cohomological divisor vanished (an exact cubic resonance)."""


def encode(modes, signs) -> np.ndarray:
    modes = np.asarray(modes, dtype=np.int64)
    signs = np.asarray(signs, dtype=np.int64)
    if np.any(np.abs(modes) > MAX_MODE):
        raise ValueError(f"modes beyond {MAX_MODE} are not representable")
    return 2 * (modes + MAX_MODE) + (signs > 0)


def decode(codes) -> tuple[np.ndarray, np.ndarray]:
    codes = np.asarray(codes, dtype=np.int64)
    return (codes >> 1) - MAX_MODE, np.where(codes & 1, 1, -1)


def _pack(rows: np.ndarray) -> np.ndarray:
    key = np.zeros(rows.shape[0], dtype=np.int64)
    for j in range(rows.shape[1]):
        key |= rows[:, j] << (_BITS * j)
    return key


def _unpack(keys: np.ndarray, d: int) -> np.ndarray:
    return np.stack([(keys >> (_BITS * j)) & _MASK for j in range(d)], axis=1) if d else np.zeros((len(keys), 0), np.int64)


def _canonical_block(rows: np.ndarray, coeffs: np.ndarray, drop_zeros: bool = True):
    """Sort rows, merge duplicates (summing coefficients)."""
    d = rows.shape[1]
    if rows.shape[0] == 0:
        return np.zeros((0, d), dtype=np.int64), np.zeros(0, dtype=complex)
    rows = np.sort(rows, axis=1)
    if d <= _PACKED_DEGREE:
        keys, inv = np.unique(_pack(rows), return_inverse=True)
        uniq = _unpack(keys, d)
    else:
        uniq, inv = np.unique(rows, axis=0, return_inverse=True)
    inv = inv.ravel()
    c = np.bincount(inv, weights=coeffs.real, minlength=len(uniq)) + 1j * np.bincount(
        inv, weights=coeffs.imag, minlength=len(uniq))
    if drop_zeros:
        nz = c != 0
        uniq, c = uniq[nz], c[nz]
    return uniq, c


@dataclass(frozen=True, order=True)
class Monomial:
    """Canonically ordered multiset of signed modes ((k, s), ...)."""

    factors: tuple[tuple[int, int], ...]

    @classmethod
    def of(cls, signs: Sequence[int], modes: Sequence[int]) -> "Monomial":
        if len(signs) != len(modes):
            raise ValueError("signs and modes must have equal length")
        if any(int(k) == 0 for k in modes):
            raise ValueError("zero mode in monomial")
        return cls(tuple(sorted((int(k), int(s)) for s, k in zip(signs, modes))))

    @property
    def degree(self) -> int:
        return len(self.factors)

    @property
    def signs(self) -> tuple[int, ...]:
        return tuple(s for _, s in self.factors)

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.factors)

    @property
    def momentum(self) -> int:
        return sum(s * k for k, s in self.factors)

    @property
    def phase(self) -> float:
        return float(sum(s * np.sqrt(abs(k)) for k, s in self.factors))

    def conj(self) -> "Monomial":
        return Monomial(tuple(sorted((k, -s) for k, s in self.factors)))

    def __str__(self) -> str:
        return " ".join(f"{'u' if s > 0 else 'ū'}{k}" for k, s in self.factors)


def _as_monomial(m) -> Monomial:
    if isinstance(m, Monomial):
        return m
    return Monomial(tuple(sorted((int(k), int(s)) for k, s in m)))


class PolyHamiltonian:
    """Sparse polynomial Hamiltonian graded by degree.

    Every stored monomial has zero momentum; coefficients are kept on the
    canonical representative of each monomial (summed over orderings).
    """

    def __init__(self, blocks: Mapping[int, tuple[np.ndarray, np.ndarray]] | None = None, *, check: bool = True):
        self._blocks: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for d, (rows, coeffs) in (blocks or {}).items():
            rows = np.asarray(rows, dtype=np.int64).reshape(-1, d)
            coeffs = np.asarray(coeffs, dtype=complex).ravel()
            rows, coeffs = _canonical_block(rows, coeffs)
            if len(coeffs):
                self._blocks[d] = (rows, coeffs)
        if check:
            self._check_momentum()

    def _check_momentum(self) -> None:
        for d, (rows, _) in self._blocks.items():
            k, s = decode(rows)
            bad = np.nonzero((k * s).sum(axis=1) != 0)[0]
            if bad.size:
                m = self._monomial(d, bad[0])
                raise ValueError(f"monomial {m} has momentum {m.momentum}")
            if np.any(k == 0):
                raise ValueError("zero mode in Hamiltonian")

    # construction -----------------------------------------------------
    @classmethod
    def from_terms(cls, terms: Mapping | Iterable) -> "PolyHamiltonian":
        """From ``{monomial: coefficient}`` where a monomial is a Monomial or
        an iterable of (k, s) pairs."""
        items = terms.items() if isinstance(terms, Mapping) else terms
        by_deg: dict[int, tuple[list, list]] = {}
        for m, c in items:
            m = _as_monomial(m)
            k, s = zip(*m.factors) if m.factors else ((), ())
            rows, cs = by_deg.setdefault(m.degree, ([], []))
            rows.append(encode(k, s))
            cs.append(c)
        return cls({d: (np.array(r).reshape(-1, d), np.array(c)) for d, (r, c) in by_deg.items()})

    @classmethod
    def zero(cls) -> "PolyHamiltonian":
        return cls({})

    # access ---------------------------------------------------------------
    @property
    def degrees(self) -> list[int]:
        return sorted(self._blocks)

    def block(self, d: int) -> tuple[np.ndarray, np.ndarray]:
        """(codes, coefficients) of the degree-d part (empty arrays if absent)."""
        if d in self._blocks:
            return self._blocks[d]
        return np.zeros((0, d), dtype=np.int64), np.zeros(0, dtype=complex)

    def degree_part(self, d: int) -> "PolyHamiltonian":
        return PolyHamiltonian({d: self.block(d)}, check=False)

    def __len__(self) -> int:
        return sum(len(c) for _, c in self._blocks.values())

    def _monomial(self, d: int, i: int) -> Monomial:
        k, s = decode(self._blocks[d][0][i])
        return Monomial(tuple((int(a), int(b)) for a, b in zip(k, s)))

    def terms(self) -> Iterator[tuple[Monomial, complex]]:
        for d in self.degrees:
            rows, coeffs = self._blocks[d]
            k, s = decode(rows)
            for i in range(len(coeffs)):
                yield Monomial(tuple(zip(k[i].tolist(), s[i].tolist()))), complex(coeffs[i])

    def as_dict(self) -> dict[Monomial, complex]:
        return dict(self.terms())

    def coefficient(self, m) -> complex:
        m = _as_monomial(m)
        if m.degree not in self._blocks:
            return 0j
        k, s = zip(*m.factors)
        row = np.sort(encode(k, s))
        rows, coeffs = self._blocks[m.degree]
        if m.degree <= _PACKED_DEGREE:
            keys = _pack(rows)
            key = _pack(row[None, :])[0]
            i = np.searchsorted(keys, key)
            if i < len(keys) and keys[i] == key:
                return complex(coeffs[i])
            return 0j
        hit = np.nonzero(np.all(rows == row, axis=1))[0]
        return complex(coeffs[hit[0]]) if hit.size else 0j

    @property
    def max_mode(self) -> int:
        out = 0
        for rows, _ in self._blocks.values():
            if rows.size:
                out = max(out, int(np.abs(decode(rows)[0]).max()))
        return out

    def max_abs(self) -> float:
        return max((float(np.abs(c).max()) for _, c in self._blocks.values()), default=0.0)

    # algebra ----------------------------------------------------------------
    def _combine(self, other: "PolyHamiltonian", sign: float) -> "PolyHamiltonian":
        blocks = {}
        for d in set(self._blocks) | set(other._blocks):
            r1, c1 = self.block(d)
            r2, c2 = other.block(d)
            blocks[d] = (np.concatenate([r1, r2]), np.concatenate([c1, sign * c2]))
        return PolyHamiltonian(blocks, check=False)

    def __add__(self, other: "PolyHamiltonian") -> "PolyHamiltonian":
        return self._combine(other, 1.0)

    def __sub__(self, other: "PolyHamiltonian") -> "PolyHamiltonian":
        return self._combine(other, -1.0)

    def __mul__(self, a: complex) -> "PolyHamiltonian":
        return PolyHamiltonian({d: (r, a * c) for d, (r, c) in self._blocks.items()}, check=False)

    __rmul__ = __mul__

    def __neg__(self) -> "PolyHamiltonian":
        return self * -1.0

    def map_coefficients(self, fn) -> "PolyHamiltonian":
        """Apply ``fn(signs, modes, coeffs) -> coeffs`` blockwise (arrays)."""
        blocks = {}
        for d, (rows, c) in self._blocks.items():
            k, s = decode(rows)
            blocks[d] = (rows, fn(s, k, c))
        return PolyHamiltonian(blocks, check=False)

    def select(self, mask_fn) -> "PolyHamiltonian":
        """Keep monomials where ``mask_fn(signs, modes) -> bool array`` holds."""
        blocks = {}
        for d, (rows, c) in self._blocks.items():
            k, s = decode(rows)
            keep = np.asarray(mask_fn(s, k), dtype=bool)
            blocks[d] = (rows[keep], c[keep])
        return PolyHamiltonian(blocks, check=False)

    def restrict(self, M: int) -> "PolyHamiltonian":
        """Galerkin restriction: keep monomials whose modes all satisfy |k| <= M."""
        return self.select(lambda s, k: np.all(np.abs(k) <= M, axis=1))

    def conj_flip(self) -> "PolyHamiltonian":
        """The polynomial conj(H(u)): signs flipped, coefficients conjugated."""
        blocks = {d: (r ^ 1, np.conj(c)) for d, (r, c) in self._blocks.items()}
        return PolyHamiltonian(blocks, check=False)

    def max_abs_diff(self, other: "PolyHamiltonian") -> float:
        return (self - other).max_abs()

    def is_real(self, tol: float = 1e-12) -> bool:
        scale = max(self.max_abs(), 1.0)
        return self.max_abs_diff(self.conj_flip()) <= tol * scale

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyHamiltonian):
            return NotImplemented
        if self.degrees != other.degrees:
            return False
        for d in self.degrees:
            r1, c1 = self._blocks[d]
            r2, c2 = other._blocks[d]
            if r1.shape != r2.shape or not np.array_equal(r1, r2) or not np.array_equal(c1, c2):
                return False
        return True

    __hash__ = None

    # evaluation --------------------------------------------------------------
    def _value_table(self, u: SpectralField) -> np.ndarray:
        if self.max_mode > u.M:
            raise TruncationError(f"Hamiltonian has modes up to {self.max_mode}, field truncation is {u.M}")
        return value_table(u)

    def evaluate(self, u: SpectralField) -> complex:
        """Sum of coefficient times product of u_k^s over all terms."""
        table = self._value_table(u)
        total = 0j
        for rows, c in self._blocks.values():
            total += np.dot(c, np.prod(table[rows], axis=1))
        return complex(total)

    def gradient(self, u: SpectralField, sign: int, k: int) -> complex:
        """Formal partial derivative d/du_k (sign=+1) or d/d(conj u_k) (sign=-1)."""
        table = self._value_table(u)
        target = int(encode(k, sign))
        total = 0j
        for rows, c in self._blocks.values():
            vals = table[rows]
            for j in range(rows.shape[1]):
                hit = rows[:, j] == target
                if hit.any():
                    others = np.delete(vals[hit], j, axis=1)
                    total += np.dot(c[hit], np.prod(others, axis=1))
        return complex(total)

    # serialization ------------------------------------------------------------
    def to_text(self) -> str:
        """One term per line: ``deg s1 k1 ... sd kd re im``."""
        buf = io.StringIO()
        for m, c in self.terms():
            fac = " ".join(f"{'+' if s > 0 else '-'} {k}" for k, s in m.factors)
            buf.write(f"{m.degree} {fac} {c.real!r} {c.imag!r}\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "PolyHamiltonian":
        terms = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tok = line.split()
            try:
                d = int(tok[0])
                if len(tok) != 2 * d + 3:
                    raise ValueError(f"expected {2 * d + 3} fields, got {len(tok)}")
                signs = [{"+": 1, "-": -1}[t] for t in tok[1:2 * d:2]]
                modes = [int(t) for t in tok[2:2 * d + 1:2]]
                c = complex(float(tok[-2]), float(tok[-1]))
            except (KeyError, ValueError, IndexError) as exc:
                raise ValueError(f"line {lineno}: cannot parse term {line!r}: {exc}") from None
            terms.append((Monomial.of(signs, modes), c))
        return cls.from_terms(terms)

    def __repr__(self) -> str:
        sizes = ", ".join(f"deg {d}: {len(self._blocks[d][1])}" for d in self.degrees)
        return f"PolyHamiltonian({sizes})"


def value_table(u: SpectralField) -> np.ndarray:
    """Lookup array mapping signed-mode codes to u_k or conj(u_k)."""
    table = np.zeros(2 * (2 * MAX_MODE + 1) + 2, dtype=complex)
    k = u.k
    nz = k != 0
    table[encode(k[nz], 1)] = u.coeffs[nz]
    table[encode(k[nz], -1)] = np.conj(u.coeffs[nz])
    return table


def quadratic_hamiltonian(M: int) -> PolyHamiltonian:
    """H2 = sum_{0<|j|<=M} omega_j u_j conj(u_j)."""
    j = np.concatenate([np.arange(-M, 0), np.arange(1, M + 1)])
    rows = np.stack([encode(j, -1), encode(j, 1)], axis=1)
    return PolyHamiltonian({2: (rows, dispersion(j).astype(complex))})


# Poisson bracket --------------------------------------------------------------

def _explode(rows: np.ndarray, coeffs: np.ndarray, sign: int, max_mode: int | None):
    """Rows (var, reduced row, coeff) for every occurrence of a factor with ``sign``.

    ``var`` is the code of the u_k (+) partner so that both sides join on it.
    """
    d = rows.shape[1]
    out_var, out_red, out_c = [], [], []
    for j in range(d):
        col = rows[:, j]
        hit = (col & 1) == (1 if sign > 0 else 0)
        if not hit.any():
            continue
        red = np.delete(rows[hit], j, axis=1)
        c = coeffs[hit]
        if max_mode is not None and d > 1:
            ok = np.all(np.abs(decode(red)[0]) <= max_mode, axis=1)
            red, c, v = red[ok], c[ok], col[hit][ok]
        else:
            v = col[hit]
        out_var.append(v | 1)
        out_red.append(red)
        out_c.append(c)
    if not out_var:
        return np.zeros(0, np.int64), np.zeros((0, d - 1), np.int64), np.zeros(0, complex)
    return np.concatenate(out_var), np.concatenate(out_red), np.concatenate(out_c)


def _contract(A: tuple, B: tuple, max_mode: int | None) -> tuple[np.ndarray, np.ndarray]:
    """sum_k dA/du_k * dB/d(conj u_k) for two homogeneous blocks."""
    va, ra, ca = _explode(*A, sign=1, max_mode=max_mode)
    vb, rb, cb = _explode(*B, sign=-1, max_mode=max_mode)
    da, db = ra.shape[1], rb.shape[1]
    if len(va) == 0 or len(vb) == 0:
        return np.zeros((0, da + db), np.int64), np.zeros(0, complex)
    oa, ob = np.argsort(va, kind="stable"), np.argsort(vb, kind="stable")
    va, ra, ca = va[oa], ra[oa], ca[oa]
    vb, rb, cb = vb[ob], rb[ob], cb[ob]
    ua, sa, na = np.unique(va, return_index=True, return_counts=True)
    ub, sb, nb = np.unique(vb, return_index=True, return_counts=True)
    common, ia, ib = np.intersect1d(ua, ub, assume_unique=True, return_indices=True)
    if common.size == 0:
        return np.zeros((0, da + db), np.int64), np.zeros(0, complex)
    sa, na, sb, nb = sa[ia], na[ia], sb[ib], nb[ib]
    npair = na * nb
    total = int(npair.sum())
    g = np.repeat(np.arange(len(common)), npair)
    off = np.arange(total) - np.repeat(np.cumsum(npair) - npair, npair)
    ia = sa[g] + off // nb[g]
    ib = sb[g] + off % nb[g]
    rows = np.concatenate([ra[ia], rb[ib]], axis=1)
    return rows, ca[ia] * cb[ib]


def poisson_bracket(F: PolyHamiltonian, H: PolyHamiltonian, max_mode: int | None = None,
                    prune: float = 1e-15) -> PolyHamiltonian:
    """{F, H} = i sum_k (dH/du_k dF/dū_k - dH/dū_k dF/du_k).

    If ``max_mode`` is given, only output monomials with all |k| <= max_mode
    are formed (the summed index k is unrestricted). Coefficients with
    magnitude below ``prune`` are dropped.
    """
    acc: dict[int, list] = {}
    for df in F.degrees:
        for dh in H.degrees:
            d = df + dh - 2
            r1, c1 = _contract(H.block(dh), F.block(df), max_mode)
            r2, c2 = _contract(F.block(df), H.block(dh), max_mode)
            rows, cs = acc.setdefault(d, ([], []))
            rows += [r1, r2]
            cs += [1j * c1, -1j * c2]
    blocks = {}
    for d, (rows, cs) in acc.items():
        r, c = _canonical_block(np.concatenate(rows).reshape(-1, d), np.concatenate(cs))
        keep = np.abs(c) >= prune
        blocks[d] = (r[keep], c[keep])
    return PolyHamiltonian(blocks, check=False)


# vector fields -------------------------------------------------------------------

class VectorFieldSpec:
    """Hamiltonian vector field X_H = sum -i s dH/du_k^{-s} d/du_k^{s}.

    Only the s = + components are stored; the s = - components are their
    conjugate flips (real-to-real structure).  Calling the object on a field
    ``u`` returns du/dt as a SpectralField.
    """

    def __init__(self, H: PolyHamiltonian):
        self.hamiltonian = H
        self._parts = []
        for d in H.degrees:
            rows, c = H.block(d)
            for j in range(d):
                hit = (rows[:, j] & 1) == 0  # conj factor at slot j
                if not hit.any():
                    continue
                target = decode(rows[hit, j])[0]
                others = np.delete(rows[hit], j, axis=1)
                self._parts.append((target, others, -1j * c[hit]))

    def component(self, sign: int, k: int) -> dict[Monomial, complex]:
        """Polynomial coefficients of the component on u_k^sign."""
        out: dict[Monomial, complex] = {}
        for target, others, c in self._parts:
            for i in np.nonzero(target == k)[0]:
                kk, ss = decode(others[i])
                m = Monomial(tuple(sorted(zip(kk.tolist(), ss.tolist()))))
                out[m] = out.get(m, 0j) + complex(c[i])
        if sign < 0:
            out = {m.conj(): np.conj(c) for m, c in out.items()}
        return {m: c for m, c in out.items() if c != 0}

    def __call__(self, u: SpectralField) -> SpectralField:
        return SpectralField(u.M, self.apply(u.coeffs, u.M))

    def apply(self, coeffs: np.ndarray, M: int) -> np.ndarray:
        """du/dt as a dense amplitude array (index k + M)."""
        table = value_table(SpectralField(M, coeffs))
        out = np.zeros(2 * M + 1, dtype=complex)
        for target, others, c in self._parts:
            if np.any(np.abs(target) > M):
                raise TruncationError("vector field has modes beyond the field truncation")
            val = c * np.prod(table[others], axis=1)
            idx = target + M
            out += np.bincount(idx, weights=val.real, minlength=2 * M + 1)
            out += 1j * np.bincount(idx, weights=val.imag, minlength=2 * M + 1)
        return out


def hamiltonian_vector_field(H: PolyHamiltonian) -> VectorFieldSpec:
    return VectorFieldSpec(H)


# normal-form helpers -----------------------------------------------------------------

def phases(signs: np.ndarray, modes: np.ndarray) -> np.ndarray:
    return np.sum(signs * np.sqrt(np.abs(modes)), axis=1)


def project_kernel(H: PolyHamiltonian) -> PolyHamiltonian:
    """Keep exactly the monomials whose phase sum s_j sqrt|k_j| vanishes.

    Membership is decided by the integer test of :mod:`wwbnf.resonance`.
    """
    return H.select(lambda s, k: exact_zero_rows(s, k))


def solve_cohomological(H3: PolyHamiltonian) -> PolyHamiltonian:
    """F3 with {F3, H2} + H3 = 0: coefficient / (i * phase) per monomial."""
    for d in H3.degrees:
        rows, _ = H3.block(d)
        k, s = decode(rows)
        if np.any(exact_zero_rows(s, k)):
            raise ResonantDivisorError("exactly resonant monomial in cohomological equation")
    return H3.map_coefficients(lambda s, k, c: c / (1j * phases(s, k)))
