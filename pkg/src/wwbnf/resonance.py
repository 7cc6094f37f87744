"""Exact resonance arithmetic for the dispersion relation omega(k) = sqrt(|k|).

A signed tuple ((s1, n1), ..., (sp, np)) has momentum sum s_i n_i and phase
sum s_i sqrt|n_i|.  Whether the phase vanishes is decided in integer
arithmetic: write |n| = f * q^2 with f squarefree.  Square roots of distinct
squarefree integers are linearly independent over Q, so the phase is zero
exactly when, for every squarefree class f, the signed sum of the roots q
within that class is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Sequence

import numpy as np

CUBIC_PHASE_BOUND = 2.0 / (2.0 + math.sqrt(2.0))


# squarefree decomposition ------------------------------------------------

class _Sieve:
    def __init__(self):
        self.limit = 0
        self.core = np.zeros(1, dtype=np.int64)
        self.root = np.zeros(1, dtype=np.int64)

    def ensure(self, n: int) -> None:
        if n <= self.limit:
            return
        limit = max(n, 2 * self.limit, 1024)
        core = np.arange(limit + 1, dtype=np.int64)
        root = np.ones(limit + 1, dtype=np.int64)
        is_prime = np.ones(math.isqrt(limit) + 1, dtype=bool)
        is_prime[:2] = False
        for p in range(2, len(is_prime)):
            if not is_prime[p]:
                continue
            is_prime[p * p::p] = False
            step = p * p
            while step <= limit:
                core[step::step] //= p * p
                root[step::step] *= p
                step *= p * p
        self.core, self.root, self.limit = core, root, limit


_SIEVE = _Sieve()


def squarefree_decomposition(n):
    """Return (f, q) with |n| = f q^2 and f squarefree (elementwise)."""
    a = np.abs(np.asarray(n, dtype=np.int64))
    if a.size and a.min() == 0:
        raise ValueError("modes must be nonzero")
    _SIEVE.ensure(int(a.max()) if a.size else 1)
    return _SIEVE.core[a], _SIEVE.root[a]


def exact_zero_rows(signs: np.ndarray, modes: np.ndarray) -> np.ndarray:
    """Vectorized exact test of sum_j s_j sqrt|n_j| == 0 over rows."""
    signs = np.asarray(signs, dtype=np.int64)
    f, q = squarefree_decomposition(modes)
    sq = signs * q
    ok = np.ones(signs.shape[0], dtype=bool)
    d = signs.shape[1]
    for i in range(d):
        tot = np.zeros(signs.shape[0], dtype=np.int64)
        for j in range(d):
            tot += np.where(f[:, j] == f[:, i], sq[:, j], 0)
        ok &= tot == 0
    return ok


# signed tuples ------------------------------------------------------------

@dataclass(frozen=True)
class SignedTuple:
    """p signed modes; ``signs[i]`` is +1 for u_{n_i}, -1 for its conjugate."""

    signs: tuple[int, ...]
    modes: tuple[int, ...]

    def __post_init__(self):
        if len(self.signs) != len(self.modes):
            raise ValueError("signs and modes must have equal length")
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")
        if any(n == 0 for n in self.modes):
            raise ValueError("modes must be nonzero")

    @classmethod
    def of(cls, signs: Sequence[int], modes: Sequence[int]) -> "SignedTuple":
        return cls(tuple(int(s) for s in signs), tuple(int(n) for n in modes))

    @property
    def momentum(self) -> int:
        return sum(s * n for s, n in zip(self.signs, self.modes))

    @property
    def max_mode(self) -> int:
        return max(abs(n) for n in self.modes)

    def conj(self) -> "SignedTuple":
        return SignedTuple(tuple(-s for s in self.signs), self.modes)

    def reflect(self) -> "SignedTuple":
        """x -> -x reflection: every mode changes sign."""
        return SignedTuple(self.signs, tuple(-n for n in self.modes))

    def canonical(self) -> "SignedTuple":
        """Sorted within equal-sign slots, then minimal over global conjugation.

        Plus slots come first.
        """
        def arrange(t):
            plus = sorted(n for s, n in zip(t.signs, t.modes) if s > 0)
            minus = sorted(n for s, n in zip(t.signs, t.modes) if s < 0)
            return (len(minus), plus, minus), SignedTuple((1,) * len(plus) + (-1,) * len(minus), tuple(plus + minus))

        a, ta = arrange(self)
        b, tb = arrange(self.conj())
        return ta if a <= b else tb


def phase(t: SignedTuple) -> float:
    """Floating value of sum s_i sqrt|n_i|."""
    return float(sum(s * math.sqrt(abs(n)) for s, n in zip(t.signs, t.modes)))


def is_exact_zero(t: SignedTuple) -> bool:
    """True iff the phase of ``t`` vanishes exactly (integer arithmetic only)."""
    classes: dict[int, int] = {}
    for s, n in zip(t.signs, t.modes):
        f, q = squarefree_decomposition([n])
        classes[int(f[0])] = classes.get(int(f[0]), 0) + s * int(q[0])
    return all(v == 0 for v in classes.values())


def benjamin_feir(lam: int, b: int) -> SignedTuple:
    """Member (lam, b) of the Benjamin-Feir family, signs (+, -, +, -)."""
    if lam == 0 or b < 1:
        raise ValueError("need lam != 0 and b >= 1")
    t = SignedTuple(
        (1, -1, 1, -1),
        (-lam * b * b, lam * (b + 1) ** 2, lam * (b * b + b + 1) ** 2, lam * (b + 1) ** 2 * b * b),
    )
    assert t.momentum == 0, t
    assert is_exact_zero(t), t
    return t


def benjamin_feir_family(N: int) -> dict[SignedTuple, tuple[int, int]]:
    """All BF members with max mode <= N, keyed by canonical form."""
    out: dict[SignedTuple, tuple[int, int]] = {}
    b = 1
    while (b * b + b + 1) ** 2 <= N:
        lam = 1
        while lam * (b * b + b + 1) ** 2 <= N:
            for sl in (lam, -lam):
                out.setdefault(benjamin_feir(sl, b).canonical(), (sl, b))
            lam += 1
        b += 1
    return out


# classification ------------------------------------------------------------

@dataclass(frozen=True)
class ResonanceClass:
    kind: str  # "Trivial", "BenjaminFeir" or "Other"
    lam: int | None = None
    b: int | None = None


def _is_trivial(t: SignedTuple) -> bool:
    plus = sorted(n for s, n in zip(t.signs, t.modes) if s > 0)
    minus = sorted(n for s, n in zip(t.signs, t.modes) if s < 0)
    return plus == minus


def classify(t: SignedTuple, bf: dict[SignedTuple, tuple[int, int]] | None = None) -> ResonanceClass:
    """Classify an exactly resonant, momentum-free quartic tuple."""
    if _is_trivial(t):
        return ResonanceClass("Trivial")
    c = t.canonical()
    bf = benjamin_feir_family(t.max_mode) if bf is None else bf
    if c in bf:
        lam, b = bf[c]
        return ResonanceClass("BenjaminFeir", lam, b)
    return ResonanceClass("Other")


def _nonzero_range(N: int) -> np.ndarray:
    r = np.arange(-N, N + 1)
    return r[r != 0]


def _quartic_stripe(n1: int, N: int, s: tuple[int, int, int, int]):
    """Momentum-free quartic tuples with first mode n1 and pattern s."""
    r = _nonzero_range(N)
    n2, n3 = np.meshgrid(r, r, indexing="ij")
    n2 = n2.ravel()
    n3 = n3.ravel()
    n4 = -s[3] * (s[0] * n1 + s[1] * n2 + s[2] * n3)
    keep = (n4 != 0) & (np.abs(n4) <= N)
    n1a = np.full(keep.sum(), n1)
    return n1a, n2[keep], n3[keep], n4[keep]


# Sign patterns up to conjugation and permutation: +++ +, +++-, ++--.
_QUARTIC_PATTERNS = ((1, 1, 1, 1), (1, 1, 1, -1), (1, 1, -1, -1))


def enumerate_quartic(N: int, threads: int = 1) -> list[tuple[SignedTuple, ResonanceClass]]:
    """All exact quartic resonances with max |n_i| <= N, one per class of
    permutations within equal-sign slots and global conjugation."""
    if N < 1:
        raise ValueError("N must be positive")
    bf = benjamin_feir_family(N)

    def stripe(args):
        n1, s = args
        a, b, c, d = _quartic_stripe(n1, N, s)
        modes = np.stack([a, b, c, d], axis=1)
        signs = np.broadcast_to(np.array(s), modes.shape)
        hit = exact_zero_rows(signs, modes)
        return [SignedTuple(s, tuple(int(x) for x in row)).canonical() for row in modes[hit]]

    jobs = [(n1, s) for s in _QUARTIC_PATTERNS for n1 in _nonzero_range(N)]
    found: set[SignedTuple] = set()
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for res in pool.map(stripe, jobs):
            found.update(res)
    return [(t, classify(t, bf)) for t in sorted(found, key=lambda t: (t.max_mode, t.signs, t.modes))]


def min_cubic_phase(N: int) -> tuple[float, SignedTuple]:
    """Smallest |phase| over momentum-free cubic tuples with max |n_i| <= N.

    Returns the value and a minimizing tuple.
    """
    if N < 1:
        raise ValueError("N must be positive")
    r = _nonzero_range(N)
    n1, n2 = np.meshgrid(r, r, indexing="ij")
    n1 = n1.ravel()
    n2 = n2.ravel()
    best = (math.inf, None)
    for s1 in (1, -1):
        for s2 in (1, -1):
            for s3 in (1, -1):
                n3 = -s3 * (s1 * n1 + s2 * n2)
                keep = (n3 != 0) & (np.abs(n3) <= N)
                a, b, c = n1[keep], n2[keep], n3[keep]
                ph = np.abs(s1 * np.sqrt(np.abs(a)) + s2 * np.sqrt(np.abs(b)) + s3 * np.sqrt(np.abs(c)))
                i = int(np.argmin(ph))
                if ph[i] < best[0]:
                    best = (float(ph[i]), SignedTuple((s1, s2, s3), (int(a[i]), int(b[i]), int(c[i]))))
    return best


@dataclass
class SmallDivisorScan:
    """Per-bucket minima of |phase| over non-resonant quartic tuples."""

    buckets: np.ndarray      # upper edge of each max-mode bucket
    min_abs_phase: np.ndarray
    counts: np.ndarray
    exponent: float          # fitted N0 in |phase| >= c * max^{-N0}
    constant: float          # largest c making the bound hold on every bucket
    fit_intercept: float

    def rows(self) -> Iterable[tuple[int, float, int]]:
        for b, m, c in zip(self.buckets, self.min_abs_phase, self.counts):
            yield int(b), float(m), int(c)


def small_divisor_scan(N: int, bucket_width: int = 1, threads: int = 1) -> SmallDivisorScan:
    """Scan all momentum-free quartic tuples with max |n_i| <= N.

    Exactly resonant tuples are excluded by the integer test; the others are
    binned by max |n_i| and the minimal |phase| per bin is recorded. A
    least-squares line through log(min |phase|) against log(max) gives the
    empirical exponent N0.
    """
    if N < 4:
        raise ValueError("N must be at least 4")
    nb = (N + bucket_width - 1) // bucket_width
    mins = np.full(nb + 1, np.inf)
    counts = np.zeros(nb + 1, dtype=np.int64)
    sq = np.sqrt(np.arange(N + 1, dtype=float))

    def stripe(args):
        n1, s = args
        a, b, c, d = _quartic_stripe(n1, N, s)
        ph = np.abs(s[0] * sq[np.abs(a)] + s[1] * sq[np.abs(b)] + s[2] * sq[np.abs(c)] + s[3] * sq[np.abs(d)])
        mx = np.maximum(np.maximum(np.abs(a), np.abs(b)), np.maximum(np.abs(c), np.abs(d)))
        cand = ph < 1e-6
        if cand.any():
            modes = np.stack([a[cand], b[cand], c[cand], d[cand]], axis=1)
            exact = exact_zero_rows(np.broadcast_to(np.array(s), modes.shape), modes)
            drop = np.zeros(ph.shape, dtype=bool)
            drop[np.nonzero(cand)[0][exact]] = True
            ph, mx = ph[~drop], mx[~drop]
        bucket = (mx + bucket_width - 1) // bucket_width
        m = np.full(nb + 1, np.inf)
        np.minimum.at(m, bucket, ph)
        return m, np.bincount(bucket, minlength=nb + 1)

    jobs = [(n1, s) for s in _QUARTIC_PATTERNS for n1 in _nonzero_range(N)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for m, cnt in pool.map(stripe, jobs):
            np.minimum(mins, m, out=mins)
            counts += cnt

    idx = np.nonzero(counts > 0)[0]
    buckets = np.minimum(idx * bucket_width, N)
    mins, counts = mins[idx], counts[idx]
    fit = (buckets >= 2) & np.isfinite(mins) & (mins > 0)
    slope, intercept = np.polyfit(np.log(buckets[fit]), np.log(mins[fit]), 1)
    exponent = -float(slope)
    constant = float(np.min(mins[fit] * buckets[fit].astype(float) ** exponent))
    return SmallDivisorScan(buckets, mins, counts, exponent, constant, float(intercept))


def near_resonant_family(k: int, js: Iterable[int]) -> list[tuple[int, float]]:
    """|phase| of the tuples (k, -k, j, j + 2k) with signs (+, -, +, -)."""
    out = []
    for j in js:
        t = SignedTuple((1, -1, 1, -1), (k, -k, j, j + 2 * k))
        out.append((j, abs(phase(t))))
    return out
