import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wwbnf.resonance import (
    CUBIC_PHASE_BOUND,
    SignedTuple,
    benjamin_feir,
    benjamin_feir_family,
    classify,
    enumerate_quartic,
    exact_zero_rows,
    is_exact_zero,
    min_cubic_phase,
    near_resonant_family,
    phase,
    small_divisor_scan,
    squarefree_decomposition,
)


def test_squarefree_decomposition():
    f, q = squarefree_decomposition([1, 8, 12, 50, 72, 97])
    assert list(f) == [1, 2, 3, 2, 2, 97]
    assert list(q) == [1, 2, 2, 5, 6, 1]


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10 ** 6))
def test_squarefree_property(n):
    f, q = squarefree_decomposition([n])
    f, q = int(f[0]), int(q[0])
    assert f * q * q == n
    assert all(f % (p * p) for p in range(2, math.isqrt(f) + 1))


def test_exact_zero_examples():
    assert is_exact_zero(SignedTuple.of((1, -1, 1, -1), (-1, 4, 9, 4)))
    assert not is_exact_zero(SignedTuple.of((1, 1, -1), (1, 1, 2)))
    # a single minus sign can still cancel when momentum is not imposed
    assert is_exact_zero(SignedTuple.of((1, 1, -1), (1, 1, 4)))
    assert is_exact_zero(SignedTuple.of((1, 1, 1, -1), (1, 1, 1, 9)))
    rows = exact_zero_rows(np.array([[1, -1, 1, -1], [1, 1, -1, -1]]), np.array([[-1, 4, 9, 4], [1, 2, 1, 3]]))
    assert list(rows) == [True, False]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 400), min_size=2, max_size=4), st.lists(st.sampled_from([1, -1]), min_size=4, max_size=4))
def test_exact_test_agrees_with_float(modes, signs):
    t = SignedTuple.of(signs[: len(modes)], modes)
    # a nonzero phase of integers <= 400 is bounded away from zero by far more than rounding
    assert is_exact_zero(t) == (abs(phase(t)) < 1e-9)


@pytest.mark.parametrize("lam,b", [(1, 1), (-2, 1), (1, 2), (3, 2)])
def test_benjamin_feir_members(lam, b):
    t = benjamin_feir(lam, b)
    assert t.momentum == 0
    assert is_exact_zero(t)
    assert classify(t) .kind == "BenjaminFeir"


def test_bf_family_sizes():
    assert benjamin_feir_family(8) == {}
    fam = benjamin_feir_family(40)
    assert sorted(fam.values()) == sorted((s * l, 1) for l in (1, 2, 3, 4) for s in (1, -1))


def test_enumerate_small_box():
    rows = enumerate_quartic(10)
    kinds = {c.kind for _, c in rows}
    assert kinds == {"Trivial", "BenjaminFeir"}
    bf = [c for _, c in rows if c.kind == "BenjaminFeir"]
    assert sorted((c.lam, c.b) for c in bf) == [(-1, 1), (1, 1)]


def test_enumerate_threads_agree():
    assert enumerate_quartic(20, threads=1) == enumerate_quartic(20, threads=3)


def test_cubic_minimum():
    val, t = min_cubic_phase(60)
    assert val == pytest.approx(CUBIC_PHASE_BOUND, abs=1e-14)
    assert sorted(abs(n) for n in t.modes) == [1, 1, 2]


def test_small_divisor_scan():
    scan = small_divisor_scan(40)
    assert np.all(scan.min_abs_phase > 0)
    assert np.isfinite(scan.exponent) and scan.exponent > 0
    for b, m, _ in scan.rows():
        if b >= 2:
            assert m >= scan.constant * b ** (-scan.exponent) * (1 - 1e-12)


def test_near_resonant_family_decays():
    vals = near_resonant_family(1, [10, 100, 1000])
    for j, v in vals:
        assert v == pytest.approx(1 / math.sqrt(j), rel=0.2)
    assert vals[0][1] > vals[1][1] > vals[2][1]
