import itertools

import numpy as np
import pytest

from wwbnf.poly import Monomial, PolyHamiltonian
from wwbnf.spectral import SpectralField


def random_complex_field(M, rng, scale=1.0):
    c = scale * (rng.normal(size=2 * M + 1) + 1j * rng.normal(size=2 * M + 1))
    c[M] = 0
    return SpectralField(M, c)


def random_real_poly(M, degree, rng, nterms=12):
    """Random real momentum-free polynomial of one degree with modes |k| <= M."""
    modes = [k for k in range(-M, M + 1) if k]
    terms = {}
    while len(terms) < nterms:
        signs = rng.choice([1, -1], size=degree)
        ks = rng.choice(modes, size=degree - 1)
        last = -int(np.dot(signs[:-1], ks)) * signs[-1]
        if last == 0 or abs(last) > M:
            continue
        m = Monomial.of(signs, list(ks) + [last])
        terms[m] = complex(rng.normal(), rng.normal())
    H = PolyHamiltonian.from_terms(terms)
    return H + H.conj_flip()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def all_signs(p):
    return list(itertools.product((1, -1), repeat=p))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])
