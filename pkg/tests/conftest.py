import itertools
import math

import numpy as np
import pytest
from hypothesis import strategies as st
from scipy.stats import unitary_group

from hom_multiport.fock import ModeLabel, OperatorPolynomial, creation


def c(label: str) -> OperatorPolynomial:
    return creation(label)


def permanent(m: np.ndarray) -> complex:
    n = m.shape[0]
    return sum(
        math.prod(m[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n))
    )


def unitary_mode_map(u: np.ndarray, in_modes, out_modes) -> dict:
    """Row convention: in_i -> sum_j u[i, j] out_j."""
    return {
        src: sum(
            (creation(dst, u[i, j]) for j, dst in enumerate(out_modes)),
            OperatorPolynomial(),
        )
        for i, src in enumerate(in_modes)
    }


def random_unitary(dim: int, seed: int) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=seed) if dim > 1 else np.array([[np.exp(1j * seed)]])


MODES = [ModeLabel(p, s) for p in "ab" for s in range(3)]


@st.composite
def polynomials(draw, modes=MODES, max_degree=3, max_terms=4):
    """Random homogeneous polynomial over ``modes``."""
    degree = draw(st.integers(1, max_degree))
    n_terms = draw(st.integers(1, max_terms))
    terms = {}
    for _ in range(n_terms):
        mono = tuple(draw(st.lists(st.sampled_from(modes), min_size=degree, max_size=degree)))
        re_ = draw(st.floats(-1, 1, allow_nan=False))
        im = draw(st.floats(-1, 1, allow_nan=False))
        terms[mono] = complex(re_, im)
    poly = OperatorPolynomial(terms)
    if not poly:
        poly = OperatorPolynomial({tuple(modes[:degree]): 1.0})
    return poly


@pytest.fixture
def pair_I():
    return c("a0") * c("b0")


@pytest.fixture
def pair_II():
    return c("e0") * c("f0")
