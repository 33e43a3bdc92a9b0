import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import ellipe

from mpoforge import reference


@given(st.floats(min_value=0.0, max_value=3.0))
def test_tfi_quadrature_matches_elliptic_form(B):
    closed = -(2.0 / np.pi) * (1.0 + B) * ellipe(4.0 * B / (1.0 + B) ** 2)
    assert abs(reference.tfi_energy(B) - closed) <= 1e-13


def test_tfi_limits():
    assert reference.tfi_energy(0.0) == pytest.approx(-1.0, abs=1e-14)
    assert reference.tfi_energy(1.0) == pytest.approx(-4.0 / np.pi, abs=1e-14)


@pytest.mark.parametrize("n, B", [(6, 0.5), (6, 1.7), (10, 0.5), (10, 1.0), (10, 1.7), (16, 1.0)])
def test_tfi_ring_formula_matches_diagonalization(n, B):
    assert abs(reference.exact_ring_energy("tfi", n, B) - reference.tfi_ring_energy(B, n)) <= 1e-10


def test_tfi_ring_converges_to_infinite_chain():
    errs = [abs(reference.tfi_ring_energy(1.0, n) - reference.tfi_energy(1.0)) for n in (16, 64, 256)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-5


def test_heisenberg_finite_size_extrapolation():
    ns = np.array([10, 12, 14])
    es = np.array([reference.exact_ring_energy("heisenberg", n) for n in ns])
    # e(N) = e_inf + a / N^2 + ...
    coef = np.polyfit(1.0 / ns.astype(float) ** 2, es, 1)
    assert abs(coef[1] - reference.heisenberg_energy()) < 5e-3
    assert np.all(es < reference.heisenberg_energy())


def test_heisenberg_small_ring():
    # four-site ring: singlet energy -8 over four sites
    assert reference.exact_ring_energy("heisenberg", 4) == pytest.approx(-2.0, abs=1e-10)


def test_unknown_model():
    assert reference.reference_energy("xyz") is None
    with pytest.raises(ValueError):
        reference.ring_hamiltonian("xyz", 4)
