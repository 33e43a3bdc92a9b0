import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpoforge import hamiltonians as hm
from mpoforge import expfit
from mpoforge.pauli import X, Y, Z

coupling = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)
decay = st.floats(min_value=-0.9, max_value=0.9, allow_nan=False)


@given(coupling, coupling, coupling, coupling)
def test_nn_mpo_matches_explicit_sum(mu1, mu2, mu3, hx):
    fld = hx * X
    h = hm.build_nn_mpo(mu1, mu2, mu3, fld)
    assert h.bond_dim == 5
    for n in (2, 3, 5):
        exact = hm.explicit_hamiltonian(
            n, [(X, X, lambda r: mu1 * (r == 1)), (Y, Y, lambda r: mu2 * (r == 1)), (Z, Z, lambda r: mu3 * (r == 1))], fld
        )
        assert np.max(np.abs(hm.materialize_finite(h, n) - exact)) <= 1e-12


@given(st.lists(coupling, min_size=3, max_size=3), st.lists(decay, min_size=3, max_size=3))
def test_expdecay_mpo_matches_explicit_sum(mus, lams):
    h = hm.build_expdecay_mpo(mus, lams, 0.2 * Z)
    cpl = [(op, op, (lambda m, l: lambda r: m * l ** (r - 1))(m, l)) for op, m, l in zip((X, Y, Z), mus, lams)]
    for n in (2, 4, 6):
        exact = hm.explicit_hamiltonian(n, cpl, 0.2 * Z)
        assert np.max(np.abs(hm.materialize_finite(h, n) - exact)) <= 1e-12


@pytest.mark.parametrize("n", range(2, 9))
def test_ising_mpo(n):
    h = hm.build_ising_mpo(0.8)
    assert h.bond_dim == 3
    exact = hm.explicit_hamiltonian(n, [(Z, Z, lambda r: 0.8 * (r == 1))])
    assert np.max(np.abs(hm.materialize_finite(h, n) - exact)) <= 1e-12


def test_operator_schmidt_ranks():
    fld = 0.3 * X + 0.1 * Z
    nn = hm.materialize_finite(hm.build_nn_mpo(0.7, -0.4, 1.1, fld), 6)
    ising = hm.materialize_finite(hm.build_ising_mpo(1.0), 6)
    for cut in (2, 3, 4):  # an edge cut is capped at d^2 = 4
        assert hm.operator_schmidt_rank(nn, cut) == 5
        assert hm.operator_schmidt_rank(ising, cut) == 3


def test_powerlaw_mpo_reproduces_fit():
    fit = expfit.fit_power_law(2.0, 6, 500)
    h = hm.build_powerlaw_mpo(2.0, 6, fit=fit)
    r = np.arange(1, 50)
    assert np.allclose(h.coupling(r), expfit.evaluate(fit, r), atol=1e-13)
    assert np.max(np.abs(h.coupling(r).real - r**-2.0)) < 1e-4


def test_powerlaw_rejects_unstable_fit():
    bad = expfit.ExpSumFit(np.array([1.01]), np.array([1.0]), 10)
    with pytest.raises(hm.UnstableFitError):
        hm.build_powerlaw_mpo(1.0, 1, fit=bad)


@given(coupling)
def test_shifted_mpo_subtracts_identity(shift):
    h = hm.build_ising_mpo(1.0)
    n = 4
    got = hm.materialize_finite(hm.shifted(h, shift), n)
    assert np.allclose(got, hm.materialize_finite(h, n) - shift * n * np.eye(2**n), atol=1e-12)


def test_materialize_rejects_large_chains():
    with pytest.raises(ValueError):
        hm.materialize_finite(hm.build_ising_mpo(1.0), 40)
