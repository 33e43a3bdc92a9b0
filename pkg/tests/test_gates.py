import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpoforge import gates, verify
from mpoforge.pauli import X, Y, Z

eps_values = st.floats(min_value=0.0, max_value=1.5, allow_nan=False)


@pytest.mark.parametrize("label, builder", verify._gate_cases())
@pytest.mark.parametrize("n", range(2, 9))
def test_gate_matches_exact_exponential(label, builder, n):
    for eps in verify.GATE_EPS:
        assert verify.gate_error(label, builder, eps, n) <= verify.GATE_TOL


@given(eps_values)
def test_zz_gate_structure(eps):
    g = gates.build_zz_gate(eps)
    c0, c1 = g.site_matrices
    assert g.bond_dim == 2 and g.is_real
    assert np.allclose(c0, np.diag([np.cosh(eps), np.sinh(eps)]))
    assert np.allclose(c1, np.sqrt(np.sinh(eps) * np.cosh(eps)) * np.array([[0, 1], [1, 0]]))
    for m in g.site_matrices:
        assert np.allclose(m, m.T)


@given(eps_values)
def test_tilde_yy_gate_is_real_symmetric(eps):
    g = gates.build_tilde_yy_gate(eps)
    assert g.is_real
    for m in g.site_matrices:
        assert np.allclose(m, m.T)


@given(eps_values, st.sampled_from(["x", "y", "z"]))
def test_expm2_closed_form(eps, which):
    op = {"x": X, "y": Y, "z": Z}[which]
    w, v = np.linalg.eigh(op)
    exact = (v * np.exp(eps * w)) @ v.conj().T
    assert np.allclose(gates.expm2(op, eps), exact, atol=1e-13)


def test_ring_gate_commutes_with_translation():
    g = gates.build_zz_gate(0.3)
    n = 5
    u = gates.materialize_ring(g, n)
    idx = np.arange(2**n)
    bits = (idx[:, None] >> np.arange(n)[None, :]) & 1
    shifted = np.sum(np.roll(bits, 1, axis=1) << np.arange(n)[None, :], axis=1)
    perm = np.zeros((2**n, 2**n))
    perm[shifted, idx] = 1.0
    assert np.allclose(perm @ u @ perm.T, u)


def test_trotter_plans():
    tfi = gates.trotter_plan("tfi", 0.1, B=0.5)
    assert [g.bond_dim for g in tfi.gates] == [2, 1]
    heis = gates.trotter_plan("heisenberg", 0.1)
    assert heis.rotated and len(heis.gates) == 3
    assert all(g.is_real for g in heis.gates)
    with pytest.raises(ValueError):
        gates.trotter_plan("tfi", 0.0)
    with pytest.raises(ValueError):
        gates.trotter_plan("xyz", 0.1)


def test_negative_step_rejected():
    with pytest.raises(ValueError):
        gates.build_zz_gate(-0.1)
