import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpoforge import hamiltonians as hm
from mpoforge import imps, thermo, verify
from mpoforge.pauli import X, Z

seeds = st.integers(min_value=0, max_value=2**31 - 1)
builders = verify.jordan_builders()


def random_state(seed, dim, cplx=True):
    return verify._random_state(np.random.default_rng(seed), dim, cplx)


def random_product(seed):
    r = np.random.default_rng(seed)
    v = r.normal(size=2) + 1j * r.normal(size=2)
    return imps.product_state(v)


def dense_window(vec, h, n, lam):
    psi = vec / np.linalg.norm(vec)
    full = psi
    for _ in range(n - 1):
        full = np.kron(full, psi)
    op = hm.materialize_finite(h, n) - n * lam * np.eye(2**n)
    out = op @ full
    return float(np.real(np.vdot(out, out))), float(np.real(np.vdot(full, op @ full)))


@given(seeds, st.integers(min_value=1, max_value=4), st.integers(min_value=0, max_value=len(builders) - 1))
def test_energy_density_equals_window_slope(seed, dim, which):
    mps = random_state(seed, dim)
    h = builders[which]
    e, ev = thermo.energy_density(mps, h)
    n = 200
    slope = thermo.finite_window_expectation(mps, h, n + 1) - thermo.finite_window_expectation(mps, h, n)
    assert abs(e - slope) <= 1e-9
    assert ev.residual <= 1e-8


@given(seeds, st.integers(min_value=1, max_value=3))
def test_jordan_chain_relations(seed, dim):
    mps = random_state(seed, dim)
    h = builders[0]
    e, ev = thermo.energy_density(mps, h)
    f = thermo.transfer_EH(mps, h) - np.eye(ev.q_r.size)
    (qt_r,), (qt_l,) = ev.qt_r, ev.qt_l
    scale = max(1.0, np.linalg.norm(qt_r))
    assert np.linalg.norm(f @ qt_r - ev.q_r) <= 1e-9 * scale
    assert np.linalg.norm(f.T @ qt_l - ev.q_l) <= 1e-9 * max(1.0, np.linalg.norm(qt_l))
    assert np.linalg.norm(f @ ev.q_r) <= 1e-9
    q_r = np.column_stack([ev.q_r, qt_r])
    assert np.allclose(ev.dual_left @ q_r, np.eye(2), atol=1e-9)
    assert np.allclose(ev.dual_left[0] @ ev.q_r, 1.0)


def test_zero_energy_has_no_jordan_block():
    plus = imps.product_state([1.0, 1.0])
    e, ev = thermo.energy_density(plus, hm.build_ising_mpo(1.0))
    assert abs(e) < 1e-14
    assert ev.Q is None and ev.block_size == 1


def test_plus_state_variance_under_zz():
    plus = imps.product_state([1.0, 1.0])
    c1, c2, _ = thermo.variance_density(plus, hm.build_ising_mpo(1.0))
    assert c1 == pytest.approx(1.0, abs=1e-14)
    assert abs(c2) <= 1e-14


@given(seeds, st.floats(min_value=-1.0, max_value=1.0))
def test_variance_coefficients_match_dense_product_windows(seed, lam):
    mps = random_product(seed)
    vec = mps.A[:, 0, 0]
    h = hm.build_nn_mpo(0.5, -0.3, 0.9, 0.4 * X + 0.1 * Z)
    _, _, ev = thermo.variance_density(mps, h, lam)
    # one site has no bond, so the quadratic form starts at two sites
    for n in range(2, 9):
        exact, _ = dense_window(vec, h, n, lam)
        assert abs(ev.value(n) - exact) <= 1e-8 * max(1.0, abs(exact))


@given(seeds, st.floats(min_value=-1.0, max_value=1.0))
def test_variance_quadratic_term(seed, lam):
    mps = random_state(seed, 2)
    h = builders[1]
    e, _ = thermo.energy_density(mps, h)
    c1, c2, _ = thermo.variance_density(mps, h, lam)
    assert c2 == pytest.approx(2 * (e - lam) ** 2, abs=1e-9)
    c1_e, c2_e, _ = thermo.variance_density(mps, h, e)
    assert abs(c2_e) < 1e-9 and c1_e >= -1e-9


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_variance_matches_window_second_difference(dim):
    mps = random_state(11 + dim, dim)
    h = builders[2]
    e, _ = thermo.energy_density(mps, h)
    c1, _, _ = thermo.variance_density(mps, h, e)
    n = 150
    vals = [thermo.finite_window_square(mps, h, k, e) for k in (n, n + 1)]
    assert abs((vals[1] - vals[0]) - c1) <= 1e-9 * max(1.0, abs(c1))


def test_degenerate_transfer_raises():
    ghz = imps.UniformMPS(np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]))
    with pytest.raises(thermo.ThermoError):
        thermo.energy_density(ghz, hm.build_ising_mpo(1.0))


def test_gradient_optimize_ising_ferromagnet():
    start = imps.UniformMPS(np.array([[[1.0]], [[0.1]]]))
    res = thermo.gradient_optimize(start, hm.build_ising_mpo(-1.0), 200)
    assert res.energies[-1] == pytest.approx(-1.0, abs=1e-8)
    assert all(b <= a + 1e-15 for a, b in zip(res.energies, res.energies[1:]))


def test_gradient_optimize_lowers_tfi_energy():
    h = hm.build_nn_mpo(0.0, 0.0, -1.0, -1.0 * X)
    res = thermo.gradient_optimize(random_state(3, 2, cplx=False), h, 30)
    assert res.energies[-1] < res.energies[0]
    assert res.energies[-1] >= -4 / np.pi - 1e-12
