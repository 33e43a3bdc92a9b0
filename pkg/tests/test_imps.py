import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpoforge import gates, imps, reference, thermo
from mpoforge.hamiltonians import build_nn_mpo
from mpoforge.pauli import X, Y, Z

seeds = st.integers(min_value=0, max_value=2**31 - 1)


def random_symmetric(rng, dim, cplx=False):
    a = rng.normal(size=(2, dim, dim))
    if cplx:
        a = a + 1j * rng.normal(size=(2, dim, dim))
    return imps.normalize(imps.UniformMPS(a + a.transpose(0, 2, 1)))


def _asym(mps):
    return float(np.max(np.abs(mps.A - mps.A.transpose(0, 2, 1))))


def test_real_symmetric_closure_over_100_cycles():
    rng = np.random.default_rng(7)
    mps = random_symmetric(rng, 3)
    builders = [
        gates.build_zz_gate,
        gates.build_xx_gate,
        gates.build_tilde_yy_gate,
        lambda e: gates.build_local_field_gate(e, X),
    ]
    worst = 0.0
    for _ in range(100):
        g = builders[rng.integers(len(builders))](float(rng.uniform(0.01, 0.5)))
        mps = imps.apply_gate(mps, g)
        worst = max(worst, _asym(mps) / np.max(np.abs(mps.A)))
        if mps.D > 6:
            mps, _ = imps.truncate(mps, 6)
        mps = imps.normalize(mps)
        assert not np.iscomplexobj(mps.A)
        worst = max(worst, _asym(mps))
    assert worst <= 1e-12


@given(seeds, st.integers(min_value=1, max_value=4))
def test_truncation_keeps_full_rank_state(seed, dim):
    rng = np.random.default_rng(seed)
    mps = random_symmetric(rng, dim)
    grown = imps.normalize(imps.apply_gate(mps, gates.build_zz_gate(0.2)))
    cut, rep = imps.truncate(grown, grown.D)
    cut = imps.normalize(cut)
    assert rep.discarded_weight <= 1e-12
    h2, h1 = imps.model_terms("tfi", 0.7)
    assert np.isclose(imps.measure_bond_energy(cut, h2, h1), imps.measure_bond_energy(grown, h2, h1), atol=1e-9)


def test_truncation_drops_unused_bond_directions():
    # a D = 2 state padded with two bond directions that carry no weight
    rng = np.random.default_rng(2)
    base = random_symmetric(rng, 2)
    padded = np.zeros((2, 4, 4))
    padded[:, :2, :2] = base.A
    cut, rep = imps.truncate(imps.UniformMPS(padded), 2)
    cut = imps.normalize(cut)
    assert rep.discarded_weight <= 1e-14
    for r in (1, 3):
        assert np.isclose(imps.correlator(cut, Z, Z, r), imps.correlator(base, Z, Z, r), atol=1e-10)


def test_truncate_rejects_non_symmetric():
    a = np.random.default_rng(0).normal(size=(2, 3, 3))
    with pytest.raises(imps.EvolutionError):
        imps.truncate(imps.UniformMPS(a), 2)


@given(seeds, st.integers(min_value=2, max_value=6))
def test_gauge_condition_complex_orthogonal(seed, dim):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    x = x + x.T
    res = imps.gauge_condition(x)
    q = res.Q
    assert np.max(np.abs(q @ q.T - np.eye(dim))) <= 1e-10
    assert np.allclose(q @ x @ q.T, res.x, atol=1e-9 * np.max(np.abs(x)))
    assert all(b >= a for a, b in zip(res.ratios, res.ratios[1:]))


@given(seeds, st.integers(min_value=1, max_value=6))
def test_gauge_condition_identity_on_real_input(seed, dim):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(dim, dim))
    x = x + x.T
    res = imps.gauge_condition(x)
    assert np.allclose(res.Q, np.eye(dim))
    assert np.allclose(res.x, x)


def test_fixed_points_and_normalization():
    rng = np.random.default_rng(4)
    mps = imps.UniformMPS(rng.normal(size=(2, 3, 3)) + 1j * rng.normal(size=(2, 3, 3)))
    mps = imps.normalize(mps)
    lam, r = imps.transfer_fixed_point(mps, "right")
    assert np.isclose(lam, 1.0)
    assert np.allclose(r, r.conj().T)
    assert np.all(np.linalg.eigvalsh(r) > -1e-12)
    _, l = imps.transfer_fixed_point(mps, "left")
    assert np.allclose(sum(a.conj().T @ l @ a for a in mps.A), l, atol=1e-10)


@given(seeds)
def test_bond_energy_matches_jordan_evaluator(seed):
    rng = np.random.default_rng(seed)
    mps = imps.normalize(imps.UniformMPS(rng.normal(size=(2, 3, 3)) + 1j * rng.normal(size=(2, 3, 3))))
    h = build_nn_mpo(0.4, -0.2, 1.0, 0.3 * X)
    two = 0.4 * np.kron(X, X) - 0.2 * np.real(np.kron(Y, Y)) + 1.0 * np.kron(Z, Z)
    e_bond = imps.measure_bond_energy(mps, two, 0.3 * X)
    e_jordan, _ = thermo.energy_density(mps, h)
    assert np.isclose(e_bond, e_jordan, atol=1e-10)


def test_product_state_correlator():
    up = imps.product_state([1.0, 0.0])
    assert np.isclose(imps.correlator(up, Z, Z, 3), 1.0)
    plus = imps.product_state([1.0, 1.0])
    assert np.isclose(imps.correlator(plus, Z, Z, 2), 0.0)


def test_tfi_zero_field_reaches_minus_one():
    res = imps.ground_state_search("tfi", 4, [imps.Stage(0.1, 400, 1e-12)], B=0.0)
    assert res.converged
    assert abs(res.energy + 1.0) < 1e-6


@pytest.mark.parametrize("model, B", [("tfi", 1.0), ("tfi", 0.5), ("heisenberg", 1.0)])
def test_search_energy_is_variational(model, B):
    sched = [imps.Stage(0.1, 120, 1e-8), imps.Stage(0.05, 120, 1e-9)]
    res = imps.ground_state_search(model, 8, sched, B=B)
    ref = reference.reference_energy(model, B)
    assert res.energy >= ref - 1e-12
    assert res.energy - ref < 5e-3 * abs(ref)
    assert res.mps.is_symmetric() and not np.iscomplexobj(res.mps.A)
    assert [row.sweep for row in res.trace] == sorted(row.sweep for row in res.trace)


def test_search_rejects_odd_measurement_interval():
    with pytest.raises(ValueError):
        imps.ground_state_search("tfi", 4, [imps.Stage(0.1, 4, 0.0)], measure_every=3)


def test_default_schedule_ladder():
    eps = [s.eps for s in imps.default_schedule(1e-3)]
    assert np.allclose(eps, [0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001])
    assert all(np.isclose(s.tol, 0.1 * s.eps**2) for s in imps.default_schedule(1e-3))


@pytest.mark.parametrize("cplx", [False, True])
def test_state_round_trip(tmp_path, cplx):
    rng = np.random.default_rng(5)
    mps = random_symmetric(rng, 3, cplx)
    path = tmp_path / "state.bin"
    imps.save_state(mps, path)
    back = imps.load_state(path)
    assert back.scalar_kind == mps.scalar_kind
    assert np.array_equal(back.A, mps.A)
    header = path.read_bytes().split(b"\n", 1)[0]
    assert b'"byteorder": "little"' in header


def test_truncated_state_file_rejected(tmp_path):
    path = tmp_path / "state.bin"
    imps.save_state(imps.product_state([1.0, 0.0]), path)
    path.write_bytes(path.read_bytes()[:-4])
    with pytest.raises(ValueError):
        imps.load_state(path)


def test_trace_csv_columns(tmp_path):
    rows = [imps.TraceRow(2, 0.1, 4, -1.2, 1e-9)]
    imps.write_trace_csv(rows, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "sweep,eps,D,energy,discarded_weight"
    assert lines[1].startswith("2,0.1,4,")
