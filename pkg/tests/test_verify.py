import numpy as np
import pytest

from mpoforge import gates, hamiltonians, verify


_ORIG_ZZ = gates.build_zz_gate


def _corrupt_zz(eps):
    g = _ORIG_ZZ(eps)
    mats = np.array(g.site_matrices)
    mats[1, 0, 1] *= -1.0  # breaks the symmetric coupling matrix
    return gates.GateMPO(g.op_basis, mats, g.label)


def test_fast_suites_pass():
    checks = verify.run_suites("fast")
    assert checks and all(c.passed for c in checks), [c.line() for c in checks if not c.passed]
    suites = {c.suite for c in checks}
    assert suites == {"gate-mpo", "pepo", "ham-mpo", "expfit", "thermo"}


def test_corrupted_gate_is_caught(monkeypatch):
    monkeypatch.setattr(gates, "build_zz_gate", _corrupt_zz)
    checks = verify.run_suites("fast", names=["gate-mpo"])
    failed = [c.name for c in checks if not c.passed]
    assert failed == ["zz rings 2-6"]


def test_global_coupling_sign_is_a_gauge():
    g = _ORIG_ZZ(0.4)
    mats = np.array(g.site_matrices)
    mats[1] *= -1.0  # every ring term has an even number of Z's
    flipped = gates.GateMPO(g.op_basis, mats)
    assert verify.gate_error("zz", lambda e: flipped, 0.4, 5) <= verify.GATE_TOL


def test_corrupted_hamiltonian_is_caught(monkeypatch):
    orig = hamiltonians.build_ising_mpo

    def bad(mu):
        h = orig(mu)
        mats = np.array(h.site_matrices)
        mats[0, 1, 1] = 0.3  # spurious decay in the Ising channel
        return hamiltonians.HamiltonianMPO(h.op_basis, mats, h.v_l, h.v_r, h.channels, h.field_op, h.label)

    monkeypatch.setattr(hamiltonians, "build_ising_mpo", bad)
    checks = verify.suite_hamiltonians("fast")
    assert not next(c for c in checks if c.name.startswith("ising")).passed


def test_check_line_format():
    c = verify.Check("gate-mpo", "zz", True, 1e-15, 1e-12)
    assert c.line() == "PASS gate-mpo: zz (1.000e-15 vs 1.0e-12)"
    assert not verify._check("x", "nan", float("nan"), 1.0).passed


@pytest.mark.parametrize("text, n", [("0.1:10", 1), ("0.1:10:0,0.05:20:1e-9", 2)])
def test_parse_schedule(text, n):
    stages = verify.parse_schedule(text)
    assert len(stages) == n
    assert stages[0].eps == 0.1 and stages[0].max_sweeps == 10


def test_parse_schedule_rejects_garbage():
    with pytest.raises(ValueError):
        verify.parse_schedule("0.1")
    with pytest.raises(ValueError):
        verify.run_suites("medium")
