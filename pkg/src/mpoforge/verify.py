"""Oracle suites shared by the CLI ``verify`` command and the test-suite.

Every check compares a construction against an independent dense computation.
Builders are looked up through their modules at call time so a replaced
(for example deliberately corrupted) builder is what gets checked.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import expfit, gates, hamiltonians, imps, peps, thermo
from .pauli import X, Y, Z, pair_op

__all__ = ["Check", "SUITES", "run_suites", "gate_error", "exact_exponential", "BENCHMARK_SCHEDULES"]


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    passed: bool
    value: float
    limit: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.suite}: {self.name} ({self.value:.3e} vs {self.limit:.1e})"


def _check(suite, name, value, limit) -> Check:
    return Check(suite, name, bool(np.isfinite(value) and value <= limit), float(value), float(limit))


GATE_EPS = (0.01, 0.1, 0.5, 1.0)
GATE_TOL = 1e-12


_HAD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)  # H Z H = X
_SY = np.array([[1.0, 1.0], [1.0j, -1.0j]]) / np.sqrt(2.0)  # S Z S^dag = Y


def _zz_diagonal(n_sites: int) -> np.ndarray:
    z = 1 - 2 * ((np.arange(2**n_sites)[:, None] >> np.arange(n_sites)[None, :]) & 1)
    return np.sum(z * np.roll(z, -1, axis=1), axis=1).astype(float)


def exact_exponential(kind: str, n_sites: int, eps: float) -> np.ndarray:
    """exp of eps times a ring sum, diagonalized exactly by a product rotation."""
    n = n_sites
    if kind == "field_x":
        z = 1 - 2 * ((np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1)
        diag, rot, sign = z.sum(axis=1).astype(float), _HAD, 1.0
    else:
        diag = _zz_diagonal(n)  # a two-site ring counts its bond twice, like the trace
        rot, sign = {"zz": (np.eye(2), 1.0), "xx": (_HAD, 1.0), "tilde_yy": (_SY, -1.0)}[kind]
    u = np.eye(1)
    for _ in range(n):
        u = np.kron(u, rot)
    out = (u * np.exp(sign * eps * diag)[None, :]) @ u.conj().T
    return out.real if kind != "tilde_yy" or np.max(np.abs(out.imag)) < 1e-14 else out


def _gate_cases():
    """(label, builder(eps))."""
    return [
        ("zz", lambda e: gates.build_zz_gate(e)),
        ("xx", lambda e: gates.build_xx_gate(e)),
        ("tilde_yy", lambda e: gates.build_tilde_yy_gate(e)),
        ("field_x", lambda e: gates.build_local_field_gate(e, X)),
    ]


def gate_error(label: str, builder, eps: float, n_sites: int) -> float:
    """Max-norm deviation from the exact exponential, relative to max(1, largest entry)."""
    got = gates.materialize_ring(builder(eps), n_sites)
    exact = exact_exponential(label, n_sites, eps)
    return float(np.max(np.abs(got - exact)) / max(1.0, np.max(np.abs(exact))))


def suite_gates(level: str) -> list[Check]:
    sizes = range(2, 9) if level == "full" else range(2, 7)
    out = []
    for label, builder in _gate_cases():
        worst = max(gate_error(label, builder, e, n) for e in GATE_EPS for n in sizes)
        out.append(_check("gate-mpo", f"{label} rings {sizes.start}-{sizes.stop - 1}", worst, GATE_TOL))
    return out


def _pepo_exact(lx, ly, eps, tilde):
    n = lx * ly
    ops = [Y, Y] if tilde else [Z, Z]
    h = np.zeros((2**n, 2**n), dtype=complex)
    for i, j in peps.lattice_bonds(lx, ly):
        h += pair_op(ops[0], i, ops[1], j, n)
    return sla.expm((-eps if tilde else eps) * h)


def suite_pepo(level: str) -> list[Check]:
    lattices = [(2, 2), (2, 3), (3, 3)] if level == "full" else [(2, 2), (2, 3)]
    out = []
    for tilde in (False, True):
        worst = 0.0
        for (lx, ly), eps in itertools.product(lattices, (0.1, 0.5)):
            got = peps.pepo_operator(peps.build_zz_pepo(eps, tilde), lx, ly)
            exact = _pepo_exact(lx, ly, eps, tilde)
            worst = max(worst, np.max(np.abs(got - exact)) / max(1.0, np.max(np.abs(exact))))
        out.append(_check("pepo", f"{'tilde yy' if tilde else 'zz'} lattices", worst, 1e-12))
    lx = ly = 4 if level == "full" else 3
    beta = 0.4407
    got = peps.classical_ising_log_z(lx, ly, beta)
    exact = transfer_matrix_log_z(lx, ly, beta)
    out.append(_check("pepo", f"ising ln Z {lx}x{ly}", abs(got - exact) / abs(exact), 1e-10))
    return out


def _brute_log_z(lx, ly, beta):
    n = lx * ly
    spins = 1 - 2 * ((np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1)
    energy = np.zeros(2**n)
    for i, j in peps.lattice_bonds(lx, ly):
        energy += spins[:, i] * spins[:, j]
    m = np.max(beta * energy)
    return float(m + np.log(np.sum(np.exp(beta * energy - m))))


def transfer_matrix_log_z(lx, ly, beta):
    """ln Z from the 2^lx row-to-row transfer matrix of the open lattice."""
    rows = 1 - 2 * ((np.arange(2**lx)[:, None] >> np.arange(lx)[None, :]) & 1)
    inner = beta * np.sum(rows[:, :-1] * rows[:, 1:], axis=1)  # bonds inside a row
    between = beta * (rows @ rows.T)  # vertical bonds between consecutive rows
    log_t = between + 0.5 * (inner[:, None] + inner[None, :])
    shift = np.max(log_t)
    t = np.exp(log_t - shift)
    vec = np.exp(0.5 * inner)
    for _ in range(ly - 1):
        vec = t @ vec
    return float(np.log(np.exp(0.5 * inner) @ vec) + (ly - 1) * shift)


def suite_hamiltonians(level: str) -> list[Check]:
    nmax = 8 if level == "full" else 6
    fld = 0.3 * X + 0.2 * Z
    cases = [
        ("nn", hamiltonians.build_nn_mpo(0.7, -0.4, 1.1, fld),
         [(X, X, lambda r: 0.7 * (r == 1)), (Y, Y, lambda r: -0.4 * (r == 1)), (Z, Z, lambda r: 1.1 * (r == 1))], fld),
        ("ising", hamiltonians.build_ising_mpo(-1.3), [(Z, Z, lambda r: -1.3 * (r == 1))], None),
        ("expdecay", hamiltonians.build_expdecay_mpo([1.0, 0.5, -0.8], [0.6, -0.3, 0.8], fld),
         [(X, X, lambda r: 0.6 ** (r - 1)), (Y, Y, lambda r: 0.5 * (-0.3) ** (r - 1)),
          (Z, Z, lambda r: -0.8 * 0.8 ** (r - 1))], fld),
    ]
    out = []
    for label, h, couplings, f in cases:
        worst = 0.0
        for n in range(2, nmax + 1):
            got = hamiltonians.materialize_finite(h, n)
            exact = hamiltonians.explicit_hamiltonian(n, couplings, f)
            worst = max(worst, np.max(np.abs(got - exact)))
        out.append(_check("ham-mpo", f"{label} N<={nmax}", worst, 1e-12))
    pl = hamiltonians.build_powerlaw_mpo(3.0, 10, 1000)
    worst = 0.0
    for n in range(2, nmax + 1):
        got = hamiltonians.materialize_finite(pl, n)
        exact = hamiltonians.explicit_hamiltonian(n, [(Z, Z, lambda r: float(np.real(pl.coupling(r))))])
        worst = max(worst, np.max(np.abs(got - exact)))
    out.append(_check("ham-mpo", f"powerlaw channels N<={nmax}", worst, 1e-12))
    h6_nn = hamiltonians.materialize_finite(hamiltonians.build_nn_mpo(0.7, -0.4, 1.1, fld), 6)
    h6_is = hamiltonians.materialize_finite(hamiltonians.build_ising_mpo(1.0), 6)
    out.append(_check("ham-mpo", "schmidt rank nn = 5", abs(hamiltonians.operator_schmidt_rank(h6_nn, 3) - 5), 0))
    out.append(_check("ham-mpo", "schmidt rank ising = 3", abs(hamiltonians.operator_schmidt_rank(h6_is, 3) - 3), 0))
    return out


EXPFIT_LIMITS = {1: 1e-3, 2: 1e-5, 3: 1e-7}


def suite_expfit(level: str) -> list[Check]:
    out = []
    for p, lim in EXPFIT_LIMITS.items():
        f = expfit.fit_power_law(p, 10, 1000)
        out.append(_check("expfit", f"p={p} max deviation", f.max_dev, lim))
    f3 = expfit.fit_power_law(3, 10, 1000)
    out.append(_check("expfit", "p=3 l1 cost", f3.cost, 2e-5))
    k = np.arange(1, 201)
    two = expfit.fit(3 * 0.9**k - 0.3**k, 2)
    out.append(_check("expfit", "two-term recovery cost", two.cost, 1e-10))
    return out


def _random_state(rng, dim, cplx=True):
    a = rng.normal(size=(2, dim, dim))
    if cplx:
        a = a + 1j * rng.normal(size=(2, dim, dim))
    return imps.normalize(imps.UniformMPS(a))


def jordan_builders():
    fld = 0.4 * X + 0.2 * Z
    return [
        hamiltonians.build_nn_mpo(0.3, -0.7, 1.1, fld),
        hamiltonians.build_ising_mpo(1.0),
        hamiltonians.build_expdecay_mpo([1.0, 0.5, -0.3], [0.6, -0.8, 0.2], 0.3 * X),
        hamiltonians.build_powerlaw_mpo(3.0, 4, 200),
    ]


def suite_jordan(level: str, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    dims = (1, 2, 3, 4) if level == "full" else (1, 2, 3)
    n = 200
    worst = 0.0
    for dim in dims:
        st = _random_state(rng, dim)
        for h in jordan_builders():
            e, _ = thermo.energy_density(st, h)
            slope = thermo.finite_window_expectation(st, h, n + 1) - thermo.finite_window_expectation(st, h, n)
            worst = max(worst, abs(e - slope))
    return [_check("thermo", f"energy density vs window slope (N={n})", worst, 1e-9)]


SUITES = {
    "gate-mpo": suite_gates,
    "pepo": suite_pepo,
    "ham-mpo": suite_hamiltonians,
    "expfit": suite_expfit,
    "thermo": suite_jordan,
}

# tuned for D = 64: long relaxation at a large step, then short steps for the bias
BENCHMARK_SCHEDULES = {
    "tfi": "0.25:8000:0,0.1:400:0,0.05:400:0,0.02:600:0,0.01:1000:0,0.005:800:0,0.003:1500:1e-12",
    "heisenberg": "0.1:1500:0,0.05:600:0,0.03:600:0,0.02:600:0,0.01:1000:1e-11",
}


def suite_benchmarks(level: str) -> list[Check]:
    from .reference import reference_energy

    out = []
    limits = {"tfi": 5e-9, "heisenberg": 1e-5}
    for model, sched in BENCHMARK_SCHEDULES.items():
        res = imps.ground_state_search(model, 64, parse_schedule(sched), measure_every=100)
        ref = reference_energy(model)
        out.append(_check("benchmark", f"{model} D=64 relative error", abs(res.energy - ref) / abs(ref), limits[model]))
    return out


def parse_schedule(text: str) -> list[imps.Stage]:
    """``eps:max_sweeps[:tol],...``; a missing tol means 0.1 eps^2."""
    stages = []
    for part in text.split(","):
        bits = part.strip().split(":")
        if len(bits) not in (2, 3):
            raise ValueError(f"bad schedule entry {part!r}")
        eps, sweeps = float(bits[0]), int(bits[1])
        tol = float(bits[2]) if len(bits) == 3 else 0.1 * eps * eps
        stages.append(imps.Stage(eps, sweeps, tol))
    return stages


def run_suites(level: str = "fast", names=None) -> list[Check]:
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    checks = []
    for name, fn in SUITES.items():
        if names is None or name in names:
            checks.extend(fn(level))
    if level == "full" and (names is None or "benchmark" in names):
        checks.extend(suite_benchmarks(level))
    return checks
