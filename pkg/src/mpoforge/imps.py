"""Translationally invariant MPS: gate application, truncation, imaginary-time search.

Imaginary-time evolution keeps every matrix real and symmetric: gates are
applied exactly (bond D -> D D'), then an isometry onto the dominant
eigenvectors of the transfer fixed point brings the bond back to D_max.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .gates import GateMPO, TrotterPlan, trotter_plan
from .linalg import leading_eigenpair
from .pauli import X, Y, Z

log = logging.getLogger(__name__)

__all__ = [
    "UniformMPS",
    "TruncationReport",
    "EvolutionError",
    "product_state",
    "apply_gate",
    "truncate",
    "normalize",
    "transfer_fixed_point",
    "gauge_condition",
    "measure_bond_energy",
    "correlator",
    "model_terms",
    "Stage",
    "default_schedule",
    "ground_state_search",
    "SearchResult",
    "write_trace_csv",
    "save_state",
    "load_state",
]

SYM_TOL = 1e-12


class EvolutionError(RuntimeError):
    pass


@dataclass(frozen=True)
class UniformMPS:
    """One D x D matrix A[i] per physical symbol i."""

    A: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.A)
        if a.ndim != 3 or a.shape[1] != a.shape[2]:
            raise ValueError("A must have shape (d, D, D)")
        object.__setattr__(self, "A", a)

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def D(self) -> int:
        return self.A.shape[1]

    @property
    def scalar_kind(self) -> str:
        return "complex" if np.iscomplexobj(self.A) else "real"

    def is_symmetric(self, tol: float = SYM_TOL) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.A))))
        return bool(np.max(np.abs(self.A - self.A.transpose(0, 2, 1))) <= tol * scale)


@dataclass(frozen=True)
class TruncationReport:
    kept: int
    discarded_weight: float
    transfer_eigenvalue: complex | float
    x_kept: np.ndarray | None = None  # fixed point restricted to the kept space


def product_state(vec) -> UniformMPS:
    v = np.asarray(vec)
    return UniformMPS(v.reshape(-1, 1, 1) / np.linalg.norm(v))


def apply_gate(mps: UniformMPS, g: GateMPO) -> UniformMPS:
    """C[i] = sum_{j,k} A[j] (x) B[k] <i|X[k]|j>."""
    if g.phys_dim != mps.d:
        raise ValueError("physical dimensions differ")
    a, b, ops = mps.A, g.site_matrices, g.op_basis
    d, dd, gd = mps.d, mps.D, g.bond_dim
    if gd == 1:
        # product operator: just rotate the physical index
        m = np.einsum("k,kij->ij", b[:, 0, 0], ops)
        return UniformMPS(np.einsum("ij,jab->iab", m, a))
    c = np.einsum("kij,jab,kcd->iacbd", ops, a, b)
    return UniformMPS(c.reshape(d, dd * gd, dd * gd))


def _transfer_matvec(c: np.ndarray):
    """vec(x) -> vec(sum_i C[i] x C[i]^T) on the row-major flattening."""
    n = c.shape[1]

    def mv(v):
        x = v.reshape(n, n)
        out = np.zeros_like(x, dtype=np.result_type(x, c))
        for ci in c:
            out += ci @ x @ ci.T
        return out.reshape(-1)

    return mv


def _complex_orthonormalize(v: np.ndarray) -> np.ndarray:
    """Scale columns so v_k^T v_k = 1 (complex symmetric eigenvectors)."""
    norms = np.sqrt(np.sum(v * v, axis=0))
    return v / norms[None, :]


def truncate(
    mps: UniformMPS,
    D_target: int,
    *,
    v0: np.ndarray | None = None,
    tol: float = 1e-10,
) -> tuple[UniformMPS, TruncationReport]:
    """Isometric truncation from the leading eigenvector of E = sum_i C[i] (x) C[i].

    The eigenvector x is reshaped, symmetrized and made trace-positive; P holds
    its D_target dominant eigenvectors and the new matrices are P^T C[i] P.
    For complex symmetric C the eigenvectors are scaled to v^T v = 1 so the
    projection keeps the matrices symmetric.
    """
    c = mps.A
    if not mps.is_symmetric():
        raise EvolutionError("truncate needs symmetric matrices")
    n = mps.D
    is_real = not np.iscomplexobj(c)
    pair = leading_eigenpair(
        _transfer_matvec(c),
        n * n,
        symmetric=True,
        v0=None if v0 is None else np.asarray(v0).reshape(-1),
        tol=tol,
        dtype=np.float64 if is_real else np.complex128,
        check_gap=n * n <= 400,
    )
    if pair.ambiguous:
        raise EvolutionError("dominant transfer eigenvalue is degenerate")
    x = pair.vector.reshape(n, n)
    x = 0.5 * (x + x.T)
    if is_real:
        if np.trace(x) < 0:
            x = -x
        w, u = np.linalg.eigh(x)
        order = np.argsort(w)[::-1]
        w, u = w[order], u[:, order]
        weights = np.clip(w, 0.0, None)
    else:
        tr = np.trace(x)
        x = x * (abs(tr) / tr) if tr != 0 else x
        w, u = np.linalg.eig(x)
        order = np.argsort(-np.abs(w))
        w, u = w[order], _complex_orthonormalize(u[:, order])
        weights = np.abs(w)
    keep = min(D_target, n)
    total = float(np.sum(weights))
    discarded = float(np.sum(weights[keep:]) / total) if total > 0 else 0.0
    p = u[:, :keep]
    new = np.array([p.T @ ci @ p for ci in c])
    if is_real:
        new = 0.5 * (new + new.transpose(0, 2, 1))
    report = TruncationReport(keep, min(max(discarded, 0.0), 1.0), pair.value, np.diag(w[:keep]))
    return UniformMPS(new), report


def transfer_fixed_point(mps: UniformMPS, side: str = "right", *, v0=None, tol: float = 1e-12):
    """Dominant eigenpair of E0 = sum_i A[i] (x) conj(A[i]) as a matrix.

    right: sum_i A x A^dagger = lam x, indexed [ket, bra];
    left: sum_i A^dagger x A = lam x, indexed [bra, ket].
    The returned matrix is Hermitian with positive trace.
    """
    a = mps.A
    n = mps.D
    ac = a.conj()
    if side == "right":

        def mv(v):
            x = v.reshape(n, n)
            return sum(ai @ x @ aci.T for ai, aci in zip(a, ac)).reshape(-1)

    elif side == "left":

        def mv(v):
            x = v.reshape(n, n)
            return sum(aci.T @ x @ ai for ai, aci in zip(a, ac)).reshape(-1)

    else:
        raise ValueError("side must be 'left' or 'right'")
    real = not np.iscomplexobj(a)
    sym = real and mps.is_symmetric()
    pair = leading_eigenpair(
        mv,
        n * n,
        symmetric=sym,
        v0=None if v0 is None else np.asarray(v0).reshape(-1),
        tol=tol,
        dtype=np.float64 if real else np.complex128,
        check_gap=n * n <= 400,
    )
    x = pair.vector.reshape(n, n)
    tr = np.trace(x)
    if tr != 0:
        x = x * (abs(tr) / tr)
    x = 0.5 * (x + x.conj().T)
    if pair.ambiguous:
        raise EvolutionError("degenerate dominant transfer eigenvalue")
    return pair.value, x


def normalize(mps: UniformMPS, *, v0=None, tol: float = 1e-12) -> UniformMPS:
    lam, _ = transfer_fixed_point(mps, v0=v0, tol=tol)
    lam = float(np.real(lam))
    if not lam > 0:
        raise EvolutionError("transfer spectrum has no positive leading eigenvalue")
    return UniformMPS(mps.A / np.sqrt(lam))


def _normalize_with_fixed_point(mps: UniformMPS, v0=None, tol=1e-12):
    lam, x = transfer_fixed_point(mps, v0=v0, tol=tol)
    lam = float(np.real(lam))
    if not lam > 0:
        raise EvolutionError("transfer spectrum has no positive leading eigenvalue")
    return UniformMPS(mps.A / np.sqrt(lam)), x


# --- gauge conditioning for complex symmetric fixed points -----------------


@dataclass(frozen=True)
class GaugeResult:
    Q: np.ndarray
    x: np.ndarray
    ratios: tuple[float, ...]
    iterations: int


def _ratio(x: np.ndarray) -> float:
    s = np.linalg.svd(x, compute_uv=False)
    return float(s[-1] / s[0]) if s[0] > 0 else 0.0


def gauge_condition(x, *, eps: float = 0.05, max_iter: int = 500, min_gain: float = 1e-8) -> GaugeResult:
    """Complex orthogonal Q raising sigma_min/sigma_max of Q x Q^T.

    With u_1 and u_D the leading and trailing left singular vectors of the
    current x, the real antisymmetric generator G = Im(u_D u_D^dag - u_1 u_1^dag)
    gives the factor exp(i eps G), which satisfies F F^T = 1. Steps that do
    not raise the ratio halve eps; iteration stops once the gain per accepted
    step drops below ``min_gain`` or eps underflows.
    """
    x = np.asarray(x, dtype=complex)
    if np.max(np.abs(x - x.T)) > 1e-10 * max(1.0, np.max(np.abs(x))):
        raise ValueError("gauge_condition needs a symmetric matrix")
    n = x.shape[0]
    q = np.eye(n, dtype=complex)
    r = _ratio(x)
    ratios = [r]
    it = 0
    step = eps
    while it < max_iter and step > 1e-12:
        it += 1
        u, _, _ = np.linalg.svd(x)
        g = np.imag(np.outer(u[:, -1], u[:, -1].conj()) - np.outer(u[:, 0], u[:, 0].conj()))
        if not np.any(g):
            break
        f = sla.expm(1j * step * g)
        xn = f @ x @ f.T
        rn = _ratio(xn)
        if rn > r:
            gain = rn - r
            x, q, r = xn, f @ q, rn
            x = 0.5 * (x + x.T)
            ratios.append(r)
            if gain < min_gain:
                break
        else:
            step *= 0.5
    return GaugeResult(q, x, tuple(ratios), it)


# --- measurement ------------------------------------------------------------


def model_terms(model: str, B: float = 1.0, rotated: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """(bond term, site term) per site in the convention the plan evolves."""
    if model == "tfi":
        return -np.kron(Z, Z), -B * X
    if model == "heisenberg":
        if rotated:
            h = -np.kron(X, X) + np.real(np.kron(Y, Y)) - np.kron(Z, Z)
        else:
            h = np.kron(X, X) + np.real(np.kron(Y, Y)) + np.kron(Z, Z)
        return h, np.zeros((2, 2))
    raise ValueError(f"unknown model {model!r}")


def _fixed_points(mps: UniformMPS, x_right=None):
    lam_r, r = transfer_fixed_point(mps, "right") if x_right is None else (1.0, x_right)
    if mps.is_symmetric() and not np.iscomplexobj(mps.A):
        l = r.copy()
        lam_l = lam_r
    else:
        lam_l, l = transfer_fixed_point(mps, "left")
    return lam_r, r, lam_l, l


def measure_bond_energy(
    mps: UniformMPS,
    two_site_term,
    one_site_term=None,
    *,
    x_right: np.ndarray | None = None,
    check_norm: bool = True,
) -> float:
    """Energy per site <h_{i,i+1}> + <h_i> from the transfer fixed points.

    ``two_site_term`` is a d^2 x d^2 matrix acting on (site i, site i+1).
    """
    a = mps.A
    d = mps.d
    lam, r, _, l = _fixed_points(mps, x_right)
    if check_norm and abs(lam - 1.0) > 1e-8:
        raise EvolutionError(f"state not normalized (transfer eigenvalue {lam})")
    h2 = np.asarray(two_site_term).reshape(d, d, d, d)  # (out_i, out_j, in_i, in_j)
    pair = np.einsum("iab,jbc->ijac", a, a)  # amplitude of (i, j)
    # right environment contracted with the ket pair
    ket = np.einsum("ijac,cd->ijad", pair, r)
    hk = np.einsum("klij,ijad->klad", h2, ket)
    norm = np.einsum("ba,ab->", l, r)
    e = np.einsum("ba,klad,klbd->", l, hk, pair.conj()) / norm
    if one_site_term is not None and np.any(one_site_term):
        h1 = np.asarray(one_site_term)
        ket1 = np.einsum("iab,bc->iac", a, r)
        e += np.einsum("ba,ki,iac,kbc->", l, h1, ket1, a.conj()) / norm
    return float(np.real(e))


def correlator(mps: UniformMPS, op_a, op_b, dist: int) -> float:
    """<A_0 B_r> for a normalized state."""
    a = mps.A
    _, r, _, l = _fixed_points(mps)
    norm = np.einsum("ba,ab->", l, r)
    # left vector after op_a at site 0
    left = np.einsum("ba,ki,iac,kbd->cd", l, op_a, a, a.conj())
    for _ in range(dist - 1):
        left = np.einsum("ab,iac,ibd->cd", left, a, a.conj())
    val = np.einsum("ab,ki,iac,kbd,cd->", left, op_b, a, a.conj(), r)
    return float(np.real(val / norm))


# --- ground state search ----------------------------------------------------


@dataclass(frozen=True)
class Stage:
    eps: float
    max_sweeps: int
    tol: float


def default_schedule(eps_min: float = 1e-5, eps0: float = 0.1, max_sweeps: int = 2000) -> list[Stage]:
    """Geometric 1-2-5 ladder from eps0 down to eps_min, advance when |de| < 0.1 eps^2."""
    steps = []
    mant = [1.0, 0.5, 0.2]
    k = 0
    while True:
        eps = eps0 * mant[k % 3] * 10.0 ** (-(k // 3))
        if eps < eps_min * (1 - 1e-9):
            break
        steps.append(Stage(eps, max_sweeps, 0.1 * eps * eps))
        k += 1
    return steps


@dataclass
class TraceRow:
    sweep: int
    eps: float
    D: int
    energy: float
    discarded_weight: float


@dataclass
class SearchResult:
    mps: UniformMPS
    energy: float
    trace: list[TraceRow]
    converged: bool
    sweeps: int
    wall_time: float
    message: str = ""
    stage_energies: list[tuple[float, float]] = field(default_factory=list)


def _gate_seed(g: GateMPO) -> np.ndarray:
    """Fixed point of sum_k B[k] (x) B[k], used to warm-start truncations."""
    b = g.site_matrices
    n = g.bond_dim
    m = sum(np.kron(bk, bk) for bk in b)
    w, v = np.linalg.eig(m)
    y = np.real(v[:, np.argmax(np.abs(w))]).reshape(n, n)
    y = 0.5 * (y + y.T)
    return y if np.trace(y) >= 0 else -y


def ground_state_search(
    model: str,
    D_max: int,
    schedule: list[Stage] | None = None,
    *,
    B: float = 1.0,
    initial: UniformMPS | None = None,
    measure_every: int = 2,
    eig_tol: float = 1e-10,
    energy_slack: float = 1e-10,
    progress=None,
) -> SearchResult:
    """Imaginary-time evolution with alternating gate order.

    Odd sweeps apply the plan's gates in order, even sweeps in reverse, so each
    pair of sweeps is a symmetric product of exponentials and the measured
    energy carries no first-order Trotter bias. The energy is measured after
    every ``measure_every`` sweeps (kept even). A stage ends when two
    consecutive measurements differ by less than its tolerance. If the
    energy at the end of a stage is above its value at the start by more than
    ``energy_slack`` per sweep, the search aborts.
    """
    t0 = time.perf_counter()
    stages = list(schedule) if schedule is not None else default_schedule()
    if not stages:
        raise ValueError("empty schedule")
    if measure_every < 2 or measure_every % 2:
        raise ValueError("measure_every must be a positive even number")
    h2, h1 = model_terms(model, B, rotated=True)
    if initial is None:
        # a generic real product state; the symmetric |+> can get stuck at D = 1
        mps = product_state(np.array([np.cos(0.3), np.sin(0.3)]))
    else:
        mps = initial
    mps, seed = _normalize_with_fixed_point(mps)
    trace: list[TraceRow] = []
    stage_energies: list[tuple[float, float]] = []
    sweep = 0
    energy = measure_bond_energy(mps, h2, h1, x_right=seed)
    converged = False
    message = ""
    last_disc = 0.0
    for st in stages:
        plan: TrotterPlan = trotter_plan(model, st.eps, B)
        gate_seeds = [_gate_seed(g) if g.bond_dim > 1 else None for g in plan.gates]
        e_prev = None
        e_start = energy
        stage_sweeps = 0
        stage_done = False
        for _ in range(st.max_sweeps):
            order = list(range(len(plan.gates)))
            if sweep % 2 == 1:
                order.reverse()
            truncated = False
            for pos, gi in enumerate(order):
                g = plan.gates[gi]
                mps = apply_gate(mps, g)
                if gate_seeds[gi] is not None and seed is not None:
                    seed = np.kron(seed, gate_seeds[gi])
                last = pos + 1 == len(order)
                # local gates are folded in before truncating
                if mps.D > D_max and (last or plan.gates[order[pos + 1]].bond_dim > 1):
                    v0 = seed if seed is not None and seed.shape[0] == mps.D else None
                    mps, rep = truncate(mps, D_max, v0=v0, tol=eig_tol)
                    lam = float(np.real(rep.transfer_eigenvalue))
                    if not lam > 0:
                        raise EvolutionError("transfer spectrum has no positive leading eigenvalue")
                    mps = UniformMPS(mps.A / np.sqrt(lam))
                    seed = rep.x_kept
                    last_disc = rep.discarded_weight
                    truncated = True
            sweep += 1
            stage_sweeps += 1
            measure = sweep % measure_every == 0
            if measure or not truncated:
                v0 = seed if seed is not None and seed.shape[0] == mps.D else None
                mps, seed = _normalize_with_fixed_point(mps, v0=v0, tol=eig_tol)
            if measure:
                e = measure_bond_energy(mps, h2, h1, x_right=seed)
                trace.append(TraceRow(sweep, st.eps, mps.D, e, last_disc))
                if progress is not None:
                    progress(trace[-1])
                energy = e
                if e_prev is not None and abs(e - e_prev) < st.tol:
                    stage_done = True
                    break
                e_prev = e
        stage_energies.append((st.eps, energy))
        if energy > e_start + energy_slack * max(stage_sweeps, 1):
            message = f"energy rose over stage eps={st.eps}: {e_start} -> {energy}"
            log.warning(message)
            return SearchResult(mps, energy, trace, False, sweep, time.perf_counter() - t0, message, stage_energies)
        converged = stage_done
    if not converged:
        message = "last stage hit its sweep limit"
    return SearchResult(mps, energy, trace, converged, sweep, time.perf_counter() - t0, message, stage_energies)


TRACE_FIELDS = ("sweep", "eps", "D", "energy", "discarded_weight")


def write_trace_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_FIELDS)
        for r in rows:
            w.writerow([r.sweep, repr(r.eps), r.D, repr(r.energy), repr(r.discarded_weight)])


def save_state(mps: UniformMPS, path) -> None:
    """One JSON header line, a newline, then the row-major A values.

    Header: {"d": .., "D": .., "scalar_kind": "real"|"complex", "byteorder": "little"}.
    Payload: float64 (complex: interleaved real, imag) little-endian.
    """
    header = {"d": mps.d, "D": mps.D, "scalar_kind": mps.scalar_kind, "byteorder": "little"}
    dtype = "<c16" if mps.scalar_kind == "complex" else "<f8"
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(np.ascontiguousarray(mps.A, dtype=dtype).tobytes())


def load_state(path) -> UniformMPS:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline())
        payload = fh.read()
    dtype = "<c16" if header["scalar_kind"] == "complex" else "<f8"
    d, dd = int(header["d"]), int(header["D"])
    a = np.frombuffer(payload, dtype=dtype)
    if a.size != d * dd * dd:
        raise ValueError("state file payload has the wrong length")
    return UniformMPS(a.reshape(d, dd, dd).astype(complex if dtype == "<c16" else float))
