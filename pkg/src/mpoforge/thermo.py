"""Thermodynamic-limit expectation values of MPO Hamiltonians in uniform MPS.

A window of N sites of an infinite uniform state gives

    <psi| O_N |psi> = <L| E^N |R>,   L = x_l (x) v_l,  R = x_r (x) v_r,

with E = E_H (one MPO copy) or E_{H^2} (two copies). The eigenvalue 1 of E
is defective, so <L|E^N|R> = c0 + c1 N + c2 N(N-1)/2 + (exponentially small).
The coefficients are read off exactly by projecting R onto the generalized
eigenspace V of E at 1: with F = E - 1 nilpotent on V and w0 = P R,

    E^N w0 = w0 + N F w0 + N(N-1)/2 F^2 w0.

Vectors on the E_H space are ordered (ket bond, MPO bond, bra bond), on the
E_{H^2} space (ket bond, MPO bond, conjugate MPO bond, bra bond).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonians import HamiltonianMPO, shifted
from .imps import EvolutionError, UniformMPS, normalize, transfer_fixed_point

__all__ = [
    "ThermoError",
    "JordanEvaluation",
    "fixed_points",
    "transfer_EH",
    "transfer_EH2",
    "energy_density",
    "variance_density",
    "finite_window_expectation",
    "finite_window_square",
    "gradient_optimize",
    "MAX_DENSE_TRANSFER",
]

MAX_DENSE_TRANSFER = 4096
NORM_TOL = 1e-10
MODEL_TOL = 1e-8


class ThermoError(RuntimeError):
    pass


@dataclass(frozen=True)
class JordanEvaluation:
    d0: float
    q_r: np.ndarray
    q_l: np.ndarray
    qt_r: tuple[np.ndarray, ...]  # generalized right vectors, chain order
    qt_l: tuple[np.ndarray, ...]
    Q: np.ndarray | None  # (Q_l^T Q_r)^-1, None without a Jordan block
    coefficients: tuple[float, ...]  # c0, c1[, c2] in the basis 1, N, N(N-1)/2
    block_size: int
    residual: float

    @property
    def dual_left(self) -> np.ndarray | None:
        """Rows dual to Q_r: dual_left @ Q_r = identity."""
        if self.Q is None:
            return None
        return self.Q @ np.vstack([self.q_l, *self.qt_l])

    def value(self, n):
        basis = [1.0, n, n * (n - 1) / 2]
        return sum(c * b for c, b in zip(self.coefficients, basis))


def fixed_points(mps: UniformMPS) -> tuple[np.ndarray, np.ndarray]:
    """(x_l, x_r) with sum A^T x_l conj(A) = x_l, sum A x_r A^dag = x_r, <x_l|x_r> = 1.

    Both are indexed [ket, bra] so they flatten against the transfer operators
    here. The state must be normalized.
    """
    try:
        lam_r, x_r = transfer_fixed_point(mps, "right")
        lam_l, l_bk = transfer_fixed_point(mps, "left")
    except EvolutionError as exc:
        raise ThermoError(str(exc)) from exc
    if abs(lam_r - 1.0) > NORM_TOL or abs(lam_l - 1.0) > NORM_TOL:
        raise ThermoError(f"state is not normalized (leading eigenvalue {lam_r})")
    x_l = l_bk.T
    ov = np.sum(x_l * x_r)
    return x_l / ov, x_r


def _field_blocks(mps: UniformMPS, h: HamiltonianMPO):
    if h.phys_dim != mps.d:
        raise ValueError("physical dimensions differ")
    return h.tensor()  # W[m, n, out, in]


def transfer_EH(mps: UniformMPS, h: HamiltonianMPO) -> np.ndarray:
    """Dense E_H = sum A_i (x) B_j (x) conj(A_k) <k|X_j|i>."""
    a = mps.A
    w = _field_blocks(mps, h)
    dd, dh = mps.D, h.bond_dim
    n = dd * dd * dh
    if n > MAX_DENSE_TRANSFER:
        raise ThermoError(f"transfer operator of size {n} exceeds the dense limit")
    e = np.einsum("mnki,iac,kbd->ambcnd", w, a, a.conj())
    return e.reshape(n, n)


def transfer_EH2(mps: UniformMPS, h: HamiltonianMPO) -> np.ndarray:
    """Dense E_{H^2} = sum A_i (x) B_j (x) conj(B_k) (x) conj(A_l) <l|X_k^dag X_j|i>."""
    a = mps.A
    w = _field_blocks(mps, h)
    dd, dh = mps.D, h.bond_dim
    n = dd * dd * dh * dh
    if n > MAX_DENSE_TRANSFER:
        raise ThermoError(f"transfer operator of size {n} exceeds the dense limit")
    # X_k^dag X_j: sum_p conj(W2[.., p, l]) W1[.., p, i]
    ww = np.einsum("mnpi,uvpl->munvli", w, w.conj())
    e = np.einsum("munvli,iac,lbd->amubcnvd", ww, a, a.conj())
    return e.reshape(n, n)


def _boundaries(x_l, x_r, h: HamiltonianMPO, copies: int):
    vl, vr = h.v_l.astype(complex), h.v_r.astype(complex)
    left, right = x_l, x_r
    mps_l = vl
    mps_r = vr
    for _ in range(copies - 1):
        mps_l = np.kron(mps_l, vl.conj())
        mps_r = np.kron(mps_r, vr.conj())
    dd = x_l.shape[0]
    m = mps_l.shape[0]
    big_l = np.einsum("ab,m->amb", left, mps_l).reshape(dd * m * dd)
    big_r = np.einsum("ab,m->amb", right, mps_r).reshape(dd * m * dd)
    return big_l, big_r


def _generalized_space(f: np.ndarray, power: int):
    """Orthonormal bases of ker F^power (right) and ker (F^T)^power (left)."""
    fp = np.linalg.matrix_power(f, power)
    return _null(fp), _null(fp.T)


def _null(m: np.ndarray) -> np.ndarray:
    _, s, vh = np.linalg.svd(m)
    tol = max(m.shape) * np.finfo(float).eps * max(s[0], 1.0) * 1e3
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def _expansion(e: np.ndarray, big_l: np.ndarray, big_r: np.ndarray, expected_dim: int, power: int):
    n = e.shape[0]
    f = e - np.eye(n)
    v, w = _generalized_space(f, power)
    if v.shape[1] != expected_dim or w.shape[1] != expected_dim:
        raise ThermoError(
            f"eigenvalue-1 generalized eigenspace has dimension {v.shape[1]}, expected {expected_dim}; "
            "the transfer spectrum is degenerate or the MPO is malformed"
        )
    g = w.T @ v
    w0 = v @ np.linalg.solve(g, w.T @ big_r)  # spectral projection of R
    l0 = w @ np.linalg.solve(g.T, v.T @ big_l)  # and of L (as a column)
    ws = [w0]
    ls = [l0]
    for _ in range(power - 1):
        ws.append(f @ ws[-1])
        ls.append(f.T @ ls[-1])
    resid = float(np.linalg.norm(f @ ws[-1]) / max(1.0, np.linalg.norm(w0)))
    if resid > MODEL_TOL:
        raise ThermoError(f"Jordan block larger than {power} (residual {resid:.2e})")
    coeffs = tuple(complex(big_l @ wk) for wk in ws)
    return ws, ls, coeffs, resid


def _real(z: complex, what: str) -> float:
    if abs(z.imag) > 1e-8 * max(1.0, abs(z.real)):
        raise ThermoError(f"{what} has an imaginary part {z.imag:.2e}; is the MPO Hermitian?")
    return float(z.real)


def energy_density(mps: UniformMPS, h: HamiltonianMPO) -> tuple[float, JordanEvaluation]:
    """Energy per site from the size-2 Jordan block of E_H at eigenvalue 1."""
    x_l, x_r = fixed_points(mps)
    e_h = transfer_EH(mps, h)
    big_l, big_r = _boundaries(x_l, x_r, h, 1)
    ws, ls, coeffs, resid = _expansion(e_h, big_l, big_r, 2, 2)
    dh = h.bond_dim
    q_r = np.einsum("ab,m->amb", x_r, np.eye(dh)[h.start]).reshape(-1).astype(complex)
    q_l = np.einsum("ab,m->amb", x_l, np.eye(dh)[h.stop]).reshape(-1).astype(complex)
    e = _real(coeffs[1], "energy density")
    if abs(e) <= 1e-14:
        ev = JordanEvaluation(1.0, q_r, q_l, (), (), None, (_real(coeffs[0], "c0"), e), 1, resid)
        return e, ev
    # chain vectors: F qt_r = q_r with gauge <L|qt_r> = 0, likewise on the left
    qt_r = ws[0] / e
    qt_r = qt_r - (big_l @ qt_r) * q_r
    qt_l = ls[0] / e
    qt_l = qt_l - (qt_l @ big_r) * q_l
    q_rmat = np.column_stack([q_r, qt_r])
    q_lmat = np.column_stack([q_l, qt_l])
    qmat = np.linalg.inv(q_lmat.T @ q_rmat)
    ev = JordanEvaluation(1.0, q_r, q_l, (qt_r,), (qt_l,), qmat, (_real(coeffs[0], "c0"), e), 2, resid)
    return e, ev


def variance_density(
    mps: UniformMPS, h: HamiltonianMPO, lam_shift: float = 0.0
) -> tuple[float, float, JordanEvaluation]:
    """Coefficients (c1, c2) of <(H_N - N lam)^2> = c0 + c1 N + c2 N(N-1)/2 + ...

    For lam equal to the energy density c2 vanishes and c1 is the variance per
    site; otherwise c2 = 2 (e - lam)^2.
    """
    hs = shifted(h, lam_shift) if lam_shift != 0.0 else h
    x_l, x_r = fixed_points(mps)
    e2 = transfer_EH2(mps, hs)
    big_l, big_r = _boundaries(x_l, x_r, hs, 2)
    ws, ls, coeffs, resid = _expansion(e2, big_l, big_r, 4, 3)
    dh = hs.bond_dim
    s0 = np.kron(np.eye(dh)[hs.start], np.eye(dh)[hs.start])
    s1 = np.kron(np.eye(dh)[hs.stop], np.eye(dh)[hs.stop])
    q_r = np.einsum("ab,m->amb", x_r, s0).reshape(-1).astype(complex)
    q_l = np.einsum("ab,m->amb", x_l, s1).reshape(-1).astype(complex)
    c0, c1, c2 = (_real(c, "variance coefficient") for c in coeffs)
    qmat = None
    qt_r: tuple[np.ndarray, ...] = ()
    qt_l: tuple[np.ndarray, ...] = ()
    block = 1
    if abs(c2) > 1e-14:
        # w2 = c2 q_r; the chain q_r <- w1/c2 <- w0/c2
        qt_r = (ws[1] / c2, ws[0] / c2)
        qt_l = (ls[1] / c2, ls[0] / c2)
        q_rmat = np.column_stack([q_r, *qt_r])
        q_lmat = np.column_stack([q_l, *qt_l])
        qmat = np.linalg.inv(q_lmat.T @ q_rmat)
        block = 3
    ev = JordanEvaluation(1.0, q_r, q_l, qt_r, qt_l, qmat, (c0, c1, c2), block, resid)
    return c1, c2, ev


def _apply_eh(w: np.ndarray, a: np.ndarray, v: np.ndarray) -> np.ndarray:
    # v[a, m, b] -> sum W[m, n, k, i] A_i[a, c] conj(A_k)[b, d] v[c, n, d]
    t = np.einsum("iac,cnd->iand", a, v)
    t = np.einsum("mnki,iand->kamd", w, t)
    return np.einsum("kamd,kbd->amb", t, a.conj())


def finite_window_expectation(mps: UniformMPS, h: HamiltonianMPO, n_sites: int) -> float:
    """<L| E_H^N |R> by N successive applications of E_H to R."""
    if n_sites < 1:
        raise ValueError("window must contain at least one site")
    x_l, x_r = fixed_points(mps)
    w = _field_blocks(mps, h)
    vec = np.einsum("ab,m->amb", x_r, h.v_r.astype(complex))
    for _ in range(n_sites):
        vec = _apply_eh(w, mps.A, vec)
    val = np.einsum("ab,m,amb->", x_l, h.v_l.astype(complex), vec)
    return _real(complex(val), "window expectation")


def finite_window_square(mps: UniformMPS, h: HamiltonianMPO, n_sites: int, lam_shift: float = 0.0) -> float:
    """<L| E_{H^2}^N |R>: the window value of (H_N - N lam)^dag (H_N - N lam)."""
    if n_sites < 1:
        raise ValueError("window must contain at least one site")
    hs = shifted(h, lam_shift) if lam_shift != 0.0 else h
    x_l, x_r = fixed_points(mps)
    w = _field_blocks(mps, hs)
    a, ac = mps.A, mps.A.conj()
    vec = np.einsum("ab,m,n->amnb", x_r, hs.v_r.astype(complex), hs.v_r.astype(complex))
    for _ in range(n_sites):
        t = np.einsum("iac,cnvd->ianvd", a, vec)
        t = np.einsum("mnpi,ianvd->pamvd", w, t)
        t = np.einsum("uvpl,pamvd->lamud", w.conj(), t)
        vec = np.einsum("lamud,lbd->amub", t, ac)
    val = np.einsum("ab,m,n,amnb->", x_l, hs.v_l.astype(complex), hs.v_l.astype(complex), vec)
    return _real(complex(val), "window expectation")


# --- gradient optimization ---------------------------------------------------


@dataclass(frozen=True)
class OptimizeResult:
    mps: UniformMPS
    energies: tuple[float, ...]
    grad_norm: float
    iterations: int
    message: str


def _param_map(template: np.ndarray, symmetric: bool):
    """Real parameter vector <-> matrices; symmetric pairs share one parameter."""
    d, n, _ = template.shape
    cplx = np.iscomplexobj(template)
    if symmetric:
        iu = np.triu_indices(n)
        idx = [(i, r, c) for i in range(d) for r, c in zip(*iu)]
    else:
        idx = [(i, r, c) for i in range(d) for r in range(n) for c in range(n)]

    def to_vec(a):
        vals = np.array([a[k] for k in idx])
        return np.concatenate([vals.real, vals.imag]) if cplx else vals.real.copy()

    def to_mats(p):
        m = len(idx)
        vals = p[:m] + 1j * p[m:] if cplx else p
        a = np.zeros(template.shape, dtype=template.dtype)
        for (i, r, c), x in zip(idx, vals):
            a[i, r, c] = x
            if symmetric:
                a[i, c, r] = x
        return a

    return to_vec, to_mats


def gradient_optimize(
    mps0: UniformMPS,
    h: HamiltonianMPO,
    max_iters: int = 100,
    *,
    fd_step: float = 1e-6,
    step0: float = 0.1,
    grad_tol: float = 1e-8,
    max_halvings: int = 40,
) -> OptimizeResult:
    """Steepest descent on the energy density with central-difference gradients."""
    symmetric = mps0.is_symmetric()
    to_vec, to_mats = _param_map(mps0.A, symmetric)

    def energy(p):
        st = normalize(UniformMPS(to_mats(p)))
        return energy_density(st, h)[0]

    p = to_vec(normalize(mps0).A)
    e = energy(p)
    energies = [e]
    gnorm = np.inf
    message = "max_iters reached"
    it = 0
    for it in range(1, max_iters + 1):
        grad = np.zeros_like(p)
        for k in range(p.size):
            dp = np.zeros_like(p)
            dp[k] = fd_step
            grad[k] = (energy(p + dp) - energy(p - dp)) / (2 * fd_step)
        gnorm = float(np.linalg.norm(grad))
        if gnorm < grad_tol:
            message = "gradient below tolerance"
            it -= 1
            break
        step = step0 / gnorm  # first trial moves the parameters by step0
        for _ in range(max_halvings):
            trial = p - step * grad
            try:
                et = energy(trial)
            except (ThermoError, np.linalg.LinAlgError):
                et = np.inf
            if et < e:
                break
            step *= 0.5
        else:
            message = "line search failed"
            break
        # renormalize the parameters so they do not drift in scale
        p = to_vec(normalize(UniformMPS(to_mats(trial))).A)
        e = et
        energies.append(e)
    return OptimizeResult(normalize(UniformMPS(to_mats(p))), tuple(energies), gnorm, it, message)
