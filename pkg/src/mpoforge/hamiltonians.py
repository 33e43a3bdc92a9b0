"""Hamiltonians as matrix product operators with boundary vectors.

An MPO ``h`` represents, on an open chain of N sites,

    H_N = sum v_l^T B[i1] ... B[iN] v_r  X[i1] (x) ... (x) X[iN].

Read from the left, bond index 0 means "no term started yet" and the last
index means "term completed". Every two-body channel c gets its own bond
state: the left operator hops 0 -> c with weight ``a_c``, each identity in
between multiplies by ``lam_c`` and the right operator hops c -> stop with
weight ``b_c``, so the realized coupling at distance r is a_c b_c lam_c^(r-1).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .expfit import ExpSumFit, fit_power_law
from .pauli import I2, X, Y, Z

__all__ = [
    "Channel",
    "HamiltonianMPO",
    "build_nn_mpo",
    "build_ising_mpo",
    "build_expdecay_mpo",
    "build_powerlaw_mpo",
    "build_from_channels",
    "shifted",
    "materialize_finite",
    "operator_schmidt_rank",
    "explicit_hamiltonian",
    "MAX_DENSE_SITES",
]

MAX_DENSE_SITES = 12


@dataclass(frozen=True)
class Channel:
    left: np.ndarray
    right: np.ndarray
    entry: complex = 1.0
    exit: complex = 1.0
    decay: complex = 0.0

    def coupling(self, r):
        r = np.asarray(r)
        return self.entry * self.exit * np.power(complex(self.decay), r - 1)


@dataclass(frozen=True)
class HamiltonianMPO:
    op_basis: np.ndarray  # (K, d, d); op_basis[0] is the identity
    site_matrices: np.ndarray  # (K, D, D)
    v_l: np.ndarray
    v_r: np.ndarray
    channels: tuple[Channel, ...] = ()
    field_op: np.ndarray | None = None
    label: str = ""
    couplings: dict = field(default_factory=dict)

    @property
    def bond_dim(self) -> int:
        return self.site_matrices.shape[1]

    @property
    def phys_dim(self) -> int:
        return self.op_basis.shape[1]

    @property
    def start(self) -> int:
        return int(np.argmax(np.abs(self.v_l)))

    @property
    def stop(self) -> int:
        return int(np.argmax(np.abs(self.v_r)))

    def tensor(self) -> np.ndarray:
        """W[a, b, p, q] = sum_k B[k][a, b] X[k][p, q]."""
        return np.einsum("kab,kpq->abpq", self.site_matrices, self.op_basis)

    def coupling(self, r) -> np.ndarray:
        """Total two-body coupling at distance r summed over channels."""
        r = np.asarray(r)
        out = np.zeros(r.shape, dtype=complex)
        for ch in self.channels:
            out = out + ch.coupling(r)
        return out

    def decay_rates(self) -> np.ndarray:
        return np.array([ch.decay for ch in self.channels], dtype=complex)


def _same(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and np.array_equal(a, b)


def build_from_channels(channels, field_op=None, label: str = "") -> HamiltonianMPO:
    """Assemble the MPO of sum over channels and an optional one-site term.

    Bond layout: 0 = start, 1..n = channels, n+1 = stop.
    """
    chans = tuple(channels)
    dim = len(chans) + 2
    stop = dim - 1
    ops: list[np.ndarray] = [I2]
    mats: list[np.ndarray] = []

    def slot(op) -> int:
        for k, existing in enumerate(ops):
            if k > 0 and _same(existing, op):
                return k
        ops.append(np.asarray(op))
        return len(ops) - 1

    entries: list[tuple[int, int, int, complex]] = []
    for c, ch in enumerate(chans, start=1):
        entries.append((slot(ch.left), 0, c, ch.entry))
        entries.append((slot(ch.right), c, stop, ch.exit))
    if field_op is not None and np.any(field_op):
        entries.append((slot(field_op), 0, stop, 1.0))

    complex_entries = any(np.iscomplexobj(np.asarray(e[3])) and np.imag(e[3]) != 0 for e in entries) or any(
        np.imag(ch.decay) != 0 for ch in chans
    )
    dtype = complex if complex_entries else float
    mats = [np.zeros((dim, dim), dtype=dtype) for _ in ops]
    mats[0][0, 0] = 1.0
    mats[0][stop, stop] = 1.0
    for c, ch in enumerate(chans, start=1):
        mats[0][c, c] = ch.decay if dtype is complex else np.real(ch.decay)
    for k, a, b, w in entries:
        mats[k][a, b] += w if dtype is complex else np.real(w)

    op_dtype = complex if any(np.iscomplexobj(o) for o in ops) else float
    basis = np.array([np.asarray(o, dtype=op_dtype) for o in ops])
    v_l = np.zeros(dim)
    v_l[0] = 1.0
    v_r = np.zeros(dim)
    v_r[stop] = 1.0
    fop = None if field_op is None else np.asarray(field_op)
    return HamiltonianMPO(basis, np.array(mats), v_l, v_r, chans, fop, label)


def build_nn_mpo(mu1: float, mu2: float, mu3: float, field_op=None) -> HamiltonianMPO:
    """sum_i (mu1 X X + mu2 Y Y + mu3 Z Z)_{i,i+1} + sum_j field_op_j, D = 5."""
    chans = [Channel(P, P, 1.0, mu) for P, mu in ((X, mu1), (Y, mu2), (Z, mu3))]
    if field_op is None:
        field_op = np.zeros((2, 2))
    return build_from_channels(chans, field_op, label="nn")


def build_ising_mpo(mu: float) -> HamiltonianMPO:
    """mu sum_i Z_i Z_{i+1}, D = 3."""
    return build_from_channels([Channel(Z, Z, 1.0, mu)], None, label="ising")


def build_expdecay_mpo(mus, lams, field_op=None, ops=(X, Y, Z)) -> HamiltonianMPO:
    """sum_{i<j} mu_a lam_a^(j-i-1) P_a^i P_a^j + fields, one channel per family."""
    mus = list(mus)
    lams = list(lams)
    if not (len(mus) == len(lams) == len(ops)):
        raise ValueError("need one mu and one lam per operator family")
    if any(abs(lam) >= 1 for lam in lams):
        warnings.warn("|lam| >= 1: not usable in the thermodynamic limit", RuntimeWarning, stacklevel=2)
    chans = [Channel(P, P, 1.0, mu, lam) for P, mu, lam in zip(ops, mus, lams)]
    if field_op is None:
        field_op = np.zeros((2, 2))
    return build_from_channels(chans, field_op, label="expdecay")


class UnstableFitError(ValueError):
    pass


def build_powerlaw_mpo(
    p: float,
    n: int,
    n_fit: int = 1000,
    ops=(Z, Z),
    *,
    fit: ExpSumFit | None = None,
    prefactor: float = 1.0,
) -> HamiltonianMPO:
    """sum_{i<j} J(j-i) A_i B_j with J(r) ~ r^-p from an n-term exponential fit.

    Channel c has entry weight x_c lam_c, decay lam_c and exit weight 1, so
    J(r) = sum_c x_c lam_c^r exactly as the fit evaluates it.
    """
    fitted = fit if fit is not None else fit_power_law(p, n, n_fit)
    lam = np.asarray(fitted.exponents)
    if np.any(np.abs(lam) >= 1.0):
        bad = lam[np.abs(lam) >= 1.0]
        raise UnstableFitError(f"fit has exponents with |lam| >= 1: {bad}")
    a, b = ops
    real = fitted.real_input and np.all(np.abs(lam.imag) == 0)
    chans = []
    for x, z in zip(fitted.weights, lam):
        ent = prefactor * x * z
        if real:
            ent, z = float(np.real(ent)), float(np.real(z))
        chans.append(Channel(a, b, ent, 1.0, z))
    h = build_from_channels(chans, None, label=f"powerlaw(p={p:g},n={len(lam)})")
    return HamiltonianMPO(
        h.op_basis, h.site_matrices, h.v_l, h.v_r, h.channels, None, h.label, {"fit": fitted}
    )


def shifted(h: HamiltonianMPO, shift: float) -> HamiltonianMPO:
    """MPO of H - shift * N (adds -shift on the start -> stop identity entry)."""
    mats = np.array(h.site_matrices, dtype=np.result_type(h.site_matrices, float))
    mats[0, h.start, h.stop] += -shift
    return HamiltonianMPO(h.op_basis, mats, h.v_l, h.v_r, h.channels, h.field_op, h.label + f"-{shift:g}")


def materialize_finite(h: HamiltonianMPO, n_sites: int) -> np.ndarray:
    """Dense H_N on an open chain."""
    if not 1 <= n_sites <= MAX_DENSE_SITES:
        raise ValueError(f"chain length must be between 1 and {MAX_DENSE_SITES}")
    w = h.tensor()
    acc = np.einsum("a,abpq->bpq", h.v_l.astype(w.dtype), w)
    for _ in range(n_sites - 1):
        acc = np.einsum("aPQ,abpq->bPpQq", acc, w)
        s = acc.shape
        acc = acc.reshape(s[0], s[1] * s[2], s[3] * s[4])
    out = np.einsum("bPQ,b->PQ", acc, h.v_r.astype(w.dtype))
    if np.iscomplexobj(out) and np.max(np.abs(out.imag)) == 0:
        out = out.real
    return out


def explicit_hamiltonian(
    n_sites: int, couplings, field_op=None
) -> np.ndarray:
    """Oracle: sum_{i<j} J_c(j-i) A_c^i B_c^j + sum_i field_op^i.

    ``couplings`` is a list of (A, B, J) where J maps a distance to a scalar.
    """
    from .pauli import pair_op, site_op

    dim = 2**n_sites
    out = np.zeros((dim, dim), dtype=complex)
    for a, b, jfun in couplings:
        for i in range(n_sites):
            for j in range(i + 1, n_sites):
                c = jfun(j - i)
                if c != 0:
                    out += c * pair_op(a, i, b, j, n_sites)
    if field_op is not None:
        for i in range(n_sites):
            out += site_op(field_op, i, n_sites)
    return out.real if np.max(np.abs(out.imag)) == 0 else out


def operator_schmidt_rank(dense_op: np.ndarray, cut: int, tol: float = 1e-10, d: int = 2) -> int:
    """Number of singular values above tol * largest of the operator split after ``cut`` sites."""
    op = np.asarray(dense_op)
    n_sites = int(round(np.log(op.shape[0]) / np.log(d)))
    if d**n_sites != op.shape[0] or not 0 < cut < n_sites:
        raise ValueError("bad operator size or cut")
    dl, dr = d**cut, d ** (n_sites - cut)
    m = op.reshape(dl, dr, dl, dr).transpose(0, 2, 1, 3).reshape(dl * dl, dr * dr)
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))
