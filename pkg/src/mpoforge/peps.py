"""Two-dimensional tensor constructions on small open square lattices.

Site tensors use the leg order (phys, left, up, right, down). Sites are
numbered row-major: site (r, c) has index r * L_x + c. Every construction
here is checked by exact contraction, so lattices are small.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .pauli import I2, X, YT, Z

__all__ = [
    "PepoTensor",
    "build_zz_pepo",
    "zz_pepo_boundary",
    "lattice_bonds",
    "contract_grid",
    "coefficients_to_operator",
    "pepo_operator",
    "classical_ising_log_z",
    "build_w_mps",
    "mps_dense",
    "build_nn_hamiltonian_peps",
    "nn_hamiltonian_operator",
    "CoefficientPEPS",
    "build_powerlaw_hamiltonian_peps",
]


@dataclass(frozen=True)
class PepoTensor:
    """entries[x, l, u, r, d] over op_basis[x]."""

    entries: np.ndarray
    op_basis: np.ndarray
    boundary: np.ndarray  # vector contracted into every dangling leg

    @property
    def chi(self) -> int:
        return self.entries.shape[1]


def build_zz_pepo(eps: float, tilde: bool = False) -> PepoTensor:
    """Tensor whose open-lattice network is exp(eps sum ZZ), or exp(-eps sum YY) if ``tilde``.

    Each bond carries B_a = sqrt(cosh eps) for a = 0 and sqrt(sinh eps) for
    a = 1, with a on both ends. A site sees the parity of its four legs. In the
    tilde variant the operator is iY, and the non-binary power (iY)^n with n = x
    + 2m equals (-1)^m (iY)^x.
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    w = np.array([np.sqrt(np.cosh(eps)), np.sqrt(np.sinh(eps))])
    t = np.zeros((2, 2, 2, 2, 2))
    for legs in itertools.product((0, 1), repeat=4):
        n = sum(legs)
        x = n % 2
        val = np.prod(w[list(legs)])
        if tilde:
            val *= (-1) ** ((n - x) // 2)
        t[(x, *legs)] = val
    basis = np.array([I2, YT if tilde else Z])
    return PepoTensor(t, basis, zz_pepo_boundary(eps))


def zz_pepo_boundary(eps: float) -> np.ndarray:
    # a dangling leg must carry a = 0, and we cancel its sqrt(cosh) weight
    return np.array([1.0 / np.sqrt(np.cosh(eps)), 0.0])


def lattice_bonds(lx: int, ly: int) -> list[tuple[int, int]]:
    """Nearest-neighbour pairs (i, j), i < j, of an open lx-by-ly lattice."""
    bonds = []
    for r in range(ly):
        for c in range(lx):
            i = r * lx + c
            if c + 1 < lx:
                bonds.append((i, i + 1))
            if r + 1 < ly:
                bonds.append((i, i + lx))
    return sorted(bonds)


def _absorb_edges(t: np.ndarray, r: int, c: int, lx: int, ly: int, boundary) -> np.ndarray:
    """Contract dangling legs with ``boundary``, leaving them as extent-1 legs."""
    edges = {1: c == 0, 2: r == 0, 3: c == lx - 1, 4: r == ly - 1}
    for axis, dangling in edges.items():
        if dangling and t.shape[axis] > 1:
            t = np.moveaxis(np.tensordot(t, boundary, axes=([axis], [0]))[..., None], -1, axis)
    return t


def contract_grid(tensors, lx: int, ly: int) -> np.ndarray:
    """Contract a grid of site tensors ``tensors[r][c]`` (phys, l, u, r, d).

    Edge legs must already have extent 1. Returns the tensor over all
    physical indices in row-major site order.
    """
    letters = iter("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
    phys = [[next(letters) for _ in range(lx)] for _ in range(ly)]
    hor = {(r, c): next(letters) for r in range(ly) for c in range(lx - 1)}
    ver = {(r, c): next(letters) for r in range(ly - 1) for c in range(lx)}
    ops, subs = [], []
    for r in range(ly):
        for c in range(lx):
            t = tensors[r][c]
            for axis, edge in ((1, c == 0), (2, r == 0), (3, c == lx - 1), (4, r == ly - 1)):
                if edge and t.shape[axis] != 1:
                    raise ValueError("edge legs must be absorbed before contraction")
            legs = [
                hor.get((r, c - 1)),
                ver.get((r - 1, c)),
                hor.get((r, c)),
                ver.get((r, c)),
            ]
            keep = [i for i, leg in enumerate(legs) if leg is not None]
            squeeze = tuple(1 + i for i, leg in enumerate(legs) if leg is None)
            ops.append(t.reshape([t.shape[0]] + [t.shape[1 + i] for i in keep]) if squeeze else t)
            subs.append(phys[r][c] + "".join(legs[i] for i in keep))
    out = "".join(itertools.chain.from_iterable(phys))
    expr = ",".join(subs) + "->" + out
    return np.einsum(expr, *ops, optimize="greedy")


def coefficients_to_operator(coeffs: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """sum_{k1..kN} coeffs[k1..kN] basis[k1] (x) ... (x) basis[kN]."""
    n_sites = coeffs.ndim
    d = basis.shape[1]
    t = coeffs
    for _ in range(n_sites):
        # consume the leading symbol axis, append (out, in) of that site at the end
        t = np.tensordot(t, basis, axes=([0], [0]))
    # axes now (o1, i1, o2, i2, ...)
    perm = list(range(0, 2 * n_sites, 2)) + list(range(1, 2 * n_sites, 2))
    return t.transpose(perm).reshape(d**n_sites, d**n_sites)


def pepo_operator(p: PepoTensor, lx: int, ly: int) -> np.ndarray:
    """Dense operator of the open-boundary network built from ``p``."""
    if lx * ly > 10:
        raise ValueError("dense operator limited to 10 sites")
    grid = [[_absorb_edges(p.entries, r, c, lx, ly, p.boundary) for c in range(lx)] for r in range(ly)]
    coeffs = contract_grid(grid, lx, ly)
    return coefficients_to_operator(coeffs, p.op_basis)


def classical_ising_log_z(lx: int, ly: int, beta: float) -> float:
    """ln Z of the open-boundary classical Ising model, Z = sum_s exp(beta sum s_i s_j).

    Tr exp(beta sum ZZ) = 2^N times the all-identity coefficient, i.e. the
    network of x = 0 tensors. It is contracted row by row with the open
    vertical bonds as state, rescaled after every site.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if lx > 14:
        raise ValueError("row state grows as 2^L_x; use L_x <= 14")
    p = build_zz_pepo(beta)
    c0 = p.entries[0]  # (l, u, r, d)
    b = p.boundary
    log_scale = lx * ly * np.log(2.0)
    # state over the down legs of the previous row, first row sees the boundary
    state = np.ones([1] * lx)
    for r in range(ly):
        # row tensor built site by site: new[d_1..d_c, u_{c+1}..u_L, right leg]
        t = state.reshape(state.shape + (1,))  # trailing horizontal leg, extent 1 at the left edge
        site = c0
        for c in range(lx):
            s = site
            if c == 0:
                s = np.tensordot(b, s, axes=([0], [0]))[None]
            if c == lx - 1:
                s = np.tensordot(s, b, axes=([2], [0]))[:, :, None]
            if r == 0:
                s = np.tensordot(s, b, axes=([1], [0]))[:, None]
            if r == ly - 1:
                s = np.tensordot(s, b, axes=([3], [0]))[..., None]
            # t axes: (d_0..d_{c-1}, u_c..u_{L-1}, h); contract u_c and h with s (l, u, r, d)
            t = np.moveaxis(t, c, -2)
            t = np.tensordot(t, s, axes=([t.ndim - 2, t.ndim - 1], [1, 0]))  # -> (..., r, d)
            t = np.moveaxis(t, -1, c)
            norm = np.max(np.abs(t))
            if norm == 0:
                return -np.inf
            t = t / norm
            log_scale += np.log(norm)
        state = t.reshape(t.shape[:-1])
    return float(log_scale + np.log(state.reshape(-1)[0]))


def build_w_mps(n_sites: int, excitations: int = 1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Open MPS (A, v_l, v_r) of the equal superposition of ``excitations`` ones.

    A[s] is (D, D) with D = excitations + 1; the bond counts ones seen so far.
    """
    if excitations not in (1, 2):
        raise ValueError("excitations must be 1 or 2")
    if n_sites < excitations:
        raise ValueError("not enough sites")
    dim = excitations + 1
    a = np.zeros((2, dim, dim))
    a[0] = np.eye(dim)
    for k in range(excitations):
        a[1, k, k + 1] = 1.0
    v_l = np.eye(dim)[0]
    v_r = np.eye(dim)[-1]
    return a, v_l, v_r


def mps_dense(a: np.ndarray, v_l: np.ndarray, v_r: np.ndarray, n_sites: int) -> np.ndarray:
    """State vector sum_s v_l^T A[s1]...A[sN] v_r |s1..sN>."""
    acc = np.einsum("a,sab->sb", v_l, a)
    for _ in range(n_sites - 1):
        acc = np.einsum("Sa,sab->Ssb", acc, a).reshape(-1, a.shape[2])
    return acc @ v_r


def build_nn_hamiltonian_peps() -> np.ndarray:
    """Site tensor T[x, sel, l, u, r, d] for sum over bonds Z_i Z_j.

    x = 0 (identity) requires all legs 0. x = 1 (Z) either emits a bond
    excitation to the right or down (sel = 1) or absorbs one from the left or
    above (sel = 0). Pairing sel with the one-excitation W state on the
    lattice leaves exactly one emitter.
    """
    t = np.zeros((2, 2, 2, 2, 2, 2))
    t[0, 0, 0, 0, 0, 0] = 1.0
    t[1, 1, 0, 0, 1, 0] = 1.0
    t[1, 1, 0, 0, 0, 1] = 1.0
    t[1, 0, 1, 0, 0, 0] = 1.0
    t[1, 0, 0, 1, 0, 0] = 1.0
    return t


def nn_hamiltonian_operator(lx: int, ly: int) -> np.ndarray:
    """Dense operator from the W-paired nearest-neighbour PEPS."""
    n_sites = lx * ly
    t = build_nn_hamiltonian_peps()
    boundary = np.array([1.0, 0.0])
    w = mps_dense(*build_w_mps(n_sites, 1), n_sites).reshape([2] * n_sites)
    # fold the selector into the physical index, contract, then trace it out against W
    folded = t.reshape(4, 2, 2, 2, 2)
    grid = [[_absorb_edges(folded, r, c, lx, ly, boundary) for c in range(lx)] for r in range(ly)]
    full = contract_grid(grid, lx, ly).reshape([2, 2] * n_sites)
    sel_axes = list(range(1, 2 * n_sites, 2))
    coeffs = np.tensordot(full, w, axes=(sel_axes, list(range(n_sites))))
    return coefficients_to_operator(coeffs, np.array([I2, Z]))


def _snake_order(lx: int, ly: int) -> list[tuple[int, int]]:
    path = []
    for r in range(ly):
        cols = range(lx) if r % 2 == 0 else range(lx - 1, -1, -1)
        path.extend((r, c) for c in cols)
    return path


@dataclass(frozen=True)
class CoefficientPEPS:
    """Combined site tensors T[x, l, u, r, d] of the power-law Hamiltonian.

    Each leg is a pair (psi bond, W'' bond); the W'' bond is 3 on snake-path
    bonds and 1 elsewhere, so no leg exceeds 2 x 3 = 6.
    """

    beta: float
    lx: int
    ly: int
    tensors: tuple  # tensors[r][c], edge legs of extent 1

    @property
    def max_bond(self) -> int:
        return max(max(t.shape[1:]) for row in self.tensors for t in row)

    def coefficients(self) -> np.ndarray:
        return contract_grid([list(row) for row in self.tensors], self.lx, self.ly)

    def couplings(self) -> np.ndarray:
        """Symmetric matrix w[i, j] of the Z_i Z_j coefficients (zero diagonal)."""
        n_sites = self.lx * self.ly
        c = self.coefficients()
        w = np.zeros((n_sites, n_sites))
        for i in range(n_sites):
            for j in range(i + 1, n_sites):
                idx = [0] * n_sites
                idx[i] = idx[j] = 1
                w[i, j] = w[j, i] = c[tuple(idx)]
        return w

    def operator(self) -> np.ndarray:
        return coefficients_to_operator(self.coefficients(), np.array([I2, Z]))


def build_powerlaw_hamiltonian_peps(beta: float, lx: int, ly: int) -> CoefficientPEPS:
    """Hamiltonian sum_{i<j} w(i,j) Z_i Z_j with w(i,j) = <-_i -_j +_rest|psi_beta>.

    psi_beta = exp(-beta sum ZZ)|+...+> is built as X_B exp(+beta sum ZZ)|+...+>
    with X on one sublattice, which keeps every entry real. The symbol x = 0
    projects a site onto <0|_W <+|_psi and x = 1 onto <1|_W <-|_psi; the
    two-excitation state W'' then keeps exactly two Z's.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    p = build_zz_pepo(beta)
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    minus = np.array([1.0, -1.0]) / np.sqrt(2.0)
    proj = np.array([plus, minus])  # proj[x] is the psi-qubit bra for symbol x
    # psi site tensor over the spin basis s: sum_x C^x <s|Z^x|+>, then X on sublattice B
    psi_a = np.einsum("xlurd,xst,t->slurd", p.entries, np.array([I2, Z]), plus)
    psi_b = np.einsum("ts,slurd->tlurd", X, psi_a)
    a, v_l, v_r = build_w_mps(lx * ly, 2)
    path = _snake_order(lx, ly)
    pos = {site: k for k, site in enumerate(path)}
    n = len(path)
    rows = []
    for r in range(ly):
        row = []
        for c in range(lx):
            psi = psi_a if (r + c) % 2 == 0 else psi_b
            psi = _absorb_edges(psi, r, c, lx, ly, p.boundary)
            k = pos[(r, c)]
            prev = path[k - 1] if k > 0 else None
            nxt = path[k + 1] if k + 1 < n else None
            # W'' site tensor: (x, w_in, w_out) with boundary vectors at the ends
            w_site = a
            if prev is None:
                w_site = np.einsum("a,xab->xb", v_l, w_site)[:, None, :]
            if nxt is None:
                w_site = np.einsum("xab,b->xa", w_site, v_r)[:, :, None]
            # route the W'' legs onto lattice legs: which lattice leg points to prev/next
            wlegs = [1, 1, 1, 1]  # extents on (l, u, r, d)

            def leg_to(other):
                dr, dc = other[0] - r, other[1] - c
                return {(0, -1): 0, (-1, 0): 1, (0, 1): 2, (1, 0): 3}[(dr, dc)]

            in_leg = leg_to(prev) if prev is not None else None
            out_leg = leg_to(nxt) if nxt is not None else None
            if in_leg is not None:
                wlegs[in_leg] = w_site.shape[1]
            if out_leg is not None:
                wlegs[out_leg] = w_site.shape[2]
            w_full = np.zeros((2, *wlegs))
            for x in range(2):
                for i in range(w_site.shape[1]):
                    for o in range(w_site.shape[2]):
                        idx = [0, 0, 0, 0]
                        if in_leg is not None:
                            idx[in_leg] = i
                        if out_leg is not None:
                            idx[out_leg] = o
                        w_full[(x, *idx)] = w_site[x, i, o]
            # project psi onto the symbol basis and merge legs pairwise
            psi_x = np.einsum("xs,slurd->xlurd", proj, psi)
            t = np.einsum("xlurd,xLURD->xlLuUrRdD", psi_x, w_full)
            s = t.shape
            t = t.reshape(2, s[1] * s[2], s[3] * s[4], s[5] * s[6], s[7] * s[8])
            row.append(t)
        rows.append(tuple(row))
    return CoefficientPEPS(beta, lx, ly, tuple(rows))
