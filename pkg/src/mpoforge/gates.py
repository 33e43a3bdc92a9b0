"""Uniform MPO representations of exp(eps * sum of commuting terms) on rings.

A :class:`GateMPO` stores one operator ``X[k]`` and one matrix ``C[k]`` per
symbol ``k``; on an N-site ring it represents

    sum_{k1..kN} Tr(C[k1] ... C[kN]) X[k1] (x) ... (x) X[kN].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .pauli import I2, X, YT, Z

__all__ = [
    "GateMPO",
    "TrotterPlan",
    "build_zz_gate",
    "build_xx_gate",
    "build_tilde_yy_gate",
    "build_local_field_gate",
    "expm2",
    "trotter_plan",
    "materialize_ring",
    "MAX_DENSE_SITES",
]

MAX_DENSE_SITES = 12


@dataclass(frozen=True)
class GateMPO:
    op_basis: np.ndarray  # (K, d, d)
    site_matrices: np.ndarray  # (K, D', D')
    label: str = ""

    def __post_init__(self):
        ops = np.asarray(self.op_basis)
        mats = np.asarray(self.site_matrices)
        if ops.ndim != 3 or mats.ndim != 3 or ops.shape[0] != mats.shape[0]:
            raise ValueError("need one operator and one matrix per symbol")
        if mats.shape[1] != mats.shape[2]:
            raise ValueError("site matrices must be square")
        ops.setflags(write=False)
        mats.setflags(write=False)
        object.__setattr__(self, "op_basis", ops)
        object.__setattr__(self, "site_matrices", mats)

    @property
    def bond_dim(self) -> int:
        return self.site_matrices.shape[1]

    @property
    def phys_dim(self) -> int:
        return self.op_basis.shape[1]

    @property
    def is_real(self) -> bool:
        return not (np.iscomplexobj(self.site_matrices) or np.iscomplexobj(self.op_basis))

    def single_site_blocks(self) -> np.ndarray:
        """``W[a, b, i, j] = sum_k C[k][a, b] X[k][i, j]``."""
        return np.einsum("kab,kij->abij", self.site_matrices, self.op_basis)


def _two_body(eps: float, ops, *, sign: float) -> GateMPO:
    if eps < 0:
        raise ValueError("eps must be non-negative; use the tilde construction for the other sign")
    c, s = np.cosh(eps), np.sinh(eps)
    off = np.sqrt(s * c)
    c0 = np.array([[c, 0.0], [0.0, sign * s]])
    c1 = np.array([[0.0, off], [off, 0.0]])
    return GateMPO(np.array(ops, dtype=float), np.array([c0, c1]))


def build_zz_gate(eps: float) -> GateMPO:
    """exp(eps sum Z_i Z_{i+1}), bond dimension 2."""
    g = _two_body(eps, [I2, Z], sign=1.0)
    return GateMPO(g.op_basis, g.site_matrices, label=f"zz({eps:g})")


def build_xx_gate(eps: float) -> GateMPO:
    """exp(eps sum X_i X_{i+1}), bond dimension 2."""
    g = _two_body(eps, [I2, X], sign=1.0)
    return GateMPO(g.op_basis, g.site_matrices, label=f"xx({eps:g})")


def build_tilde_yy_gate(eps: float) -> GateMPO:
    """exp(-eps sum Y_i Y_{i+1}) with real matrices over the basis {I, iY}.

    Since (iY)(x)(iY) = -Y(x)Y, the minus sign of the second diagonal entry
    turns the product into the required sign.
    """
    g = _two_body(eps, [I2, YT], sign=-1.0)
    return GateMPO(g.op_basis, g.site_matrices, label=f"~yy({eps:g})")


def expm2(a: np.ndarray, eps: float = 1.0) -> np.ndarray:
    """exp(eps * a) for a 2x2 matrix in closed form.

    With t = tr(a)/2 and m = a - t I we have m @ m = delta^2 I where
    delta^2 = -det(m), hence exp(eps a) = e^{eps t} (cosh(eps delta) I + sinh(eps delta)/delta m).
    """
    a = np.asarray(a)
    if a.shape != (2, 2):
        raise ValueError("expm2 needs a 2x2 matrix")
    t = 0.5 * (a[0, 0] + a[1, 1])
    m = a - t * np.eye(2)
    d2 = -(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    z2 = eps * eps * d2
    if np.iscomplexobj(a) or np.real(z2) < 0:
        z = np.sqrt(complex(z2))
    else:
        z = np.sqrt(float(z2))
    if abs(z) < 1e-4:
        ch = 1 + z2 / 2 + z2 * z2 / 24 + z2**3 / 720
        sh = eps * (1 + z2 / 6 + z2 * z2 / 120 + z2**3 / 5040)
    else:
        ch = np.cosh(z)
        sh = eps * np.sinh(z) / z
    out = np.exp(eps * t) * (ch * np.eye(2) + sh * m)
    if not np.iscomplexobj(a):
        out = np.real(out)
    return out


def build_local_field_gate(eps: float, op: np.ndarray) -> GateMPO:
    """Product operator of exp(eps*op) on every site, bond dimension 1."""
    g = expm2(op, eps)
    return GateMPO(g[None, :, :], np.ones((1, 1, 1), dtype=g.dtype), label=f"field({eps:g})")


@dataclass(frozen=True)
class TrotterPlan:
    """Gates applied in order per imaginary-time step of size ``eps``.

    ``rotated`` marks that the Hamiltonian is written after a rotation by Y on
    every second site; energies are then measured with the rotated terms.
    """

    model: str
    eps: float
    gates: tuple[GateMPO, ...]
    rotated: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.gates:
            raise ValueError("empty plan")
        if len({g.phys_dim for g in self.gates}) != 1:
            raise ValueError("gates disagree on physical dimension")


def trotter_plan(model: str, eps: float, B: float = 1.0) -> TrotterPlan:
    """Gate sequence for one first-order imaginary-time step exp(-eps H).

    ``tfi``: H = -sum ZZ - B sum X.
    ``heisenberg``: H = sum XX+YY+ZZ, rotated on the odd sublattice to
    sum(-XX + YY - ZZ) so every gate is real symmetric.
    """
    if eps <= 0:
        raise ValueError("imaginary-time steps need eps > 0")
    if model == "tfi":
        gates = (build_zz_gate(eps), build_local_field_gate(eps * B, X))
        return TrotterPlan("tfi", eps, gates, rotated=False, params={"B": B})
    if model == "heisenberg":
        gates = (build_zz_gate(eps), build_xx_gate(eps), build_tilde_yy_gate(eps))
        return TrotterPlan("heisenberg", eps, gates, rotated=True, params={})
    raise ValueError(f"unknown model {model!r}")


def materialize_ring(g: GateMPO, n_sites: int) -> np.ndarray:
    """Dense 2^N x 2^N operator of ``g`` on an N-site ring (trace formula)."""
    if not 1 <= n_sites <= MAX_DENSE_SITES:
        raise ValueError(f"ring size must be between 1 and {MAX_DENSE_SITES}")
    w = g.single_site_blocks()  # (D, D, d, d)
    dd = g.bond_dim
    # acc[a, b, I, J]: open string of sites with bond indices a (left) and b (right)
    acc = w
    for _ in range(n_sites - 1):
        acc = np.einsum("abIJ,bcij->acIiJj", acc, w)
        s = acc.shape
        acc = acc.reshape(dd, dd, s[2] * s[3], s[4] * s[5])
    return np.einsum("aaIJ->IJ", acc)


def dense_product(ops) -> np.ndarray:
    return reduce(np.kron, ops)
