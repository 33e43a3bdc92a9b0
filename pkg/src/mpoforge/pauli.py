"""Single-site operators and small dense-operator helpers for oracles."""

from __future__ import annotations

from functools import reduce

import numpy as np

I2 = np.eye(2)
X = np.array([[0.0, 1.0], [1.0, 0.0]])
Y = np.array([[0.0, -1j], [1j, 0.0]])
Z = np.array([[1.0, 0.0], [0.0, -1.0]])
# i*Y, real and antisymmetric
YT = np.array([[0.0, 1.0], [-1.0, 0.0]])

PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def site_op(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """``op`` acting on ``site`` of an ``n_sites`` register, identity elsewhere."""
    d = op.shape[0]
    left = np.eye(d**site)
    right = np.eye(d ** (n_sites - site - 1))
    return reduce(np.kron, [left, op, right])


def pair_op(a: np.ndarray, i: int, b: np.ndarray, j: int, n_sites: int) -> np.ndarray:
    return site_op(a, i, n_sites) @ site_op(b, j, n_sites)


def bond_sum(a: np.ndarray, b: np.ndarray, n_sites: int, *, periodic: bool) -> np.ndarray:
    """Sum over nearest-neighbour bonds of a_i b_{i+1} on a chain or ring."""
    d = a.shape[0]
    out = np.zeros((d**n_sites, d**n_sites), dtype=np.result_type(a, b))
    last = n_sites if periodic else n_sites - 1
    for i in range(last):
        out = out + pair_op(a, i, b, (i + 1) % n_sites, n_sites)
    return out


def field_sum(op: np.ndarray, n_sites: int) -> np.ndarray:
    return sum(site_op(op, i, n_sites) for i in range(n_sites))
