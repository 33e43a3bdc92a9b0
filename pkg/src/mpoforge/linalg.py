"""Dense linear algebra used throughout the package.

Tensors are plain ``numpy.ndarray`` objects of dtype float64 or complex128.
Every routine here is a pure function and checks its inputs for non-finite
entries before and its outputs after the computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

__all__ = [
    "LinalgError",
    "EigenPair",
    "as_tensor",
    "svd",
    "eig_general",
    "qr_economical",
    "solve_least_squares",
    "leading_eigenpair",
    "contract",
]

# below this many unknowns the dense eigensolver is both faster and exact
DENSE_EIG_LIMIT = 400
AMBIGUITY_GAP = 1e-12


class LinalgError(RuntimeError):
    """Raised when a factorization fails or inputs violate a precondition."""


def _check_finite(*arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise LinalgError("non-finite entries in tensor")


def as_tensor(data, shape: Sequence[int] | None = None) -> np.ndarray:
    """Coerce ``data`` to a real- or complex-double array.

    Real input stays real; anything complex becomes complex128.
    """
    arr = np.asarray(data)
    dtype = np.complex128 if np.iscomplexobj(arr) else np.float64
    arr = np.array(arr, dtype=dtype)
    if shape is not None:
        if int(np.prod(shape)) != arr.size:
            raise LinalgError(f"cannot view {arr.size} entries as shape {tuple(shape)}")
        arr = arr.reshape(tuple(shape))
    _check_finite(arr)
    return arr


def _matrix(m) -> np.ndarray:
    a = as_tensor(m)
    if a.ndim != 2:
        raise LinalgError(f"expected a matrix, got shape {a.shape}")
    return a


def svd(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD returning ``(U, S, V)`` with ``m = U @ diag(S) @ V.conj().T``."""
    a = _matrix(m)
    try:
        u, s, vh = sla.svd(a, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        try:
            u, s, vh = sla.svd(a, full_matrices=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as exc:
            raise LinalgError("SVD did not converge") from exc
    _check_finite(u, s, vh)
    return u, s, vh.conj().T


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray
    condition: float


def eig_general(m) -> EigenDecomposition:
    """Eigenvalues (descending magnitude) and right eigenvectors of a square matrix.

    ``condition`` is the 2-norm condition number of the eigenvector matrix; it is
    infinite or huge for defective input.
    """
    a = _matrix(m)
    if a.shape[0] != a.shape[1]:
        raise LinalgError("eig_general needs a square matrix")
    try:
        w, v = sla.eig(a)
    except np.linalg.LinAlgError as exc:
        raise LinalgError("eigenvalue iteration did not converge") from exc
    order = np.lexsort((-w.real, -np.abs(w)))
    w, v = w[order], v[:, order]
    with np.errstate(all="ignore"):
        cond = float(np.linalg.cond(v)) if v.size else 1.0
    return EigenDecomposition(w, v, cond if np.isfinite(cond) else np.inf)


def qr_economical(m) -> tuple[np.ndarray, np.ndarray]:
    a = _matrix(m)
    if a.shape[0] < a.shape[1]:
        raise LinalgError("qr_economical needs rows >= cols")
    q, r = sla.qr(a, mode="economic")
    return q, r


def pinv_rcond(shape: tuple[int, ...]) -> float:
    """Relative singular-value cutoff: max dimension times machine epsilon."""
    return max(shape) * np.finfo(np.float64).eps


def solve_least_squares(a, b) -> np.ndarray:
    """Minimum-norm least-squares solution of ``a @ x = b``."""
    a = _matrix(a)
    b = as_tensor(b)
    vector = b.ndim == 1
    if vector:
        b = b[:, None]
    if a.shape[0] != b.shape[0]:
        raise LinalgError("row counts of a and b differ")
    x, *_ = sla.lstsq(a, b, cond=pinv_rcond(a.shape), lapack_driver="gelsd")
    _check_finite(x)
    return x[:, 0] if vector else x


@dataclass(frozen=True)
class EigenPair:
    value: complex | float
    vector: np.ndarray
    ambiguous: bool
    residual: float


def _as_operator(apply, dim: int) -> tuple[Callable[[np.ndarray], np.ndarray], np.ndarray | None]:
    if not callable(apply):
        mat = np.asarray(apply)
        if mat.shape != (dim, dim):
            raise LinalgError(f"matrix shape {mat.shape} does not match dim {dim}")
        return (lambda v: mat @ v), mat
    return apply, None


def leading_eigenpair(
    apply,
    dim: int,
    symmetric: bool,
    *,
    v0: np.ndarray | None = None,
    tol: float = 1e-12,
    dtype=np.float64,
    check_gap: bool = True,
) -> EigenPair:
    """Dominant-magnitude eigenpair of a linear map.

    ``apply`` is either a dense ``dim x dim`` array or a callable acting on
    vectors. ``symmetric`` means the map equals its transpose (real symmetric
    or complex symmetric; the Lanczos path is used only for real symmetric
    maps). The starting vector is all-ones unless ``v0`` is given.

    ``check_gap`` requests the second eigenvalue as well so that a degenerate
    dominant magnitude can be flagged; the flag is ``False`` when unchecked.
    """
    func, mat = _as_operator(apply, dim)
    dtype = np.result_type(dtype, mat.dtype) if mat is not None else np.dtype(dtype)
    real_sym = symmetric and dtype == np.float64
    start = np.ones(dim, dtype=dtype) if v0 is None else np.asarray(v0, dtype=dtype).copy()
    start /= np.linalg.norm(start)

    if dim <= DENSE_EIG_LIMIT:
        if mat is None:
            mat = np.column_stack([func(e) for e in np.eye(dim, dtype=dtype)])
        if real_sym:
            w, v = np.linalg.eigh(0.5 * (mat + mat.T))
        else:
            w, v = np.linalg.eig(mat)
        order = np.lexsort((-w.real, -np.abs(w)))
        w, v = w[order], v[:, order]
        value, vec = w[0], v[:, 0]
        ambiguous = dim > 1 and abs(abs(w[0]) - abs(w[1])) <= AMBIGUITY_GAP * max(abs(w[0]), 1e-300)
    else:
        op = spla.LinearOperator((dim, dim), matvec=func, dtype=dtype)
        k = 2 if check_gap else 1
        ncv = min(dim - 1, max(20, 2 * k + 1))
        try:
            if real_sym:
                w, v = spla.eigsh(op, k=k, which="LM", v0=start, tol=tol, ncv=ncv)
            else:
                w, v = spla.eigs(op, k=k, which="LM", v0=start, tol=tol, ncv=ncv)
        except spla.ArpackNoConvergence as exc:
            raise LinalgError("Krylov eigensolver did not converge") from exc
        order = np.argsort(-np.abs(w))
        w, v = w[order], v[:, order]
        value, vec = w[0], v[:, 0]
        ambiguous = check_gap and abs(abs(w[0]) - abs(w[1])) <= AMBIGUITY_GAP * abs(w[0])

    vec = vec / np.linalg.norm(vec)
    if real_sym:
        value = float(np.real(value))
        vec = np.real(vec)
    # deterministic phase: largest-magnitude component made real positive
    j = int(np.argmax(np.abs(vec)))
    vec = vec * (abs(vec[j]) / vec[j])
    residual = float(np.linalg.norm(func(vec) - value * vec))
    _check_finite(vec)
    return EigenPair(value, vec, bool(ambiguous), residual)


def contract(t1, t2, index_pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Contract ``t1`` and ``t2`` over ``index_pairs``.

    The result keeps the free indices of ``t1`` followed by those of ``t2``.
    """
    a, b = as_tensor(t1), as_tensor(t2)
    ax1 = [p[0] for p in index_pairs]
    ax2 = [p[1] for p in index_pairs]
    for i, j in index_pairs:
        if a.shape[i] != b.shape[j]:
            raise LinalgError(f"extent mismatch on pair ({i}, {j}): {a.shape[i]} vs {b.shape[j]}")
    out = np.tensordot(a, b, axes=(ax1, ax2))
    _check_finite(out)
    return out
