"""Approximate sampled functions f(1..N) by sums of exponentials sum_i x_i lam_i^k.

The exponents come from the shift structure of the Hankel matrix of the
samples, either directly or through an economical QR factorization of it
(better conditioned). Weights are then fitted by linear least squares.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .linalg import qr_economical, solve_least_squares, svd

__all__ = [
    "ExpSumFit",
    "FitWarning",
    "build_hankel",
    "fit_exponents",
    "fit_weights",
    "fit",
    "fit_power_law",
    "evaluate",
    "read_samples_csv",
]

IMAG_TOL = 1e-10
DUPLICATE_TOL = 1e-12


class FitWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ExpSumFit:
    exponents: np.ndarray
    weights: np.ndarray
    n_samples: int
    cost: float = float("nan")  # sum_k |f(k) - fit(k)|
    max_dev: float = float("nan")
    real_input: bool = True
    diagnostics: tuple[str, ...] = field(default_factory=tuple)

    @property
    def n_terms(self) -> int:
        return len(self.exponents)

    @property
    def unstable(self) -> bool:
        return bool(np.any(np.abs(self.exponents) >= 1.0))


def build_hankel(samples, n: int) -> np.ndarray:
    """(N-n+1) x n matrix with F[r, c] = f(r + c + 1) for 0-based r, c."""
    f = np.asarray(samples)
    big_n = f.shape[0]
    if not 1 <= n < big_n:
        raise ValueError(f"need 1 <= n < N, got n={n}, N={big_n}")
    rows = big_n - n + 1
    idx = np.arange(rows)[:, None] + np.arange(n)[None, :]
    return f[idx]


def _numerical_rank(s: np.ndarray, shape) -> int:
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > max(shape) * np.finfo(float).eps * s[0]))


@dataclass(frozen=True)
class ExponentResult:
    exponents: np.ndarray
    rank: int
    diagnostics: tuple[str, ...]


def fit_exponents(samples, n: int, method: str = "qr") -> ExponentResult:
    """Exponents lam_i from the shift relation between the top and bottom rows.

    ``direct`` diagonalizes pinv(F1) F2, ``qr`` diagonalizes pinv(U1) U2 where
    F = U V is an economical QR factorization. F1/U1 are the first N-n rows,
    F2/U2 the last N-n rows.
    """
    f = np.asarray(samples)
    big_n = len(f)
    if big_n < n + 2:
        raise ValueError("need N >= n + 2 samples")
    if method not in ("direct", "qr"):
        raise ValueError(f"unknown method {method!r}")
    hank = build_hankel(f, n)
    m = big_n - n
    diags: list[str] = []

    _, s, _ = svd(hank)
    rank = _numerical_rank(s, hank.shape)
    if rank < n:
        diags.append(f"rank collapse: effective rank {rank} < n={n}")
        if rank == 0:
            return ExponentResult(np.zeros(0, dtype=complex), 0, tuple(diags))
        # restrict to the dominant column space
        basis = svd(hank)[0][:, :rank]
    elif method == "direct":
        basis = hank
    else:
        basis, _ = qr_economical(hank)
    shift = solve_least_squares(basis[:m], basis[1 : m + 1])
    lam = np.linalg.eigvals(shift)
    order = np.lexsort((-lam.imag, -lam.real, -np.abs(lam)))
    lam = lam[order]
    if np.any(np.abs(lam) > 1.0):
        diags.append("exponents with |lam| > 1 present")
    return ExponentResult(lam.astype(complex), rank, tuple(diags))


def fit_weights(samples, exponents) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    """Least-squares weights for fixed exponents over k = 1..N.

    Exponents closer than 1e-12 are merged first. Returns the (possibly
    reduced) exponents, the weights and diagnostics.
    """
    f = np.asarray(samples)
    lam = np.asarray(exponents, dtype=complex)
    diags: list[str] = []
    kept: list[complex] = []
    for z in lam:
        if any(abs(z - w) <= DUPLICATE_TOL for w in kept):
            diags.append(f"duplicate exponent {z} merged")
            continue
        kept.append(z)
    lam = np.array(kept, dtype=complex)
    if lam.size == 0:
        return lam, np.zeros(0, dtype=complex), tuple(diags)
    ks = np.arange(1, len(f) + 1)
    with np.errstate(over="ignore", invalid="ignore"):
        vander = lam[None, :] ** ks[:, None]
    if not np.all(np.isfinite(vander)):
        raise FloatingPointError("Vandermonde matrix overflows; exponents too large for this range")
    s = np.linalg.svd(vander, compute_uv=False)
    if _numerical_rank(s, vander.shape) < lam.size:
        msg = "degenerate Vandermonde system; minimum-norm weights returned"
        diags.append(msg)
        warnings.warn(msg, FitWarning, stacklevel=2)
    weights = solve_least_squares(vander, f.astype(complex))
    return lam, weights, tuple(diags)


def evaluate(fit: ExpSumFit, ks) -> np.ndarray:
    """sum_i x_i lam_i^k; real input fits return real values."""
    ks_arr = np.atleast_1d(np.asarray(ks))
    if fit.n_terms == 0:
        vals = np.zeros(ks_arr.shape, dtype=complex)
    else:
        vals = (fit.exponents[None, :] ** ks_arr[:, None]) @ fit.weights
    if fit.real_input:
        scale = max(1.0, float(np.max(np.abs(vals))) if vals.size else 1.0)
        if vals.size and np.max(np.abs(vals.imag)) > IMAG_TOL * scale:
            raise ValueError("imaginary residual too large; conjugate pairing broken")
        vals = vals.real
    return vals if np.ndim(ks) else vals[0]


def _metrics(f: np.ndarray, fit: ExpSumFit) -> tuple[float, float]:
    resid = f - evaluate(fit, np.arange(1, len(f) + 1))
    return float(np.sum(np.abs(resid))), float(np.max(np.abs(resid)))


def fit(samples, n: int, method: str = "qr") -> ExpSumFit:
    f = np.asarray(samples)
    real_input = not np.iscomplexobj(f)
    ex = fit_exponents(f, n, method)
    lam, weights, wdiag = fit_weights(f, ex.exponents)
    if real_input and lam.size:
        weights = _pair_conjugates(lam, weights)
    out = ExpSumFit(lam, weights, len(f), real_input=real_input, diagnostics=ex.diagnostics + wdiag)
    cost, dev = _metrics(f, out)
    return ExpSumFit(lam, weights, len(f), cost, dev, real_input, out.diagnostics)


def _pair_conjugates(lam: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Make weights of conjugate exponent pairs exact conjugates of each other."""
    w = weights.copy()
    tol = 1e-8
    used = np.zeros(len(lam), dtype=bool)
    for i, z in enumerate(lam):
        if used[i]:
            continue
        used[i] = True
        if abs(z.imag) <= tol * max(1.0, abs(z)):
            w[i] = w[i].real + 0j
            continue
        cands = [j for j in range(len(lam)) if not used[j] and abs(lam[j] - np.conj(z)) <= tol * max(1.0, abs(z))]
        if cands:
            j = cands[0]
            used[j] = True
            avg = 0.5 * (w[i] + np.conj(w[j]))
            w[i], w[j] = avg, np.conj(avg)
    return w


def fit_power_law(p: float, n: int, n_samples: int = 1000, method: str = "qr") -> ExpSumFit:
    """Fit r -> r^-p on r = 1..n_samples."""
    r = np.arange(1, n_samples + 1, dtype=float)
    return fit(r ** (-float(p)), n, method)


def read_samples_csv(path) -> np.ndarray:
    """Two-column CSV (k, f(k)) with k = 1..N in order; a header row is allowed."""
    ks, vals = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                k, v = int(row[0]), float(row[1])
            except ValueError:
                if not ks:
                    continue  # header
                raise
            ks.append(k)
            vals.append(v)
    if ks != list(range(1, len(ks) + 1)):
        raise ValueError("CSV must list k = 1..N consecutively")
    return np.array(vals)
