"""Dense symmetric and CSR sparse matrices plus the iterative solvers
every other module consumes.

Eigenpairs are computed by power iteration with Hotelling deflation on a
positively shifted copy of the matrix, which makes the iteration converge
to the largest *algebraic* eigenvalues even for indefinite input.  Spectral
norms come from power iteration on A^T A.  Both are deliberately simple:
only a handful of extremal pairs are ever needed.

All types are immutable after construction and safe to share across
threads; every operation here is a pure function of its arguments.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as _sp

from .errors import (
    DegenerateGapWarning,
    NoConvergence,
    ShapeMismatch,
    ZeroMatrix,
)
from .rng import SALT_EIG, split_index, stream

DEFAULT_TOL = 1e-10          # residual tolerance, relative to |lambda_1|
DEGENERATE_GAP_RTOL = 1e-10  # |l_k - l_{k+1}| / |l_1| below this is flagged
_ZERO_PRUNE = 0.0            # stored values equal to this are dropped


class DenseSymmetric:
    """Dense real symmetric matrix.

    Symmetry is enforced on ingest: input must be symmetric to within
    1e-8 relative and is then symmetrized exactly via (A + A^T)/2.
    """

    __slots__ = ("a", "n")

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ShapeMismatch(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ValueError("dimension must be at least 1")
        scale = np.max(np.abs(a)) or 1.0
        if np.max(np.abs(a - a.T)) > 1e-8 * scale:
            raise ValueError("input is not symmetric")
        a = 0.5 * (a + a.T)
        a.flags.writeable = False
        self.a = a
        self.n = a.shape[0]

    @property
    def shape(self):
        return self.a.shape

    def matvec(self, x):
        return self.a @ x

    def rmatvec(self, x):
        return self.a @ x

    def to_dense(self):
        return self.a


class SparseCSR:
    """Compressed sparse row matrix over float64.

    Invariants: row_ptr is nondecreasing with row_ptr[n_rows] == nnz,
    column indices are strictly increasing within each row, and no
    explicitly stored zeros survive construction.
    """

    __slots__ = ("n_rows", "n_cols", "row_ptr", "col_idx", "values", "_sp")

    def __init__(self, n_rows, n_cols, row_ptr, col_idx, values):
        n_rows, n_cols = int(n_rows), int(n_cols)
        row_ptr = np.asarray(row_ptr, dtype=np.int64)
        col_idx = np.asarray(col_idx, dtype=np.int64)
        values = np.asarray(values, dtype=float)
        if row_ptr.shape != (n_rows + 1,):
            raise ValueError("row_ptr must have length n_rows + 1")
        if np.any(np.diff(row_ptr) < 0) or row_ptr[0] != 0:
            raise ValueError("row_ptr must be nondecreasing and start at 0")
        if row_ptr[-1] != len(col_idx) or len(col_idx) != len(values):
            raise ValueError("row_ptr[-1], col_idx and values disagree on nnz")
        if len(col_idx) and (col_idx.min() < 0 or col_idx.max() >= n_cols):
            raise ValueError("column index out of range")
        if np.any(values == _ZERO_PRUNE):
            row_ptr, col_idx, values = _prune_zeros(n_rows, row_ptr, col_idx, values)
        _check_sorted_rows(row_ptr, col_idx)
        for arr in (row_ptr, col_idx, values):
            arr.flags.writeable = False
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.row_ptr = row_ptr
        self.col_idx = col_idx
        self.values = values
        # scipy view over the same buffers, used for fast products only
        self._sp = _sp.csr_matrix(
            (values, col_idx, row_ptr), shape=(n_rows, n_cols), copy=False
        )

    @classmethod
    def from_coo(cls, n_rows, n_cols, rows, cols, values):
        """Build from unordered coordinate triplets (no duplicates)."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=float)
        order = np.lexsort((cols, rows))
        rows, cols, values = rows[order], cols[order], values[order]
        if len(rows) > 1 and np.any(
            (np.diff(rows) == 0) & (np.diff(cols) == 0)
        ):
            raise ValueError("duplicate coordinate entries")
        counts = np.bincount(rows, minlength=n_rows)
        row_ptr = np.concatenate([[0], np.cumsum(counts)])
        return cls(n_rows, n_cols, row_ptr, cols, values)

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self):
        return len(self.values)

    def matvec(self, x):
        return self._sp @ x

    def rmatvec(self, x):
        return self._sp.T @ x

    def to_dense(self):
        return self._sp.toarray()

    def scipy(self):
        return self._sp


def _prune_zeros(n_rows, row_ptr, col_idx, values):
    keep = values != _ZERO_PRUNE
    row_of = np.repeat(np.arange(n_rows), np.diff(row_ptr))[keep]
    counts = np.bincount(row_of, minlength=n_rows)
    new_ptr = np.concatenate([[0], np.cumsum(counts)])
    return new_ptr, col_idx[keep].copy(), values[keep].copy()


def _check_sorted_rows(row_ptr, col_idx):
    if len(col_idx) < 2:
        return
    inc = np.diff(col_idx) > 0
    # positions where a new row starts are allowed to decrease
    starts = np.zeros(len(col_idx), dtype=bool)
    heads = row_ptr[1:-1]
    starts[heads[heads < len(col_idx)]] = True
    if not np.all(inc | starts[1:]):
        raise ValueError("column indices must be strictly increasing within rows")


@dataclass(frozen=True)
class EigenPair:
    """One converged eigenpair: unit vector, residual at convergence."""

    value: float
    vector: np.ndarray
    residual_norm: float
    iterations: int


def as_array(A):
    """Raw ndarray view of any supported matrix type."""
    if isinstance(A, DenseSymmetric):
        return A.a
    if isinstance(A, SparseCSR):
        return A.to_dense()
    return np.asarray(A, dtype=float)


def _apply(A):
    """(matvec, rmatvec, shape) for ndarray / DenseSymmetric / SparseCSR
    or any object already exposing matvec/rmatvec/shape."""
    if isinstance(A, np.ndarray):
        return (lambda x: A @ x), (lambda x: A.T @ x), A.shape
    return A.matvec, A.rmatvec, tuple(A.shape)


def fix_sign(v):
    """Resolve the +/- ambiguity of an eigenvector.

    The component largest in magnitude is made positive; np.argmax breaks
    ties toward the lowest index, which makes the convention deterministic.
    """
    i = int(np.argmax(np.abs(v)))
    if v[i] < 0:
        return -v
    return v


def _power_norm(matvec, rmatvec, shape, tol, max_iter, x0=None, seed=0,
                track_max=False):
    """Largest singular value by power iteration on A^T A.

    The estimate ||A x_t|| is monotone nondecreasing when started from a
    fixed vector, so with track_max the returned value never falls below
    the estimate at x0.  Stops once two consecutive relative changes drop
    below tol.
    """
    m, n = shape
    if x0 is None:
        x = stream(seed, split_index(SALT_EIG, 0)).standard_normal(n)
    else:
        x = np.asarray(x0, dtype=float).copy()
    nx = np.linalg.norm(x)
    if nx == 0.0:
        raise ValueError("start vector must be nonzero")
    x /= nx
    sigma = 0.0
    best = 0.0
    hits = 0
    for it in range(1, max_iter + 1):
        z = matvec(x)
        new_sigma = float(np.linalg.norm(z))
        if new_sigma == 0.0:
            return 0.0, it
        best = max(best, new_sigma)
        w = rmatvec(z)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return (best if track_max else new_sigma), it
        x = w / nw
        if abs(new_sigma - sigma) <= tol * max(new_sigma, 1e-300):
            hits += 1
            if hits >= 2:
                return (best if track_max else new_sigma), it
        else:
            hits = 0
        sigma = new_sigma
    raise NoConvergence(
        f"spectral norm power iteration did not converge in {max_iter} "
        f"iterations (last value {sigma:.6e})",
        residual=abs(new_sigma - sigma),
    )


def spectral_norm(A, tol=1e-10, max_iter=None, seed=0):
    """Largest singular value of A (relative tolerance tol)."""
    matvec, rmatvec, shape = _apply(A)
    if max_iter is None:
        max_iter = max(1000, 100 * max(shape))
    value, _ = _power_norm(matvec, rmatvec, shape, tol, max_iter, seed=seed)
    return value


def norms(A):
    """Frobenius norm and entrywise max-abs, computed exactly."""
    if isinstance(A, SparseCSR):
        v = A.values
        return {
            "frobenius": float(np.sqrt(np.sum(v * v))),
            "entrywise_max": float(np.max(np.abs(v))) if len(v) else 0.0,
        }
    a = as_array(A)
    return {
        "frobenius": float(np.linalg.norm(a)),
        "entrywise_max": float(np.max(np.abs(a))) if a.size else 0.0,
    }


def numerical_rank(A, tol=1e-10):
    """Stable rank ||A||_F^2 / ||A||_2^2, in [1, min(m, n)] up to solver
    tolerance."""
    fro = norms(A)["frobenius"]
    if fro == 0.0:
        raise ZeroMatrix("numerical rank undefined for the zero matrix")
    s = spectral_norm(A, tol=tol)
    return float(fro**2 / s**2)


def hadamard(A, B):
    """Entrywise product; a sparse operand keeps the result sparse."""
    shape_a = tuple(A.shape) if not isinstance(A, np.ndarray) else A.shape
    shape_b = tuple(B.shape) if not isinstance(B, np.ndarray) else B.shape
    if tuple(shape_a) != tuple(shape_b):
        raise ShapeMismatch(f"shape mismatch {shape_a} vs {shape_b}")
    if isinstance(A, SparseCSR) and isinstance(B, SparseCSR):
        prod = A.scipy().multiply(B.scipy()).tocsr()
        prod.sort_indices()
        return SparseCSR(
            A.n_rows, A.n_cols, prod.indptr, prod.indices, prod.data
        )
    if isinstance(A, SparseCSR) or isinstance(B, SparseCSR):
        s, other = (A, B) if isinstance(A, SparseCSR) else (B, A)
        dense = as_array(other)
        row_of = np.repeat(np.arange(s.n_rows), np.diff(s.row_ptr))
        vals = s.values * dense[row_of, s.col_idx]
        return SparseCSR(s.n_rows, s.n_cols, s.row_ptr, s.col_idx, vals)
    if isinstance(A, DenseSymmetric) and isinstance(B, DenseSymmetric):
        return DenseSymmetric(A.a * B.a)
    return as_array(A) * as_array(B)


def _deflated_power(matvec, n, found, tol_abs, max_iter, rng):
    """One eigenpair of the (shifted, deflated) operator.

    found is a list of (theta, vector) pairs removed via Hotelling
    deflation.  Returns (theta, vector, residual, iterations) where the
    residual is measured on the deflated operator.
    """
    basis = [u for _, u in found]

    def deflate(y, x):
        for theta_i, u in found:
            y = y - theta_i * u * (u @ x)
        return y

    for attempt in range(3):
        x = rng.standard_normal(n)
        for u in basis:
            x -= u * (u @ x)
        nx = np.linalg.norm(x)
        if nx == 0.0:
            continue
        x /= nx
        theta = 0.0
        for it in range(1, max_iter + 1):
            y = deflate(matvec(x), x)
            theta = float(x @ y)
            resid = float(np.linalg.norm(y - theta * x))
            if resid <= tol_abs:
                return theta, x, resid, it
            ny = np.linalg.norm(y)
            if ny == 0.0:
                # x lies in the kernel of the deflated operator: exact pair
                return 0.0, x, 0.0, it
            x = y / ny
            for u in basis:
                x -= u * (u @ x)
            x /= np.linalg.norm(x)
        return theta, x, resid, max_iter
    raise NoConvergence("could not find a start vector outside the deflated "
                        "subspace")


def leading_singular_triplet(A, tol=DEFAULT_TOL, max_iter=None, seed=0):
    """(sigma_1, u_1, v_1) of a rectangular matrix by power iteration on
    A^T A.  The left vector's sign follows fix_sign; the right vector's
    sign is slaved to it so u^T A v = sigma > 0."""
    matvec, rmatvec, shape = _apply(A)
    m, n = shape
    if max_iter is None:
        max_iter = max(1000, 100 * max(shape))
    rng = stream(seed, split_index(SALT_EIG, 2))
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for it in range(1, max_iter + 1):
        z = matvec(v)
        new_sigma = float(np.linalg.norm(z))
        if new_sigma == 0.0:
            raise NoConvergence("matrix annihilates the iterate; no leading "
                                "singular direction", residual=0.0)
        w = rmatvec(z)
        resid = float(np.linalg.norm(w - new_sigma**2 * v))
        v = w / np.linalg.norm(w)
        if resid <= tol * new_sigma**2:
            sigma = new_sigma
            break
        sigma = new_sigma
    else:
        raise NoConvergence(
            f"singular triplet did not converge in {max_iter} iterations",
            residual=resid,
        )
    z = matvec(v)
    sigma = float(np.linalg.norm(z))
    u = z / sigma
    if u[int(np.argmax(np.abs(u)))] < 0:
        u, v = -u, -v
    return sigma, u, v


def top_k_eigen(A, k, tol=DEFAULT_TOL, max_iter=None, seed=0, gap_check=True):
    """k leading eigenpairs (largest algebraic eigenvalues first).

    Power iteration with Hotelling deflation on B = A + s*Id, where the
    shift s exceeds the spectral radius so the largest algebraic
    eigenvalue of A dominates B in magnitude.  Each returned vector is
    unit norm with its largest-magnitude component positive, and satisfies
    ||A v - lambda v|| <= tol * (spectral radius estimate), else
    NoConvergence.

    When gap_check is set and k < n, one extra (never-raising) solve
    estimates lambda_{k+1}; a DegenerateGapWarning is issued if the k-th
    gap is below 1e-10 relative to |lambda_1|.
    """
    matvec, _, shape = _apply(A)
    n = shape[0]
    if shape[0] != shape[1]:
        raise ShapeMismatch("eigendecomposition needs a square matrix")
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    if max_iter is None:
        max_iter = 100 * n

    # spectral radius estimate; coarse tolerance is enough for a shift
    scale, _ = _power_norm(matvec, matvec, shape, 1e-4,
                           max(200, max_iter), seed=seed)
    if scale == 0.0:
        eye = np.eye(n)
        return [EigenPair(0.0, eye[:, j].copy(), 0.0, 0) for j in range(k)]
    shift = 1.05 * scale
    tol_abs = tol * scale

    def shifted(x):
        return matvec(x) + shift * x

    rng = stream(seed, split_index(SALT_EIG, 1))
    found = []
    pairs = []
    for j in range(k):
        theta, x, resid, its = _deflated_power(
            shifted, n, found, tol_abs, max_iter, rng
        )
        lam = float(x @ matvec(x))
        true_resid = float(np.linalg.norm(matvec(x) - lam * x))
        if true_resid > tol_abs:
            raise NoConvergence(
                f"eigenpair {j + 1} did not reach tolerance "
                f"({true_resid:.3e} > {tol_abs:.3e})",
                index=j + 1,
                residual=true_resid,
            )
        x = fix_sign(x)
        x = x / np.linalg.norm(x)
        found.append((lam + shift, x))
        pairs.append(EigenPair(lam, x, true_resid, its))

    if gap_check and k < n:
        theta, x, _, _ = _deflated_power(shifted, n, found, tol_abs,
                                         max_iter, rng)
        lam_next = float(x @ matvec(x))
        lam1 = max(abs(p.value) for p in pairs) or scale
        if abs(pairs[-1].value - lam_next) < DEGENERATE_GAP_RTOL * lam1:
            warnings.warn(
                f"eigenvalues {k} and {k + 1} are numerically degenerate "
                f"(gap {abs(pairs[-1].value - lam_next):.3e})",
                DegenerateGapWarning,
            )
    return pairs
