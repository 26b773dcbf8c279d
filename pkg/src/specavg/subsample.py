"""Bernoulli elementwise subsampling and the centered two-point matrix.

A draw keeps each entry of M independently with probability p, rescaling
kept entries by 1/p, so the sparse result S is an unbiased estimator of M.
Writing the Bernoulli mask through the centered variable

    c = sqrt((1-p)/p)   on success,   c = -sqrt(p/(1-p))   otherwise,

gives the exact decomposition S = M + sqrt((1-p)/p) * (M o C), where C is
the symmetric matrix of those centered variables and o is the entrywise
product.  draw_paired emits (S, C) from one shared mask so the identity
holds exactly, draw by draw.

Symmetric sampling draws only the upper triangle (i <= j, diagonal
included) and mirrors it, keeping S symmetric.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .matrix_core import DenseSymmetric, SparseCSR, as_array, spectral_norm
from .rng import SALT_PROFILE, SALT_SAMPLE, bernoulli_positions, split_index, stream


@dataclass(frozen=True)
class SampleConfig:
    """Sampling probability, stream seed, and triangle-mirroring flag."""

    p: float
    seed: int
    symmetric: bool = True

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"sampling probability must be in (0, 1], got {self.p}")


@dataclass(frozen=True)
class SampleDraw:
    """One subsampled sparse matrix with its generating configuration.

    kept_count is the raw number of Bernoulli successes (upper-triangular
    slots in symmetric mode), before zero-valued entries of M are pruned.
    """

    s: SparseCSR
    config: SampleConfig
    kept_count: int


@dataclass(frozen=True)
class CenteredBernoulliMatrix:
    """Symmetric matrix of iid mean-zero variance-one two-point entries."""

    c: np.ndarray
    p: float


def centered_values(p):
    """(plus, minus) entry values of the centered Bernoulli variable.

    At p = 1 the minus branch has probability zero and the plus value is
    0, so the matrix degenerates to all zeros.
    """
    plus = math.sqrt((1.0 - p) / p)
    minus = -math.sqrt(p / (1.0 - p)) if p < 1.0 else 0.0
    return plus, minus


def _triangle_coords(positions, n):
    """Map linear indices over the row-major upper triangle (i <= j,
    diagonal included) back to (i, j) pairs."""
    # slot count of rows 0..i-1 is i*n - i*(i-1)/2
    i_grid = np.arange(n + 1, dtype=np.int64)
    row_starts = i_grid * n - (i_grid * (i_grid - 1)) // 2
    i = np.searchsorted(row_starts, positions, side="right") - 1
    j = positions - row_starts[i] + i
    return i, j


def _mask_coords(n_rows, n_cols, cfg, counter=0):
    """Success coordinates of the Bernoulli mask for one draw."""
    rng = stream(cfg.seed, split_index(SALT_SAMPLE, counter))
    if cfg.symmetric:
        if n_rows != n_cols:
            raise ShapeMismatch("symmetric sampling needs a square matrix")
        total = n_rows * (n_rows + 1) // 2
        pos = bernoulli_positions(total, cfg.p, rng)
        return _triangle_coords(pos, n_rows)
    pos = bernoulli_positions(n_rows * n_cols, cfg.p, rng)
    return pos // n_cols, pos % n_cols


def draw_sample(M, cfg):
    """One Bernoulli(p) subsample of M, entries rescaled by 1/p.

    Pure function of (M, cfg): identical arguments give bit-identical
    output.  Entries of M equal to zero are never stored.
    """
    a = as_array(M)
    if a.ndim != 2:
        raise ShapeMismatch("expected a matrix")
    i, j = _mask_coords(a.shape[0], a.shape[1], cfg)
    kept = len(i)
    vals = a[i, j] / cfg.p
    if cfg.symmetric:
        off = i != j
        rows = np.concatenate([i, j[off]])
        cols = np.concatenate([j, i[off]])
        vals = np.concatenate([vals, vals[off]])
    else:
        rows, cols = i, j
    s = SparseCSR.from_coo(a.shape[0], a.shape[1], rows, cols, vals)
    return SampleDraw(s=s, config=cfg, kept_count=kept)


def draw_paired(M, cfg):
    """(SampleDraw, CenteredBernoulliMatrix) from one shared mask.

    The pair satisfies S = M + sqrt((1-p)/p) * (M o C) exactly (up to
    float rounding), which ties the sampler to the centered-matrix
    decomposition used by every bound in the package.
    """
    if not cfg.symmetric:
        raise ValueError("paired draws are defined for symmetric sampling")
    a = as_array(M)
    n = a.shape[0]
    i, j = _mask_coords(n, n, cfg)
    kept = len(i)
    plus, minus = centered_values(cfg.p)
    c = np.full((n, n), minus)
    c[i, j] = plus
    c[j, i] = plus
    vals = a[i, j] / cfg.p
    off = i != j
    rows = np.concatenate([i, j[off]])
    cols = np.concatenate([j, i[off]])
    vals = np.concatenate([vals, vals[off]])
    s = SparseCSR.from_coo(n, n, rows, cols, vals)
    return (
        SampleDraw(s=s, config=cfg, kept_count=kept),
        CenteredBernoulliMatrix(c=c, p=cfg.p),
    )


def draw_c(n, p, seed):
    """One symmetric n x n centered Bernoulli matrix (diagonal included)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    cfg = SampleConfig(p=p, seed=seed, symmetric=True)
    i, j = _mask_coords(n, n, cfg)
    plus, minus = centered_values(p)
    c = np.full((n, n), minus)
    c[i, j] = plus
    c[j, i] = plus
    return CenteredBernoulliMatrix(c=c, p=p)


def residual(M, draw):
    """Dense residual E = S - M of a draw."""
    a = as_array(M)
    if tuple(draw.s.shape) != a.shape:
        raise ShapeMismatch(f"shape mismatch {draw.s.shape} vs {a.shape}")
    return draw.s.to_dense() - a


def median_deviation_bound(t, n, p):
    """Tail bound 4*exp(-t^2 * p * (1-p) * n / 8) for deviations of
    ||C/sqrt(n)|| from its median."""
    return 4.0 * math.exp(-(t**2) * p * (1.0 - p) * n / 8.0)


def concentration_profile(n, p, draws, seed, tol=1e-8):
    """Empirical median of ||C/sqrt(n)||_2 and per-draw absolute deviations.

    The deviations feed the concentration check: the fraction exceeding t
    should stay below median_deviation_bound(t, n, p).
    """
    if draws < 10:
        raise ValueError("need at least 10 draws for a meaningful median")
    values = np.empty(draws)
    for d in range(draws):
        c = draw_c(n, p, seed=_profile_seed(seed, d))
        if p >= 1.0:
            values[d] = 0.0
        else:
            values[d] = spectral_norm(c.c, tol=tol) / math.sqrt(n)
    med = float(np.median(values))
    return {"median": med, "deviations": np.abs(values - med)}


def _profile_seed(seed, draw):
    # distinct base seed per draw; the sampler salts again internally
    rng = stream(seed, split_index(SALT_PROFILE, draw))
    return int(rng.integers(0, 2**63 - 1))
