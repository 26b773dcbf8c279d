"""Empirical demonstration that ||C / sqrt(n)||_2 diverges once the
sampling rate falls to p ~ (log n)**(1 - delta) / n.

The mechanism is the largest diagonal entry of C^T C / n.  With d_i the
number of positive entries in column i of C,

    T(i, i) = n p / (1 - p) + d_i * ((1-p)/p - p/(1-p)),

and {d_i} is the degree sequence of an Erdos-Renyi graph, whose maximum
degree outruns n p at these rates.  A binomial tail lower bound certifies
that degrees above the threshold k = n p + (log n)**(1 - 4 delta / 5)
(or k = n p (1 + v_n) in the generalized form) occur with probability
tending to one: n * P(degree >= k) -> infinity.

C is never materialized densely here.  Only the positive entries are
stored; the constant negative background is a rank-one correction applied
on the fly, so n up to ~1e5 fits in memory at these tiny p.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidVn
from .matrix_core import SparseCSR, _power_norm
from .rng import SALT_BLOWUP, split_index, stream
from .subsample import SampleConfig, _mask_coords, centered_values


class CenteredSparse:
    """C = a * A - b * ones @ ones^T with A the 0/1 matrix of positive
    draws, a = plus - minus, b = -minus.  Symmetric, diagonal included."""

    def __init__(self, n, p, adjacency):
        plus, minus = centered_values(p)
        self.n = n
        self.p = p
        self.adjacency = adjacency
        self.scale = plus - minus
        self.background = -minus

    @property
    def shape(self):
        return (self.n, self.n)

    def matvec(self, x):
        return self.scale * self.adjacency.matvec(x) - self.background * x.sum()

    rmatvec = matvec

    def degrees(self):
        """Positive-entry count per column (diagonal counted once)."""
        return np.diff(self.adjacency.row_ptr)

    def to_dense(self):
        a = self.adjacency.to_dense()
        return self.scale * a - self.background * np.ones((self.n, self.n))


def sample_centered_sparse(n, p, seed):
    """Sparse centered matrix sharing its Bernoulli mask with draw_c for
    the same (n, p, seed)."""
    cfg = SampleConfig(p=p, seed=seed, symmetric=True)
    i, j = _mask_coords(n, n, cfg)
    off = i != j
    rows = np.concatenate([i, j[off]])
    cols = np.concatenate([j, i[off]])
    vals = np.ones(len(rows))
    adjacency = SparseCSR.from_coo(n, n, rows, cols, vals)
    return CenteredSparse(n, p, adjacency)


def sample_degrees(n, p, seed):
    """Column counts of positive entries of one symmetric C draw."""
    if p <= 0.0:
        return np.zeros(n, dtype=np.int64)
    if p >= 1.0:
        return np.full(n, n, dtype=np.int64)
    return sample_centered_sparse(n, p, seed).degrees().astype(np.int64)


def gram_diagonal(degrees, n, p):
    """Diagonal of C^T C from the positive-entry counts:
    T(i,i) = n p/(1-p) + d_i ((1-p)/p - p/(1-p))."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    d = np.asarray(degrees, dtype=float)
    base = n * p / (1.0 - p)
    gap = (1.0 - p) / p - p / (1.0 - p)
    return base + d * gap


def degree_threshold(n, p, delta, variant="paper", v_n=None):
    """Degree threshold k whose exceedance certifies the blow-up.

    variant "paper": k = n p + (log n)**(1 - 4 delta / 5).
    variant "generalized": k = n p (1 + v_n) with caller-supplied v_n,
    admitted only if the finite-n ratio checks v_n < log n and
    v_n < (u_n^-1 (log n)**delta)**(1/4) hold, where u_n recovers the
    prefactor of p = (log n)**(1-delta) u_n / n.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    log_n = math.log(n)
    if variant == "paper":
        return n * p + log_n ** (1.0 - 0.8 * delta)
    if variant == "generalized":
        if v_n is None or v_n <= 0.0:
            raise InvalidVn("generalized variant needs v_n > 0")
        u_n = p * n / log_n ** (1.0 - delta)
        cap = (log_n**delta / u_n) ** 0.25
        if v_n >= log_n or v_n >= cap:
            raise InvalidVn(
                f"v_n = {v_n:.4g} fails the finite-n checks (must stay "
                f"below log n = {log_n:.4g} and {cap:.4g})"
            )
        return n * p * (1.0 + v_n)
    raise ValueError(f"unknown variant {variant!r}")


@dataclass(frozen=True)
class TailBound:
    """Binomial point-mass lower bound at k, kept in log space."""

    log_bound: float
    log_n_times_bound: float

    @property
    def bound(self):
        return math.exp(self.log_bound)

    @property
    def n_times_bound(self):
        return math.exp(self.log_n_times_bound)


def binomial_tail_lower_bound(n, p, k):
    """Stirling-type lower bound on C(n, k) p^k q^(n-k):

    (2 pi p q n)^(-1/2) exp(-h^2/(2pqn) - h^3/(2 q^2 n^2)
                            - h^4/(3 p^3 n^3) - h/(pn) - beta)

    with h = k - n p, q = 1 - p, beta = 1/(12k) + 1/(12(n-k)).  Evaluated
    in log space to dodge underflow; n * bound is the divergence witness.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must be in (0, 1), got {p}")
    if not 0.0 < k < n:
        raise DomainError(f"k must be in (0, n), got k={k}, n={n}")
    q = 1.0 - p
    h = k - n * p
    beta = 1.0 / (12.0 * k) + 1.0 / (12.0 * (n - k))
    log_bound = (
        -0.5 * math.log(2.0 * math.pi * p * q * n)
        - h**2 / (2.0 * p * q * n)
        - h**3 / (2.0 * q**2 * n**2)
        - h**4 / (3.0 * p**3 * n**3)
        - h / (p * n)
        - beta
    )
    return TailBound(
        log_bound=log_bound,
        log_n_times_bound=math.log(n) + log_bound,
    )


@dataclass
class BlowupTrace:
    """One (n, draw) cell of the blow-up experiment."""

    n: int
    p: float
    delta: float
    draw: int
    degrees: np.ndarray = field(repr=False)
    max_T_over_n: float
    k_threshold: float
    k_over_2np: float
    tail_lower_bound_log: float
    opnorm_estimate: float


def sampling_rate(n, delta, regime="blowup"):
    """p = (log n)**(1 - delta) / n in the blow-up regime;
    p = (log n)**2 / n in the contrasting safe regime."""
    if regime == "blowup":
        return math.log(n) ** (1.0 - delta) / n
    if regime == "contrast":
        return math.log(n) ** 2 / n
    raise ValueError(f"unknown regime {regime!r}")


def centered_norm_estimate(cs, tol=1e-7, max_iter=2000):
    """||C||_2 / sqrt(n), started from the basis vector of the largest
    diagonal entry of C^T C so the estimate never falls below
    sqrt(max_i T(i,i)) (the Rayleigh sequence is monotone from there)."""
    t_diag = gram_diagonal(cs.degrees(), cs.n, cs.p)
    x0 = np.zeros(cs.n)
    x0[int(np.argmax(t_diag))] = 1.0
    value, _ = _power_norm(
        cs.matvec, cs.rmatvec, cs.shape, tol, max_iter, x0=x0, track_max=True
    )
    return value / math.sqrt(cs.n)


def blowup_experiment(delta, n_grid, draws_per_n, seed, regime="blowup",
                      norm_tol=1e-7, norm_max_iter=2000):
    """Per-(n, draw) traces of max_i T(i,i)/n and ||C/sqrt(n)||_2 at the
    regime's sampling rate, with the threshold and tail-bound witnesses."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    traces = []
    for idx, n in enumerate(n_grid):
        n = int(n)
        p = sampling_rate(n, delta, regime)
        k = degree_threshold(n, p, delta)
        tail = binomial_tail_lower_bound(n, p, k)
        for draw in range(draws_per_n):
            cell = split_index(SALT_BLOWUP, idx * 4096 + draw)
            cell_seed = int(stream(seed, cell).integers(0, 2**63 - 1))
            cs = sample_centered_sparse(n, p, cell_seed)
            degrees = cs.degrees()
            t_diag = gram_diagonal(degrees, n, p)
            traces.append(
                BlowupTrace(
                    n=n,
                    p=p,
                    delta=delta,
                    draw=draw,
                    degrees=degrees,
                    max_T_over_n=float(np.max(t_diag) / n),
                    k_threshold=float(k),
                    k_over_2np=float(k / (2.0 * n * p)),
                    tail_lower_bound_log=tail.log_n_times_bound,
                    opnorm_estimate=centered_norm_estimate(
                        cs, tol=norm_tol, max_iter=norm_max_iter
                    ),
                )
            )
    return traces
