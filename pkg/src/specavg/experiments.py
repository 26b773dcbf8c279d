"""Synthetic data generators, the PageRank robustness pipeline, rank
correlation, sweeps, and the timing harness behind the CLI.

The generators replace the original large datasets with seedable
desk-scale stand-ins: a planted-spectrum symmetric matrix whose
eigenvector supports (hence sparsity exponents) are chosen exactly, and a
preferential-attachment web graph for the ranking experiments.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyGraph,
    InfeasibleSupports,
    LengthMismatch,
    NoConvergence,
    NodeIdOverflow,
    ParseError,
    ZeroVariance,
)
from .matrix_core import DenseSymmetric, SparseCSR, as_array, fix_sign, spectral_norm, top_k_eigen
from .incoherence import RectSpectralModel, SpectralModel, fit_alpha
from .rng import SALT_GRAPH, SALT_SAMPLE, SALT_SYNTH, derive_seeds, split_index, stream
from .subsample import SampleConfig, draw_sample


@dataclass(frozen=True)
class SyntheticSpec:
    """Planted ground truth for a synthetic symmetric matrix.

    spectrum: strictly decreasing positive eigenvalues (the rank).
    support_sizes: nonzero-coordinate count per eigenvector (None: dense).
    gap_ratio: when set, rescales so lambda_1 = 1 and lambda_2 = gap_ratio.
    """

    n: int
    spectrum: tuple
    support_sizes: tuple | None = None
    gap_ratio: float | None = None
    seed: int = 0
    m: int | None = None

    def __post_init__(self):
        lam = np.asarray(self.spectrum, dtype=float)
        if lam.ndim != 1 or lam.size < 1:
            raise ValueError("spectrum must be a nonempty sequence")
        if np.any(lam <= 0) or np.any(np.diff(lam) >= 0):
            raise ValueError("spectrum must be strictly decreasing and "
                             "positive")
        if self.support_sizes is not None:
            sizes = np.asarray(self.support_sizes, dtype=int)
            if sizes.shape != lam.shape:
                raise ValueError("one support size per eigenvalue")
            if np.any(sizes < 1) or np.any(sizes > self.n):
                raise ValueError("support sizes must lie in [1, n]")
        if self.gap_ratio is not None:
            if not 0.0 < self.gap_ratio < 1.0:
                raise ValueError("gap_ratio must be in (0, 1)")
            if lam.size < 2:
                raise ValueError("gap_ratio needs at least two eigenvalues")


def _orthonormal_on_supports(n, supports, rng):
    """Random orthonormal vectors with exactly the given supports.

    Supports are either pairwise disjoint index blocks or nested prefixes;
    Gram-Schmidt then never leaks mass outside a vector's support, so the
    planted cardinalities survive exactly.
    """
    r = len(supports)
    vectors = np.zeros((n, r))
    order = np.argsort([len(s) for s in supports], kind="stable")
    done = []
    for idx in order:
        supp = supports[idx]
        v = np.zeros(n)
        v[supp] = rng.standard_normal(len(supp))
        for jdx in done:
            w = vectors[:, jdx]
            v -= w * (w @ v)
        nv = np.linalg.norm(v)
        if nv < 1e-8:
            raise InfeasibleSupports(
                "supports cannot host an orthonormal family"
            )
        vectors[:, idx] = v / nv
        done.append(idx)
    return vectors


def synth_symmetric(spec):
    """(DenseSymmetric, SpectralModel) with spectrum and eigenvector
    supports planted exactly as requested."""
    lam = np.asarray(spec.spectrum, dtype=float)
    if spec.gap_ratio is not None:
        lam = lam / lam[0]
        lam = np.concatenate([[1.0], lam[1:] * (spec.gap_ratio / lam[1])])
    r = lam.size
    sizes = (
        np.full(r, spec.n, dtype=int)
        if spec.support_sizes is None
        else np.asarray(spec.support_sizes, dtype=int)
    )
    if np.sum(sizes) <= spec.n:
        # disjoint consecutive blocks
        offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        supports = [
            np.arange(off, off + sz) for off, sz in zip(offsets, sizes)
        ]
    else:
        # nested prefixes; Gram-Schmidt runs narrowest first
        supports = [np.arange(sz) for sz in sizes]
    rng = stream(spec.seed, split_index(SALT_SYNTH, 0))
    u = _orthonormal_on_supports(spec.n, supports, rng)
    m = (u * lam) @ u.T
    model = SpectralModel(lam, u, alpha=fit_alpha(u, spec.n))
    return DenseSymmetric(m), model


def synth_rect(n, m, spectrum, seed=0, left_supports=None, right_supports=None):
    """Rectangular ground truth M = sum sigma_i u_i v_i^T (n x m)."""
    sig = np.asarray(spectrum, dtype=float)
    rng = stream(seed, split_index(SALT_SYNTH, 1))
    ls = (
        [np.arange(n)] * sig.size
        if left_supports is None
        else [np.arange(s) for s in left_supports]
    )
    rs = (
        [np.arange(m)] * sig.size
        if right_supports is None
        else [np.arange(s) for s in right_supports]
    )
    u = _orthonormal_on_supports(n, ls, rng)
    v = _orthonormal_on_supports(m, rs, rng)
    model = RectSpectralModel(
        sig, u, v, alpha=fit_alpha(u, n), beta=fit_alpha(v, m)
    )
    return model.assemble(), model


class WebGraph:
    """Directed graph as a deduplicated edge array plus dangling flags."""

    def __init__(self, n, edges):
        if n < 1:
            raise EmptyGraph("graph needs at least one node")
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if len(edges):
            if edges.min() < 0 or edges.max() >= n:
                raise NodeIdOverflow(
                    f"edge endpoint outside [0, {n})"
                )
            edges = np.unique(edges, axis=0)
        self.n = int(n)
        self.edges = edges
        out = np.bincount(edges[:, 0], minlength=n) if len(edges) else \
            np.zeros(n, dtype=np.int64)
        self.out_degrees = out
        self.dangling = (out == 0).astype(float)

    @property
    def num_edges(self):
        return len(self.edges)


class GoogleOperator:
    """Damped random-surfer transition matrix, applied matrix-free.

    P = c * P_g + (1 - c) * ones ones^T / n, where P_g row-normalizes the
    adjacency after wiring every dangling node to all nodes uniformly.
    Rows sum to one by construction.
    """

    def __init__(self, graph, c=0.85):
        if not 0.0 < c <= 1.0:
            raise ValueError(f"damping c must be in (0, 1], got {c}")
        n = graph.n
        weights = np.ones(graph.num_edges)
        if graph.num_edges:
            weights = 1.0 / graph.out_degrees[graph.edges[:, 0]]
            adj = SparseCSR.from_coo(
                n, n, graph.edges[:, 0], graph.edges[:, 1], weights
            )
        else:
            adj = SparseCSR.from_coo(n, n, [], [], [])
        self.graph = graph
        self.c = c
        self.n = n
        self.row_norm = adj

    @property
    def shape(self):
        return (self.n, self.n)

    def apply_left(self, x):
        """P^T x (the pagerank iteration map)."""
        g = self.graph
        inner = self.row_norm.rmatvec(x) + (g.dangling @ x) / self.n
        return self.c * inner + (1.0 - self.c) * x.sum() / self.n

    def apply_right(self, x):
        g = self.graph
        inner = self.row_norm.matvec(x) + g.dangling * (x.sum() / self.n)
        return self.c * inner + (1.0 - self.c) * x.sum() / self.n

    matvec = apply_right
    rmatvec = apply_left

    def to_dense(self):
        g = self.graph
        pg = self.row_norm.to_dense() + np.outer(g.dangling, np.ones(self.n)) / self.n
        return self.c * pg + (1.0 - self.c) / self.n


def google_matrix(graph, c=0.85):
    if graph.n < 1:
        raise EmptyGraph("graph needs at least one node")
    return GoogleOperator(graph, c)


def _perron_left(apply_left, n, tol, max_iter):
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        y = apply_left(x)
        total = y.sum()
        if total <= 0.0:
            raise NoConvergence("iterate left the nonnegative cone")
        y = y / total
        if np.abs(y - x).sum() <= tol:
            return y
        x = y
    raise NoConvergence(
        f"pagerank power iteration did not converge in {max_iter} steps",
        residual=float(np.abs(y - x).sum()),
    )


def pagerank(P, tol=1e-12, max_iter=10000):
    """Left Perron vector of a stochastic operator: nonnegative entries
    summing to one."""
    if isinstance(P, np.ndarray):
        if np.max(np.abs(P.sum(axis=1) - 1.0)) > 1e-9:
            raise ValueError("input rows do not sum to 1")
        n = P.shape[0]
        return _perron_left(lambda x: P.T @ x, n, tol, max_iter)
    return _perron_left(P.apply_left, P.shape[0], tol, max_iter)


def perron_vector(A, tol=1e-12, max_iter=10000):
    """Left Perron vector of a nonnegative matrix or operator that need
    not be stochastic (used on subsampled transition matrices as-is)."""
    if isinstance(A, np.ndarray):
        return _perron_left(lambda x: A.T @ x, A.shape[0], tol, max_iter)
    return _perron_left(A.rmatvec, A.shape[0], tol, max_iter)


def _average_ranks(v):
    v = np.asarray(v, dtype=float)
    order = np.argsort(v, kind="stable")
    sorted_v = v[order]
    ranks = np.empty(v.size)
    boundaries = np.flatnonzero(np.diff(sorted_v) != 0.0) + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [v.size]])
    for s, e in zip(starts, ends):
        ranks[order[s:e]] = 0.5 * (s + e - 1) + 1.0
    return ranks


def spearman_rho(x, y):
    """Rank correlation: Pearson correlation of average-tied rank
    vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"length mismatch {x.shape} vs {y.shape}")
    if x.size < 2:
        raise LengthMismatch("need at least two observations")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if denom == 0.0:
        raise ZeroVariance("an input is constant; rank correlation "
                           "undefined")
    return float(rx @ ry / denom)


@dataclass
class RankReport:
    """One sweep row: correlation / alignment statistics at a given p."""

    p: float
    n_samples: int
    rho: float | None = None
    rho_median: float | None = None
    rho_std: float | None = None
    alignment: float | None = None
    alignment_median: float | None = None
    alignment_std: float | None = None
    pert_fraction: float | None = None
    variant: str | None = None
    per_draw: np.ndarray | None = field(default=None, repr=False)


def _alignment_cell(args):
    """One (p, draw) sweep cell; module-level so worker pools can run it."""
    a, p, seed, tol, eig_max_iter, norm_tol, d = args
    cfg = SampleConfig(p=p, seed=seed, symmetric=True)
    s = draw_sample(a, cfg).s
    pair = top_k_eigen(s, 1, tol=tol, max_iter=eig_max_iter, seed=seed,
                       gap_check=False)[0]
    e_norm = spectral_norm(s.to_dense() - a, tol=norm_tol)
    return fix_sign(pair.vector), bool(e_norm < d / 2.0)


def _parallel_cells(fn, tasks, workers):
    if workers <= 1:
        return [fn(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def sweep_alignment(M, model, p_grid, num_samples, seed, tol=1e-9,
                    eig_max_iter=None, norm_tol=1e-7, workers=1):
    """Alignment u^T v of averaged and single-draw eigenvectors per p,
    plus the fraction of draws inside the perturbative regime
    ||E|| < d/2.  Cells run independently (in parallel when workers > 1)
    and reduce in draw order, so rows do not depend on scheduling."""
    a = as_array(M)
    u = fix_sign(model.vector(1).copy())
    d = model.separation(1)
    rows = []
    for pi, p in enumerate(p_grid):
        seeds = derive_seeds(seed, SALT_SAMPLE, num_samples, lane=pi)
        tasks = [
            (a, float(p), int(seeds[i]), tol, eig_max_iter, norm_tol, d)
            for i in range(num_samples)
        ]
        cells = _parallel_cells(_alignment_cell, tasks, workers)
        vecs = [vec for vec, _ in cells]
        pert_hits = sum(hit for _, hit in cells)
        aligns = np.array([float(u @ v) for v in vecs])
        mean = np.zeros_like(u)
        for v in vecs:
            mean += v
        nu = mean / np.linalg.norm(mean)
        rows.append(
            RankReport(
                p=float(p),
                n_samples=num_samples,
                alignment=float(u @ nu),
                alignment_median=float(np.median(aligns)),
                alignment_std=float(np.std(aligns)),
                pert_fraction=pert_hits / num_samples,
                per_draw=aligns,
            )
        )
    return rows


def sweep_sample_count(M, model, p, sample_grid, seed, tol=1e-9,
                       eig_max_iter=None):
    """Alignment of the running average after N draws, at fixed p.

    Draws once up to max(sample_grid) and reports each prefix, so the
    rows share the same draw stream.
    """
    a = as_array(M)
    u = fix_sign(model.vector(1).copy())
    n_max = int(max(sample_grid))
    seeds = derive_seeds(seed, SALT_SAMPLE, n_max)
    vecs = []
    for i in range(n_max):
        cfg = SampleConfig(p=float(p), seed=int(seeds[i]), symmetric=True)
        s = draw_sample(a, cfg).s
        pair = top_k_eigen(s, 1, tol=tol, max_iter=eig_max_iter,
                           seed=int(seeds[i]), gap_check=False)[0]
        vecs.append(fix_sign(pair.vector))
    aligns = np.array([float(u @ v) for v in vecs])
    rows = []
    running = np.cumsum(np.stack(vecs), axis=0)
    for n_samples in sorted(int(s) for s in sample_grid):
        nu = running[n_samples - 1] / np.linalg.norm(running[n_samples - 1])
        rows.append(
            RankReport(
                p=float(p),
                n_samples=n_samples,
                alignment=float(u @ nu),
                alignment_median=float(np.median(aligns[:n_samples])),
                alignment_std=float(np.std(aligns[:n_samples])),
            )
        )
    return rows


def _subsampled_operator(op, graph, p, seed, variant):
    """One subsampled transition matrix, as a dense array.

    "damped": elementwise subsample of the dense damped matrix P (the
    matrix whose Perron vectors the averaging procedure consumes).
    "adjacency": subsample the raw adjacency first, then rebuild the
    damped operator on the surviving weighted edges.
    """
    if variant == "damped":
        dense = op.to_dense()
        cfg = SampleConfig(p=p, seed=seed, symmetric=False)
        return draw_sample(dense, cfg).s.to_dense()
    if variant == "adjacency":
        n = graph.n
        if graph.num_edges:
            adj = np.zeros((n, n))
            adj[graph.edges[:, 0], graph.edges[:, 1]] = 1.0
        else:
            adj = np.zeros((n, n))
        cfg = SampleConfig(p=p, seed=seed, symmetric=False)
        sub = draw_sample(adj, cfg).s.to_dense()
        row_sums = sub.sum(axis=1)
        dangling = row_sums == 0.0
        pg = np.where(
            dangling[:, None], 1.0 / n, sub / np.where(dangling, 1.0, row_sums)[:, None]
        )
        return op.c * pg + (1.0 - op.c) / n
    raise ValueError(f"unknown variant {variant!r}")


def sweep_pagerank(graph, c, p_grid, num_samples, seed, variant="damped",
                   tol=1e-10, max_iter=20000, norm_tol=1e-6,
                   compute_pert=True):
    """Spearman correlation between the true pagerank vector and both the
    averaged and single-draw subsampled Perron vectors, per p.

    pert_fraction uses the damping gap lower bound: the separation of the
    leading eigenvalue of P is at least 1 - c, so a draw counts as
    perturbative when ||S - P||_2 < (1 - c) / 2.  That column costs a
    dense spectral norm per draw; compute_pert=False skips it.
    """
    op = google_matrix(graph, c)
    p_dense = op.to_dense()
    # truth via the same dense solver the draws use, so the p = 1 draw is
    # bit-identical to it and ties rank identically
    truth = perron_vector(p_dense, tol=tol, max_iter=max_iter)
    rows = []
    for pi, p in enumerate(p_grid):
        seeds = derive_seeds(seed, SALT_SAMPLE, num_samples, lane=pi)
        rhos = np.empty(num_samples)
        acc = np.zeros(graph.n)
        pert_hits = 0
        for i in range(num_samples):
            sub = _subsampled_operator(op, graph, float(p), int(seeds[i]),
                                       variant)
            vec = perron_vector(sub, tol=tol, max_iter=max_iter)
            rhos[i] = spearman_rho(truth, vec)
            acc += vec
            if compute_pert and spectral_norm(
                sub - p_dense, tol=norm_tol
            ) < (1.0 - c) / 2.0:
                pert_hits += 1
        averaged = acc / num_samples
        averaged = averaged / averaged.sum()
        rows.append(
            RankReport(
                p=float(p),
                n_samples=num_samples,
                rho=spearman_rho(truth, averaged),
                rho_median=float(np.median(rhos)),
                rho_std=float(np.std(rhos)),
                pert_fraction=(pert_hits / num_samples) if compute_pert
                else None,
                variant=variant,
                per_draw=rhos,
            )
        )
    return rows


def generate_power_law_graph(n, out_degree=3, seed=0):
    """Directed preferential-attachment graph: node i >= 1 sends up to
    out_degree edges to earlier nodes chosen with probability
    proportional to in-degree + 1.  Node 0 is dangling."""
    if n < 1:
        raise EmptyGraph("graph needs at least one node")
    rng = stream(seed, split_index(SALT_GRAPH, 0))
    in_weight = np.ones(n)
    edges = []
    for i in range(1, n):
        m = min(out_degree, i)
        w = in_weight[:i] / in_weight[:i].sum()
        targets = rng.choice(i, size=m, replace=False, p=w)
        for t in targets:
            edges.append((i, int(t)))
            in_weight[t] += 1.0
    return WebGraph(n, edges)


def load_edge_list(path):
    """Read a 'src dst' edge list.

    '#' starts a comment; the directives '# nodes: N' and '# base: 0|1'
    declare the node count and the id base (default 0).  Node ids at or
    above the declared count raise NodeIdOverflow.
    """
    nodes = None
    base = 0
    edges = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            body = raw.strip()
            if not body:
                continue
            if body.startswith("#"):
                directive = body[1:].strip().lower().replace("=", ":")
                if directive.startswith("nodes:"):
                    try:
                        nodes = int(directive.split(":", 1)[1])
                    except ValueError:
                        raise ParseError("bad nodes directive",
                                         line=lineno) from None
                elif directive.startswith("base:"):
                    try:
                        base = int(directive.split(":", 1)[1])
                    except ValueError:
                        raise ParseError("bad base directive",
                                         line=lineno) from None
                    if base not in (0, 1):
                        raise ParseError("base must be 0 or 1", line=lineno)
                continue
            parts = body.split()
            if len(parts) != 2:
                raise ParseError("expected 'src dst'", line=lineno)
            try:
                src, dst = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError("non-integer node id", line=lineno) from None
            edges.append((src - base, dst - base))
    if edges:
        arr = np.asarray(edges, dtype=np.int64)
        if arr.min() < 0:
            raise NodeIdOverflow("node id below the declared base")
        inferred = int(arr.max()) + 1
    else:
        inferred = 0
    if nodes is None:
        nodes = inferred
        if nodes == 0:
            raise ParseError("empty edge list with no '# nodes:' directive")
    elif inferred > nodes:
        raise NodeIdOverflow(
            f"edge references node {inferred - 1} but only {nodes} declared"
        )
    return WebGraph(nodes, edges)


def write_edge_list(graph, path):
    with open(path, "w") as fh:
        fh.write(f"# nodes: {graph.n}\n")
        fh.write("# base: 0\n")
        for src, dst in graph.edges:
            fh.write(f"{src} {dst}\n")


def speedup_benchmark(M, p_grid, seed, reps=5, tol=1e-8):
    """Median wall-clock cost of (sample + subsampled eigensolve) against
    the full eigensolve, per p.

    Each measurement is single-threaded; two regimes appear, one where
    the eigensolve dominates and one where sampling does.
    """
    a = M if isinstance(M, DenseSymmetric) else DenseSymmetric(as_array(M))
    n = a.n

    def timed(fn, *args, **kwargs):
        t0 = time.perf_counter()
        out = fn(*args, **kwargs)
        return time.perf_counter() - t0, out

    t_full = np.median(
        [timed(top_k_eigen, a, 1, tol=tol, seed=seed, gap_check=False)[0]
         for _ in range(reps)]
    )
    rows = []
    for pi, p in enumerate(p_grid):
        t_samp, t_eig, nnz = [], [], []
        for rep in range(reps):
            cfg = SampleConfig(p=float(p), seed=seed + 7919 * (pi + 1) + rep,
                               symmetric=True)
            dt, draw = timed(draw_sample, a, cfg)
            t_samp.append(dt)
            nnz.append(draw.s.nnz / n**2)
            dt, _ = timed(top_k_eigen, draw.s, 1, tol=tol, seed=seed,
                          gap_check=False)
            t_eig.append(dt)
        ts, te = float(np.median(t_samp)), float(np.median(t_eig))
        rows.append(
            {
                "p": float(p),
                "t_sample": ts,
                "t_eig_sub": te,
                "t_eig_full": float(t_full),
                "ratio": (ts + te) / float(t_full),
                "nnz_frac": float(np.mean(nnz)),
                "regime": "eig" if te >= ts else "sampling",
            }
        )
    return rows
