"""Incoherence functionals, sparsity exponents, and the spectral-norm
error bounds they control.

A SpectralModel is a ground-truth eigendecomposition.  It may store fewer
pairs than the ambient dimension, in which case the remaining spectrum is
an implicit zero eigenvalue of multiplicity n - r; stored eigenvalues must
then be nonzero.  Separation distances and reduced resolvents account for
that implicit block.

The incoherence of a model with sparsity exponents alpha is

    mu = sum_i |lambda_i| * n**alpha_i * ||u_i||_inf^2

and the two competing spectral-norm bounds on the sampling residual
E = S - M are

    max-entry bound:    4 * ||M||_inf * sqrt(n / p)
    incoherence bound:  2 * mu / sqrt(p * n**alpha_min)

The second is an asymptotic statement; at fixed n we report it together
with a validity flag that proxies its hypotheses by finite-n ratio checks.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DuplicateEigenvalue, ShapeMismatch
from .matrix_core import as_array, norms

SUPPORT_ZERO_TOL = 1e-12   # |u_i(j)| below this counts as a structural zero
ORTHO_TOL = 1e-10


def support_size(u, tol=SUPPORT_ZERO_TOL):
    return int(np.count_nonzero(np.abs(u) >= tol))


class SpectralModel:
    """Eigendecomposition (lambda_i, u_i) with optional sparsity exponents.

    eigenvalues: strictly decreasing, length r <= n
    eigenvectors: n x r with orthonormal columns
    alpha: sparsity exponents in [0, 1], Card(u_i) <= ceil(n**alpha_i)
    mu_bound: optional a-priori incoherence constant
    """

    def __init__(self, eigenvalues, eigenvectors, alpha=None, mu_bound=None):
        lam = np.asarray(eigenvalues, dtype=float)
        u = np.asarray(eigenvectors, dtype=float)
        if u.ndim != 2 or lam.ndim != 1 or u.shape[1] != lam.shape[0]:
            raise ShapeMismatch("eigenvectors must be n x r with r eigenvalues")
        n, r = u.shape
        if r > n:
            raise ShapeMismatch("more eigenpairs than dimensions")
        if np.any(np.diff(lam) >= 0):
            raise DuplicateEigenvalue(
                "eigenvalues must be strictly decreasing (all distinct)"
            )
        if r < n and np.any(lam == 0.0):
            raise DuplicateEigenvalue(
                "a stored zero eigenvalue duplicates the implicit zero block"
            )
        gram = u.T @ u
        if np.max(np.abs(gram - np.eye(r))) > ORTHO_TOL:
            raise ValueError("eigenvector columns are not orthonormal")
        if alpha is not None:
            alpha = np.asarray(alpha, dtype=float)
            if alpha.shape != lam.shape:
                raise ShapeMismatch("alpha must pair with the eigenvalues")
            if np.any((alpha < 0.0) | (alpha > 1.0)):
                raise ValueError("alpha entries must lie in [0, 1]")
            cards = np.array([support_size(u[:, i]) for i in range(r)])
            caps = np.ceil(n ** alpha.astype(float))
            if np.any(cards > caps):
                raise ValueError("eigenvector support exceeds n**alpha_i")
        lam.flags.writeable = False
        u.flags.writeable = False
        self.eigenvalues = lam
        self.eigenvectors = u
        self.alpha = alpha
        self.mu_bound = mu_bound
        self.n = n
        self.r = r

    @property
    def has_implicit_zeros(self):
        return self.r < self.n

    def eigenvalue(self, k):
        """k-th eigenvalue, 1-based, largest first."""
        if not 1 <= k <= self.r:
            raise ValueError(f"k={k} outside stored range [1, {self.r}]")
        return float(self.eigenvalues[k - 1])

    def vector(self, k):
        if not 1 <= k <= self.r:
            raise ValueError(f"k={k} outside stored range [1, {self.r}]")
        return self.eigenvectors[:, k - 1]

    def separation(self, k):
        """Distance from lambda_k to the nearest other eigenvalue,
        including the implicit zero block when present."""
        if self.r == 1 and not self.has_implicit_zeros:
            raise ValueError("separation undefined for a 1 x 1 spectrum")
        lam_k = self.eigenvalue(k)
        gaps = np.abs(self.eigenvalues - lam_k)
        gaps = gaps[gaps > 0.0]
        d = float(np.min(gaps)) if gaps.size else math.inf
        if self.has_implicit_zeros:
            d = min(d, abs(lam_k))
        return d

    def assemble(self):
        """Dense matrix sum_i lambda_i u_i u_i^T, exactly symmetric."""
        m = (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T
        return 0.5 * (m + m.T)

    def with_alpha(self):
        """Copy carrying fitted sparsity exponents."""
        if self.alpha is not None:
            return self
        return SpectralModel(
            self.eigenvalues,
            self.eigenvectors,
            alpha=fit_alpha(self),
            mu_bound=self.mu_bound,
        )


class RectSpectralModel:
    """SVD ground truth sigma_i, u_i in R^n, v_i in R^m for an n x m
    matrix, with exponent lists alpha (left) and beta (right)."""

    def __init__(self, singular_values, left, right, alpha=None, beta=None):
        sig = np.asarray(singular_values, dtype=float)
        u = np.asarray(left, dtype=float)
        v = np.asarray(right, dtype=float)
        if u.ndim != 2 or v.ndim != 2 or sig.ndim != 1:
            raise ShapeMismatch("need n x r left, m x r right, r values")
        if u.shape[1] != sig.shape[0] or v.shape[1] != sig.shape[0]:
            raise ShapeMismatch("factor widths must match the value count")
        if np.any(sig <= 0.0) or np.any(np.diff(sig) >= 0):
            raise DuplicateEigenvalue(
                "singular values must be strictly decreasing and positive"
            )
        for name, w in (("left", u), ("right", v)):
            gram = w.T @ w
            if np.max(np.abs(gram - np.eye(w.shape[1]))) > ORTHO_TOL:
                raise ValueError(f"{name} singular vectors are not orthonormal")
        self.singular_values = sig
        self.left = u
        self.right = v
        self.n = u.shape[0]
        self.m = v.shape[0]
        self.r = sig.shape[0]
        self.rho = self.m / self.n
        self.alpha = None if alpha is None else np.asarray(alpha, dtype=float)
        self.beta = None if beta is None else np.asarray(beta, dtype=float)
        for name, expo, dim, w in (
            ("alpha", self.alpha, self.n, u),
            ("beta", self.beta, self.m, v),
        ):
            if expo is None:
                continue
            if expo.shape != sig.shape:
                raise ShapeMismatch(f"{name} must pair with the values")
            if np.any((expo < 0.0) | (expo > 1.0)):
                raise ValueError(f"{name} entries must lie in [0, 1]")
            cards = np.array([support_size(w[:, i]) for i in range(self.r)])
            if np.any(cards > np.ceil(dim**expo)):
                raise ValueError(f"support exceeds dim**{name}")

    def assemble(self):
        return (self.left * self.singular_values) @ self.right.T

    def with_exponents(self):
        if self.alpha is not None and self.beta is not None:
            return self
        return RectSpectralModel(
            self.singular_values,
            self.left,
            self.right,
            alpha=fit_alpha(self.left, self.n),
            beta=fit_alpha(self.right, self.m),
        )


def fit_alpha(model_or_vectors, n=None):
    """Smallest exponents with Card(u_i) <= n**alpha_i, clamped to [0, 1].

    Components below 1e-12 in magnitude count as structural zeros.
    """
    if isinstance(model_or_vectors, SpectralModel):
        u = model_or_vectors.eigenvectors
        n = model_or_vectors.n
    else:
        u = np.asarray(model_or_vectors, dtype=float)
        if n is None:
            n = u.shape[0]
    if n < 2:
        raise ValueError("exponents need n >= 2")
    out = np.empty(u.shape[1])
    for i in range(u.shape[1]):
        card = support_size(u[:, i])
        out[i] = 0.0 if card <= 1 else math.log(card) / math.log(n)
    return np.clip(out, 0.0, 1.0)


def incoherence(model):
    """mu = sum_i |lambda_i| * n**alpha_i * ||u_i||_inf^2."""
    if model.alpha is None:
        raise ValueError("model carries no sparsity exponents; call "
                         "with_alpha() first")
    inf_sq = np.max(np.abs(model.eigenvectors), axis=0) ** 2
    return float(
        np.sum(np.abs(model.eigenvalues) * model.n**model.alpha * inf_sq)
    )


def incoherence_rect(model):
    """mu = sum_i sigma_i * n**(a_i/2) ||u_i||_inf * m**(b_i/2) ||v_i||_inf."""
    if model.alpha is None or model.beta is None:
        raise ValueError("model carries no exponents; call with_exponents()")
    li = np.max(np.abs(model.left), axis=0)
    ri = np.max(np.abs(model.right), axis=0)
    return float(
        np.sum(
            model.singular_values
            * model.n ** (model.alpha / 2.0)
            * li
            * model.m ** (model.beta / 2.0)
            * ri
        )
    )


def max_entry_bound(M, p):
    """4 * ||M||_inf * sqrt(n / p): the residual norm bound that only uses
    the largest entry of M (no incoherence information)."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    n = tuple(M.shape)[0] if hasattr(M, "shape") else as_array(M).shape[0]
    return 4.0 * norms(M)["entrywise_max"] * math.sqrt(n / p)


@dataclass(frozen=True)
class BoundReport:
    """An asymptotic bound value plus finite-n validity diagnostics.

    ratio is the finite-n stand-in for the vanishing-sequence hypothesis
    (alpha_min * log n)^4 / (p * n**alpha_min) -> 0; valid requires it
    below the configured threshold and alpha_min above the floor
    (log n)**((delta - 3) / 4).
    """

    value: float
    valid: bool
    ratio: float
    alpha_min: float
    alpha_floor: float


def incoherence_bound(model, p, ratio_threshold=0.1, delta=1.0):
    """2 * mu * (p * n**alpha_min)**(-1/2) with validity diagnostics."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    model = model.with_alpha()
    mu = incoherence(model)
    a_min = float(np.min(model.alpha))
    n = model.n
    value = 2.0 * mu / math.sqrt(p * n**a_min)
    ratio = (a_min * math.log(n)) ** 4 / (p * n**a_min)
    floor = math.log(n) ** ((delta - 3.0) / 4.0)
    return BoundReport(
        value=value,
        valid=bool(ratio < ratio_threshold and a_min > floor),
        ratio=ratio,
        alpha_min=a_min,
        alpha_floor=floor,
    )


def incoherence_bound_rect(model, p, ratio_threshold=0.1, delta=1.0):
    """2 * mu / sqrt(p * n**(alpha_min/2) * m**(beta_min/2)) with the same
    finite-n diagnostics, evaluated on the effective dimension product."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    model = model.with_exponents()
    mu = incoherence_rect(model)
    a_min = float(np.min(model.alpha))
    b_min = float(np.min(model.beta))
    eff = model.n ** (a_min / 2.0) * model.m ** (b_min / 2.0)
    value = 2.0 * mu / math.sqrt(p * eff)
    log_dim = math.log(min(model.n, model.m))
    ratio = (min(a_min, b_min) * log_dim) ** 4 / (p * eff)
    floor = log_dim ** ((delta - 3.0) / 4.0)
    return BoundReport(
        value=value,
        valid=bool(ratio < ratio_threshold and min(a_min, b_min) > floor),
        ratio=ratio,
        alpha_min=min(a_min, b_min),
        alpha_floor=floor,
    )


@dataclass(frozen=True)
class Admissibility:
    ok: bool
    margin: float
    bound: float
    separation: float


def perturbation_admissible(model, p, k=1, **bound_kwargs):
    """Is the incoherence bound below half the separation distance of
    lambda_k?  Strict inequality; margin = d_k/2 - bound."""
    report = incoherence_bound(model, p, **bound_kwargs)
    d = model.separation(k)
    margin = d / 2.0 - report.value
    return Admissibility(
        ok=bool(report.value < d / 2.0),
        margin=float(margin),
        bound=report.value,
        separation=d,
    )


def spectral_model_from_dense(M, rank_tol=1e-10):
    """Ground-truth model of a dense symmetric matrix via a full
    eigendecomposition; eigenvalues below rank_tol * |lambda|_max are
    folded into the implicit zero block."""
    a = as_array(M)
    vals, vecs = np.linalg.eigh(a)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    scale = np.max(np.abs(vals)) if len(vals) else 0.0
    keep = np.abs(vals) > rank_tol * scale
    if not np.all(keep):
        vals, vecs = vals[keep], vecs[:, keep]
    return SpectralModel(vals, vecs).with_alpha()
