"""Reduced-resolvent eigenvector expansions and their error budgets.

For a model eigenpair (lambda_k, u_k) and a symmetric perturbation E, the
eigenvector v_k of M + E regauged so v_k^T u_k = 1 admits

    v_k = u_k - [sum_{m=0}^{j} (-1)^m Delta^m] R_k E u_k  + remainder,

with R_k the reduced resolvent of M at k and
Delta = R_k (E - gamma * Id), gamma = lambda_k(M + E) - lambda_k.  When
theta = 2 ||E||_2 / d_k < 1 the remainder is bounded by

    0.5 * theta**(j + 2) / (1 - theta),

so the truncated expansion is accurate to order j + 2 in ||E||.  This
module keeps everything matrix-free except where a dense assembly is the
point (oracle checks and the regularized vector); it targets the
moderate dimensions used for validation, not production estimation.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DuplicateEigenvalue, OutsidePerturbativeRegime
from .matrix_core import spectral_norm


class ReducedResolvent:
    """Matrix-free applicator of R_k = sum_{j != k} (lambda_j - lambda_k)^-1
    u_j u_j^T, including the implicit zero block of low-rank models.

    Outputs are re-orthogonalized against u_k, so R u_k = 0 holds to
    machine precision rather than only to the model's orthonormality
    tolerance.
    """

    def __init__(self, model, k):
        if not 1 <= k <= model.r:
            raise ValueError(f"k={k} outside stored range [1, {model.r}]")
        lam_k = model.eigenvalue(k)
        if model.has_implicit_zeros and lam_k == 0.0:
            raise DuplicateEigenvalue("lambda_k collides with the implicit "
                                      "zero block")
        diffs = model.eigenvalues - lam_k
        if np.any(diffs[np.arange(model.r) != k - 1] == 0.0):
            raise DuplicateEigenvalue("duplicate eigenvalue at index k")
        coeffs = np.zeros(model.r)
        mask = np.arange(model.r) != k - 1
        coeffs[mask] = 1.0 / diffs[mask]
        self.model = model
        self.k = k
        self.coeffs = coeffs
        self.zero_coeff = (-1.0 / lam_k) if model.has_implicit_zeros else 0.0
        self.d = model.separation(k)
        self.u_k = model.vector(k)

    @property
    def norm(self):
        return 1.0 / self.d

    def apply(self, x):
        u = self.model.eigenvectors
        proj = u.T @ x
        out = u @ (self.coeffs * proj)
        if self.zero_coeff:
            out = out + self.zero_coeff * (x - u @ proj)
        # exact orthogonality to u_k
        return out - self.u_k * (self.u_k @ out)

    def dense(self):
        u = self.model.eigenvectors
        r = (u * self.coeffs) @ u.T
        if self.zero_coeff:
            r = r + self.zero_coeff * (np.eye(self.model.n) - u @ u.T)
        return r


def reduced_resolvent(model, k):
    return ReducedResolvent(model, k)


def separation(model, k):
    """min_{j != k} |lambda_j - lambda_k| (implicit zeros included)."""
    return model.separation(k)


class DeltaOperator:
    """Delta = R (E - gamma * Id), applied matrix-free."""

    def __init__(self, resolvent, e, gamma):
        self.resolvent = resolvent
        self.e = e
        self.gamma = gamma

    def apply(self, x):
        return self.resolvent.apply(self.e @ x - self.gamma * x)

    def dense(self):
        n = self.e.shape[0]
        return self.resolvent.dense() @ (self.e - self.gamma * np.eye(n))


@dataclass
class PerturbationExpansion:
    """Truncated eigenvector expansion in the v^T u = 1 gauge."""

    order: int
    gamma: float
    corrected: np.ndarray
    error_budget: float
    op_norm_e: float
    theta: float
    delta_op: DeltaOperator = field(repr=False)
    normalization: str = "v@u=1"


def _budget(theta, order):
    return 0.5 * theta ** (order + 2) / (1.0 - theta)


def expand(model, k, e, lambda_s=None, order=0, op_norm_e=None):
    """Order-j corrected eigenvector u - [sum (-1)^m Delta^m] R E u.

    lambda_s is the k-th eigenvalue of the perturbed matrix; passing None
    substitutes the first-order proxy lambda_k + u^T E u (flagged by
    gamma, not by a separate field).  Raises OutsidePerturbativeRegime
    when 2 ||E|| / d >= 1, where the budget is undefined.
    """
    e = np.asarray(e, dtype=float)
    res = ReducedResolvent(model, k)
    u = res.u_k
    if op_norm_e is None:
        op_norm_e = spectral_norm(e)
    theta = 2.0 * op_norm_e / res.d
    if theta >= 1.0:
        raise OutsidePerturbativeRegime(
            f"2||E||/d = {theta:.3f} >= 1; expansion budget undefined"
        )
    if lambda_s is None:
        gamma = float(u @ (e @ u))
    else:
        gamma = float(lambda_s - model.eigenvalue(k))
    delta = DeltaOperator(res, e, gamma)
    w = res.apply(e @ u)
    acc = w.copy()
    term = w
    sign = 1.0
    for _ in range(order):
        term = delta.apply(term)
        sign = -sign
        acc += sign * term
    return PerturbationExpansion(
        order=order,
        gamma=gamma,
        corrected=u - acc,
        error_budget=_budget(theta, order),
        op_norm_e=float(op_norm_e),
        theta=float(theta),
        delta_op=delta,
    )


def second_order_vector(model, e, k=1):
    """u - REu + R(E - (u^T E u) Id) R E u: the order-||E||^2 expansion
    with the quadratic eigenvalue proxy in place of the exact shift."""
    exp = expand(model, k, e, lambda_s=None, order=1)
    return exp.corrected


def exact_eigenvector(model, k, e, gauge="ratio"):
    """Eigenvector of M + E matched to u_k, via a dense eigensolve.

    The eigenpair closest in angle to u_k is selected (sparse perturbations
    can reorder eigenvalues), then regauged: "ratio" rescales to
    v^T u = 1, "unit" returns the unit vector with v^T u >= 0.
    Returns (v, lambda) so callers can reuse the exact shift.
    """
    s = model.assemble() + np.asarray(e, dtype=float)
    vals, vecs = np.linalg.eigh(s)
    u = model.vector(k)
    overlaps = np.abs(vecs.T @ u)
    j = int(np.argmax(overlaps))
    v = vecs[:, j]
    lam = float(vals[j])
    inner = float(v @ u)
    if gauge == "ratio":
        if inner == 0.0:
            raise ZeroDivisionError("matched eigenvector orthogonal to u_k")
        return v / inner, lam
    if gauge == "unit":
        return (v if inner >= 0 else -v), lam
    raise ValueError(f"unknown gauge {gauge!r}")


def regularized_vector(model, k, e, lambda_s, eps):
    """The exact regauged eigenvector when (Id + Delta) is well
    conditioned, else the explicit second-order polynomial in Delta.

    Total function: returns the fallback u - REu + Delta R E u whenever
    ||(Id + Delta)^{-1}|| > 1/eps, including the singular case.  The
    conditioning test runs on the densely assembled operator.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    e = np.asarray(e, dtype=float)
    res = ReducedResolvent(model, k)
    gamma = float(lambda_s - model.eigenvalue(k))
    delta = DeltaOperator(res, e, gamma)
    n = model.n
    sigma_min = np.linalg.svd(np.eye(n) + delta.dense(), compute_uv=False)[-1]
    if sigma_min > 0.0 and 1.0 / sigma_min <= 1.0 / eps:
        v, _ = exact_eigenvector(model, k, e, gauge="ratio")
        return v
    u = res.u_k
    w = res.apply(e @ u)
    return u - w + delta.apply(w)
