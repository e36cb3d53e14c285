"""Prior-weighted efficiency of scoring systems against the better-player oracle.

A scoring system is a decision rule for "which player wins more points": the
oracle always picks the better player, a coin flip never does better than
chance, and every real system lands in between.  Efficiency integrates the
system's edge over a beta prior on the serve probabilities —

    one parameter:  Eff = int_0^1/2 [1-2θ(p)] dΠ + int_1/2^1 [2θ(p)-1] dΠ
    two parameters: Eff = int_{pA<pB} [1-2θ] dΠ + int_{pA>pB} [2θ-1] dΠ

— so the oracle scores 1 and the coin scores 0.  The integrand is kinked on
p = 1/2 (resp. the diagonal), so each smooth piece is integrated separately:
composite Gauss–Legendre panels in 1-D, and a tensor product over each
triangle mapped onto the unit square (pA = x, pB = t*x and its mirror, with
Jacobian x) in 2-D.  The error estimate is the change under panel doubling,
and the reported value is the doubled-panel one.  Node evaluation order is
fixed and summation uses numpy's pairwise reduction, so results are
reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import QuadratureError, SystemSpec

__all__ = [
    "BetaPrior",
    "EfficiencyReport",
    "efficiency_one_param",
    "efficiency_two_param",
]


@dataclass(frozen=True)
class BetaPrior:
    """Beta(alpha, beta) prior over a serve probability."""

    alpha: float
    beta: float

    def __post_init__(self):
        a, b = self.alpha, self.beta
        if not (isinstance(a, (int, float)) and isinstance(b, (int, float))):
            raise ValueError(f"beta parameters must be numbers, got {a!r}, {b!r}")
        if not (a > 0.0 and b > 0.0) or math.isinf(a) or math.isinf(b):
            raise ValueError(f"beta parameters must be positive and finite, got ({a}, {b})")
        object.__setattr__(self, "alpha", float(a))
        object.__setattr__(self, "beta", float(b))

    @property
    def endpoint_singular(self) -> bool:
        """Whether the density blows up at 0 or 1 (α < 1 or β < 1)."""
        return self.alpha < 1.0 or self.beta < 1.0

    def pdf(self, p):
        p = np.asarray(p, dtype=float)
        log_norm = (
            math.lgamma(self.alpha + self.beta)
            - math.lgamma(self.alpha)
            - math.lgamma(self.beta)
        )
        with np.errstate(divide="ignore"):
            la = 0.0 if self.alpha == 1.0 else (self.alpha - 1.0) * np.log(p)
            lb = 0.0 if self.beta == 1.0 else (self.beta - 1.0) * np.log1p(-p)
        return np.exp(log_norm + la + lb)


@dataclass(frozen=True)
class EfficiencyReport:
    """An efficiency value with its provenance and quadrature error estimate."""

    system: SystemSpec | None
    prior: object
    value: float
    quadrature_error_estimate: float


def _gauss_panels(panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss–Legendre nodes/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _axis_nodes(panels: int, order: int, soften: bool) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on (0, 1), optionally under u = sin^2(pi t / 2).

    The substitution's derivative vanishes at both endpoints, which turns the
    integrable edge singularities of beta densities with α < 1 or β < 1 into
    bounded integrands that plain panels handle at tolerance.
    """
    t, w = _gauss_panels(panels, order)
    if not soften:
        return t, w
    u = np.sin(0.5 * math.pi * t) ** 2
    du = 0.5 * math.pi * np.sin(math.pi * t)
    return u, w * du


def _eff_one(curve, prior: BetaPrior, panels: int, order: int) -> float:
    nodes, weights = _axis_nodes(panels, order, prior.endpoint_singular)
    total = 0.0
    for lo, hi, sign in ((0.0, 0.5, -1.0), (0.5, 1.0, 1.0)):
        p = lo + (hi - lo) * nodes
        theta = np.asarray(curve(p), dtype=float)
        edge = sign * (2.0 * theta - 1.0)
        total += (hi - lo) * float(np.sum(weights * edge * prior.pdf(p)))
    return total


def _eff_two_parts(
    surface, prior_a: BetaPrior, prior_b: BetaPrior, panels: int, order: int
) -> tuple[float, float]:
    """(lower-triangle, upper-triangle) contributions to the 2-D efficiency."""
    soften = prior_a.endpoint_singular or prior_b.endpoint_singular
    nodes, weights = _axis_nodes(panels, order, soften)
    x = nodes[:, None]  # outer coordinate: the larger of the two probabilities
    t = nodes[None, :]  # inner fraction: smaller = t * larger
    w2 = weights[:, None] * weights[None, :]
    jac = x

    # upper triangle pA > pB: pA = x, pB = t x
    theta = np.asarray(surface(np.broadcast_to(x, w2.shape), t * x), dtype=float)
    dens = prior_a.pdf(x) * prior_b.pdf(t * x)
    upper = float(np.sum(w2 * (2.0 * theta - 1.0) * dens * jac))

    # lower triangle pA < pB: pB = x, pA = t x
    theta = np.asarray(surface(t * x, np.broadcast_to(x, w2.shape)), dtype=float)
    dens = prior_a.pdf(t * x) * prior_b.pdf(x)
    lower = float(np.sum(w2 * (1.0 - 2.0 * theta) * dens * jac))
    return lower, upper


def efficiency_one_param(
    curve,
    prior: BetaPrior,
    *,
    system: SystemSpec | None = None,
    panels: int = 16,
    order: int = 20,
    tol: float = 1e-5,
) -> EfficiencyReport:
    """Efficiency of a one-parameter system ``p -> theta(p)`` under ``prior``.

    ``curve`` must accept numpy arrays of probabilities.  The value reported
    is the doubled-panel evaluation; the error estimate is its distance from
    the single-panel one, and exceeding ``tol`` raises the quadrature error
    (carrying the best estimate).
    """
    coarse = _eff_one(curve, prior, panels, order)
    fine = _eff_one(curve, prior, 2 * panels, order)
    err = abs(fine - coarse)
    if err > tol:
        raise QuadratureError(
            f"efficiency quadrature did not converge: |refined - coarse| = "
            f"{err:.3e} > tol {tol:.1e}",
            estimate=fine,
            error_estimate=err,
        )
    return EfficiencyReport(system, prior, fine, err)


def efficiency_two_param(
    surface,
    priors: tuple[BetaPrior, BetaPrior],
    *,
    system: SystemSpec | None = None,
    panels: int = 16,
    order: int = 20,
    tol: float = 5e-4,
) -> EfficiencyReport:
    """Efficiency of a two-parameter system ``(pA, pB) -> theta`` under
    the product prior ``priors[0] x priors[1]``.

    ``surface`` must broadcast over numpy arrays.  Reporting and convergence
    follow the one-parameter rule, with the looser 2-D tolerance.
    """
    prior_a, prior_b = priors
    lo_c, up_c = _eff_two_parts(surface, prior_a, prior_b, panels, order)
    lo_f, up_f = _eff_two_parts(surface, prior_a, prior_b, 2 * panels, order)
    coarse = lo_c + up_c
    fine = lo_f + up_f
    err = abs(fine - coarse)
    if err > tol:
        raise QuadratureError(
            f"efficiency quadrature did not converge: |refined - coarse| = "
            f"{err:.3e} > tol {tol:.1e}",
            estimate=fine,
            error_estimate=err,
        )
    return EfficiencyReport(system, (prior_a, prior_b), fine, err)
