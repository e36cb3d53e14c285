"""Best-of-(2Q+1)-sets match built on the set layer.

Since who serves first in a set does not affect who wins it, the sequence of
set winners is an i.i.d. coin with success theta_S; the match is a
negative-binomial race to Q+1 set wins, except that the deciding set may use
a different tie-breaker target (K1 instead of K0).  Every conditional
point-count moment is a sum of per-set moments, all computed with A opening
service (changing the opener flips which player serves more, but that level
of detail is not carried here — win probabilities are unaffected).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (BreakdownRow, PointCountDistribution, ScoreBreakdown,
                   _check_count, _check_prob)
from .sets import set_points_distribution, set_points_moments, set_win_prob

__all__ = ["MatchSpec", "SetScoreJPMF", "match_set_jpmf", "match_win_prob",
           "match_points_moments", "match_points_distribution", "match_breakdown"]


@dataclass(frozen=True)
class MatchSpec:
    """Match format: best of 2q+1 sets, set tie-breaker targets k0 / k1.

    ``k0`` applies to sets that cannot be the decider, ``k1`` to the (2q+1)-th
    set — the long-format decider (e.g. k1=10) is how several tours replaced
    the old advantage set.
    """

    k0: int = 7
    k1: int = 7
    q: int = 2

    def __post_init__(self):
        _check_count("k0", self.k0, minimum=2)
        _check_count("k1", self.k1, minimum=2)
        _check_count("q", self.q, minimum=1)

    @property
    def sets_to_win(self) -> int:
        return self.q + 1


@dataclass(frozen=True)
class SetScoreJPMF:
    """Joint PMF of the final (A sets, B sets), plus the transient grid.

    ``absorbing`` maps (a, b) with max(a,b) = q+1 to its probability;
    ``transient`` maps (a, b) with a,b <= q to the probability the score
    passes through that state.  Absorbing masses partition the sample space.
    """

    q: int
    absorbing: dict
    transient: dict

    def win_prob_first(self) -> float:
        return sum(m for (a, _), m in self.absorbing.items() if a == self.q + 1)

    def total_mass(self) -> float:
        return sum(self.absorbing.values())


def _theta_pair(pa, pb, spec: MatchSpec):
    """(theta for a non-deciding set, theta for the deciding set)."""
    return set_win_prob(pa, pb, spec.k0), set_win_prob(pa, pb, spec.k1)


def match_set_jpmf(pa: float, pb: float, spec: MatchSpec) -> SetScoreJPMF:
    """Exact joint PMF of the final set score.

    Transient states follow the binomial path-count C(a+b, a) theta^a (1-theta)^b;
    a match ends by winning set a+b+1 from (q, b) or (a, q), with the decider
    from (q, q) using k1.
    """
    pa = float(_check_prob("pa", pa))
    pb = float(_check_prob("pb", pb))
    theta0, theta1 = _theta_pair(pa, pb, spec)
    q = spec.q
    transient = {
        (a, b): math.comb(a + b, a) * theta0**a * (1.0 - theta0) ** b
        for a in range(q + 1)
        for b in range(q + 1)
    }
    absorbing = {}
    for b in range(q):
        absorbing[(q + 1, b)] = transient[(q, b)] * theta0
        absorbing[(b, q + 1)] = transient[(b, q)] * (1.0 - theta0)
    absorbing[(q + 1, q)] = transient[(q, q)] * theta1
    absorbing[(q, q + 1)] = transient[(q, q)] * (1.0 - theta1)
    return SetScoreJPMF(q=q, absorbing=absorbing, transient=transient)


def match_win_prob(pa, pb, spec: MatchSpec):
    """First player's probability of winning the match.

    Sum of the A-side absorbing masses:

        sum_{b<q} C(q+b, b) theta0^(q+1) (1-theta0)^b
          + C(2q, q) theta0^q (1-theta0)^q * theta1
    """
    theta0, theta1 = _theta_pair(pa, pb, spec)
    theta0 = np.asarray(theta0, dtype=float)
    q = spec.q
    out = math.comb(2 * q, q) * theta0**q * (1.0 - theta0) ** q * theta1
    for b in range(q):
        out = out + math.comb(q + b, b) * theta0 ** (q + 1) * (1.0 - theta0) ** b
    return float(out) if np.asarray(out).ndim == 0 else out


def match_points_moments(pa, pb, spec: MatchSpec):
    """(mean, variance) of the total points in the match.

    A final score (q+1, b) with b < q plays q+1+b sets, all with the k0
    tie-breaker; the full-length score plays 2q at k0 plus the k1 decider.
    Per-set moments add (sets are independent), and the mixture over the
    final score combines by the iterated expectation/variance rules.
    """
    theta0, theta1 = _theta_pair(pa, pb, spec)
    theta0 = np.asarray(theta0, dtype=float)
    mu0, var0 = set_points_moments(pa, pb, spec.k0)
    mu1, var1 = set_points_moments(pa, pb, spec.k1)
    q = spec.q
    mean = 0.0
    second = 0.0
    for b in range(q):
        prob = math.comb(q + b, b) * (
            theta0 ** (q + 1) * (1.0 - theta0) ** b
            + (1.0 - theta0) ** (q + 1) * theta0**b
        )
        m = (q + 1 + b) * mu0
        v = (q + 1 + b) * var0
        mean = mean + prob * m
        second = second + prob * (v + m**2)
    prob_full = math.comb(2 * q, q) * theta0**q * (1.0 - theta0) ** q
    m = 2 * q * mu0 + mu1
    v = 2 * q * var0 + var1
    mean = mean + prob_full * m
    second = second + prob_full * (v + m**2)
    var = second - mean**2
    if np.asarray(mean).ndim == 0:
        return float(mean), float(var)
    return mean, var


def match_breakdown(pa: float, pb: float, spec: MatchSpec) -> ScoreBreakdown:
    """Per-final-set-score summary of the match (rows by loser's set count)."""
    pa = float(_check_prob("pa", pa))
    pb = float(_check_prob("pb", pb))
    jpmf = match_set_jpmf(pa, pb, spec)
    mu0, var0 = set_points_moments(pa, pb, spec.k0)
    mu1, var1 = set_points_moments(pa, pb, spec.k1)
    q = spec.q
    rows = []
    for b in range(q + 1):
        if b < q:
            m = (q + 1 + b) * mu0
            v = (q + 1 + b) * var0
        else:
            m = 2 * q * mu0 + mu1
            v = 2 * q * var0 + var1
        rows.append(
            BreakdownRow(
                score=f"{q + 1}-{b}",
                loser_score=b,
                p_first_wins=jpmf.absorbing[(q + 1, b)],
                p_second_wins=jpmf.absorbing[(b, q + 1)],
                cond_mean=float(m),
                cond_var=float(v),
            )
        )
    mean, var = match_points_moments(pa, pb, spec)
    return ScoreBreakdown(
        rows=tuple(rows),
        win_prob=match_win_prob(pa, pb, spec),
        mean=mean,
        variance=var,
        label="match",
    )


def match_points_distribution(pa: float, pb: float, spec: MatchSpec,
                              n_max: int = 10_000) -> PointCountDistribution:
    """PMF of the number of points played in a match, truncated at ``n_max``.

    Conditions on the final set score, then convolves set-length marginals:
    the first ``2q`` sets use the ``k0`` tie-break law and a decider uses
    ``k1``.  Truncated moments agree with ``mean`` and ``variance`` up to
    tail mass.
    """
    pa = float(_check_prob("pa", pa))
    pb = float(_check_prob("pb", pb))
    n_max = _check_count("n_max", n_max, minimum=2)

    from .sets import _dense_pmf

    set0 = _dense_pmf(set_points_distribution(pa, pb, spec.k0, n_max), n_max)
    set1 = _dense_pmf(set_points_distribution(pa, pb, spec.k1, n_max), n_max)
    runs = [np.zeros(n_max + 1)]
    runs[0][0] = 1.0
    for _ in range(2 * spec.q):
        runs.append(np.convolve(runs[-1], set0)[: n_max + 1])

    total = np.zeros(n_max + 1)
    for (a, b), mass in match_set_jpmf(pa, pb, spec).absorbing.items():
        sets = a + b
        if sets == 2 * spec.q + 1:  # decider played under the k1 rule
            arr = np.convolve(runs[sets - 1], set1)[: n_max + 1]
        else:
            arr = runs[sets]
        total += mass * arr

    mean, var = match_points_moments(pa, pb, spec)
    covered = float(total.sum())
    return PointCountDistribution(
        support=tuple((n, float(m)) for n, m in enumerate(total) if m > 0.0),
        truncation_mass=max(0.0, 1.0 - covered),
        mean=float(mean),
        variance=float(var),
    )
