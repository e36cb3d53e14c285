"""Shared numeric and combinatorial primitives.

Everything downstream (game, set, match, best-of systems) reduces to a handful
of ingredients collected here:

* serve-sequence bookkeeping for the ABBAABBAA... point rotation and the
  simple A,B,A,B,... game alternation,
* the probability mass / tail of a sum of two independent binomials with
  different success probabilities (serve-split sums),
* moments of the geometric distribution (two-point and two-game tie-breaker
  cycles are geometric in the number of cycles).

All probability arguments accept floats or numpy arrays and broadcast; this is
what makes grid sweeps and quadrature cheap without a second code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NonTerminatingError",
    "QuadratureError",
    "PointCountDistribution",
    "BreakdownRow",
    "ScoreBreakdown",
    "SystemSpec",
    "odds",
    "serves_by_first_server",
    "first_server_on_point",
    "games_served_by_first_server",
    "first_server_serves_game",
    "binomial_convolution_mass",
    "binomial_convolution_tail",
    "geometric_moments",
]


class NonTerminatingError(ValueError):
    """Raised when a requested configuration never terminates.

    The two-point-advantage tie-breaker makes no progress when each pair of
    points is won 1-1 with probability one, i.e. when the decisive-pair
    probability pA*qB + qA*pB is exactly zero (both players win or both lose
    every serve).  Any quantity conditioned on reaching such a tie-breaker
    with positive probability is undefined.
    """


class QuadratureError(RuntimeError):
    """Quadrature failed to converge to the requested tolerance.

    Carries the best available estimate and its error bound so callers can
    still inspect the value that failed the check.
    """

    def __init__(self, message: str, estimate: float, error_estimate: float):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


def _check_prob(name: str, p) -> np.ndarray | float:
    """Validate that ``p`` is a probability (scalar or array), return as-is."""
    arr = np.asarray(p, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {p!r}")
    return p


def _check_count(name: str, n: int, minimum: int = 1) -> int:
    if not isinstance(n, (int, np.integer)):
        raise ValueError(f"{name} must be an integer, got {n!r}")
    if n < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {n}")
    return int(n)


def odds(p):
    """Odds p/(1-p) of an event with probability ``p``.

    Returns ``inf`` at p=1 (that is the documented flag value, not an error).
    """
    _check_prob("p", p)
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(p == 1.0, np.inf, p / np.where(p == 1.0, 1.0, 1.0 - p))
    return float(out) if out.ndim == 0 else out


def serves_by_first_server(n: int) -> int:
    """Number of points served by the tie-breaker's first server among points 1..n.

    The rotation is one serve, then two-serve blocks alternating: A BB AA BB AA...
    so A serves point j exactly when j mod 4 is 0 or 1.  Closed form below is
    the count of such j in 1..n.
    """
    _check_count("n", n)
    full, rem = divmod(n, 4)
    # each full ABBA block contributes 2 A-serves (positions 4k+1 and 4k+4)
    return 2 * full + (1 if rem >= 1 else 0)


def first_server_on_point(n: int) -> bool:
    """True when the tie-breaker's first server serves point ``n`` (ABBA rotation)."""
    _check_count("n", n)
    return n % 4 in (0, 1)


def games_served_by_first_server(g: int) -> int:
    """Number of games served by the set's first server among games 1..g.

    Games alternate servers starting with A, so this is ceil(g/2) = floor((g+1)/2).
    """
    _check_count("g", g)
    return (g + 1) // 2


def first_server_serves_game(g: int) -> bool:
    """True when the set's first server serves game ``g`` (odd games)."""
    _check_count("g", g)
    return g % 2 == 1


def _powers(x, n: int) -> list:
    """[x**0, x**1, ..., x**n] built by repeated multiplication (broadcast-safe)."""
    x = np.asarray(x, dtype=float)
    out = [np.ones_like(x)]
    for _ in range(n):
        out.append(out[-1] * x)
    return out


def binomial_convolution_mass(n1: int, p1, n2: int, p2, k: int):
    """Pr{X + Y = k} for independent X ~ Binomial(n1, p1), Y ~ Binomial(n2, p2).

    This is the serve-split sum: of the k successes, j fall on the n1 trials of
    the first kind and k-j on the n2 trials of the second kind.  Terms with
    j > n1 or k-j > n2 are zero-probability configurations and are skipped
    (binomial-coefficient convention C(n, k) = 0 for k > n).
    """
    n1 = _check_count("n1", n1, minimum=0)
    n2 = _check_count("n2", n2, minimum=0)
    k = _check_count("k", k, minimum=0)
    _check_prob("p1", p1)
    _check_prob("p2", p2)
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    shape = np.broadcast_shapes(p1.shape, p2.shape)
    if k > n1 + n2:
        out = np.zeros(shape)
        return float(out) if out.ndim == 0 else out
    jlo, jhi = max(0, k - n2), min(n1, k)
    pw1, qw1 = _powers(p1, n1), _powers(1.0 - p1, n1)
    pw2, qw2 = _powers(p2, n2), _powers(1.0 - p2, n2)
    total = np.zeros(shape)
    for j in range(jlo, jhi + 1):
        coeff = math.comb(n1, j) * math.comb(n2, k - j)
        total = total + coeff * pw1[j] * qw1[n1 - j] * pw2[k - j] * qw2[n2 - (k - j)]
    return float(total) if total.ndim == 0 else total


def binomial_convolution_tail(n1: int, p1, n2: int, p2, k: int):
    """Pr{X + Y >= k} for the same pair of independent binomials.

    Computed as sum_j Pr{X=j} * Pr{Y >= k-j}, with the survival function of Y
    accumulated once; avoids the O(k^2) term-by-term double sum.
    """
    n1 = _check_count("n1", n1, minimum=0)
    n2 = _check_count("n2", n2, minimum=0)
    _check_prob("p1", p1)
    _check_prob("p2", p2)
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    shape = np.broadcast_shapes(p1.shape, p2.shape)
    if k <= 0:
        out = np.ones(shape)
        return float(out) if out.ndim == 0 else out
    if k > n1 + n2:
        out = np.zeros(shape)
        return float(out) if out.ndim == 0 else out
    pw1, qw1 = _powers(p1, n1), _powers(1.0 - p1, n1)
    pw2, qw2 = _powers(p2, n2), _powers(1.0 - p2, n2)
    # survival[i] = Pr{Y >= i}; build from the top so each entry is a fresh array
    survival = [np.zeros(shape)] * (n2 + 2)
    acc = np.zeros(shape)
    for i in range(n2, -1, -1):
        acc = acc + math.comb(n2, i) * pw2[i] * qw2[n2 - i]
        survival[i] = acc
    total = np.zeros(shape)
    for j in range(n1 + 1):
        need = k - j
        if need > n2:
            continue
        sy = survival[max(need, 0)] if need > 0 else np.ones(shape)
        total = total + math.comb(n1, j) * pw1[j] * qw1[n1 - j] * sy
    out = np.minimum(total, 1.0)
    return float(out) if out.ndim == 0 else out


def geometric_moments(eta):
    """(mean, variance) of a geometric random variable on {1, 2, ...}.

    For success probability eta: mean 1/eta, variance (1-eta)/eta**2.
    eta = 0 is rejected — the waiting time is infinite (non-terminating process).
    """
    arr = np.asarray(eta, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr <= 0.0) or np.any(arr > 1.0):
        raise NonTerminatingError(
            f"geometric success probability must lie in (0, 1], got {eta!r}"
        )
    mean = 1.0 / arr
    var = (1.0 - arr) / arr**2
    if arr.ndim == 0:
        return float(mean), float(var)
    return mean, var


@dataclass(frozen=True)
class PointCountDistribution:
    """A (possibly truncated) PMF over the number of points played.

    ``support`` holds (n, mass) pairs up to the truncation point;
    ``truncation_mass`` is the exact residual beyond it (geometric tails make
    this computable in closed form), never silently dropped.  ``mean`` and
    ``variance`` are the exact closed-form moments of the *untruncated*
    distribution, not truncated-sum estimates.
    """

    support: tuple = ()
    truncation_mass: float = 0.0
    mean: float = 0.0
    variance: float = 0.0

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def total_mass(self) -> float:
        return sum(m for _, m in self.support) + self.truncation_mass

    def truncated_moments(self) -> tuple[float, float]:
        """Mean/variance of the truncated part only (test/diagnostic helper)."""
        m0 = sum(m for _, m in self.support)
        if m0 <= 0.0:
            return math.nan, math.nan
        m1 = sum(n * m for n, m in self.support) / m0
        m2 = sum(n * n * m for n, m in self.support) / m0
        return m1, m2 - m1 * m1


@dataclass(frozen=True)
class BreakdownRow:
    """One final-score row of a summary table.

    ``score`` is a human-readable label like ``"4-0"`` or ``"TB"``;
    ``loser_score`` the losing side's count for sortable access.  The
    conditional moments are of the number of points played given that the
    match ends on this row (either player winning).
    """

    score: str
    loser_score: int | None
    p_first_wins: float
    p_second_wins: float
    cond_mean: float
    cond_var: float

    @property
    def p_total(self) -> float:
        return self.p_first_wins + self.p_second_wins


@dataclass(frozen=True)
class ScoreBreakdown:
    """Per-final-score rows plus the overall line of a summary table."""

    rows: tuple
    win_prob: float
    mean: float
    variance: float
    label: str = ""
    extra: dict = field(default_factory=dict)

    def row(self, score: str) -> BreakdownRow:
        for r in self.rows:
            if r.score == score:
                return r
        raise KeyError(score)

    def probability_total(self) -> float:
        return sum(r.p_total for r in self.rows)


_TIEBREAKS = ("sg", "sttg", "sttp")

_SYSTEM_KINDS = ("gt", "game", "stt", "st", "set", "match", "bofk", "bog")
_PAIR_KINDS = frozenset({"stt", "st", "set", "match", "bog"})
_SYSTEM_FIELDS = {
    "gt": frozenset(),
    "game": frozenset(),
    "stt": frozenset(),
    "st": frozenset({"k"}),
    "set": frozenset({"k"}),
    "match": frozenset({"k0", "k1", "q"}),
    "bofk": frozenset({"l"}),
    "bog": frozenset({"l", "tiebreak"}),
}


@dataclass(frozen=True)
class SystemSpec:
    """Names one scoring system together with its structural knobs.

    Kinds: ``gt`` (win-by-two from deuce), ``game``, ``stt`` (two-point-cycle
    tie-breaker), ``st`` (K-point set tie-breaker), ``set`` (six-game set with
    an ST(k) at 6-6), ``match`` (best of 2q+1 sets with tie-breaker targets
    k0/k1), ``bofk`` (raw race to l+1 points out of 2l+1), ``bog`` (best of
    2l+1 games under an l-l tie rule).

    Fields that do not apply to ``kind`` must stay ``None``.  Omitted ones
    fall back to the standard format — k=7, match 7/7/2, tiebreak "sttg" —
    except ``l``, which has no natural default and is required.
    """

    kind: str
    k: int | None = None
    k0: int | None = None
    k1: int | None = None
    q: int | None = None
    l: int | None = None
    tiebreak: str | None = None

    def __post_init__(self):
        if self.kind not in _SYSTEM_KINDS:
            raise ValueError(
                f"unknown system kind {self.kind!r}; expected one of {_SYSTEM_KINDS}"
            )
        allowed = _SYSTEM_FIELDS[self.kind]
        for name in ("k", "k0", "k1", "q", "l", "tiebreak"):
            if getattr(self, name) is not None and name not in allowed:
                raise ValueError(f"{name} does not apply to system {self.kind!r}")
        if self.kind in ("st", "set") and self.k is None:
            object.__setattr__(self, "k", 7)
        if self.kind == "match":
            if self.k0 is None:
                object.__setattr__(self, "k0", 7)
            if self.k1 is None:
                object.__setattr__(self, "k1", 7)
            if self.q is None:
                object.__setattr__(self, "q", 2)
        if self.kind == "bog" and self.tiebreak is None:
            object.__setattr__(self, "tiebreak", "sttg")
        if self.kind in ("bofk", "bog") and self.l is None:
            raise ValueError(f"l is required for system {self.kind!r}")
        if self.k is not None:
            _check_count("k", self.k, minimum=2)
        if self.k0 is not None:
            _check_count("k0", self.k0, minimum=2)
        if self.k1 is not None:
            _check_count("k1", self.k1, minimum=2)
        if self.q is not None:
            _check_count("q", self.q, minimum=1)
        if self.l is not None:
            _check_count("l", self.l, minimum=1)
        if self.tiebreak is not None and self.tiebreak not in _TIEBREAKS:
            raise ValueError(
                f"tiebreak must be one of {_TIEBREAKS}, got {self.tiebreak!r}"
            )

    @property
    def takes_pair(self) -> bool:
        """Whether the system is parameterized by (pA, pB) rather than one p."""
        return self.kind in _PAIR_KINDS
