"""Alternating-server subsystem: set tie-breaker, its tie-breaker, and the set.

Three nested layers share one mechanism — a race to a target with serve-split
binomial sums:

* STT: at (K-1, K-1) points the set tie-breaker continues in pairs of points
  (one serve each) until someone sweeps a pair; the pair count is geometric
  with success probability pA*qB + qA*pB.
* ST: first to K points, serve rotation ABBAABB...; the probability of any
  final score is a binomial-convolution mass over the A-serve/B-serve split,
  times the winner taking the final point.
* Set: first to six games with a margin of two (7-5 possible), games
  alternating servers; at 6-6 the ST decides.  The algebra is the ST's with
  points replaced by games, K by 6, and the serve split by the strict
  alternation.

Point-count moments condition on the final score.  Within an ST all score
durations are fixed or winner-independent, so its moments are exact; at set
level a game's length is treated as exchangeable with its winner, which is the
usual summary-decomposition convention (the exact-process variance differs in
the third significant figure — see the tests for a quantified comparison).
"""

from __future__ import annotations

import numpy as np

from .core import (
    BreakdownRow,
    NonTerminatingError,
    PointCountDistribution,
    ScoreBreakdown,
    _check_count,
    _check_prob,
    binomial_convolution_mass,
    first_server_on_point,
    first_server_serves_game,
    games_served_by_first_server,
    geometric_moments,
    serves_by_first_server,
)
from .game import game_points_moments, game_points_pmf, game_win_prob

__all__ = [
    "stt_win_prob",
    "stt_points_distribution",
    "st_win_prob",
    "st_points_distribution",
    "st_breakdown",
    "set_win_prob",
    "set_points_moments",
    "set_points_distribution",
    "set_breakdown",
]

_SET_TARGET = 6  # games needed to win a set outright (margin two, else 7-5 / 6-6)


def _decisive_pair_prob(pa, pb):
    """pA*qB + qA*pB: the per-pair resolution probability of the STT race."""
    pa = np.asarray(pa, dtype=float)
    pb = np.asarray(pb, dtype=float)
    return pa * (1.0 - pb) + (1.0 - pa) * pb


def _require_terminating(pa, pb) -> None:
    """Reject the degenerate pairs (0,0) and (1,1).

    For those the STT continues forever: every pair of points splits 1-1 with
    probability one.  Callers invoke this only on paths where the tie-breaker
    is reachable with positive probability.
    """
    eta = _decisive_pair_prob(pa, pb)
    if np.any(eta == 0.0):
        raise NonTerminatingError(
            "non-terminating tie-breaker: pA and pB both 0 or both 1 make every "
            "point pair split 1-1, so the two-point-advantage race never resolves"
        )


def stt_win_prob(pa, pb):
    """First player's probability of winning the set tie-breaker's tie-breaker.

    Pairs of points (one serve each) repeat until one player sweeps a pair;
    A sweeps with pA*qB, B with qA*pB, so conditioning on the decisive pair:

        theta = pA*qB / (pA*qB + qA*pB)

    which is ODDS(pA)/ (ODDS(pA) + ODDS(pB)) territory: only the odds ratio
    matters, and the serving order within pairs does not.
    """
    _check_prob("pa", pa)
    _check_prob("pb", pb)
    _require_terminating(pa, pb)
    pa = np.asarray(pa, dtype=float)
    pb = np.asarray(pb, dtype=float)
    out = pa * (1.0 - pb) / _decisive_pair_prob(pa, pb)
    return float(out) if out.ndim == 0 else out


def stt_points_distribution(pa: float, pb: float, n_max: int = 2000) -> PointCountDistribution:
    """PMF of the number of points in the STT, truncated at ``n_max``.

    The point count is twice a geometric variable with success probability
    pA*qB + qA*pB; mass sits on the even integers.
    """
    pa = float(_check_prob("pa", pa))
    pb = float(_check_prob("pb", pb))
    n_max = _check_count("n_max", n_max, minimum=2)
    _require_terminating(pa, pb)
    eta = pa * (1.0 - pb) + (1.0 - pa) * pb
    rho = 1.0 - eta
    support = []
    weight = eta
    for pairs in range(1, n_max // 2 + 1):
        support.append((2 * pairs, weight))
        weight *= rho
    g_mean, g_var = geometric_moments(eta)
    return PointCountDistribution(
        support=tuple(support),
        truncation_mass=rho ** (n_max // 2),
        mean=2.0 * g_mean,
        variance=4.0 * g_var,
    )


def _st_score_prob(win_on_a_serve, win_on_b_serve, k: int, h: int):
    """Probability one player takes the set tie-breaker K points to h.

    ``win_on_a_serve`` / ``win_on_b_serve`` are that player's per-point win
    probabilities when A (the tie-breaker's first server) serves and when B
    serves.  Of the first K+h-1 points the player must win K-1, split across
    the serve counts of the ABBA rotation, then take point K+h.
    """
    n = k + h - 1
    sa = serves_by_first_server(n)
    mass = binomial_convolution_mass(sa, win_on_a_serve, n - sa, win_on_b_serve, k - 1)
    last = win_on_a_serve if first_server_on_point(k + h) else win_on_b_serve
    return mass * last


def _st_tie_prob(pa, pb, k: int):
    """Probability the set tie-breaker reaches K-1 points all.

    The ABBA rotation splits the first 2(K-1) points evenly, so this is the
    convolution mass Pr{B(K-1, pA) + B(K-1, qB) = K-1}.
    """
    return binomial_convolution_mass(k - 1, pa, k - 1, np.subtract(1.0, pb), k - 1)


def st_win_prob(pa, pb, k: int):
    """First player's probability of winning a K-point set tie-breaker.

    Sums the direct final scores (K, h) for h = 0..K-2 and the (K-1, K-1) tie
    weighted by the STT, whose first server is whoever the rotation puts on
    point 2K-1:

        sum_h theta(K,h) + theta(K-1,K-1) * theta_STT

    Raises the non-terminating error only when the tie is actually reachable,
    i.e. for the degenerate pairs (0,0) and (1,1) — those walk to the tie with
    probability one.
    """
    _check_prob("pa", pa)
    _check_prob("pb", pb)
    k = _check_count("k", k, minimum=2)
    pa = np.asarray(pa, dtype=float)
    pb = np.asarray(pb, dtype=float)
    qb = 1.0 - pb
    head = 0.0
    for h in range(k - 1):
        head = head + _st_score_prob(pa, qb, k, h)
    tie = _st_tie_prob(pa, pb, k)
    if np.any((_decisive_pair_prob(pa, pb) == 0.0) & (tie > 0.0)):
        _require_terminating(pa, pb)
    if first_server_on_point(2 * k - 1):
        continuation = stt_win_prob(pa, pb)
    else:
        continuation = 1.0 - stt_win_prob(pb, pa)
    out = head + tie * continuation
    return float(out) if np.asarray(out).ndim == 0 else out


def _st_points_moments(pa, pb, k: int):
    """(mean, variance) of the ST point count, by conditioning on the final score.

    Scores (K,h) and (h,K) pin the count at K+h exactly; the tie branch costs
    2(K-1) points plus twice a geometric pair count.  Mean and variance then
    follow from the laws of total expectation and total variance — the
    variance inside every non-tie category is zero, so only the tie's
    geometric variance and the spread of the category means contribute.
    """
    pa = np.asarray(pa, dtype=float)
    pb = np.asarray(pb, dtype=float)
    qa, qb = 1.0 - pa, 1.0 - pb
    tie = _st_tie_prob(pa, pb, k)
    eta = _decisive_pair_prob(pa, pb)
    g_mean, g_var = geometric_moments(np.where(eta == 0.0, 1.0, eta))
    tie_mean = 2.0 * (k - 1) + 2.0 * g_mean
    tie_var = 4.0 * g_var
    mean = tie * tie_mean
    second = tie * tie_mean**2
    for h in range(k - 1):
        prob = _st_score_prob(pa, qb, k, h) + _st_score_prob(qa, pb, k, h)
        mean = mean + (k + h) * prob
        second = second + (k + h) ** 2 * prob
    var = second - mean**2 + tie * tie_var
    return mean, var


def st_points_moments(pa, pb, k: int):
    """Exact (mean, variance) of the number of points in a K-point set tie-breaker."""
    _check_prob("pa", pa)
    _check_prob("pb", pb)
    k = _check_count("k", k, minimum=2)
    if np.any((_decisive_pair_prob(pa, pb) == 0.0) & (np.asarray(_st_tie_prob(pa, pb, k)) > 0.0)):
        _require_terminating(pa, pb)
    mean, var = _st_points_moments(pa, pb, k)
    if np.asarray(mean).ndim == 0:
        return float(mean), float(var)
    return mean, var


def st_points_distribution(pa: float, pb: float, k: int, n_max: int = 2000) -> PointCountDistribution:
    """PMF of the ST point count, truncated at ``n_max``.

    Mass at n in [K, 2K-2] comes from the direct scores (K, n-K) and (n-K, K);
    mass at even n >= 2K is the tie probability times the geometric STT
    landing on pair (n - 2K + 2)/2.
    """
    pa = float(_check_prob("pa", pa))
    pb = float(_check_prob("pb", pb))
    k = _check_count("k", k, minimum=2)
    n_max = _check_count("n_max", n_max, minimum=2 * k - 2)
    qa, qb = 1.0 - pa, 1.0 - pb
    tie = _st_tie_prob(pa, pb, k)
    if tie > 0.0:
        _require_terminating(pa, pb)
    support = []
    for n in range(k, 2 * k - 1):
        h = n - k
        support.append((n, _st_score_prob(pa, qb, k, h) + _st_score_prob(qa, pb, k, h)))
    eta = pa * qb + qa * pb
    rho = 1.0 - eta
    pairs_kept = (n_max - (2 * k - 2)) // 2
    weight = tie * eta
    for pairs in range(1, pairs_kept + 1):
        support.append((2 * k - 2 + 2 * pairs, weight))
        weight *= rho
    residual = tie * rho**pairs_kept if tie > 0.0 else 0.0
    mean, var = _st_points_moments(pa, pb, k)
    return PointCountDistribution(
        support=tuple(support), truncation_mass=float(residual), mean=float(mean), variance=float(var)
    )


def st_breakdown(pa: float, pb: float, k: int) -> ScoreBreakdown:
    """Per-final-score summary of a K-point set tie-breaker."""
    pa = float(_check_prob("pa", pa))
    pb = float(_check_prob("pb", pb))
    k = _check_count("k", k, minimum=2)
    qa, qb = 1.0 - pa, 1.0 - pb
    tie = _st_tie_prob(pa, pb, k)
    if tie > 0.0:
        _require_terminating(pa, pb)
    rows = []
    for h in range(k - 1):
        rows.append(
            BreakdownRow(
                score=f"{k}-{h}",
                loser_score=h,
                p_first_wins=float(_st_score_prob(pa, qb, k, h)),
                p_second_wins=float(_st_score_prob(qa, pb, k, h)),
                cond_mean=float(k + h),
                cond_var=0.0,
            )
        )
    if tie > 0.0:
        theta_stt = stt_win_prob(pa, pb)
        eta = pa * qb + qa * pb
        g_mean, g_var = geometric_moments(eta)
        rows.append(
            BreakdownRow(
                score="TB",
                loser_score=None,
                p_first_wins=float(tie * theta_stt),
                p_second_wins=float(tie * (1.0 - theta_stt)),
                cond_mean=float(2 * (k - 1) + 2.0 * g_mean),
                cond_var=float(4.0 * g_var),
            )
        )
    mean, var = _st_points_moments(pa, pb, k)
    return ScoreBreakdown(
        rows=tuple(rows),
        win_prob=st_win_prob(pa, pb, k),
        mean=float(mean),
        variance=float(var),
        label="st",
    )


def _set_score_prob(win_odd_game, win_even_game, h: int):
    """Probability one player takes the set six games to h (h = 0..4).

    ``win_odd_game`` / ``win_even_game`` are that player's win probabilities
    in games served by A (odd games) and by B (even games).  Five of the
    first 5+h games must go to the player, split across the alternation,
    then game 6+h closes it out.
    """
    g = 5 + h
    ta = games_served_by_first_server(g)
    mass = binomial_convolution_mass(ta, win_odd_game, g - ta, win_even_game, 5)
    last = win_odd_game if first_server_serves_game(6 + h) else win_even_game
    return mass * last


def _set_game_probs(pa, pb):
    """A's win probability in A-served and B-served games."""
    return game_win_prob(pa), 1.0 - game_win_prob(pb)


def set_win_prob(pa, pb, k: int):
    """First player's probability of winning a set with a K-point tie-breaker.

    Direct scores 6-h (h = 0..4), the 7-5 finish after five games all, and the
    6-6 tie resolved by the ST:

        sum_h theta(6,h) + theta(7,5) + theta(6,6) * st_win_prob(pa, pb, k)
    """
    _check_prob("pa", pa)
    _check_prob("pb", pb)
    k = _check_count("k", k, minimum=2)
    wa, wb = _set_game_probs(pa, pb)
    head = 0.0
    for h in range(5):
        head = head + _set_score_prob(wa, wb, h)
    reach_55 = binomial_convolution_mass(5, wa, 5, wb, 5)
    p75 = reach_55 * wa * wb
    p66 = reach_55 * (wa * (1.0 - wb) + (1.0 - wa) * wb)
    if np.any((np.asarray(p66) > 0.0) & (_decisive_pair_prob(pa, pb) == 0.0)):
        _require_terminating(pa, pb)
    out = head + p75 + p66 * st_win_prob(pa, pb, k)
    return float(out) if np.asarray(out).ndim == 0 else out


def _set_games_moments(pa, pb, games: int):
    """(mean, variance) of the points in ``games`` alternating-server games."""
    mu_a, var_a = game_points_moments(pa)
    mu_b, var_b = game_points_moments(pb)
    ta = games_served_by_first_server(games)
    tb = games - ta
    return ta * mu_a + tb * mu_b, ta * var_a + tb * var_b


def set_points_moments(pa, pb, k: int):
    """(mean, variance) of the number of points in a set.

    Conditions on the final set score: a score with g games contributes the
    g-game serve-split moments; the 6-6 branch adds the ST moments on top of
    its twelve games.  Combination is by the iterated expectation/variance
    rules over the score distribution.
    """
    _check_prob("pa", pa)
    _check_prob("pb", pb)
    k = _check_count("k", k, minimum=2)
    pa = np.asarray(pa, dtype=float)
    pb = np.asarray(pb, dtype=float)
    wa, wb = _set_game_probs(pa, pb)
    reach_55 = binomial_convolution_mass(5, wa, 5, wb, 5)
    p66 = reach_55 * (wa * (1.0 - wb) + (1.0 - wa) * wb)
    if np.any((np.asarray(p66) > 0.0) & (_decisive_pair_prob(pa, pb) == 0.0)):
        _require_terminating(pa, pb)
    categories = []  # (probability, conditional mean, conditional variance)
    for h in range(5):
        prob = _set_score_prob(wa, wb, h) + _set_score_prob(1.0 - wa, 1.0 - wb, h)
        m, v = _set_games_moments(pa, pb, 6 + h)
        categories.append((prob, m, v))
    p75 = reach_55 * (wa * wb + (1.0 - wa) * (1.0 - wb))
    m12, v12 = _set_games_moments(pa, pb, 12)
    categories.append((p75, m12, v12))
    st_mean, st_var = _st_points_moments(pa, pb, k)
    categories.append((p66, m12 + st_mean, v12 + st_var))
    mean = sum(p * m for p, m, _ in categories)
    second = sum(p * (v + m**2) for p, m, v in categories)
    var = second - mean**2
    if np.asarray(mean).ndim == 0:
        return float(mean), float(var)
    return mean, var


def set_breakdown(pa: float, pb: float, k: int) -> ScoreBreakdown:
    """Per-final-score summary of a set: 6-0 .. 6-4, 7-5, and the 7-6 tie.

    The 7-6 row's conditional moments stack the ST on the twelve games that
    precede it; its probability splits between the players by the ST win
    probability.
    """
    pa = float(_check_prob("pa", pa))
    pb = float(_check_prob("pb", pb))
    k = _check_count("k", k, minimum=2)
    wa, wb = _set_game_probs(pa, pb)
    rows = []
    for h in range(5):
        m, v = _set_games_moments(pa, pb, 6 + h)
        rows.append(
            BreakdownRow(
                score=f"6-{h}",
                loser_score=h,
                p_first_wins=float(_set_score_prob(wa, wb, h)),
                p_second_wins=float(_set_score_prob(1.0 - wa, 1.0 - wb, h)),
                cond_mean=float(m),
                cond_var=float(v),
            )
        )
    reach_55 = binomial_convolution_mass(5, wa, 5, wb, 5)
    m12, v12 = _set_games_moments(pa, pb, 12)
    rows.append(
        BreakdownRow(
            score="7-5",
            loser_score=5,
            p_first_wins=float(reach_55 * wa * wb),
            p_second_wins=float(reach_55 * (1.0 - wa) * (1.0 - wb)),
            cond_mean=float(m12),
            cond_var=float(v12),
        )
    )
    p66 = reach_55 * (wa * (1.0 - wb) + (1.0 - wa) * wb)
    if p66 > 0.0:
        _require_terminating(pa, pb)
        theta_st = st_win_prob(pa, pb, k)
        st_mean, st_var = _st_points_moments(pa, pb, k)
        rows.append(
            BreakdownRow(
                score="7-6",
                loser_score=6,
                p_first_wins=float(p66 * theta_st),
                p_second_wins=float(p66 * (1.0 - theta_st)),
                cond_mean=float(m12 + st_mean),
                cond_var=float(v12 + st_var),
            )
        )
    mean, var = set_points_moments(pa, pb, k)
    return ScoreBreakdown(
        rows=tuple(rows),
        win_prob=set_win_prob(pa, pb, k),
        mean=mean,
        variance=var,
        label="set",
    )


def _dense_pmf(dist: PointCountDistribution, n_max: int) -> np.ndarray:
    """Support list -> dense array over 0..n_max (excess mass left truncated)."""
    arr = np.zeros(n_max + 1)
    for n, mass in dist.support:
        if n <= n_max:
            arr[n] = mass
    return arr


def set_points_distribution(pa: float, pb: float, k: int, n_max: int = 2000) -> PointCountDistribution:
    """PMF of the number of points played in a set, truncated at ``n_max``.

    The law mirrors the moment decomposition: condition on the final game
    score, then convolve the per-server game-length marginals over the fixed
    serve split (A serves the odd games), appending the tie-break length on
    the 7-6 row.  Its truncated moments therefore reproduce ``mean`` and
    ``variance`` exactly up to tail mass.
    """
    pa = float(_check_prob("pa", pa))
    pb = float(_check_prob("pb", pb))
    k = _check_count("k", k, minimum=2)
    n_max = _check_count("n_max", n_max, minimum=2)

    game_a = _dense_pmf(game_points_pmf(pa), n_max)
    game_b = _dense_pmf(game_points_pmf(pb), n_max)
    # runs[g]: length pmf of the first g games, serve order A, B, A, ...
    runs = [np.zeros(n_max + 1)]
    runs[0][0] = 1.0
    for g in range(1, 2 * _SET_TARGET + 1):
        nxt = np.convolve(runs[-1], game_a if g % 2 == 1 else game_b)
        runs.append(nxt[: n_max + 1])

    total = np.zeros(n_max + 1)
    for row in set_breakdown(pa, pb, k).rows:
        mass = row.p_first_wins + row.p_second_wins
        games = 2 * _SET_TARGET if row.loser_score >= 5 else _SET_TARGET + row.loser_score
        arr = runs[games]
        if row.loser_score == _SET_TARGET:  # 7-6: stack the tie-break
            st_arr = _dense_pmf(st_points_distribution(pa, pb, k, n_max), n_max)
            arr = np.convolve(arr, st_arr)[: n_max + 1]
        total += mass * arr

    mean, var = set_points_moments(pa, pb, k)
    covered = float(total.sum())
    return PointCountDistribution(
        support=tuple((n, float(m)) for n, m in enumerate(total) if m > 0.0),
        truncation_mass=max(0.0, 1.0 - covered),
        mean=float(mean),
        variance=float(var),
    )
