"""Simulation oracle: replays every scoring system point by point.

The generator is a counter-based SplitMix64.  Draw ``j`` of replication ``r``
under master seed ``s`` is::

    mix64(mix64(s + (r+1)*GOLDEN) + (j+1)*GOLDEN)

so every uniform is a pure function of (seed, replication, draw index).
Batching, vectorization width, or splitting replications across workers
cannot reorder or change a single draw, which is what makes runs bit-identical
across platforms and run shapes.  Replications that hit the safety cap are
counted and excluded from the point-count moments — never silently folded in.

Accumulation uses numpy's pairwise summation over the fixed replication
order, so summaries are deterministic as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SystemSpec, _check_count, _check_prob

__all__ = ["SimConfig", "SimSummary", "simulate"]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_2 = np.uint64(0x94D049BB133111EB)
_U53 = 1.0 / float(1 << 53)

_SEED_MASK = 0xFFFFFFFFFFFFFFFF


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 output mix (Steele–Lea–Flood), vectorized on uint64."""
    z = (z ^ (z >> np.uint64(30))) * _MIX_1
    z = (z ^ (z >> np.uint64(27))) * _MIX_2
    return z ^ (z >> np.uint64(31))


def _rep_streams(seed: int, replications: int) -> np.ndarray:
    """Per-replication stream keys: mix64(seed + (r+1)*GOLDEN)."""
    rep = np.arange(1, replications + 1, dtype=np.uint64)
    return _mix64(np.uint64(seed & _SEED_MASK) + rep * _GOLDEN)


def _draw(streams: np.ndarray, counters: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Next uniform in [0,1) for each replication in ``idx``; advances counters."""
    counters[idx] += np.uint64(1)
    out = _mix64(streams[idx] + counters[idx] * _GOLDEN)
    return (out >> np.uint64(11)).astype(np.float64) * _U53


def _serves_first_abba(n):
    """True where point ``n`` (1-based) is served by the opener under ABBA."""
    return (n % 4) <= 1


@dataclass(frozen=True)
class SimConfig:
    """One simulation request.

    ``params`` is a single probability for one-server systems (gt, game,
    bofk) and a (pA, pB) pair for alternating-serve systems.  ``seed`` is
    reduced mod 2**64.  ``max_points_per_replication`` is the safety cap for
    configurations that random-walk forever (e.g. the two-point tie-breaker
    at pA = pB = 1).
    """

    system: SystemSpec
    params: object
    replications: int
    seed: int
    max_points_per_replication: int = 100_000

    def __post_init__(self):
        if not isinstance(self.system, SystemSpec):
            raise ValueError(f"system must be a SystemSpec, got {self.system!r}")
        object.__setattr__(
            self, "replications", _check_count("replications", self.replications)
        )
        object.__setattr__(
            self,
            "max_points_per_replication",
            _check_count(
                "max_points_per_replication",
                self.max_points_per_replication,
                minimum=100,
            ),
        )
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise ValueError(f"seed must be an integer, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed) & _SEED_MASK)
        if self.system.takes_pair:
            try:
                pa, pb = self.params
            except (TypeError, ValueError):
                raise ValueError(
                    f"system {self.system.kind!r} takes a (pA, pB) pair, "
                    f"got params {self.params!r}"
                ) from None
            _check_prob("pA", float(pa))
            _check_prob("pB", float(pb))
            object.__setattr__(self, "params", (float(pa), float(pb)))
        else:
            if isinstance(self.params, (tuple, list)):
                raise ValueError(
                    f"system {self.system.kind!r} takes a single serve "
                    f"probability, got params {self.params!r}"
                )
            _check_prob("p", float(self.params))
            object.__setattr__(self, "params", float(self.params))


@dataclass(frozen=True)
class SimSummary:
    """Summary of one simulation run.

    Standard errors: binomial for the win rate, s/sqrt(n) for the mean, and
    the asymptotic sqrt((m4 - s^4)/n)/(2s) for the standard deviation.  All
    statistics are over completed replications only; when every replication
    was capped they are NaN and ``capped_replications`` tells the story.
    """

    win_rate_A: float
    win_rate_se: float
    mean_points: float
    mean_points_se: float
    std_points: float
    std_points_se: float
    capped_replications: int


@dataclass
class _RepOutcomes:
    """Raw per-replication results (internal; feeds summaries and tests)."""

    points: np.ndarray
    winner_a: np.ndarray
    capped: np.ndarray
    score_a: np.ndarray | None = None
    score_b: np.ndarray | None = None


def _new_outcomes(n: int, scores: bool = False) -> _RepOutcomes:
    out = _RepOutcomes(
        points=np.zeros(n, dtype=np.int64),
        winner_a=np.zeros(n, dtype=bool),
        capped=np.zeros(n, dtype=bool),
    )
    if scores:
        out.score_a = np.zeros(n, dtype=np.int32)
        out.score_b = np.zeros(n, dtype=np.int32)
    return out


def _run_gt(p, streams, counters, cap):
    n = streams.size
    out = _new_outcomes(n)
    diff = np.zeros(n, dtype=np.int32)
    idx = np.arange(n)
    while idx.size:
        u = _draw(streams, counters, idx)
        diff[idx] += np.where(u < p, 1, -1).astype(np.int32)
        out.points[idx] += 1
        d = diff[idx]
        won = np.abs(d) >= 2
        full = (out.points[idx] >= cap) & ~won
        fin = won | full
        if fin.any():
            f = idx[fin]
            out.winner_a[f] = d[fin] >= 2
            out.capped[f] = full[fin]
            idx = idx[~fin]
    return out


def _run_game(p, streams, counters, cap):
    n = streams.size
    out = _new_outcomes(n)
    a = np.zeros(n, dtype=np.int32)
    b = np.zeros(n, dtype=np.int32)
    idx = np.arange(n)
    while idx.size:
        u = _draw(streams, counters, idx)
        w = u < p
        a[idx] += w
        b[idx] += ~w
        out.points[idx] += 1
        ai, bi = a[idx], b[idx]
        won = ((ai >= 4) | (bi >= 4)) & (np.abs(ai - bi) >= 2)
        full = (out.points[idx] >= cap) & ~won
        fin = won | full
        if fin.any():
            f = idx[fin]
            out.winner_a[f] = ai[fin] > bi[fin]
            out.capped[f] = full[fin]
            idx = idx[~fin]
    return out


def _run_bofk(p, l, streams, counters, cap):
    n = streams.size
    out = _new_outcomes(n)
    target = l + 1
    a = np.zeros(n, dtype=np.int32)
    b = np.zeros(n, dtype=np.int32)
    idx = np.arange(n)
    while idx.size:
        u = _draw(streams, counters, idx)
        w = u < p
        a[idx] += w
        b[idx] += ~w
        out.points[idx] += 1
        ai, bi = a[idx], b[idx]
        won = (ai >= target) | (bi >= target)
        full = (out.points[idx] >= cap) & ~won
        fin = won | full
        if fin.any():
            f = idx[fin]
            out.winner_a[f] = ai[fin] >= target
            out.capped[f] = full[fin]
            idx = idx[~fin]
    return out


def _run_stt(pa, pb, streams, counters, cap):
    n = streams.size
    out = _new_outcomes(n)
    diff = np.zeros(n, dtype=np.int32)
    idx = np.arange(n)
    while idx.size:
        server_a = _serves_first_abba(out.points[idx] + 1)
        pwin = np.where(server_a, pa, 1.0 - pb)
        u = _draw(streams, counters, idx)
        diff[idx] += np.where(u < pwin, 1, -1).astype(np.int32)
        out.points[idx] += 1
        d = diff[idx]
        won = np.abs(d) >= 2
        full = (out.points[idx] >= cap) & ~won
        fin = won | full
        if fin.any():
            f = idx[fin]
            out.winner_a[f] = d[fin] >= 2
            out.capped[f] = full[fin]
            idx = idx[~fin]
    return out


def _run_st(pa, pb, k, streams, counters, cap):
    n = streams.size
    out = _new_outcomes(n, scores=True)
    a = np.zeros(n, dtype=np.int32)
    b = np.zeros(n, dtype=np.int32)
    idx = np.arange(n)
    while idx.size:
        server_a = _serves_first_abba(out.points[idx] + 1)
        pwin = np.where(server_a, pa, 1.0 - pb)
        u = _draw(streams, counters, idx)
        w = u < pwin
        a[idx] += w
        b[idx] += ~w
        out.points[idx] += 1
        ai, bi = a[idx], b[idx]
        won = ((ai >= k) | (bi >= k)) & (np.abs(ai - bi) >= 2)
        full = (out.points[idx] >= cap) & ~won
        fin = won | full
        if fin.any():
            f = idx[fin]
            out.winner_a[f] = ai[fin] > bi[fin]
            out.capped[f] = full[fin]
            out.score_a[f] = ai[fin]
            out.score_b[f] = bi[fin]
            idx = idx[~fin]
    return out


def _run_set(pa, pb, k, streams, counters, cap):
    """One set: alternating service games from A, ST(k) at six games all."""
    n = streams.size
    out = _new_outcomes(n, scores=True)
    ga = np.zeros(n, dtype=np.int32)
    gb = np.zeros(n, dtype=np.int32)
    x = np.zeros(n, dtype=np.int32)  # points in the current game
    y = np.zeros(n, dtype=np.int32)
    ta = np.zeros(n, dtype=np.int32)  # points in the tie-breaker
    tb = np.zeros(n, dtype=np.int32)
    in_tb = np.zeros(n, dtype=bool)
    idx = np.arange(n)
    while idx.size:
        itb = in_tb[idx]
        server_a = np.where(
            itb,
            _serves_first_abba(ta[idx] + tb[idx] + 1),
            ((ga[idx] + gb[idx]) % 2) == 0,
        )
        u = _draw(streams, counters, idx)
        w = u < np.where(server_a, pa, 1.0 - pb)
        out.points[idx] += 1

        pos = np.arange(idx.size)
        finished = np.zeros(idx.size, dtype=bool)
        winner = np.zeros(idx.size, dtype=bool)

        gpos = pos[~itb]
        if gpos.size:
            gidx = idx[~itb]
            wg = w[~itb]
            x[gidx] += wg
            y[gidx] += ~wg
            xa, yb = x[gidx], y[gidx]
            gdone = ((xa >= 4) | (yb >= 4)) & (np.abs(xa - yb) >= 2)
            if gdone.any():
                gd = gidx[gdone]
                gp = gpos[gdone]
                aw = xa[gdone] > yb[gdone]
                ga[gd] += aw
                gb[gd] += ~aw
                x[gd] = 0
                y[gd] = 0
                gaa, gbb = ga[gd], gb[gd]
                sdone = ((gaa >= 6) | (gbb >= 6)) & (np.abs(gaa - gbb) >= 2)
                in_tb[gd[(gaa == 6) & (gbb == 6)]] = True
                fp = gp[sdone]
                finished[fp] = True
                winner[fp] = (gaa > gbb)[sdone]

        tpos = pos[itb]
        if tpos.size:
            tidx = idx[itb]
            wt = w[itb]
            ta[tidx] += wt
            tb[tidx] += ~wt
            taa, tbb = ta[tidx], tb[tidx]
            tdone = ((taa >= k) | (tbb >= k)) & (np.abs(taa - tbb) >= 2)
            if tdone.any():
                a_won = (taa > tbb)[tdone]
                ga[tidx[tdone]] += a_won
                gb[tidx[tdone]] += ~a_won
                fp = tpos[tdone]
                finished[fp] = True
                winner[fp] = a_won

        full = (out.points[idx] >= cap) & ~finished
        fin = finished | full
        if fin.any():
            f = idx[fin]
            out.winner_a[f] = winner[fin]
            out.capped[f] = full[fin]
            out.score_a[f] = ga[f]
            out.score_b[f] = gb[f]
            idx = idx[~fin]
    return out


def _run_match(pa, pb, k0, k1, q, streams, counters, cap):
    """Best of 2q+1 sets; every set opens with A serving; decider uses k1."""
    n = streams.size
    out = _new_outcomes(n, scores=True)
    sa = np.zeros(n, dtype=np.int32)
    sb = np.zeros(n, dtype=np.int32)
    ga = np.zeros(n, dtype=np.int32)
    gb = np.zeros(n, dtype=np.int32)
    x = np.zeros(n, dtype=np.int32)
    y = np.zeros(n, dtype=np.int32)
    ta = np.zeros(n, dtype=np.int32)
    tb = np.zeros(n, dtype=np.int32)
    in_tb = np.zeros(n, dtype=bool)
    idx = np.arange(n)

    def absorb_set(rep, p_at, a_won, finished, winner):
        sa[rep] += a_won
        sb[rep] += ~a_won
        ga[rep] = 0
        gb[rep] = 0
        x[rep] = 0
        y[rep] = 0
        ta[rep] = 0
        tb[rep] = 0
        in_tb[rep] = False
        over = (sa[rep] > q) | (sb[rep] > q)
        fp = p_at[over]
        finished[fp] = True
        winner[fp] = a_won[over]

    while idx.size:
        itb = in_tb[idx]
        server_a = np.where(
            itb,
            _serves_first_abba(ta[idx] + tb[idx] + 1),
            ((ga[idx] + gb[idx]) % 2) == 0,
        )
        u = _draw(streams, counters, idx)
        w = u < np.where(server_a, pa, 1.0 - pb)
        out.points[idx] += 1

        pos = np.arange(idx.size)
        finished = np.zeros(idx.size, dtype=bool)
        winner = np.zeros(idx.size, dtype=bool)

        gpos = pos[~itb]
        if gpos.size:
            gidx = idx[~itb]
            wg = w[~itb]
            x[gidx] += wg
            y[gidx] += ~wg
            xa, yb = x[gidx], y[gidx]
            gdone = ((xa >= 4) | (yb >= 4)) & (np.abs(xa - yb) >= 2)
            if gdone.any():
                gd = gidx[gdone]
                gp = gpos[gdone]
                aw = xa[gdone] > yb[gdone]
                ga[gd] += aw
                gb[gd] += ~aw
                x[gd] = 0
                y[gd] = 0
                gaa, gbb = ga[gd], gb[gd]
                sdone = ((gaa >= 6) | (gbb >= 6)) & (np.abs(gaa - gbb) >= 2)
                in_tb[gd[(gaa == 6) & (gbb == 6)]] = True
                if sdone.any():
                    absorb_set(
                        gd[sdone], gp[sdone], (gaa > gbb)[sdone], finished, winner
                    )

        tpos = pos[itb]
        if tpos.size:
            tidx = idx[itb]
            wt = w[itb]
            ta[tidx] += wt
            tb[tidx] += ~wt
            taa, tbb = ta[tidx], tb[tidx]
            kv = np.where((sa[tidx] == q) & (sb[tidx] == q), k1, k0)
            tdone = ((taa >= kv) | (tbb >= kv)) & (np.abs(taa - tbb) >= 2)
            if tdone.any():
                absorb_set(
                    tidx[tdone], tpos[tdone], (taa > tbb)[tdone], finished, winner
                )

        full = (out.points[idx] >= cap) & ~finished
        fin = finished | full
        if fin.any():
            f = idx[fin]
            out.winner_a[f] = winner[fin]
            out.capped[f] = full[fin]
            out.score_a[f] = sa[f]
            out.score_b[f] = sb[f]
            idx = idx[~fin]
    return out


def _run_bog(pa, pb, l, tiebreak, streams, counters, cap):
    """Best of 2l+1 service games; the l-l tie follows ``tiebreak``.

    sg plays one game on a coin-flipped serve (the coin consumes a draw but
    is not a point); sttg keeps alternating service games until one player
    takes two in a row; sttp abandons games for a fresh ABBA win-by-two
    points race.
    """
    n = streams.size
    out = _new_outcomes(n, scores=True)
    target = l + 1
    ga = np.zeros(n, dtype=np.int32)
    gb = np.zeros(n, dtype=np.int32)
    x = np.zeros(n, dtype=np.int32)
    y = np.zeros(n, dtype=np.int32)
    in_tie = np.zeros(n, dtype=bool)
    tdiff = np.zeros(n, dtype=np.int32)  # game (sttg) or point (sttp) lead
    tpts = np.zeros(n, dtype=np.int32)  # points inside an sttp tie
    tie_server_a = np.zeros(n, dtype=bool)  # sg's coin result
    idx = np.arange(n)
    while idx.size:
        itie = in_tie[idx]
        base_server = ((ga[idx] + gb[idx]) % 2) == 0
        if tiebreak == "sg":
            server_a = np.where(itie, tie_server_a[idx], base_server)
        elif tiebreak == "sttg":
            server_a = base_server
        else:
            server_a = np.where(itie, _serves_first_abba(tpts[idx] + 1), base_server)
        u = _draw(streams, counters, idx)
        w = u < np.where(server_a, pa, 1.0 - pb)
        out.points[idx] += 1

        pos = np.arange(idx.size)
        finished = np.zeros(idx.size, dtype=bool)
        winner = np.zeros(idx.size, dtype=bool)

        pmode = itie if tiebreak == "sttp" else np.zeros(idx.size, dtype=bool)
        ppos = pos[pmode]
        if ppos.size:
            pidx = idx[pmode]
            wp = w[pmode]
            tpts[pidx] += 1
            tdiff[pidx] += np.where(wp, 1, -1).astype(np.int32)
            dd = tdiff[pidx]
            pdone = np.abs(dd) >= 2
            finished[ppos[pdone]] = True
            winner[ppos[pdone]] = dd[pdone] >= 2

        gpos = pos[~pmode]
        if gpos.size:
            gidx = idx[~pmode]
            wg = w[~pmode]
            x[gidx] += wg
            y[gidx] += ~wg
            xa, yb = x[gidx], y[gidx]
            gdone = ((xa >= 4) | (yb >= 4)) & (np.abs(xa - yb) >= 2)
            if gdone.any():
                gd = gidx[gdone]
                gp = gpos[gdone]
                aw = xa[gdone] > yb[gdone]
                ga[gd] += aw
                gb[gd] += ~aw
                x[gd] = 0
                y[gd] = 0
                tie_now = in_tie[gd]
                if tiebreak == "sg" and tie_now.any():
                    fp = gp[tie_now]
                    finished[fp] = True
                    winner[fp] = aw[tie_now]
                elif tiebreak == "sttg" and tie_now.any():
                    tg = gd[tie_now]
                    tdiff[tg] += np.where(aw[tie_now], 1, -1).astype(np.int32)
                    dd = tdiff[tg]
                    gover = np.abs(dd) >= 2
                    fp = gp[tie_now][gover]
                    finished[fp] = True
                    winner[fp] = dd[gover] >= 2
                reg = ~tie_now
                if reg.any():
                    rd = gd[reg]
                    gaa, gbb = ga[rd], gb[rd]
                    mdone = (gaa >= target) | (gbb >= target)
                    fp = gp[reg][mdone]
                    finished[fp] = True
                    winner[fp] = (gaa >= target)[mdone]
                    entry = (gaa == l) & (gbb == l)
                    if entry.any():
                        ent = rd[entry]
                        in_tie[ent] = True
                        if tiebreak == "sg":
                            coin = _draw(streams, counters, ent)
                            tie_server_a[ent] = coin < 0.5

        full = (out.points[idx] >= cap) & ~finished
        fin = finished | full
        if fin.any():
            f = idx[fin]
            out.winner_a[f] = winner[fin]
            out.capped[f] = full[fin]
            out.score_a[f] = ga[f]
            out.score_b[f] = gb[f]
            idx = idx[~fin]
    return out


def _simulate_outcomes(config: SimConfig) -> _RepOutcomes:
    """Run the replications and return raw per-replication arrays."""
    sysspec = config.system
    streams = _rep_streams(config.seed, config.replications)
    counters = np.zeros(config.replications, dtype=np.uint64)
    cap = config.max_points_per_replication
    kind = sysspec.kind
    if kind == "gt":
        return _run_gt(config.params, streams, counters, cap)
    if kind == "game":
        return _run_game(config.params, streams, counters, cap)
    if kind == "bofk":
        return _run_bofk(config.params, sysspec.l, streams, counters, cap)
    pa, pb = config.params
    if kind == "stt":
        return _run_stt(pa, pb, streams, counters, cap)
    if kind == "st":
        return _run_st(pa, pb, sysspec.k, streams, counters, cap)
    if kind == "set":
        return _run_set(pa, pb, sysspec.k, streams, counters, cap)
    if kind == "match":
        return _run_match(
            pa, pb, sysspec.k0, sysspec.k1, sysspec.q, streams, counters, cap
        )
    return _run_bog(pa, pb, sysspec.l, sysspec.tiebreak, streams, counters, cap)


def _summarize(out: _RepOutcomes) -> SimSummary:
    ok = ~out.capped
    n = int(ok.sum())
    capped = out.capped.size - n
    nan = float("nan")
    if n == 0:
        return SimSummary(nan, nan, nan, nan, nan, nan, capped)
    w = float((out.winner_a & ok).sum()) / n
    se_w = math.sqrt(w * (1.0 - w) / n)
    pts = out.points[ok].astype(np.float64)
    mean = float(pts.mean())
    if n < 2:
        return SimSummary(w, se_w, mean, nan, nan, nan, capped)
    var = float(pts.var(ddof=1))
    std = math.sqrt(var)
    se_mean = std / math.sqrt(n)
    if std > 0.0:
        m4 = float(np.mean((pts - mean) ** 4))
        se_std = math.sqrt(max(m4 - var * var, 0.0) / n) / (2.0 * std)
    else:
        se_std = 0.0
    return SimSummary(w, se_w, mean, se_mean, std, se_std, capped)


def simulate(config: SimConfig) -> SimSummary:
    """Simulate ``config.replications`` independent plays of the system.

    Deterministic given (seed, replications, system, params): rerunning the
    same config reproduces the summary bit for bit.
    """
    return _summarize(_simulate_outcomes(config))


def _score_table(out: _RepOutcomes) -> dict:
    """Conditional point-count stats by (winner, final score).

    Returns {(side, (score_winner, score_loser)): (count, mean, variance,
    fourth central moment)} over completed replications — the simulation
    counterpart of a per-row summary table, with enough to form standard
    errors for conditional means and variances.
    """
    if out.score_a is None:
        raise ValueError("this system records no final-score categories")
    ok = ~out.capped
    pts = out.points.astype(np.float64)
    table = {}
    enc = (
        out.winner_a.astype(np.int64) * 1_000_000
        + out.score_a.astype(np.int64) * 1_000
        + out.score_b.astype(np.int64)
    )
    for code in np.unique(enc[ok]):
        mask = ok & (enc == code)
        a_won = code >= 1_000_000
        hi, lo = divmod(int(code) % 1_000_000, 1_000)
        if not a_won:
            hi, lo = lo, hi
        sel = pts[mask]
        mean = float(sel.mean())
        var = float(sel.var(ddof=1)) if sel.size > 1 else float("nan")
        m4 = float(np.mean((sel - mean) ** 4))
        table[("A" if a_won else "B", (hi, lo))] = (int(sel.size), mean, var, m4)
    return table
