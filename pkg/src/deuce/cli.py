"""Command-line surface for the scoring-system calculators.

Subcommands
-----------
compute     win probability and duration moments for one system
breakdown   per-score probability tables (game, tie-break, set, match)
grid        CSV matrices of a quantity over a (p_A, p_B) lattice
efficiency  prior-weighted efficiency reports with quadrature error estimates
simulate    Monte-Carlo cross-check driver

Data goes to stdout, diagnostics to stderr.  Exit codes: 0 success,
2 usage error, 3 non-terminating configuration, 4 numerical failure.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import math
import secrets
import sys

import click
import numpy as np

from . import __version__
from .bestof import (
    BestOfGamesSpec,
    bofk_points_distribution,
    bofk_win_prob,
    bog_match_points_moments,
    bog_match_win_prob,
)
from .core import NonTerminatingError, QuadratureError, SystemSpec
from .efficiency import BetaPrior, efficiency_one_param, efficiency_two_param
from .game import (
    game_breakdown,
    game_points_moments,
    game_win_prob,
    gt_points_moments,
    gt_win_prob,
)
from .match import MatchSpec, match_breakdown, match_points_moments, match_win_prob
from .montecarlo import SimConfig, simulate
from .sets import (
    set_breakdown,
    set_points_moments,
    set_win_prob,
    st_breakdown,
    st_points_moments,
    st_win_prob,
    stt_win_prob,
)

SYSTEM_KINDS = ("gt", "game", "stt", "st", "set", "match", "bofk", "bog")

# Symbol suffix used to tag numeric outputs (theta_G, mu_ST, ...).
_SYMBOL = {
    "gt": "GT",
    "game": "G",
    "stt": "STT",
    "st": "ST",
    "set": "S",
    "match": "M",
    "bofk": "BofK",
    "bog": "BoG",
}

_GRID_QUANTITIES = ("win_prob", "mean_points", "std_points", "diff", "log_ratio")
_GRID_ALIASES = {"win": "win_prob", "mean": "mean_points", "std": "std_points"}


# ---------------------------------------------------------------------------
# shared option plumbing


def _structure_options(fn):
    """Attach the scoring-structure flags shared by every subcommand."""
    for option in (
        click.option("--k", type=click.IntRange(min=2), default=None,
                     help="tie-break target (st) or games per set (set)."),
        click.option("--k0", type=click.IntRange(min=2), default=None,
                     help="tie-break target in non-deciding sets (match)."),
        click.option("--k1", type=click.IntRange(min=2), default=None,
                     help="tie-break target in the deciding set (match)."),
        click.option("--q", type=click.IntRange(min=1), default=None,
                     help="sets needed to win the match (best of 2q+1)."),
        click.option("--l", type=click.IntRange(min=1), default=None,
                     help="race length parameter for bofk/bog (win l+1 units)."),
        click.option("--tiebreak", type=click.Choice(["sg", "sttg", "sttp"]),
                     default=None, help="rule applied at l-all games (bog)."),
    ):
        fn = option(fn)
    return fn


def _param_options(fn):
    for option in (
        click.option("--p", type=click.FloatRange(0.0, 1.0), default=None,
                     help="server's point-win probability (single-parameter systems)."),
        click.option("--pa", type=click.FloatRange(0.0, 1.0), default=None,
                     help="player A's probability of winning a point on serve."),
        click.option("--pb", type=click.FloatRange(0.0, 1.0), default=None,
                     help="player B's probability of winning a point on serve."),
    ):
        fn = option(fn)
    return fn


def _output_options(default_format="json"):
    def wrap(fn):
        fn = click.option("--precision", type=click.IntRange(1, 15), default=6,
                          show_default=True, help="significant digits in output.")(fn)
        fn = click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
                          default=default_format, show_default=True)(fn)
        return fn

    return wrap


def _domain_errors(fn):
    """Map library exceptions onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NonTerminatingError as exc:
            click.echo(f"non-terminating: {exc}", err=True)
            sys.exit(3)
        except QuadratureError as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(4)

    return wrapper


def _build_spec(kind, k, k0, k1, q, l, tiebreak) -> SystemSpec:
    fields = {"k": k, "k0": k0, "k1": k1, "q": q, "l": l, "tiebreak": tiebreak}
    provided = {name: value for name, value in fields.items() if value is not None}
    try:
        return SystemSpec(kind=kind, **provided)
    except ValueError as exc:
        message = str(exc)
        for name in fields:
            if message.startswith(name + " "):
                message = "--" + message
                break
        raise click.UsageError(message) from exc


def _gather_params(spec: SystemSpec, p, pa, pb):
    """Return the scalar or pair the system consumes, naming bad flags."""
    if spec.takes_pair:
        if p is not None:
            raise click.UsageError(
                f"--p does not apply to system '{spec.kind}'; use --pa/--pb")
        if pa is None or pb is None:
            raise click.UsageError(
                f"--pa and --pb are required for system '{spec.kind}'")
        return (pa, pb)
    if pa is not None or pb is not None:
        raise click.UsageError(
            f"--pa/--pb do not apply to system '{spec.kind}'; use --p")
    if p is None:
        raise click.UsageError(f"--p is required for system '{spec.kind}'")
    return p


def _spec_dict(spec: SystemSpec) -> dict:
    out = {"kind": spec.kind}
    for name in ("k", "k0", "k1", "q", "l", "tiebreak"):
        value = getattr(spec, name)
        if value is not None:
            out[name] = value
    return out


def _params_dict(spec: SystemSpec, params) -> dict:
    if spec.takes_pair:
        return {"pa": params[0], "pb": params[1]}
    return {"p": params}


def _match_spec(spec: SystemSpec) -> MatchSpec:
    return MatchSpec(k0=spec.k0, k1=spec.k1, q=spec.q)


def _bog_spec(spec: SystemSpec) -> BestOfGamesSpec:
    return BestOfGamesSpec(l=spec.l, tiebreak=spec.tiebreak)


def _win_prob(spec: SystemSpec, params):
    kind = spec.kind
    if kind == "gt":
        return gt_win_prob(params)
    if kind == "game":
        return game_win_prob(params)
    if kind == "stt":
        return stt_win_prob(*params)
    if kind == "st":
        return st_win_prob(params[0], params[1], spec.k)
    if kind == "set":
        return set_win_prob(params[0], params[1], spec.k)
    if kind == "match":
        return match_win_prob(params[0], params[1], _match_spec(spec))
    if kind == "bofk":
        return bofk_win_prob(params, spec.l)
    return bog_match_win_prob(params[0], params[1], _bog_spec(spec))


def _points_moments(spec: SystemSpec, params):
    kind = spec.kind
    if kind == "gt":
        return gt_points_moments(params)
    if kind == "game":
        return game_points_moments(params)
    if kind == "stt":
        # A race to 2 points, win by two, with the standard serve rotation is
        # the decisive-pair race itself, so the k=2 tie-break moments apply.
        return st_points_moments(params[0], params[1], 2)
    if kind == "st":
        return st_points_moments(params[0], params[1], spec.k)
    if kind == "set":
        return set_points_moments(params[0], params[1], spec.k)
    if kind == "match":
        return match_points_moments(params[0], params[1], _match_spec(spec))
    if kind == "bofk":
        dist = bofk_points_distribution(params, spec.l)
        return dist.mean, dist.variance
    return bog_match_points_moments(params[0], params[1], _bog_spec(spec))


# ---------------------------------------------------------------------------
# output shaping


def _round_sig(obj, digits: int):
    """Round every float in a nested structure to ``digits`` significant digits."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, dict):
        return {key: _round_sig(value, digits) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_sig(value, digits) for value in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return obj
        return float(f"{obj:.{digits}g}")
    return obj


def _flatten(record: dict, prefix: str = ""):
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from _flatten(value, name + ".")
        elif isinstance(value, list):
            yield name, json.dumps(value)
        else:
            yield name, value


def _emit(record: dict, fmt: str, precision: int) -> None:
    record = _round_sig(record, precision)
    if fmt == "json":
        click.echo(json.dumps(record, indent=2, sort_keys=True))
    else:
        for key, value in sorted(_flatten(record)):
            click.echo(f"{key},{value}")


# ---------------------------------------------------------------------------
# commands


@click.group()
@click.version_option(__version__, prog_name="deuce")
def main() -> None:
    """Exact win probabilities, duration statistics, efficiencies, and
    simulations for nested racket-sport scoring systems."""


@main.command("compute")
@click.argument("system", type=click.Choice(SYSTEM_KINDS))
@_param_options
@_structure_options
@_output_options()
@_domain_errors
def cmd_compute(system, p, pa, pb, k, k0, k1, q, l, tiebreak, fmt, precision):
    """Print win probability, mean, variance, and std of the point count."""
    spec = _build_spec(system, k, k0, k1, q, l, tiebreak)
    params = _gather_params(spec, p, pa, pb)
    theta = float(_win_prob(spec, params))
    mean, variance = (float(x) for x in _points_moments(spec, params))
    sym = _SYMBOL[system]
    record = {
        "command": "compute",
        "version": __version__,
        "system": _spec_dict(spec),
        "params": _params_dict(spec, params),
        f"theta_{sym}": theta,
        f"mu_{sym}": mean,
        f"sigma2_{sym}": variance,
        f"sigma_{sym}": math.sqrt(variance),
    }
    _emit(record, fmt, precision)


_BREAKDOWN_FNS = {
    "game": lambda spec, params: game_breakdown(params),
    "st": lambda spec, params: st_breakdown(params[0], params[1], spec.k),
    "set": lambda spec, params: set_breakdown(params[0], params[1], spec.k),
    "match": lambda spec, params: match_breakdown(params[0], params[1], _match_spec(spec)),
}


@main.command("breakdown")
@click.argument("system", type=click.Choice(sorted(_BREAKDOWN_FNS)))
@_param_options
@_structure_options
@_output_options()
@_domain_errors
def cmd_breakdown(system, p, pa, pb, k, k0, k1, q, l, tiebreak, fmt, precision):
    """Print the per-final-score probability and duration table."""
    spec = _build_spec(system, k, k0, k1, q, l, tiebreak)
    params = _gather_params(spec, p, pa, pb)
    table = _BREAKDOWN_FNS[system](spec, params)
    sym = _SYMBOL[system]
    rows = [
        {
            "score": row.score,
            "p_first_wins": row.p_first_wins,
            "p_second_wins": row.p_second_wins,
            "cond_mean": row.cond_mean,
            "cond_var": row.cond_var,
        }
        for row in table.rows
    ]
    if fmt == "csv":
        record = _round_sig(
            {"rows": rows, "win": table.win_prob, "mean": table.mean,
             "var": table.variance}, precision)
        click.echo("score,p_first_wins,p_second_wins,cond_mean,cond_var")
        for row in record["rows"]:
            click.echo(",".join(str(row[col]) for col in
                                ("score", "p_first_wins", "p_second_wins",
                                 "cond_mean", "cond_var")))
        click.echo(f"overall,{record['win']},,{record['mean']},{record['var']}")
        return
    record = {
        "command": "breakdown",
        "version": __version__,
        "system": _spec_dict(spec),
        "params": _params_dict(spec, params),
        "label": table.label,
        f"theta_{sym}": table.win_prob,
        f"mu_{sym}": table.mean,
        f"sigma2_{sym}": table.variance,
        "rows": rows,
    }
    _emit(record, fmt, precision)


# Structure fields each system kind consumes; grid comparisons build two
# specs from one flag pool, so each side takes only what applies to it.
_KIND_FIELDS = {
    "gt": (),
    "game": (),
    "stt": (),
    "st": ("k",),
    "set": ("k",),
    "match": ("k0", "k1", "q"),
    "bofk": ("l",),
    "bog": ("l", "tiebreak"),
}


def _win_grid(spec: SystemSpec, pa, pb):
    kind = spec.kind
    if kind == "stt":
        return stt_win_prob(pa, pb)
    if kind == "st":
        return st_win_prob(pa, pb, spec.k)
    if kind == "set":
        return set_win_prob(pa, pb, spec.k)
    if kind == "match":
        return match_win_prob(pa, pb, _match_spec(spec))
    return bog_match_win_prob(pa, pb, _bog_spec(spec))


def _moments_grid(spec: SystemSpec, pa, pb):
    kind = spec.kind
    if kind == "stt":
        return st_points_moments(pa, pb, 2)
    if kind == "st":
        return st_points_moments(pa, pb, spec.k)
    if kind == "set":
        return set_points_moments(pa, pb, spec.k)
    if kind == "match":
        return match_points_moments(pa, pb, _match_spec(spec))
    return bog_match_points_moments(pa, pb, _bog_spec(spec))


@main.command("grid")
@click.argument("system")
@click.option("--quantity", type=click.Choice(_GRID_QUANTITIES), default=None,
              help="cell value; win_prob unless given here or as a SYSTEM suffix.")
@click.option("--other", type=click.Choice(SYSTEM_KINDS), default=None,
              help="second system for diff/log_ratio (shares the structure flags).")
@click.option("--res", type=click.IntRange(min=2), default=99, show_default=True,
              help="lattice resolution per axis.")
@click.option("--pmin", type=click.FloatRange(0.0, 1.0), default=0.01, show_default=True)
@click.option("--pmax", type=click.FloatRange(0.0, 1.0), default=0.99, show_default=True)
@_structure_options
@_output_options(default_format="csv")
@_domain_errors
def cmd_grid(system, quantity, other, res, pmin, pmax, k, k0, k1, q, l,
             tiebreak, fmt, precision):
    """Tabulate a quantity over a (p_A, p_B) lattice as a CSV matrix.

    SYSTEM is one of stt/st/set/match/bog, optionally suffixed with the
    quantity: ``grid match-mean`` is ``grid match --quantity mean_points``.
    Rows are indexed by p_A, columns by p_B, with a coordinate header
    row and column.
    """
    base, dash, suffix = system.partition("-")
    if dash:
        if suffix not in _GRID_ALIASES:
            raise click.UsageError(
                f"unknown SYSTEM suffix '-{suffix}': use -win, -mean, or -std")
        if quantity is not None and quantity != _GRID_ALIASES[suffix]:
            raise click.UsageError(
                f"SYSTEM suffix '-{suffix}' conflicts with --quantity {quantity}")
        quantity = _GRID_ALIASES[suffix]
    if base not in SYSTEM_KINDS:
        raise click.UsageError(
            f"unknown system '{base}': expected one of {', '.join(SYSTEM_KINDS)}")
    if quantity is None:
        quantity = "win_prob"
    if pmin >= pmax:
        raise click.UsageError("--pmin must be below --pmax")

    provided = {name: value for name, value in
                (("k", k), ("k0", k0), ("k1", k1), ("q", q), ("l", l),
                 ("tiebreak", tiebreak)) if value is not None}
    kinds = [base] + ([other] if other is not None else [])
    for name in provided:
        if not any(name in _KIND_FIELDS[kind] for kind in kinds):
            raise click.UsageError(
                f"--{name} does not apply to system '{'/'.join(kinds)}'")

    def grid_spec(kind: str) -> SystemSpec:
        usable = {name: value for name, value in provided.items()
                  if name in _KIND_FIELDS[kind]}
        try:
            return SystemSpec(kind=kind, **usable)
        except ValueError as exc:
            raise click.UsageError("--" + str(exc)) from exc

    spec = grid_spec(base)
    if not spec.takes_pair:
        raise click.UsageError(
            f"grid sweeps (--pa, --pb), but system '{base}' takes a single --p")

    coords = np.linspace(pmin, pmax, res)
    pa = coords[:, None]
    pb = coords[None, :]
    if quantity == "win_prob":
        values = _win_grid(spec, pa, pb)
    elif quantity == "mean_points":
        values = _moments_grid(spec, pa, pb)[0]
    elif quantity == "std_points":
        values = np.sqrt(_moments_grid(spec, pa, pb)[1])
    else:
        if other is None:
            raise click.UsageError(f"--other is required when --quantity is {quantity}")
        other_spec = grid_spec(other)
        if not other_spec.takes_pair:
            raise click.UsageError(
                f"--other system '{other}' takes a single --p and cannot be gridded")
        first = _win_grid(spec, pa, pb)
        second = _win_grid(other_spec, pa, pb)
        values = first - second if quantity == "diff" else np.log(first / second)
    values = np.broadcast_to(np.asarray(values, dtype=float), (res, res))

    if fmt == "csv":
        fmt_cell = lambda x: f"{x:.{precision}g}"
        click.echo("pa\\pb," + ",".join(fmt_cell(c) for c in coords))
        for i in range(res):
            click.echo(fmt_cell(coords[i]) + "," +
                       ",".join(fmt_cell(v) for v in values[i]))
        return
    record = {
        "command": "grid",
        "version": __version__,
        "system": _spec_dict(spec),
        "quantity": quantity,
        "pa": list(coords),
        "pb": list(coords),
        "values": [list(row) for row in values],
    }
    if other is not None:
        record["other"] = _spec_dict(grid_spec(other))
    _emit(record, "json", precision)


def _parse_prior(alpha, beta, prior_text, for_pair, kind):
    """Resolve the prior flags into (prior_A, prior_B)."""
    if prior_text is not None:
        if alpha is not None or beta is not None:
            raise click.UsageError("use either --prior or --alpha/--beta, not both")
        try:
            parts = [float(x) for x in prior_text.split(",")]
        except ValueError as exc:
            raise click.UsageError(f"--prior expects comma-separated numbers, got '{prior_text}'") from exc
        if len(parts) == 2:
            parts = parts * 2
        if len(parts) != 4:
            raise click.UsageError("--prior takes a,b or a1,b1,a2,b2")
        if not for_pair and parts[:2] != parts[2:]:
            raise click.UsageError(
                f"--prior gave two marginals but system '{kind}' takes a single --p")
        try:
            return BetaPrior(parts[0], parts[1]), BetaPrior(parts[2], parts[3])
        except ValueError as exc:
            raise click.UsageError(f"--prior: {exc}") from exc
    a = 1.0 if alpha is None else alpha
    b = 1.0 if beta is None else beta
    prior = BetaPrior(a, b)
    return prior, prior


@main.command("efficiency")
@click.argument("systems", nargs=-1, required=True)
@click.option("--alpha", type=click.FloatRange(min=0, min_open=True), default=None,
              help="Beta prior shape a (both players unless --prior is given).")
@click.option("--beta", type=click.FloatRange(min=0, min_open=True), default=None,
              help="Beta prior shape b.")
@click.option("--prior", "prior_text", default=None,
              help="comma-separated Beta parameters: a,b or a1,b1,a2,b2.")
@_structure_options
@_output_options()
@_domain_errors
def cmd_efficiency(systems, alpha, beta, prior_text, k, k0, k1, q, l,
                   tiebreak, fmt, precision):
    """Report prior-weighted efficiencies for one or more systems."""
    reports = []
    for name in systems:
        if name not in SYSTEM_KINDS:
            raise click.UsageError(
                f"unknown system '{name}': expected one of {', '.join(SYSTEM_KINDS)}")
        spec = _build_spec(name, k, k0, k1, q, l, tiebreak)
        prior_a, prior_b = _parse_prior(alpha, beta, prior_text,
                                        spec.takes_pair, name)
        if spec.takes_pair:
            surface = functools.partial(_win_grid, spec)
            report = efficiency_two_param(surface, (prior_a, prior_b), system=spec)
            prior_echo = {"alpha_a": prior_a.alpha, "beta_a": prior_a.beta,
                          "alpha_b": prior_b.alpha, "beta_b": prior_b.beta}
        else:
            if name == "gt":
                curve = gt_win_prob
            elif name == "game":
                curve = game_win_prob
            else:
                curve = functools.partial(bofk_win_prob, l=spec.l)
            report = efficiency_one_param(curve, prior_a, system=spec)
            prior_echo = {"alpha": prior_a.alpha, "beta": prior_a.beta}
        reports.append({
            "system": _spec_dict(spec),
            "prior": prior_echo,
            f"Eff_{_SYMBOL[name]}": report.value,
            "quadrature_error_estimate": report.quadrature_error_estimate,
        })
    record = {"command": "efficiency", "version": __version__, "reports": reports}
    if fmt == "csv":
        record = _round_sig(record, precision)
        click.echo("system,efficiency,quadrature_error_estimate")
        for entry in record["reports"]:
            spec_text = ";".join(f"{key}={value}" for key, value
                                 in entry["system"].items())
            value = next(v for key, v in entry.items() if key.startswith("Eff_"))
            click.echo(f"{spec_text},{value},{entry['quadrature_error_estimate']}")
        return
    _emit(record, fmt, precision)


@main.command("simulate")
@click.argument("system", type=click.Choice(SYSTEM_KINDS))
@_param_options
@_structure_options
@click.option("--reps", type=click.IntRange(min=1), required=True,
              help="number of replications.")
@click.option("--seed", type=int, default=None,
              help="PRNG seed; drawn from entropy and echoed when omitted.")
@click.option("--max-points", type=click.IntRange(min=1), default=100_000,
              show_default=True, help="cap on points per replication.")
@_output_options()
@_domain_errors
def cmd_simulate(system, p, pa, pb, k, k0, k1, q, l, tiebreak, reps, seed,
                 max_points, fmt, precision):
    """Estimate win rate and duration by Monte-Carlo replication."""
    spec = _build_spec(system, k, k0, k1, q, l, tiebreak)
    params = _gather_params(spec, p, pa, pb)
    if seed is None:
        seed = secrets.randbits(63)
    config = SimConfig(system=spec, params=params, replications=reps,
                       seed=seed, max_points_per_replication=max_points)
    summary = simulate(config)
    record = {
        "command": "simulate",
        "version": __version__,
        "system": _spec_dict(spec),
        "params": _params_dict(spec, params),
        "replications": reps,
        "seed": seed,
        "max_points_per_replication": max_points,
        **dataclasses.asdict(summary),
    }
    _emit(record, fmt, precision)


if __name__ == "__main__":
    main()
