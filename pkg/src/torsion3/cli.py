"""Command line entry point: ``torsion3 <subcommand> [options]``.

Every subcommand writes a table to stdout as CSV (default), JSON or aligned text.
Options may also come from a key = value config file (``--config``); flags win.
``--plot DIR`` additionally writes PNG figures for the reports that have one.

Exit codes: 0 ok, 2 usage, 3 invalid discriminant, 4 unknown group or signature,
5 network disabled for ingest, 6 precision failure, 7 data integrity, 1 other errors.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import click

EXIT_DISC = 3
EXIT_GROUP = 4
EXIT_NETWORK = 5
EXIT_PRECISION = 6
EXIT_INTEGRITY = 7


@dataclass(frozen=True)
class RunConfig:
    fmt: str = "csv"
    jobs: int = 1
    precision: float = 1e-10
    cache: str | None = None
    network: bool = True
    plot: str | None = None

    def __post_init__(self):
        if self.fmt not in ("csv", "json", "human"):
            raise click.UsageError("format must be csv, json or human")
        if self.jobs < 1 or self.precision <= 0:
            raise click.UsageError("jobs and precision must be positive")


class CliError(click.ClickException):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.exit_code = code


def _plain(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return v


def emit(cfg: RunConfig, rows: list[dict], columns: list[str] | None = None) -> None:
    columns = columns or (list(rows[0]) if rows else [])
    if cfg.fmt == "json":
        def conv(v):
            return str(v) if isinstance(v, Fraction) else v

        click.echo(json.dumps([{c: conv(r.get(c)) for c in columns} for r in rows], indent=2))
        return
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_plain(r.get(c)) for c in columns])
        click.echo(buf.getvalue(), nl=False)
        return
    cells = [[str(_plain(r.get(c))) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    click.echo("  ".join(c.rjust(w) for c, w in zip(columns, widths)))
    for row in cells:
        click.echo("  ".join(v.rjust(w) for v, w in zip(row, widths)))


def _plot_note(path) -> None:
    click.echo(f"wrote {path}", err=True)


# config keys whose parameter name differs from the flag
_CONFIG_KEYS = {"format": "fmt", "group": "label", "disc": "d"}


def _config_defaults(path: str) -> dict:
    """Flat key = value file; keys under [name] sections apply to that subcommand."""
    parser = configparser.ConfigParser()
    text = Path(path).read_text()
    if not text.lstrip().startswith("["):
        text = "[torsion3]\n" + text
    parser.read_string(text)
    out: dict = {}
    for section in parser.sections():
        items = {_CONFIG_KEYS.get(k, k.replace("-", "_")): v for k, v in parser.items(section)}
        if section == "torsion3":
            out.update(items)
        else:
            out.setdefault(section, {}).update(items)
    return out


def _load_config(ctx, _param, value):
    if value:
        try:
            defaults = _config_defaults(value)
        except (OSError, configparser.Error) as exc:
            raise click.BadParameter(str(exc))
        ctx.default_map = {**(ctx.default_map or {}), **defaults}
    return value


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", type=click.Path(dir_okay=False), callback=_load_config, is_eager=True,
              expose_value=False, help="key = value config file; flags win")
@click.option("--format", "fmt", type=click.Choice(["csv", "json", "human"]), default="csv", show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True, help="worker processes for enumeration")
@click.option("--precision", type=float, default=1e-10, show_default=True, help="target radius for L-values")
@click.option("--cache", type=click.Path(), default=None, help="field record cache (JSONL)")
@click.option("--network/--no-network", default=True, show_default=True)
@click.option("--plot", type=click.Path(file_okay=False), default=None, help="directory for PNG figures")
@click.pass_context
def main(ctx, fmt, jobs, precision, cache, network, plot):
    """3-torsion in class groups of 2-extensions: tables, constants and checks."""
    ctx.obj = RunConfig(fmt, jobs, precision, cache, network, plot)


def _disc(d: int) -> int:
    from .arith import is_fundamental

    if not is_fundamental(d):
        raise CliError(f"{d} is not a fundamental discriminant", EXIT_DISC)
    return d


def _sign_opt(f):
    return click.option("--sign", type=click.Choice(["+", "-"]), required=True)(f)


def _grid(bound: int, points: int | None) -> list[int]:
    if points:
        k = max(1, points)
        return sorted({max(1, round(bound ** ((i + 1) / k))) for i in range(k)})
    out = [10 ** e for e in range(2, int(math.log10(bound)) + 1) if 10 ** e < bound]
    return out + [bound]


# ---------------------------------------------------------------------------


@main.command()
@click.argument("d", type=int)
@click.pass_obj
def classgroup(cfg, d):
    """Class group data of Q(sqrt d)."""
    from .quadfield import PrecisionError, class_group

    _disc(d)
    try:
        F = class_group(d)
    except PrecisionError as exc:
        raise CliError(str(exc), EXIT_PRECISION)
    emit(cfg, [{
        "disc": F.disc, "h": F.h,
        "invariants": list(F.cl_invariants) if F.cl_invariants is not None else None,
        "h3": F.h3, "r1": F.r1, "r2": F.r2, "w": F.w,
        "regulator": float(F.regulator) if d > 0 else None,
    }])


@main.command("h3-avg")
@click.option("--bound", type=click.IntRange(min=10), required=True)
@_sign_opt
@click.option("--points", type=int, default=None, help="geometric grid size (default: decades)")
@click.pass_obj
def h3_avg(cfg, bound, sign, points):
    """Running average of h3 over quadratic fields of one sign."""
    import numpy as np

    from .cubicforms import h3_table, ring_table

    ring_table(bound, sign, cfg.jobs)
    h3 = h3_table(bound, sign)
    target = 2.0 if sign == "-" else 4.0 / 3.0
    count = np.cumsum(h3 > 0)
    total = np.cumsum(h3)
    rows = []
    for x in _grid(bound, points):
        n = int(count[x])
        rows.append({
            "X": x, "fields": n, "avg_h3": float(total[x]) / n if n else None,
            "limit": target, "fields_over_3X_pi2": n / (3 * x / math.pi ** 2),
        })
    emit(cfg, rows)
    if cfg.plot:
        from . import plotting

        pts = [r for r in rows if r["avg_h3"] is not None]
        _plot_note(plotting.running_average([r["X"] for r in pts], [r["avg_h3"] for r in pts], target,
                                            cfg.plot, name=f"h3_avg_{'neg' if sign == '-' else 'pos'}"))


@main.command("count-cubic")
@click.option("--bound", type=click.IntRange(min=1), required=True)
@_sign_opt
@click.pass_obj
def count_cubic(cfg, bound, sign):
    """Cubic fields with 0 < sign*disc <= bound, against the leading asymptotic."""
    from .cubicforms import count_fields

    c = count_fields(bound, sign, cfg.jobs)
    zeta3 = 1.2020569031595942
    lead = bound / (12 * zeta3) if sign == "+" else bound / (4 * zeta3)
    emit(cfg, [{"bound": bound, "sign": sign, "fields": c.total, "s3": c.s3, "c3": c.c3,
                "leading_term": lead}])


@main.command("rings-slope")
@click.option("--bound", type=click.IntRange(min=10), required=True)
@click.option("--sign", type=click.Choice(["+", "-", "both"]), default="both", show_default=True)
@click.option("--points", type=int, default=None)
@click.pass_obj
def rings_slope(cfg, bound, sign, points):
    """Weighted count of cubic rings over X against the pole residues."""
    from .cubicforms import shintani_residue, weighted_ring_count_exact

    rows = []
    for s in (["+", "-"] if sign == "both" else [sign]):
        res = shintani_residue(s)
        main_ = float(res.main)
        for x in _grid(bound, points):
            q = weighted_ring_count_exact(x, s, cfg.jobs)
            two = float(res.predicted_count(x))
            rows.append({"sign": s, "X": x, "count": str(q), "slope": float(q) / x, "main": main_,
                         "gap": float(q) / x / main_ - 1, "two_pole_slope": two / x})
    emit(cfg, rows)
    if cfg.plot:
        from . import plotting

        for s in {r["sign"] for r in rows}:
            rs = [r for r in rows if r["sign"] == s]
            _plot_note(plotting.ring_slope([r["X"] for r in rs], [r["slope"] for r in rs], rs[0]["main"],
                                           [r["two_pole_slope"] for r in rs], cfg.plot,
                                           name=f"rings_slope_{'pos' if s == '+' else 'neg'}", sign=s))


@main.command("orders-check")
@click.option("--disc", "discs", type=int, multiple=True, help="cubic field discriminant (repeatable)")
@click.option("--split/--no-split", default=True, show_default=True, help="include Z^3")
@click.option("--max-index", type=click.IntRange(1, 6), default=5, show_default=True)
@click.pass_obj
def orders_check(cfg, discs, split, max_index):
    """Order counts from the Euler product against the sublattice oracle."""
    from .orders import CubicAlgebra, brute_subrings, dw_coefficients

    algebras = []
    for d in discs or (-23, -31, 49, 81, 229):
        try:
            algebras.append((str(d), CubicAlgebra.cubic_field(d)))
        except ValueError as exc:
            raise CliError(str(exc), EXIT_DISC)
    if split:
        algebras.append(("Z3", CubicAlgebra.split()))
    rows = []
    for name, A in algebras:
        dw = dw_coefficients(A, max_index ** 2)
        table = A.mult_table()
        for m in range(1, max_index + 1):
            a, b = dw[m * m], brute_subrings(table, m)
            rows.append({"algebra": name, "index": m, "euler_product": a, "lattice_oracle": b, "match": a == b})
    emit(cfg, rows)
    if not all(r["match"] for r in rows):
        raise CliError("order counts disagree", 1)


@main.command("resolvent-check")
@click.option("--disc", "d", type=int, default=None, help="one discriminant")
@click.option("--upto", type=click.IntRange(3, 200), default=None, help="all fundamental |disc| <= upto")
@click.option("--depth", type=click.IntRange(1, 3), default=2, show_default=True)
@click.pass_obj
def resolvent_check(cfg, d, upto, depth):
    """Coefficients of the resolvent generating series, both sides."""
    from .arith import is_fundamental
    from .orders import resolvent_series_check

    if (d is None) == (upto is None):
        raise click.UsageError("give exactly one of --disc and --upto")
    if d is not None:
        if abs(d) > 200:
            raise CliError("|disc| must be at most 200", EXIT_DISC)
        ds = [_disc(d)]
    else:
        ds = [x for D in range(3, upto + 1) for x in (D, -D) if is_fundamental(x)]
    rows = []
    for x in ds:
        r = resolvent_series_check(x, depth)
        for n in range(1, depth + 1):
            rows.append({"disc": x, "n": n, "h3": r.h3, "lhs": r.lhs[n - 1], "rhs": r.rhs[n - 1],
                         "ok": r.lhs[n - 1] == r.rhs[n - 1]})
    emit(cfg, rows)
    if not all(r["ok"] for r in rows):
        raise CliError("resolvent series coefficients disagree", 1)


GROUPS = {
    "C2": lambda w: w.wreath_c2(w.trivial(1)),
    "D4": lambda w: w.d4(),
    "C2wrC2": lambda w: w.d4(),
    "C2wrC4": lambda w: w.wreath_c2(w.cyclic(4)),
    "C2wrV4": lambda w: w.wreath_c2(w.generate(4, ["(12)(34)", "(13)(24)"])),
    "C2wrD4": lambda w: w.wreath_c2(w.d4()),
}


@main.command()
@click.option("--group", "label", required=True, help=f"one of {', '.join(GROUPS)}")
@click.option("--sigma", default=None, help="class of complex conjugation, cycle notation; ';' between places")
@click.pass_obj
def predict(cfg, label, sigma):
    """Cohen-Martinet predictions, u and M_Sigma per group signature."""
    from . import wreath

    if label not in GROUPS:
        raise CliError(f"unknown group {label!r}; known: {', '.join(GROUPS)}", EXIT_GROUP)
    G = GROUPS[label](wreath)
    if sigma is None:
        sigs = [wreath.GroupSignature((c,)) for c in wreath.involution_classes(G)]
    else:
        try:
            sigs = [wreath.parse_signature(G, sigma)]
        except ValueError as exc:
            raise CliError(str(exc), EXIT_GROUP)
    rows = []
    for s in sigs:
        rep = wreath.predict(G, s)
        r1F, r2F = wreath.base_archimedean(G, s)
        rows.append({"group": label, "sigma": rep.signature, "r1_F": r1F, "r2_F": r2F, "u": rep.u_rel,
                     "m_sigma": rep.m_sigma, "cm_relative": rep.cm_relative, "cm_full": rep.cm_full})
    emit(cfg, rows)


@main.command()
@click.option("--target", required=True,
              help="Cm, CD4, CD4_printed, Dm, DD4, CD4:<sigma>, DD4:<sigma>, or 'table' for all")
@click.option("--truncation", type=click.IntRange(min=100), default=10 ** 5, show_default=True)
@click.pass_obj
def constants(cfg, target, truncation):
    """Certified brackets for the limiting constants."""
    from . import constants as C

    if target == "table":
        targets = ["Cm", "CD4", "CD4_printed"] + [f"CD4:{s}" for s in C.D4_SIGNATURES] + ["Dm", "DD4"] + [
            f"DD4:{s}" for s in C.D4_SIGNATURES]
    else:
        targets = [target]
    try:
        ests = [C.eval_constant(t, truncation) for t in targets]
    except ValueError as exc:
        code = EXIT_GROUP if ":" in target else 2
        raise CliError(str(exc), code)
    if cfg.fmt == "json":
        click.echo(C.to_json(ests))
    elif cfg.fmt == "csv":
        click.echo(C.to_csv(ests), nl=False)
    else:
        emit(cfg, [dict(zip(C.FIELDS, (e.target, e.truncation, e.lower, e.upper, e.tail_bound, e.estimate,
                                        e.flagged))) for e in ests])
    if cfg.plot:
        from . import plotting

        grid = [x for x in (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6) if x < truncation] + [truncation]
        for t in targets:
            es = [C.eval_constant(t, x) for x in grid]
            _plot_note(plotting.constant_convergence(grid, [e.lower for e in es], [e.upper for e in es],
                                                     [e.estimate for e in es], cfg.plot, name=t))


@main.command()
@click.option("--degree", type=int, default=4, show_default=True)
@click.option("--group", "galois_label", default="4T3", show_default=True)
@click.option("--disc-min", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--disc-max", type=click.IntRange(min=1), default=10 ** 4, show_default=True)
@click.option("--pages", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--endpoint", default=None)
@click.option("--rate-limit", type=float, default=1.0, show_default=True, help="requests per second")
@click.pass_obj
def ingest(cfg, degree, galois_label, disc_min, disc_max, pages, endpoint, rate_limit):
    """Fetch field records into the cache."""
    from .datastore import DEFAULT_ENDPOINT, FieldCache, FieldQuery, fetch

    if not cfg.network:
        raise CliError("ingest needs the network (--network)", EXIT_NETWORK)
    if not cfg.cache:
        raise click.UsageError("ingest needs --cache PATH")
    cache = FieldCache(cfg.cache)
    q = FieldQuery(degree, galois_label, disc_min, disc_max)
    token, rows = 0, []
    for page in range(pages):
        res = fetch(q, token, cache=cache, endpoint=endpoint or DEFAULT_ENDPOINT, rate_limit=rate_limit)
        for err in res.errors:
            click.echo(f"parse error: {err}", err=True)
        rows.append({"page": page, "records": len(res.records), "added": res.added,
                     "errors": len(res.errors), "degraded": res.degraded})
        if res.degraded:
            emit(cfg, rows)
            raise CliError("network unavailable; cache left unchanged", EXIT_NETWORK)
        token = res.next_token
        if token is None:
            break
    emit(cfg, rows)


@main.command()
@click.option("--grouping", type=click.Choice(["signature", "unit_rank"]), default="signature", show_default=True)
@click.option("--grid", "grid", type=int, multiple=True, help="X values (repeatable)")
@click.option("--density-truncation", type=click.IntRange(min=100), default=10 ** 4, show_default=True)
@click.pass_obj
def compare(cfg, grouping, grid, density_truncation):
    """Running averages of h3(K) and h3(K/F) in the cached records against predictions."""
    from .datastore import DataIntegrityError, FieldCache, empirical_average

    if not cfg.cache:
        raise click.UsageError("compare needs --cache PATH")
    try:
        records = FieldCache(cfg.cache).load()
        rep = empirical_average(records, grouping, grid or (10 ** 3, 10 ** 4),
                                density_truncation=density_truncation)
    except DataIntegrityError as exc:
        raise CliError(str(exc), EXIT_INTEGRITY)
    except (OSError, ValueError) as exc:
        raise CliError(str(exc), 1)
    emit(cfg, rep.rows(), ["family", "u", "X", "count", "expected", "incomplete", "avg_h3", "avg_h3_rel",
                           "cm_relative"] + (["cm_full"] if grouping == "signature" else []))
    if cfg.plot and not rep.empty:
        from . import plotting

        _plot_note(plotting.family_averages(rep, cfg.plot, name=f"compare_{grouping}"))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
