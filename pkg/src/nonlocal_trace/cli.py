"""Command-line front end.

Exit codes: 0 success, 1 domain error (message from the failing module),
2 usage error (bad flags, missing dimension, malformed symbol text).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field, fields
from fractions import Fraction

from .densities import density_report, finite_part, residue0_log, residue_density
from .laurent import LaurentError, resolvent_to_zeta_full, zeta_regular_value
from .oracle import OracleError, RaySampler, default_ladder, fit_expansion, numeric_trace, sample_values
from .resolvent import (
    ExpansionError,
    c0,
    check_model_order,
    difference_coefficient,
    model_trace_expansion,
    trace_defect,
)
from .symbol_core import (
    GRAMMAR_EXCERPT,
    ParseError,
    Scalar,
    SymbolError,
    format_log_symbol,
    format_symbol,
    parse_symbol,
    series_log,
    set_precision,
)
from .symbol_core.angular import format_poly
from .symbol_core.scalar import DEFAULT_DPS, PRECISION_ENV

COMMANDS = ("fp", "res", "logsym", "expand", "c0", "defect", "fit", "verify")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Every field has a default; config-file values are overridden by flags."""

    command: str = ""
    symbol: str | None = None
    p: str | None = None
    p2: str | None = None
    n: int | None = None
    M: int = 1
    m: int = 2
    N: int = 1
    J: int = 3
    T: int = 6
    floor: str | None = None
    extension: dict = field(default_factory=dict)
    precision: int = int(os.environ.get(PRECISION_ENV, DEFAULT_DPS))
    theta: float = 0.0
    t0: float = 16.0
    rho: float = 4.0
    ladder: str | None = None
    zeta: bool = False
    only: str | None = None
    format: str = "json"
    out: str | None = None
    corrupt_alpha: bool = False


# --- argument parsing -------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _extension(text: str) -> dict:
    out = {}
    for item in text.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise UsageError(f"extension override must look like DEGREE=K, got {item!r}")
        d, k = item.split("=", 1)
        try:
            out[str(Fraction(d.strip()))] = int(k)
        except ValueError as exc:
            raise UsageError(f"bad extension override {item!r}") from exc
    return out


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("common")
    g.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    g.add_argument("--symbol", "-a", help="symbol A in the DSL")
    g.add_argument("--p", help="operator symbol P in the DSL (default |xi|^m + 1)")
    g.add_argument("--p2", help="second operator symbol P' (defect)")
    g.add_argument("--n", type=int, help="dimension")
    g.add_argument("--M", type=int, help="matrix size (default 1)")
    g.add_argument("--m", type=int, help="model operator order (default 2)")
    g.add_argument("--N", type=int, help="resolvent power (default 1)")
    g.add_argument("--J", type=int, help="log-symbol truncation (default 3)")
    g.add_argument("--T", type=int, help="Laurent truncation (default 6)")
    g.add_argument("--floor", help="lowest reported exponent (default -N-2)")
    g.add_argument("--extension", help="near-origin extension overrides DEGREE=K[,DEGREE=K]")
    g.add_argument("--precision", type=int, help=f"decimal digits (default {DEFAULT_DPS}; env {PRECISION_ENV})")
    g.add_argument("--theta", type=float, help="ray angle for fit (lambda = -t e^{i theta})")
    g.add_argument("--t0", type=float, help="first sample magnitude (fit)")
    g.add_argument("--rho", type=float, help="sample ratio (fit)")
    g.add_argument("--ladder", help="fit ladder: depth below -N, or EXP:LOG[,EXP:LOG]")
    g.add_argument("--zeta", action="store_true", default=None, help="expand: include zeta pole data")
    g.add_argument("--only", help="verify: comma-separated criterion keys or numbers")
    g.add_argument("--format", choices=("json", "csv", "pretty"))
    g.add_argument("--out", help="write the report here instead of stdout")
    g.add_argument("--corrupt-alpha", dest="corrupt_alpha", action="store_true", default=None, help=argparse.SUPPRESS)

    parser = _Parser(prog="nonlocal-trace", description="Finite parts, residues and resolvent-trace coefficients of classical symbols.",
                     epilog="Symbol grammar: " + GRAMMAR_EXCERPT)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    helps = {
        "fp": "finite-part density TR_x(A) with per-term breakdown",
        "res": "residue density; with --p also the log-residue density of A log P",
        "logsym": "log-polyhomogeneous symbol of log P",
        "expand": "resolvent-trace expansion for the model operator |xi|^m + 1",
        "c0": "basic coefficient C_0(A,P)",
        "defect": "C_0(A,P) - C_0(A,P') two ways",
        "fit": "numeric quadrature samples fitted on the exponent ladder",
        "verify": "run the acceptance matrix",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def load_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    if not args.command:
        raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
    cfg = RunConfig(command=args.command)
    names = {f.name for f in fields(RunConfig)}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(data) - names
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for k, v in data.items():
            setattr(cfg, k, v)
    for k, v in vars(args).items():
        if k in ("config", "command") or v is None:
            continue
        setattr(cfg, k, _extension(v) if k == "extension" else v)
    if not isinstance(cfg.precision, int) or cfg.precision < 15:
        raise UsageError("--precision must be an integer >= 15")
    if cfg.format not in ("json", "csv", "pretty"):
        raise UsageError(f"unknown format {cfg.format!r}")
    return cfg


# --- helpers ---------------------------------------------------------------

def _need_n(cfg: RunConfig) -> int:
    if cfg.n is None:
        raise UsageError("missing dimension: pass --n")
    if cfg.n < 1:
        raise UsageError("--n must be >= 1")
    return cfg.n


def _symbol(cfg: RunConfig, text: str | None, what: str):
    if text is None:
        raise UsageError(f"missing {what}")
    sym = parse_symbol(text, _need_n(cfg), cfg.M)
    if cfg.extension and what == "--symbol":
        sym = sym.with_extensions(overrides={Fraction(k): v for k, v in cfg.extension.items()})
    return sym


def _operator(cfg: RunConfig):
    if cfg.p is None:
        return parse_symbol(f"|xi|^{cfg.m}; 1", _need_n(cfg), cfg.M)
    return _symbol(cfg, cfg.p, "--p")


def _floor(cfg: RunConfig):
    return Fraction(cfg.floor) if cfg.floor is not None else None


def _value_row(label: str, v: Scalar) -> dict:
    return {"quantity": label, **v.to_json()}


# --- commands ----------------------------------------------------------------

def cmd_fp(cfg: RunConfig) -> dict:
    a = _symbol(cfg, cfg.symbol, "--symbol")
    rep = density_report(a)
    return {"command": "fp", "symbol": format_symbol(a), "value": rep.tr_x.to_json(), "report": rep.to_json(),
            "rows": [_value_row("TR_x", rep.tr_x)] + [
                {"quantity": f"term {t.degree} ({t.branch}, K={t.K})", **t.value.to_json()} for t in rep.terms]}


def cmd_res(cfg: RunConfig) -> dict:
    a = _symbol(cfg, cfg.symbol, "--symbol")
    r = residue_density(a)
    out = {"command": "res", "symbol": format_symbol(a), "value": r.to_json(), "rows": [_value_row("res_x", r)]}
    if cfg.p is not None:
        p = _operator(cfg)
        r0 = residue0_log(a, series_log(p, cfg.J))
        out["res_x0_log"] = r0.to_json()
        out["rows"].append(_value_row("res_x0(A log P)", r0))
    return out


def cmd_logsym(cfg: RunConfig) -> dict:
    p = _operator(cfg)
    r = series_log(p, cfg.J)
    rows = []
    for (d, l), pairs in sorted(r.components.items(), key=lambda kv: (-kv[0][0], -kv[0][1])):
        for c, ang in pairs:
            rows.append({"degree": str(d), "log_power": l, "coefficient": c.to_json(),
                         "angular": [format_poly(q) for q in ang.diag]})
    return {"command": "logsym", "p": format_symbol(p), "floor": None if r.floor is None else str(r.floor),
            "text": format_log_symbol(r), "rows": rows}


def cmd_expand(cfg: RunConfig) -> dict:
    a = _symbol(cfg, cfg.symbol, "--symbol")
    e = model_trace_expansion(a, cfg.m, cfg.N, floor=_floor(cfg))
    out = {"command": "expand", "symbol": format_symbol(a), "m": cfg.m, "expansion": e.to_json(),
           "rows": [{"exponent": r["exponent"], "log_power": r["log_power"], **r["value"]} for r in e.to_json()["rows"]]}
    if cfg.zeta:
        z = resolvent_to_zeta_full(e, a.order, cfg.m, a.n, T=cfg.T)
        out["zeta"] = z.to_json()
        out["zeta_regular_value"] = zeta_regular_value(z).to_json()
    return out


def cmd_c0(cfg: RunConfig) -> dict:
    a = _symbol(cfg, cfg.symbol, "--symbol")
    p = _operator(cfg)
    v = c0(a, p)
    fp = finite_part(a)
    return {"command": "c0", "symbol": format_symbol(a), "p": format_symbol(p), "value": v.to_json(),
            "rows": [_value_row("C_0", v), _value_row("TR_x", fp)]}


def cmd_defect(cfg: RunConfig) -> dict:
    a = _symbol(cfg, cfg.symbol, "--symbol")
    p = _operator(cfg)
    p2 = _symbol(cfg, cfg.p2, "--p2")
    t = trace_defect(a, p, p2)
    out = {"command": "defect", "symbol": format_symbol(a), "p": format_symbol(p), "p2": format_symbol(p2),
           "value": t.to_json(), "rows": [_value_row("trace defect", t)]}
    if p.radial_leading()[1] == p2.radial_leading()[1]:
        d = difference_coefficient(a, p, p2, cfg.N)
        out["difference_coefficient"] = d.to_json()
        out["rows"].append(_value_row("difference coefficient", d))
    return out


def _parse_ladder(cfg: RunConfig, a, m) -> list:
    spec = cfg.ladder
    if spec is None or spec.strip().lstrip("-").isdigit():
        depth = 2 if spec is None else abs(int(spec))
        floor = _floor(cfg) if cfg.floor is not None else Fraction(-cfg.N - depth)
        return default_ladder(a.order, m, a.n, cfg.N, floor)
    out = []
    for item in spec.split(","):
        try:
            e, l = item.split(":")
            out.append((Fraction(e.strip()), int(l)))
        except ValueError as exc:
            raise UsageError(f"bad ladder slot {item!r}; expected EXP:LOG") from exc
    return out


def cmd_fit(cfg: RunConfig):
    a = _symbol(cfg, cfg.symbol, "--symbol")
    p = _operator(cfg)
    _, m = p.radial_leading()
    ladder = _parse_ladder(cfg, a, m)
    symbolic = None
    if cfg.p is None:
        check_model_order(a, cfg.m)
        symbolic = model_trace_expansion(a, cfg.m, cfg.N, floor=min(s[0] for s in ladder))
    sampler = RaySampler(theta=cfg.theta, t0=cfg.t0, rho=cfg.rho, S=len(ladder) + 4)
    lams, vals = sample_values(sampler, lambda lam: numeric_trace(a, p, cfg.N, lam))
    report = fit_expansion(lams, vals, ladder, symbolic, compare_above=-cfg.N)
    return {"command": "fit", "symbol": format_symbol(a), "p": format_symbol(p), "passed": report.passed,
            "report": report.to_json(), "rows": report.to_json()["slots"], "_csv": report.to_csv()}


def cmd_verify(cfg: RunConfig) -> dict:
    from .acceptance import run_suite

    try:
        results = run_suite(cfg.only, corrupt_alpha=cfg.corrupt_alpha)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    return {"command": "verify", "passed": all(r.passed for r in results),
            "criteria": [r.to_json() for r in results],
            "rows": [{k: v for k, v in r.to_json().items() if k != "details"} for r in results],
            "_lines": [r.line() for r in results]}


HANDLERS = {
    "fp": cmd_fp, "res": cmd_res, "logsym": cmd_logsym, "expand": cmd_expand,
    "c0": cmd_c0, "defect": cmd_defect, "fit": cmd_fit, "verify": cmd_verify,
}


# --- output ------------------------------------------------------------------

def _flatten(v):
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True)
    if isinstance(v, list):
        return ";".join(str(x) for x in v)
    return v


def _pretty_value(v: dict) -> str:
    if v.get("kind") == "exact":
        return f"{v['rational']}*pi^{v['pi_power']}" if v["pi_power"] else v["rational"]
    if "fitted" in v:
        return f"{v['fitted']!r} (symbolic {v.get('symbolic')!r})"
    if "value" in v:
        return str(v["value"]) + (f" +- {v['error']}" if "error" in v else "")
    return ", ".join(f"{k}={val}" for k, val in v.items())


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        clean = {k: v for k, v in report.items() if not k.startswith("_")}
        return json.dumps(clean, indent=2, default=str) + "\n"
    if fmt == "csv":
        if "_csv" in report:
            return report["_csv"]
        rows = report.get("rows", [])
        buf = io.StringIO()
        keys = []
        for r in rows:
            keys += [k for k in r if k not in keys]
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _flatten(r.get(k, "")) for k in keys})
        return buf.getvalue()
    # pretty
    if "_lines" in report:
        return "\n".join(report["_lines"]) + "\n"
    lines = [f"{report['command']}"]
    for k in ("symbol", "p", "p2", "text"):
        if k in report:
            lines.append(f"  {k}: {report[k]}")
    for r in report.get("rows", []):
        label = r.get("quantity") or " ".join(f"{k}={r[k]}" for k in ("exponent", "degree", "log_power") if k in r)
        val = _pretty_value(r.get("coefficient", r))
        extra = f"  [{r['verdict']}]" if "verdict" in r else ""
        if "angular" in r:
            extra += "  angular: " + "; ".join(r["angular"])
        lines.append(f"  {label}: {val}{extra}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = load_config(argv)
        set_precision(cfg.precision)
        report = HANDLERS[cfg.command](cfg)
    except (UsageError, ParseError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        print(f"symbol grammar: {GRAMMAR_EXCERPT}", file=sys.stderr)
        return 2
    except (SymbolError, ExpansionError, LaurentError, OracleError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = render(report, cfg.format)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg.command in ("verify", "fit") and not report.get("passed", True):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
