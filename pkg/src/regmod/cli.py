"""Command-line front end: ``reproduce``, ``estimate``, ``sweep`` and ``verify``.

Exit codes: 0 success, 1 a golden value or consistency row failed, 2 usage
or parse error, 3 semantic error in the set specification.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field

from . import __version__
from .dual import dual_modulus
from .geometry import BasePointError
from .mappings import collection_to_map, map_modulus
from .moduli import (
    RadiusSchedule, check_metric_inequality, critical_exponent, modulus, sub_quotient, theta_rho,
)
from .presets import SpecError, load_spec, preset

CSV_COLUMNS = ["collection", "q", "kind", "method", "value", "verdict", "uncertainty",
               "wallclock_ms", "seed"]
CHECK_COLUMNS = ["target", "passed"]

# names printed for the collection constants; inputs accept either spelling
CONSTANT_NAME = {"semi": "theta", "sub": "zeta", "uniform": "theta_hat", "slope": "zeta_hat"}
KIND_ALIASES = {v: k for k, v in CONSTANT_NAME.items()}
ESTIMATE_KINDS = ("semi", "sub", "uniform", "slope", "theta_rho", "theta_rho_union",
                  "dual_uniform", "dual_subreg", "map_semi", "map_sub", "map_reg")


class UsageError(Exception):
    pass


def fmt(v):
    """Six significant digits; ``inf`` and ``nan`` spelled out; ``None`` empty."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.6g}"
    return str(v)


def _json_value(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, (int, float)):
        v = float(v)
        if not math.isfinite(v):
            return fmt(v)
        return float(f"{v:.6g}")
    return v


@dataclass
class RunConfig:
    command: str
    example: str = None
    spec: str = None
    q: list = field(default_factory=list)
    kinds: list = field(default_factory=list)
    rho: list = field(default_factory=list)
    schedule: RadiusSchedule = None
    fmt: str = "json"
    seed: int = 42
    out: str = None
    timing: bool = False

    def echo(self):
        s = self.schedule
        return {"command": self.command, "example": self.example, "spec": self.spec,
                "q": self.q, "kinds": self.kinds, "rho": self.rho, "format": self.fmt,
                "seed": self.seed, "schedule": {"rho0": s.rho0, "shrink": s.shrink, "steps": s.steps,
                                                "samples_per_radius": s.samples_per_radius}}


class Report:
    """Rows of results plus the configuration that produced them."""

    def __init__(self, cfg: RunConfig, collection: str):
        self.cfg = cfg
        self.collection = collection
        self.rows = []
        self.checked = cfg.command in ("reproduce", "verify")

    def add(self, q, kind, method, value, verdict, uncertainty=None, ms=None, target=None,
            passed=None, notes=None):
        self.rows.append({"collection": self.collection, "q": q, "kind": kind, "method": method,
                          "value": value, "verdict": verdict, "uncertainty": uncertainty,
                          "wallclock_ms": ms if self.cfg.timing else None, "seed": self.cfg.seed,
                          "target": target, "passed": None if passed is None else bool(passed), "notes": notes or []})

    @property
    def failed(self):
        return any(r["passed"] is False for r in self.rows)

    def columns(self):
        return CSV_COLUMNS + (CHECK_COLUMNS if self.checked else [])

    def render(self):
        if self.cfg.fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(self.columns())
            for r in self.rows:
                w.writerow([fmt(r[c]) for c in self.columns()])
            return buf.getvalue()
        rows = []
        for r in self.rows:
            d = {c: _json_value(r[c]) for c in self.columns()}
            if r["notes"]:
                d["notes"] = list(r["notes"])
            rows.append(d)
        doc = {"tool": "regmod", "version": __version__, "config": self.cfg.echo(),
               "failed": self.failed, "rows": rows}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = (time.perf_counter() - self.t0) * 1e3


# ---------------------------------------------------------------------------
# argument handling


def _float_list(text):
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not vals or any(not v > 0 for v in vals):
        raise argparse.ArgumentTypeError("values must be positive")
    return vals


def _kind_list(text):
    out = []
    for t in text.split(","):
        t = t.strip()
        if not t:
            continue
        t = KIND_ALIASES.get(t, t)
        if t not in ESTIMATE_KINDS:
            raise argparse.ArgumentTypeError(f"unknown kind {t!r}; choose from {', '.join(ESTIMATE_KINDS)}")
        out.append(t)
    if not out:
        raise argparse.ArgumentTypeError("no kinds given")
    return out


def build_parser():
    parser = argparse.ArgumentParser(prog="regmod", description="Estimate Hölder regularity constants of collections of sets.")
    parser.add_argument("--version", action="version", version=f"regmod {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--example", help="built-in collection: 2.1, 2.2, 2.3, 2.4 or orthogonal-halfspaces")
    src.add_argument("--spec", help="path to a JSON set specification")
    common.add_argument("--q", type=_float_list, help="comma-separated Hölder orders")
    common.add_argument("--kinds", type=_kind_list, help=f"comma-separated kinds from {', '.join(ESTIMATE_KINDS)}")
    common.add_argument("--rho", type=_float_list, default=[0.2, 0.4, 0.6], help="radii for theta_rho")
    common.add_argument("--steps", type=int, default=8)
    common.add_argument("--rho0", type=float, default=0.5)
    common.add_argument("--shrink", type=float, default=0.5)
    common.add_argument("--samples", type=int, default=2000, help="samples per radius")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--timing", action="store_true",
                        help="fill the wallclock_ms column (makes output run-dependent)")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("reproduce", parents=[common], help="check the golden constants of a built-in example")
    sub.add_parser("estimate", parents=[common], help="run estimators on a collection")
    sub.add_parser("sweep", parents=[common], help="scan a grid of orders and report the critical exponent")
    sub.add_parser("verify", parents=[common], help="run the cross-method consistency checks")
    return parser


def _config(args):
    try:
        sched = RadiusSchedule(args.rho0, args.shrink, args.steps, args.samples, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    defaults_q = {"sweep": [0.5, 1.0, 1.5, 2.0, 2.5]}.get(args.command, [0.5, 1.0])
    defaults_k = {"sweep": ["semi"]}.get(args.command, ["semi", "sub", "uniform"])
    return RunConfig(args.command, args.example, args.spec, args.q or defaults_q, args.kinds or defaults_k,
                     args.rho, sched, args.format, args.seed, args.out, args.timing)


def _collection(cfg):
    if cfg.example:
        try:
            return preset(cfg.example)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    if cfg.spec:
        return load_spec(cfg.spec)
    raise UsageError("one of --example or --spec is required")


# ---------------------------------------------------------------------------
# commands


def _estimate_modulus(report, coll, cfg, q, kind):
    with _Timer() as t:
        est = modulus(coll, q, kind, cfg.schedule)
    report.add(q, CONSTANT_NAME[kind], "slope" if kind == "slope" else "sampled", est.value,
               est.verdict, est.uncertainty, t.ms, notes=est.notes)
    return est


def run_estimate(cfg, coll):
    report = Report(cfg, coll.name)
    for kind in cfg.kinds:
        if kind in ("theta_rho", "theta_rho_union"):
            method = "definition" if kind == "theta_rho" else "union_form"
            for rho in cfg.rho:
                with _Timer() as t:
                    r = theta_rho(coll, rho, method, cfg.schedule, full=True)
                report.add(None, "theta_rho", f"{method}(rho={fmt(rho)})", r.value, "measured",
                           r.uncertainty, t.ms, notes=r.notes)
            continue
        for q in cfg.q:
            if kind in ("semi", "sub", "uniform", "slope"):
                _estimate_modulus(report, coll, cfg, q, kind)
            elif kind == "dual_uniform":
                if q != 1.0:
                    continue
                with _Timer() as t:
                    d = dual_modulus(coll, "uniform_q1", 1.0, cfg=cfg.schedule)
                report.add(q, "dual_uniform", f"dual(delta={fmt(d.radii['delta'])})", d.infimum_estimate,
                           d.verdict, d.uncertainty, t.ms, notes=d.notes)
            elif kind == "dual_subreg":
                if q > 1.0:
                    report.add(q, "dual_subreg", "dual", None, "skipped", notes=["needs q <= 1"])
                    continue
                with _Timer() as t:
                    d = dual_modulus(coll, "subreg_q", q, cfg=cfg.schedule)
                report.add(q, "dual_subreg", f"dual(rho={fmt(d.radii['rho'])},eps={fmt(d.radii['eps'])})",
                           d.infimum_estimate, d.verdict, d.uncertainty, t.ms, notes=d.notes)
            else:
                with _Timer() as t:
                    e = map_modulus(collection_to_map(coll), q, kind, cfg.schedule)
                report.add(q, kind, "map", e.value, e.verdict, e.uncertainty, t.ms, notes=e.notes)
    return report


def run_sweep(cfg, coll):
    report = Report(cfg, coll.name)
    grid = sorted(set(cfg.q))
    for kind in cfg.kinds:
        if kind not in ("semi", "sub", "uniform", "slope"):
            raise UsageError(f"sweep supports semi, sub, uniform and slope, not {kind!r}")
        times = {}

        def estimator(q, kind=kind):
            with _Timer() as t:
                est = modulus(coll, q, kind, cfg.schedule)
            times[q] = t.ms
            return est

        q_star, rows = critical_exponent(coll, kind, grid, cfg.schedule, estimator)
        for row in rows:
            report.add(row.q, CONSTANT_NAME[kind], "sweep", row.estimate.value, row.verdict,
                       row.estimate.uncertainty, times[row.q], notes=row.estimate.notes)
        report.add(None, CONSTANT_NAME[kind], "critical_exponent", q_star,
                   "none" if q_star is None else "found",
                   notes=[] if q_star is not None else ["property fails at the smallest order"])
    return report


# golden constants of the built-in examples
def _goldens(name):
    r2 = 1.0 / math.sqrt(2.0)
    if name == "example-2.1":
        rows = [("theta_rho", rho, math.sqrt(1 + rho * rho) - 1, "rel", 0.05) for rho in (0.2, 0.4, 0.6)]
        return rows + [("semi", 0.5, r2, "rel", 0.10), ("semi", 1.0, "zero", None, None),
                       ("sub", 1.0, 1.0, "rel", 0.10), ("uniform", 0.5, r2, "rel", 0.15)]
    if name == "example-2.2":
        a = 0.1
        return [("sub", 1.0, "zero", None, None), ("sub", 0.5, 1.0, "rel", 0.10),
                ("point_quotient", a, math.sqrt(4 * a ** 6 + a ** 4) / (2 * a ** 3 + a), "rel", 0.10),
                ("semi", 0.5, "zero", None, None), ("semi", 1.0, "zero", None, None)]
    if name == "example-2.3":
        return [("semi", 1.0, 0.9, "min", None), ("sub", 1.0, "zero", None, None)]
    if name == "example-2.4":
        return [("semi", 0.5, "divergent", None, None), ("semi", 1.0, "divergent", None, None),
                ("semi", 2.0, 1.0, "rel", 0.25), ("semi", 2.5, "zero", None, None)]
    if name == "orthogonal-halfspaces":
        return [("semi", 1.0, r2, "rel", 0.10), ("uniform", 1.0, r2, "rel", 0.10),
                ("sub", 1.0, r2, "rel", 0.10), ("dual_uniform", 1.0, r2, "rel", 0.10)]
    raise UsageError(f"no golden values for {name!r}")


def _judge(value, verdict, target, rule, tol):
    if isinstance(target, str):
        return verdict == target
    if rule == "min":
        return verdict in ("positive", "divergent") and value >= target
    return verdict == "positive" and abs(value - target) <= tol * abs(target)


def run_reproduce(cfg, coll):
    if not cfg.example:
        raise UsageError("reproduce needs --example")
    report = Report(cfg, coll.name)
    for kind, param, target, rule, tol in _goldens(coll.name):
        notes = []
        with _Timer() as t:
            if kind == "theta_rho":
                r = theta_rho(coll, param, "definition", cfg.schedule, full=True)
                value, verdict, unc, q, method = r.value, "positive", r.uncertainty, None, f"definition(rho={fmt(param)})"
            elif kind == "point_quotient":
                rho = 2 * param ** 3 + param
                value = sub_quotient(coll, [rho, 0.0], 1.0)
                verdict, unc, q, method = "positive", 0.0, 1.0, f"point(x=({fmt(rho)},0))"
            elif kind == "dual_uniform":
                d = dual_modulus(coll, "uniform_q1", 1.0, {"delta": 0.2}, cfg.schedule)
                value, unc, q, method = d.infimum_estimate, d.uncertainty, 1.0, "dual(delta=0.2)"
                verdict = "positive" if 0 < value < math.inf else d.verdict
            else:
                e = modulus(coll, param, kind, cfg.schedule)
                value, verdict, unc, q, method, notes = e.value, e.verdict, e.uncertainty, param, "sampled", e.notes
        label = CONSTANT_NAME.get(kind, kind)
        tgt = target if isinstance(target, str) else (f">={fmt(target)}" if rule == "min" else
                                                      f"{fmt(target)}±{fmt(100 * tol)}%")
        report.add(q, label, method, value, verdict, unc, t.ms, target=tgt,
                   passed=_judge(value, verdict, target, rule, tol), notes=notes)
    return report


def _le(a, b, slack):
    return a <= b + slack or (math.isinf(a) and math.isinf(b))


def _agree(a, b, slack):
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= slack + 1e-9 * max(1.0, abs(a), abs(b))


def _equal_estimates(a, b):
    if a.verdict == "zero" or b.verdict == "zero":
        return a.verdict == b.verdict
    return _agree(a.value, b.value, a.uncertainty + b.uncertainty)


def _metric_consistency(coll, est, sched):
    """Whether the metric inequality passes just below and fails just above the estimate."""
    trace = est.trace
    window = max(2, math.ceil(sched.steps / 3))
    delta = trace[-window][0]
    if est.verdict == "zero":
        tail = [v for _, v in trace[-window:]]
        gamma = max(2.0 * max(tail), 1e-6)
        rep = check_metric_inequality(coll, est.q, est.kind, gamma, delta, sched)
        return not rep.passed, f"gamma={fmt(gamma)} fails"
    if est.verdict == "divergent" or math.isinf(est.value):
        finite = [v for _, v in trace[-window:] if math.isfinite(v)]
        gamma = 0.5 * min(finite) if finite and min(finite) > 0 else 1.0
        rep = check_metric_inequality(coll, est.q, est.kind, gamma, delta, sched)
        return rep.passed, f"gamma={fmt(gamma)} passes"
    low = est.value - est.uncertainty
    low = low if low > 0 else est.value / 2
    high = (est.value + est.uncertainty) * (1 + 1e-6) + 1e-12
    rep = check_metric_inequality(coll, est.q, est.kind, low, delta, sched)
    # the same samples decide the upper side
    ok = rep.passed and rep.worst_ratio < high
    return ok, f"passes at {fmt(low)}, fails at {fmt(high)}"


def run_verify(cfg, coll):
    report = Report(cfg, coll.name)
    sched = cfg.schedule
    interior = coll.is_interior()
    est = {}
    for q in cfg.q:
        for kind in ("semi", "sub", "uniform"):
            with _Timer() as t:
                est[q, kind] = modulus(coll, q, kind, sched)
            e = est[q, kind]
            report.add(q, CONSTANT_NAME[kind], "sampled", e.value, e.verdict, e.uncertainty, t.ms, notes=e.notes)

    def row(q, name, method, value, ok, ms=None, notes=None):
        report.add(q, name, method, value, "pass" if ok else "fail", None, ms, "pass", bool(ok), notes)

    for q in cfg.q:
        a, b, c = est[q, "uniform"], est[q, "semi"], est[q, "sub"]
        bound = min(b.value, c.value)
        slack = a.uncertainty + (b.uncertainty if b.value <= c.value else c.uncertainty)
        ok = a.verdict == "zero" or _le(a.value, bound, slack)
        row(q, "theta_hat<=min(theta,zeta)", "inequality", a.value - bound if math.isfinite(bound) else 0.0, ok)

    planar = coll.dim == 2 and coll.space.metric == "euclidean"
    for rho in cfg.rho:
        with _Timer() as t:
            d = theta_rho(coll, rho, "definition", sched, full=True)
            u = theta_rho(coll, rho, "union_form", sched, full=True) if planar else None
        if u is not None:
            row(None, "theta_rho_agreement", f"definition_vs_union(rho={fmt(rho)})", abs(d.value - u.value),
                _agree(d.value, u.value, d.uncertainty + u.uncertainty), t.ms)
        if d.value <= 1:
            vals = [d.value ** q / rho for q in (0.5, 1.0, 1.5)]
            ok = all(x >= y - 1e-12 for x, y in zip(vals, vals[1:]))
            row(None, "q_monotonicity", f"theta_rho(rho={fmt(rho)})", d.value, ok)

    for q in cfg.q:
        for kind in ("semi", "sub", "uniform"):
            with _Timer() as t:
                ok, how = _metric_consistency(coll, est[q, kind], sched)
            row(q, f"metric_{CONSTANT_NAME[kind]}", "check_metric_inequality", est[q, kind].value, ok, t.ms, [how])

    if not interior:
        for kind in ("sub", "uniform"):
            with _Timer() as t:
                e = modulus(coll, 1.5, kind, sched)
            row(1.5, f"collapse_{CONSTANT_NAME[kind]}", "sampled", e.value, e.verdict == "zero", t.ms)
    else:
        row(1.5, "collapse", "skipped", None, True, notes=["interior base point"])

    if planar:
        with _Timer() as t:
            d = dual_modulus(coll, "uniform_q1", 1.0, cfg=sched)
            u = est[1.0, "uniform"] if (1.0, "uniform") in est else modulus(coll, 1.0, "uniform", sched)
        row(1.0, "dual_uniform_coherence", "dual_vs_theta_hat", d.infimum_estimate, d.holds == u.holds, t.ms)
        for q in [v for v in cfg.q if v <= 1.0]:
            with _Timer() as t:
                d = dual_modulus(coll, "subreg_q", q, cfg=sched)
            ok = (not d.holds) or est[q, "sub"].holds
            row(q, "dual_subreg_chain", "dual_implies_zeta", d.infimum_estimate, ok, t.ms,
                ["dual criterion holds at all tested scales" if d.holds else "dual criterion not satisfied"])

    F = collection_to_map(coll)
    for q in cfg.q:
        for mk, ck in (("map_semi", "semi"), ("map_sub", "sub"), ("map_reg", "uniform")):
            with _Timer() as t:
                m = map_modulus(F, q, mk, sched)
            row(q, f"map_equality_{CONSTANT_NAME[ck]}", mk, m.value, _equal_estimates(m, est[q, ck]), t.ms)
    return report


COMMANDS = {"reproduce": run_reproduce, "estimate": run_estimate, "sweep": run_sweep, "verify": run_verify}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        coll = _collection(cfg)
        report = COMMANDS[cfg.command](cfg, coll)
    except (UsageError, SpecError) as exc:
        print(f"regmod: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"regmod: error: {exc}", file=sys.stderr)
        return 2
    except BasePointError as exc:
        print(f"regmod: error: {exc}", file=sys.stderr)
        return 3
    text = report.render()
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 1 if report.failed else 0


if __name__ == "__main__":
    sys.exit(main())
