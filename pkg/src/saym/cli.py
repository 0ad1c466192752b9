"""Command-line front end.

Every subcommand writes one JSON report (sorted keys, embedded run
configuration and schema version) to stdout or ``--out``.  Exit status is 0 on
success, 1 when a verification fails and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

SCHEMA_VERSION = "1"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    n: int = 8
    Lambda: float = 1.0
    xi: float = 1.0
    cutoff: str = "gauss"
    c: list = field(default_factory=list)
    seed: int = 0

    def validate(self, min_n: int = 8) -> None:
        if self.n % 2 or self.n < min_n:
            raise UsageError(f"n must be even and at least {min_n}, got {self.n}")
        if not self.Lambda > 0:
            raise UsageError("lambda must be positive")
        if not self.xi > 0:
            raise UsageError("xi must be positive")

    def c_vector(self) -> list[float]:
        degree = self.n // 2 - 2
        c = list(self.c) or [1.0] * (degree + 1)
        if len(c) < degree + 1:
            raise UsageError(f"need {degree + 1} values in --c for n={self.n}")
        return c[: degree + 1]

    def as_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("Lambda")
        return d


_CONFIG_KEYS = {"n": int, "lambda": float, "xi": float, "cutoff": str, "c": str, "seed": int}


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _CONFIG_KEYS[key](val)
    return out


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def build_config(args) -> RunConfig:
    merged = read_config_file(args.config) if args.config else {}
    for key in ("n", "lambda", "xi", "cutoff", "c", "seed"):
        val = getattr(args, key.replace("-", "_") if key != "lambda" else "lam", None)
        if val is not None:
            merged[key] = val
    cfg = RunConfig()
    if "n" in merged:
        cfg.n = int(merged["n"])
    if "lambda" in merged:
        cfg.Lambda = float(merged["lambda"])
    if "xi" in merged:
        cfg.xi = float(merged["xi"])
    if "cutoff" in merged:
        cfg.cutoff = merged["cutoff"]
    if "c" in merged:
        cfg.c = _floats(merged["c"]) if isinstance(merged["c"], str) else list(merged["c"])
    if "seed" in merged:
        cfg.seed = int(merged["seed"])
    return cfg


# --------------------------------------------------------------------------
# subcommands; each returns (report, ok)
# --------------------------------------------------------------------------


def _cutoff(cfg: RunConfig):
    from .cutoff import DomainError, parse_cutoff

    try:
        return parse_cutoff(cfg.cutoff)
    except (DomainError, OSError) as exc:
        raise UsageError(str(exc)) from exc


def _form_factor(cfg: RunConfig):
    from .cutoff import MomentTable, build_form_factor

    g = _cutoff(cfg)
    degree = cfg.n // 2 - 2
    table = MomentTable.compute(g, [-2 * k for k in range(degree + 1)])
    return build_form_factor(table, cfg.c_vector(), cfg.n, cfg.Lambda), table


def cmd_moments(args, cfg):
    g = _cutoff(cfg)
    ks = [int(k) for k in args.k]
    out = []
    for k in ks:
        m = g.moment(k)
        out.append({"k": k, "value": m.value, "error": m.error})
    report = out[0] if len(out) == 1 else {"moments": out}
    report["cutoff"] = g.label
    return report, True


def cmd_verify_lemma(args, cfg):
    from .cutoff import verify_moment_lemma

    rep = verify_moment_lemma(_cutoff(cfg), args.kmax)
    return rep.as_dict(), rep.ok


def cmd_form_factor(args, cfg):
    from .cutoff import positivity_scan

    cfg.validate()
    phi, table = _form_factor(cfg)
    psq = _floats(args.psq) if args.psq else [0.0, cfg.Lambda**2]
    lo, hi = _floats(args.scan_range) if args.scan_range else (0.0, 100.0 * cfg.Lambda**2)
    scan = positivity_scan(phi, lo, hi)
    return {
        "form_factor": phi.as_dict(),
        "moments": table.as_dict(),
        "values": [{"psq": x, "phi": float(phi(x))} for x in psq],
        "positivity": scan.as_dict(),
    }, scan.positive


def cmd_propagator(args, cfg):
    from .propagators import (
        Momentum,
        gauge_propagator,
        ghost_propagator,
        inversion_check,
        scan_csv,
        uv_scaling_exponent,
    )

    cfg.validate()
    phi, _ = _form_factor(cfg)
    if args.scan:
        return scan_csv(phi, cfg.xi, cfg.Lambda * 1e-1, cfg.Lambda * 1e3, seed=cfg.seed), True
    comps = _floats(args.momentum) if args.momentum else [1.0, 0.0, 0.0, 0.0]
    if len(comps) != 4:
        raise UsageError("--momentum needs four components")
    p = Momentum(tuple(comps))
    D = gauge_propagator(p, cfg.xi, phi)
    resid = inversion_check(p, cfg.xi, phi)
    slope_gauge = uv_scaling_exponent(phi, cfg.xi, "gauge", seed=cfg.seed)
    slope_ghost = uv_scaling_exponent(phi, cfg.xi, "ghost", seed=cfg.seed)
    expected = -(cfg.n - 2)
    ok = resid < 1e-12 and abs(slope_gauge - expected) < 0.05 and abs(slope_ghost - expected) < 0.05
    return {
        "momentum": comps,
        "gauge": {"tensor": D.tensor.tolist(), "color": str(D.color)},
        "ghost": float(ghost_propagator(p, phi)),
        "inversion_residual": resid,
        "uv_exponent": {"gauge": slope_gauge, "ghost": slope_ghost, "expected": expected},
    }, ok


def cmd_power_count(args, cfg):
    from .powercount import GraphError, classify

    if cfg.n % 2 or cfg.n < 4:
        raise UsageError("n must be even and at least 4")
    try:
        rep = classify(cfg.n, args.loops, args.max_external, not args.connected)
    except GraphError as exc:
        raise UsageError(str(exc)) from exc
    if args.format == "table":
        return _power_table(rep), rep.verdict
    return rep.as_dict(with_graphs=args.graphs), rep.verdict


def _power_table(rep) -> str:
    lines = [f"n={rep.n} Lmax={rep.Lmax} graphs={len(rep.per_graph)} "
             f"mismatches={rep.mismatches} verdict={rep.verdict}",
             f"{'L':>2} {'E':>2} {'Et':>2} {'omega':>6} {'count':>6}"]
    counts: dict = {}
    for e in rep.per_graph:
        key = (e.L, e.E, e.E_ghost, e.omega_direct)
        counts[key] = counts.get(key, 0) + 1
    for (L, E, Et, w), k in sorted(counts.items()):
        lines.append(f"{L:>2} {E:>2} {Et:>2} {w:>6} {k:>6}")
    return "\n".join(lines) + "\n"


def cmd_brst_check(args, cfg):
    from .action import build_action, gauge_fixed_action
    from .brst import BRSTConfig, Variant, check_invariance, fermion_roundtrip, nilpotency_report
    from .symfield import to_text

    cfg.validate()
    variant = Variant(args.variant)
    bcfg = BRSTConfig(variant)
    exp = build_action(cfg.n)
    invariant = check_invariance(gauge_fixed_action(exp, bcfg), bcfg)
    nil = {k: (to_text(v) if v.terms else "0") for k, v in nilpotency_report(bcfg).items()}
    report = {"variant": variant.value, "invariance": invariant, "nilpotency": nil}
    ok = invariant
    if variant is Variant.EXTENDED:
        rt = fermion_roundtrip(cfg.n // 2 - 2, bcfg)
        report["fermion_roundtrip"] = rt
        report["aux_sign"] = bcfg.aux_sign
        ok = ok and rt and all(v == "0" for v in nil.values())
    return report, ok


def cmd_expand(args, cfg):
    from .action import build_action, quadratic_part
    from .symfield import to_text

    cfg.validate()
    exp = build_action(cfg.n)
    texts = {
        "S0": to_text(quadratic_part(exp.invariant)),
        "S_gf": to_text(exp.gauge_fixing),
        "S_gh": to_text(exp.ghost),
    }
    if args.format == "text":
        return "".join(f"## {k}\n{v}" for k, v in texts.items()), True
    return texts, True


def cmd_renorm(args, cfg):
    from .action import ActionError, compare_modes

    cfg.validate()
    try:
        dz = Fraction(args.delta_z).limit_denominator(10**12)
        res = compare_modes(dz, cfg.n)
    except (ActionError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    K = cfg.n // 2 - 2
    modes = {}
    for name in ("fieldAndCoupling", "cutoffShift"):
        modes[name] = {str(k): str(res[name]["after"][k]) for k in range(K + 1)}
    chosen = res[args.mode]
    return {
        "delta_z": args.delta_z,
        "mode": args.mode,
        "quadratic_before": {str(k): str(v) for k, v in chosen["before"].items()},
        "quadratic_after": {str(k): str(v) for k, v in chosen["after"].items()},
        "modes": modes,
        "agree_per_k": {str(k): v for k, v in res["agree_per_k"].items()},
        "gA_invariant": res["gA_invariant"],
        "consistency": res["consistent"],
    }, res["consistent"]


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--n", type=int, help="truncation order (even)")
    p.add_argument("--lambda", dest="lam", type=float, help="cutoff scale")
    p.add_argument("--xi", type=float, help="gauge parameter")
    p.add_argument("--cutoff", help="gauss | pointmass:w@t,... | density:exp | density:gamma:a | table:path")
    p.add_argument("--c", help="comma-separated constants c_k")
    p.add_argument("--seed", type=int)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="saym", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="moments f_k of the cutoff density")
    _common(p)
    p.add_argument("--k", action="append", required=True, help="moment index (repeatable)")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("verify-moment-lemma", help="compare moments with derivatives at zero")
    _common(p)
    p.add_argument("--kmax", type=int, default=4)
    p.set_defaults(func=cmd_verify_lemma)

    p = sub.add_parser("form-factor", help="build and evaluate the form factor")
    _common(p)
    p.add_argument("--psq", help="comma-separated p² values")
    p.add_argument("--scan-range", help="lo,hi for the positivity scan")
    p.set_defaults(func=cmd_form_factor)

    p = sub.add_parser("propagator", help="propagators, inversion and UV scaling")
    _common(p)
    p.add_argument("--momentum", help="x0,x1,x2,x3")
    p.add_argument("--scan", action="store_true", help="emit CSV of |p|, ‖D‖, |D̃|")
    p.set_defaults(func=cmd_propagator)

    p = sub.add_parser("power-count", help="enumerate graphs and classify divergences")
    _common(p)
    p.add_argument("--loops", type=int, default=2)
    p.add_argument("--max-external", type=int, default=6)
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--one-pi", dest="connected", action="store_false")
    grp.add_argument("--connected", dest="connected", action="store_true")
    p.add_argument("--format", choices=["json", "table"], default="json")
    p.add_argument("--graphs", action="store_true", help="include graph structures")
    p.set_defaults(func=cmd_power_count, connected=False)

    p = sub.add_parser("brst-check", help="BRST invariance, nilpotency and fermion roundtrip")
    _common(p)
    p.add_argument("--variant", choices=["minimal", "extended"], default="extended")
    p.set_defaults(func=cmd_brst_check)

    p = sub.add_parser("expand", help="print S0, S_gf and S_gh in text form")
    _common(p)
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("renorm", help="counterterm absorption bookkeeping")
    _common(p)
    p.add_argument("--delta-z", type=float, required=True)
    p.add_argument("--mode", choices=["fieldAndCoupling", "cutoffShift"], default="fieldAndCoupling")
    p.set_defaults(func=cmd_renorm)
    return parser


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return x.item()
    return x


def run(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        report, ok = args.func(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"saym: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(report, str):
        text = report
    else:
        report = dict(report)
        report["schema_version"] = SCHEMA_VERSION
        report["command"] = args.command
        report["config"] = cfg.as_dict()
        text = json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
