"""Command-line front end and config-driven runner.

A config is a JSON object::

    {"sequence": {"kind": "powers", "a": 2},
     "seed": 0, "precision_bits": 128, "horizon": 40,
     "analyses": [{"kind": "obstruct"}, {"kind": "measure", "measure": {"kind": "riesz"}}]}

Every analysis adds one or more keyed entries to the report.  A failing
analysis is recorded in its entry and does not stop the others; the exit
code reports the most severe failure (1 config, 2 budget, 3 invariant).
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from math import ceil, log2
from typing import Any, Callable

from . import measures, obstruct, odometer, rankone, rotation, sequences
from ._exact import as_fraction
from .contfrac import ContinuedFraction
from .errors import ConstructionError, InvariantViolation, PrecisionError, ResourceError
from .report import Entry, Report, bracket, emit, jsonable, render

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_INVARIANT = 0, 1, 2, 3
DEFAULTS = {"seed": 0, "precision_bits": 128, "horizon": 40, "tolerance": "1/1000000"}


class ConfigError(ConstructionError):
    """A config field is missing, mistyped or out of range."""


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, InvariantViolation):
        return EXIT_INVARIANT
    if isinstance(exc, (ResourceError, PrecisionError)):
        return EXIT_BUDGET
    return EXIT_CONFIG


def _field(obj: dict, key: str, path: str, kind: type | tuple = object, default: Any = ...,
           positive: bool = False):
    if key not in obj:
        if default is ...:
            raise ConfigError(f"{path}.{key}: required field is missing")
        return default
    v = obj[key]
    if kind is not object and (not isinstance(v, kind) or isinstance(v, bool) and kind is not bool):
        raise ConfigError(f"{path}.{key}: expected {getattr(kind, '__name__', kind)}, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{path}.{key}: must be positive, got {v!r}")
    return v


def parse_config(text: str, source: str = "<config>") -> dict:
    """Parse and validate a JSON config, with line/field diagnostics."""
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return validate_config(cfg)


def validate_config(cfg: Any) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("config: top level must be an object")
    out = dict(DEFAULTS)
    out.update(cfg)
    for key in ("seed",):
        _field(out, key, "config", int)
    for key in ("precision_bits", "horizon"):
        _field(out, key, "config", int, positive=True)
    try:
        tol = as_fraction(out["tolerance"])
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError(f"config.tolerance: not a rational: {out['tolerance']!r}") from None
    if tol <= 0:
        raise ConfigError("config.tolerance: must be positive")
    analyses = _field(out, "analyses", "config", list, default=[])
    for i, a in enumerate(analyses):
        path = f"config.analyses[{i}]"
        if not isinstance(a, dict):
            raise ConfigError(f"{path}: must be an object")
        kind = _field(a, "kind", path, str)
        if kind not in RUNNERS:
            raise ConfigError(f"{path}.kind: unknown analysis {kind!r} (known: {', '.join(sorted(RUNNERS))})")
        if "sequence" not in a and "sequence" not in out and kind in NEEDS_SEQUENCE:
            raise ConfigError(f"{path}: analysis {kind!r} needs a sequence")
    out["analyses"] = analyses
    return out


# -------------------------------------------------------------- analyses


class Context:
    def __init__(self, cfg: dict, analysis: dict, path: str):
        self.cfg, self.a, self.path = cfg, analysis, path
        self.prec = int(cfg["precision_bits"])
        self.horizon = int(cfg["horizon"])
        self.seed = int(cfg["seed"])
        self.tol = as_fraction(cfg["tolerance"])

    def get(self, key, kind=object, default=..., positive=False):
        return _field(self.a, key, self.path, kind, default, positive)

    def sequence(self) -> sequences.IntSequence:
        spec = self.a.get("sequence", self.cfg.get("sequence"))
        if spec is None:
            raise ConfigError(f"{self.path}: no sequence given")
        return sequences.from_spec(spec)


def _run_seq(ctx: Context):
    seq = ctx.sequence()
    count = ctx.get("terms", int, min(ctx.horizon, 20), positive=True)
    horizon = ctx.get("horizon", int, ctx.horizon, positive=True)
    samples = ctx.get("N_samples", list, [10**3, 10**4, 10**5])
    gr = sequences.growth_report(seq, samples, horizon=max(2, horizon), tail=max(1, horizon // 4))
    yield "terms", Entry("sequence terms", result={"spec": seq.to_spec(), "terms": seq.terms(seq.available(count))})
    yield "growth", Entry("gap divergence criterion and Sidon density bound", result=gr)


def _run_obstruct(ctx: Context):
    seq = ctx.sequence()
    w = obstruct.differencing_obstruction(
        seq, K_max=ctx.get("K_max", int, 4), C_max=ctx.get("C_max", int, 8),
        M=ctx.get("M", int, 1), W=ctx.get("W", int, 16))
    res = {"found": w is not None}
    if w is not None:
        res.update(coefficients=list(w.coefficients), constant=w.constant,
                   window_start=w.window_start, window_len=w.window_len, reverified=w.verify(seq))
    yield "linear_form", Entry("linear-form obstruction (constant linear combination of consecutive terms)",
                               result=res)
    div, min_gap = sequences.gap_divergence(seq, ctx.horizon)
    yield "gap_divergence", Entry("gap divergence criterion", result={"holds": div, "min_last_window_gap": min_gap,
                                                                       "horizon": ctx.horizon})
    weyl = ctx.get("weyl", dict, {})
    if weyl is not None:
        prof = obstruct.weyl_profile(seq, sample_count=int(weyl.get("samples", 8)), rng_seed=ctx.seed,
                                     M=int(weyl.get("M", 256)), threshold=float(weyl.get("threshold", 0.1)),
                                     prec=ctx.prec)
        yield "weyl", Entry("equidistribution obstruction (Weyl averages)", result={
            "horizon": prof.horizon, "threshold": prof.threshold,
            "equidistribution_evidence": prof.equidistribution_evidence,
            "max_abs_average": max(abs(a) for a in prof.averages)})
    ns = ctx.get("norm_sum", dict, None)
    if ns is not None:
        x = ns.get("x", "golden")
        xv = as_fraction(x) if isinstance(x, str) and "/" in x else ContinuedFraction.from_spec(x)
        s = obstruct.abs_norm_partial_sum(seq, xv, int(ns.get("M", ctx.horizon)))
        yield "norm_sum", Entry("partial sums of ||n_m x||", result={
            "horizon": s.horizon, "lower": s.lower, "upper": s.upper})
    ss = ctx.get("sumset", dict, None)
    if ss is not None:
        p = obstruct.sumset_density_probe(seq, ss.get("coefficients", [1, -1]), int(ss.get("N", 1000)))
        yield "sumset", Entry("sumset density heuristic", result={
            "coefficients": list(p.coefficients), "N": p.N, "density": p.density,
            "contains_zero": p.contains_zero})


def _gap_rows(profile) -> list[dict]:
    return [{"m": g.m, "n_m": g.n, **{f"gap_{k}": v for k, v in bracket(g.lower, g.upper).items()}}
            for g in profile]


def _run_measure(ctx: Context):
    spec = ctx.get("measure", dict)
    mu = measures.from_spec(spec)
    seq = ctx.sequence()
    m_min = ctx.get("M_min", int, 1, positive=True)
    m_max = ctx.get("M_max", int, ctx.horizon, positive=True)
    off = ctx.get("K_offset", int, 60)
    K = (lambda m: m + off) if isinstance(mu, measures.RieszFactors) else None
    prof = measures.rigidity_gap_profile(mu, seq, m_max, K=K, M_min=m_min, prec=ctx.prec)
    yield "gap_profile", Entry("spectral rigidity criterion: 1 - Re nu^(n_m) along the sequence",
                               result={"measure": spec, "gap_profile": _gap_rows(prof)})
    if isinstance(mu, measures.RieszFactors):
        Ks = ctx.get("atom_K", list, [50, 100, 200])
        yield "atom_bound", Entry("atom-mass bound for the Riesz product", result={
            "bounds": [{"K": k, "bound": mu.atom_bound(int(k))} for k in Ks]})
    wn = ctx.get("wiener_N", int, 0)
    if wn:
        yield "wiener", Entry("Wiener lemma average of |nu^(n)|^2",
                              result={"N": wn, "average": measures.wiener_average(mu, wn)})


def _run_rankone(ctx: Context):
    spec = rankone.from_spec(ctx.get("tower", (dict, str), "chacon"))
    M = ctx.get("M", int, 6, positive=True)
    rows = [{"m": m, "height": spec.height(m), "mass": spec.mass(m)} for m in range(spec.start, M + 1)]
    yield "heights", Entry("rank-one tower heights and masses", result={"label": spec.label, "towers": rows})
    d = ctx.get("delta", dict, None)
    if d is not None:
        br = rankone.delta_mass(spec, int(d["k"]), d.get("levels", [0]), int(d["n"]), tol=ctx.tol)
        yield "delta", Entry("rigidity of a level union under T^n", result={
            "n": br.n, "stage": br.stage, "mu_E": br.mu_E,
            "delta_lower": br.delta_lower, "delta_upper": br.delta_upper})
    kc = ctx.get("chacon_check", int, None)
    if kc is not None:
        if rankone.chacon_height(kc) > rankone.MAX_WORD:
            raise ResourceError(f"Chacon word B_{kc} exceeds the word budget {rankone.MAX_WORD}")
        checks = [{"k": k, "m": m, "disjoint": rankone.chacon_nonrecurrence_check(k, m)}
                  for k in range(2, kc + 1) for m in range(1, k)]
        yield "chacon", Entry("symbolic non-recurrence of the Chacon map along h_m - 1",
                              result={"checks": checks, "all": all(c["disjoint"] for c in checks)})


PSI: dict[str, Callable[[int], int]] = {
    "mlog": lambda m: m * ceil(log2(m + 1)),
    "m2": lambda m: m * m,
}


def _run_rotation(ctx: Context):
    alpha = ContinuedFraction.from_spec(ctx.get("alpha", (str, list, dict), "golden"))
    nconv = ctx.get("convergents", int, 0)
    if nconv:
        rows = []
        for n in range(1, nconv + 1):
            p, q = alpha.convergent(n)
            lo, hi = alpha.norm_interval(q, 64)
            rows.append({"n": n, "p_n": p, "q_n": q, "q_norm_upper": q * hi, "within_one": q * hi <= 1})
        yield "convergents", Entry("continued-fraction denominators as rigidity times",
                                   result={"alpha": alpha, "rows": rows})
    for eps in ctx.get("syndetic_eps", list, []):
        c = rotation.syndeticity_constant(alpha, as_fraction(eps))
        yield f"syndetic[{eps}]", Entry("syndeticity of return times to an arc", result={
            "eps": c.eps, "N": c.N, "N_upper": c.N_upper, "q_k": c.q_k, "method": c.method})
    slow = ctx.get("slow", dict, None)
    if slow is not None:
        s = rotation.slow_rigidity_sequence(alpha, K_max=int(slow.get("K_max", 4)))
        yield "slow", Entry("rigidity sequence with slowly decaying density", result={
            "verified": s.verify(),
            "checkpoints": [{"k": c.k, "arc": c.arc, "N_k": c.N_k, "M_k": c.M_k,
                             "density": c.density} for c in s.checkpoints]})
    gr = ctx.get("growth", dict, None)
    if gr is not None:
        name = gr.get("psi", "mlog")
        if name not in PSI:
            raise ConfigError(f"{ctx.path}.growth.psi: unknown growth rule {name!r}")
        g = rotation.bounded_growth_rigidity_sequence(alpha, PSI[name], L_max=int(gr.get("L_max", 4)),
                                                      max_terms=int(gr.get("max_terms", 200)))
        yield "growth", Entry("rigidity sequence with prescribed growth n_m <= C Psi(m)", result={
            "psi": name, "C": g.C, "verified": g.verify(), "count": len(g.terms),
            "complete": g.complete, "terms": g.terms[:50]})


def _run_odometer(ctx: Context):
    system = odometer.from_spec(ctx.get("system", dict, {"affine": [1, 2]}))
    mode = ctx.get("mode", str, "cocycle")
    if mode == "char":
        digits = ctx.get("digits", list, [1])
        x = system.point(digits)
        M = ctx.get("M", int, 8, positive=True)
        yield "char", Entry("characters of the odometer", result={
            "digits": digits, "angles": [{"m": m, "angle": odometer.character(m, x)} for m in range(M + 1)]})
    elif mode == "cocycle":
        K = ctx.get("K", int, 40, positive=True)
        f = odometer.good_function(system, K)
        m0_max = ctx.get("m0_max", int, min(30, f.trunc - 1), positive=True)
        rows = []
        for m0 in range(1, m0_max + 1):
            nb = odometer.cocycle_norm_bound(f, m0)
            rows.append({"m0": m0, "bound_holds": nb.holds, "bound": nb.bound,
                         **{f"norm2_{k}": v for k, v in bracket(nb.lower, nb.upper).items()}})
        yield "cocycle", Entry("L2 norm bound for cocycle sums along n_{m0}",
                               result={"K": K, "rows": rows, "all_hold": all(r["bound_holds"] for r in rows)})
    elif mode == "cobound":
        K = ctx.get("K", int, 100, positive=True)
        f = odometer.good_function(system, K)
        rep = odometer.coboundary_test(f)
        yield "cobound", Entry("L2 coboundary criterion sum |n_m a_{n_m}|^2", result={
            "K": K, "total": rep.total, "fit": rep.fit, "diverging": rep.diverging,
            "equals_harmonic": rep.total == odometer.harmonic(K)})
    elif mode == "delta":
        t0 = ctx.get("t0", int, 1)
        rs = ctx.get("r", list, [1, 2, 3, 6])
        yield "delta", Entry("cylinder displacement p(T^r A D A)", result={"t0": t0, "rows": [
            {"r": r, "k_r": odometer.trailing_zero_digits(system, r),
             "delta": odometer.cylinder_delta(system, r, t0)} for r in rs]})
    elif mode == "nonrecurrent":
        t = ctx.get("t", int, 2, positive=True)
        depth = ctx.get("depth", int, t + 4, positive=True)
        cyc, A = odometer.base_cylinder(system, t, depth)
        res = rankone.nonrecurrent_set_from_rigidity(
            cyc, A, system.heights(), budget=as_fraction(ctx.get("budget", str, "1/100")),
            count=ctx.get("count", int, 20, positive=True))
        yield "nonrecurrent", Entry("non-recurrent set built from a rigidity sequence", result={
            "indices": res.indices, "p_A": res.p_A, "p_C": res.p_C, "delta_sum": res.delta_sum,
            "intersections_zero": not any(res.intersections)})
    elif mode == "experiment":
        beta = as_fraction(ctx.get("beta", str, "3/2"))
        data = odometer.bounded_ratio_experiment(beta, seed=ctx.seed)
        yield "experiment", Entry("bounded non-integer ratios: lowest greedy digit of finite sums (no verdict)",
                                  result=data)
    else:
        raise ConfigError(f"{ctx.path}.mode: unknown odometer mode {mode!r}")


RUNNERS = {
    "seq": _run_seq,
    "obstruct": _run_obstruct,
    "measure": _run_measure,
    "rankone": _run_rankone,
    "rotation": _run_rotation,
    "odometer": _run_odometer,
}
NEEDS_SEQUENCE = {"seq", "obstruct", "measure"}


def run(cfg: dict) -> tuple[Report, int]:
    """Run every analysis in a validated config; return the report and exit code."""
    cfg = validate_config(cfg)
    report = Report(config=cfg)
    code = EXIT_OK
    timings = {}
    for i, a in enumerate(cfg["analyses"]):
        name = a.get("name", a["kind"])
        prefix = f"{i:02d}.{name}"
        ctx = Context(cfg, a, f"config.analyses[{i}]")
        t0 = time.perf_counter()
        try:
            for key, entry in RUNNERS[a["kind"]](ctx):
                report.add(f"{prefix}.{key}", entry)
        except (ConstructionError, ResourceError, PrecisionError, InvariantViolation,
                ValueError, KeyError, TypeError) as exc:
            c = _exit_code(exc)
            code = max(code, c)
            err = {"type": type(exc).__name__, "message": str(exc), "exit_code": c}
            partial = getattr(exc, "partial", None)
            if partial is not None:
                err["partial"] = jsonable(partial)
            report.add(f"{prefix}.error", Entry(f"{a['kind']} analysis", status="error", error=err))
        timings[prefix] = round(time.perf_counter() - t0, 6)
    report.meta = {"wall_time_s": timings, "budget": {k: cfg[k] for k in DEFAULTS},
                   "exit_code": code}
    return report, code


# ------------------------------------------------------------------ argparse


def _spec(text: str):
    """JSON if it parses, otherwise the bare string (e.g. "chacon", "golden")."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", metavar="FILE", default=d, help="JSON config file")
    parser.add_argument("--seed", type=int, default=d)
    parser.add_argument("--precision-bits", type=int, default=d)
    parser.add_argument("--horizon", type=int, default=d)
    parser.add_argument("--out", metavar="DIR", default=d, help="write data files here instead of stdout")
    parser.add_argument("--format", choices=["json", "csv", "plot-csv"], default=d)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rigidseq", description="Rigidity and non-recurrence toolkit")
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)

    s = sub.add_parser("seq", parents=[common], help="terms and growth statistics")
    s.add_argument("sequence", type=_spec)
    s.add_argument("--terms", type=int, default=20)

    s = sub.add_parser("obstruct", parents=[common], help="obstruction tests")
    s.add_argument("sequence", type=_spec)
    s.add_argument("--K-max", type=int, default=4)
    s.add_argument("--C-max", type=int, default=8)
    s.add_argument("--W", type=int, default=16)

    s = sub.add_parser("measure", parents=[common], help="rigidity gap profile of a circle measure")
    s.add_argument("measure", type=_spec)
    s.add_argument("--sequence", type=_spec, required=True)
    s.add_argument("--m-min", type=int, default=1)
    s.add_argument("--m-max", type=int)
    s.add_argument("--k-offset", type=int, default=60)

    s = sub.add_parser("rankone", parents=[common], help="cutting-and-stacking towers")
    s.add_argument("tower", type=_spec, nargs="?", default="chacon")
    s.add_argument("--M", type=int, default=6)
    s.add_argument("--chacon-check", type=int)

    s = sub.add_parser("rotation", parents=[common], help="irrational rotation constructions")
    s.add_argument("alpha", type=_spec, nargs="?", default="golden")
    s.add_argument("--convergents", type=int, default=0)
    s.add_argument("--syndetic", action="append", default=[], metavar="EPS")
    s.add_argument("--slow", type=int, metavar="K_MAX")
    s.add_argument("--growth", type=int, metavar="L_MAX")
    s.add_argument("--psi", choices=sorted(PSI), default="mlog")

    s = sub.add_parser("odometer", parents=[common], help="odometer characters, cocycles and cylinders")
    s.add_argument("mode", choices=["char", "cocycle", "cobound", "delta", "nonrecurrent", "experiment"])
    s.add_argument("--system", type=_spec, default={"affine": [1, 2]})
    s.add_argument("--K", type=int)
    s.add_argument("--t0", type=int, default=1)
    s.add_argument("--r", type=int, action="append")
    s.add_argument("--digits", type=int, nargs="*")
    s.add_argument("--beta", default="3/2")

    sub.add_parser("run", parents=[common], help="run a config file")
    return p


def _analysis_from_args(args) -> dict | None:
    c = args.command
    if c == "seq":
        return {"kind": "seq", "sequence": args.sequence, "terms": args.terms}
    if c == "obstruct":
        return {"kind": "obstruct", "sequence": args.sequence, "K_max": args.K_max,
                "C_max": args.C_max, "W": args.W}
    if c == "measure":
        a = {"kind": "measure", "measure": args.measure, "sequence": args.sequence,
             "M_min": args.m_min, "K_offset": args.k_offset}
        if args.m_max is not None:
            a["M_max"] = args.m_max
        return a
    if c == "rankone":
        a = {"kind": "rankone", "tower": args.tower, "M": args.M}
        if args.chacon_check is not None:
            a["chacon_check"] = args.chacon_check
        return a
    if c == "rotation":
        a = {"kind": "rotation", "alpha": args.alpha, "convergents": args.convergents,
             "syndetic_eps": args.syndetic}
        if args.slow is not None:
            a["slow"] = {"K_max": args.slow}
        if args.growth is not None:
            a["growth"] = {"L_max": args.growth, "psi": args.psi}
        return a
    if c == "odometer":
        a = {"kind": "odometer", "system": args.system, "mode": args.mode, "t0": args.t0, "beta": args.beta}
        if args.K is not None:
            a["K"] = args.K
        if args.r:
            a["r"] = args.r
        if args.digits is not None:
            a["digits"] = args.digits
        return a
    return None


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                cfg = parse_config(fh.read(), args.config)
        else:
            cfg = {}
        for key in ("seed", "precision_bits", "horizon"):
            if getattr(args, key, None) is not None:
                cfg[key] = getattr(args, key)
        analysis = _analysis_from_args(args)
        if analysis is not None:
            cfg["analyses"] = [analysis]
        elif not args.config:
            raise ConfigError("run: --config FILE is required")
        cfg = validate_config(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    report, code = run(cfg)
    fmt = args.format or "json"
    out = args.out or cfg.get("out")
    if out:
        emit(report, out, fmt)
    else:
        for name, text in render(report, fmt).items():
            if fmt != "json":
                sys.stdout.write(f"# {name}\n")
            sys.stdout.write(text)
    for key in report.failures:
        err = report.entries[key].error
        print(f"{key}: {err['type']}: {err['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
