"""Command-line entry point: ``tauberkit {limits,abel-curve,cesaro-curve,mdp}``.

Sequences come from ``--preset NAME`` (``example1-majorant:K`` carries its
index) or ``--spec-file`` holding a JSON record; models for ``mdp`` likewise,
with presets ``single-state:SEQ``, ``chain:SEQ`` and ``cycle:c0,c1,...``.
Curves are written as CSV (LF line endings, exact integers as decimal
strings) to ``--out`` or stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from decimal import ROUND_CEILING, Decimal, localcontext
from fractions import Fraction

from . import abel, cesaro, mdp, seqcore, tauberian
from .bignum import DEFAULT_BITS
from .seqcore import SpecError

DIGITS = 30
EXIT_OK, EXIT_INCONSISTENT, EXIT_SPEC = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    bits: int = DEFAULT_BITS
    tol: Fraction = abel.DEFAULT_TOL
    delta: Fraction = Fraction(1, 1000)
    k_min: int | None = None
    k_max: int | None = None
    grid: str | None = None
    out: str | None = None

    def __post_init__(self):
        if self.bits < 64:
            raise SpecError("--precision-bits must be at least 64")
        if self.tol <= 0 or self.delta <= 0:
            raise SpecError("--tol and --delta must be positive")


def decimal_str(x: Fraction, digits: int = DIGITS) -> str:
    """``x`` to ``digits`` significant digits; plain integers stay exact."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(x.numerator) / Decimal(x.denominator))


def radius_str(r: Fraction, digits: int = 6) -> str:
    """Upward-rounded radius, widened by the rounding of a ``DIGITS``-digit value."""
    r = Fraction(r)
    with localcontext() as ctx:
        ctx.prec = digits
        ctx.rounding = ROUND_CEILING
        slack = Decimal(1).scaleb(-DIGITS + 1)
        return str(Decimal(r.numerator) / Decimal(r.denominator) + slack)


def _parse_rational(text: str, flag: str) -> Fraction:
    try:
        if text.startswith("2^"):
            return Fraction(2) ** int(text[2:])
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise SpecError(f"{flag}: not a rational number: {text!r}") from None


def parse_grid(text: str) -> tuple[Fraction, ...]:
    """``log:X0:X1:STEP`` gives ``1 - 10**-x``; otherwise comma-separated rationals."""
    if text.startswith("log:"):
        try:
            x0, x1, step = (float(v) for v in text[4:].split(":"))
        except ValueError:
            raise SpecError(f"--grid: expected log:X0:X1:STEP, got {text!r}") from None
        if step <= 0 or x1 < x0 or x0 <= 0:
            raise SpecError("--grid: need 0 < X0 <= X1 and STEP > 0")
        return tauberian.naive_grid(x0, x1, step)
    alphas = tuple(_parse_rational(v.strip(), "--grid") for v in text.split(",") if v.strip())
    if not alphas:
        raise SpecError("--grid: empty")
    for a in alphas:
        if not 0 < a < 1:
            raise SpecError(f"--grid: alpha {a} is outside (0, 1)")
    return alphas


def load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SpecError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _preset_doc(name: str) -> dict:
    if ":" in name:
        base, _, k = name.partition(":")
        try:
            return {"preset": base, "k": int(k)}
        except ValueError:
            raise SpecError(f"--preset: bad index in {name!r}") from None
    return {"preset": name}


def load_sequence(args) -> seqcore.BlockSequence:
    if (args.preset is None) == (args.spec_file is None):
        raise SpecError("give exactly one of --preset and --spec-file")
    if args.preset is not None:
        return seqcore.from_spec(_preset_doc(args.preset))
    try:
        return seqcore.from_spec(load_json(args.spec_file))
    except SpecError as exc:
        raise SpecError(f"{args.spec_file}: {exc}") from None


def load_model(args):
    if (args.preset is None) == (args.spec_file is None):
        raise SpecError("give exactly one of --preset and --spec-file")
    if args.spec_file is not None:
        try:
            return mdp.from_model_spec(load_json(args.spec_file))
        except SpecError as exc:
            raise SpecError(f"{args.spec_file}: {exc}") from None
    kind, _, rest = args.preset.partition(":")
    if kind == "cycle":
        return mdp.from_model_spec({"preset": "cycle", "costs": [c for c in rest.split(",") if c]})
    if kind in ("single-state", "chain"):
        if not rest:
            raise SpecError(f"--preset: {kind} needs a sequence, e.g. {kind}:example2")
        return mdp.from_model_spec({"preset": kind, "sequence": _preset_doc(rest)})
    raise SpecError(f"--preset: unknown model preset {kind!r}")


def run_config(args) -> RunConfig:
    return RunConfig(
        bits=args.precision_bits,
        tol=_parse_rational(args.tol, "--tol"),
        delta=_parse_rational(args.delta, "--delta"),
        k_min=args.k_min,
        k_max=args.k_max,
        grid=args.grid,
        out=args.out,
    )


def write_csv(header: list[str], rows: list[list[str]], out: str | None, stdout) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if out is None:
        stdout.write(buf.getvalue())
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())


def analyze_config(rc: RunConfig) -> tauberian.AnalyzeConfig:
    k_max = rc.k_max or 256
    kw = dict(bits=rc.bits, tol=rc.tol, delta=rc.delta, cesaro_k_max=4 * k_max,
              abel_ks=tauberian.default_abel_ks(k_max))
    if rc.grid:
        kw.update(abel_method="naive", grid=parse_grid(rc.grid))
    return tauberian.AnalyzeConfig(**kw)


def render_report(r: tauberian.LimitsReport) -> str:
    lines = [f"sequence: {r.description}"]
    for name, e in zip(tauberian.NAMES, r.estimates):
        lines.append(
            f"{name:8s} limit {float(e.limit):.6f} +- {float(e.limit_radius):.2e}"
            f"  (window value {float(e.value):.6f} +- {float(e.radius):.1e}, {e.trend}; {e.source})"
        )
    label = r.relation_class.value
    lines.append(f"relation class: {r.relation_class.name} {label} pattern {r.pattern or '-'}")
    if r.note:
        lines.append(f"note: {r.note}")
    return "\n".join(lines)


def cmd_limits(args, stdout) -> int:
    rc = run_config(args)
    s = load_sequence(args)
    r = tauberian.analyze(s, analyze_config(rc))
    stdout.write(render_report(r) + "\n")
    record = json.dumps(r.as_record(), sort_keys=True)
    if rc.out:
        with open(rc.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(record + "\n")
    else:
        stdout.write(record + "\n")
    return EXIT_OK if r.consistent else EXIT_INCONSISTENT


def _curve_points(s, rc: RunConfig):
    """(index, LogAlpha) pairs for the requested schedule or grid."""
    kind = rc.grid or "dyadic-factorial"
    k_min = rc.k_min if rc.k_min is not None else 1
    k_max = rc.k_max if rc.k_max is not None else 12
    if k_min < 1 or k_max < k_min:
        raise SpecError("need 1 <= --k-min <= --k-max")
    ks = range(k_min, k_max + 1)
    if kind in ("dyadic-factorial", "beta"):
        if kind == "beta" and k_min < 2:
            ks = range(2, k_max + 1)
        return list(zip(ks, abel.schedule(kind, ks, bits=rc.bits)))
    if kind in ("lemma1-ones", "lemma1-zeros"):
        pairs = abel.block_pairs(s, 1 if kind == "lemma1-ones" else 0)
        try:
            return list(zip(ks, abel.schedule("lemma1-pairs", ks, pairs, rc.bits)))
        except IndexError as exc:
            raise SpecError(f"--grid {kind}: {exc}") from None
    alphas = parse_grid(kind)
    return [(i, abel.LogAlpha.from_alpha(a, rc.bits)) for i, a in enumerate(alphas)]


def cmd_abel_curve(args, stdout) -> int:
    rc = run_config(args)
    s = load_sequence(args)
    cf = abel.closed_form(s)
    rows = []
    for idx, a in _curve_points(s, rc):
        v = abel.eval_closed(cf, a, rc.tol)
        alpha = a.alpha_ball()
        rows.append([
            decimal_str(a.t.mid),
            decimal_str(alpha.mid, 20),
            decimal_str(v.mid),
            radius_str(v.rad),
            str(idx),
        ])
    write_csv(["alpha_t", "alpha_decimal", "f_value", "error_radius", "schedule_index"], rows, rc.out, stdout)
    return EXIT_OK


def cmd_cesaro_curve(args, stdout) -> int:
    rc = run_config(args)
    s = load_sequence(args)
    k_max = rc.k_max if rc.k_max is not None else 20
    if not 2 <= k_max <= cesaro.MAX_SCHEDULE:
        raise SpecError(f"--k-max must lie in [2, {cesaro.MAX_SCHEDULE}]")
    est = cesaro.boundary_extremes(s, k_max)
    rows = []
    for j, (n, avg) in enumerate(zip(est.schedule_indices, est.values)):
        rows.append([str(j), str(n), str(avg.numerator), str(avg.denominator), decimal_str(avg, 20)])
    write_csv(["boundary_index", "n", "average_num", "average_den", "average_decimal"], rows, rc.out, stdout)
    return EXIT_OK


def cmd_mdp(args, stdout) -> int:
    rc = run_config(args)
    model, policy, x0 = load_model(args)
    acfg = analyze_config(rc)
    kw = dict(delta=rc.delta if args.delta_given else Fraction(1, 100), analyze=acfg)
    if rc.grid:
        kw["grid"] = parse_grid(rc.grid)
    cfg = mdp.MDPConfig(**kw)
    lines = [f"model: {model.description}", f"policy: {policy.description}", f"initial state: {x0}"]
    if model.finite and policy.stationary:
        eq = mdp.finite_stationary_equality_check(model, policy, x0, cfg)
        q = eq.quadruple
    else:
        eq = None
        q = mdp.value_quadruple(model, policy, x0, cfg)
    for name, e in zip(("w_lowstar", "w_lowbar", "w_bar", "w_star"),
                       (q.w_lowstar, q.w_lowbar, q.w_bar, q.w_star)):
        lines.append(f"{name:9s} {float(e.limit):.6f} +- {float(e.limit_radius):.2e}  ({e.source})")
    lines.append(f"relation class: {q.relation_class.name} {q.relation_class.value}")
    if eq is not None:
        verdict = f"all equal: {float(eq.common_value):.4g}" if eq.holds else "values differ"
        lines.append(f"equality check: {verdict} (spread {float(eq.spread):.2e})")
    stdout.write("\n".join(lines) + "\n")
    record = q.report.as_record()
    if eq is not None:
        record["equality_holds"] = eq.holds
        record["common_value"] = float(eq.common_value)
    stdout.write(json.dumps(record, sort_keys=True) + "\n")
    return EXIT_OK if q.chain_holds() else EXIT_INCONSISTENT


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision-bits", type=int, default=DEFAULT_BITS)
    common.add_argument("--tol", default="2^-60", help="rational or 2^-N")
    common.add_argument("--delta", default=None, help="classification slack (default 1/1000; mdp 1/100)")
    common.add_argument("--k-min", type=int, default=None)
    common.add_argument("--k-max", type=int, default=None)
    common.add_argument("--grid", default=None,
                        help="schedule name (dyadic-factorial, beta, lemma1-ones, lemma1-zeros), "
                             "log:X0:X1:STEP, or comma-separated alphas")
    common.add_argument("--out", default=None)
    common.add_argument("--preset", default=None)
    common.add_argument("--spec-file", default=None)

    p = argparse.ArgumentParser(prog="tauberkit", description="Cesàro and Abel limits of 0/1 sequences.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("limits", parents=[common], help="estimate and classify the four limits")
    sub.add_parser("abel-curve", parents=[common], help="tabulate the Abel mean along a schedule")
    sub.add_parser("cesaro-curve", parents=[common], help="tabulate running averages at block ends")
    sub.add_parser("mdp", parents=[common], help="value quadruple of a model and policy")
    return p


COMMANDS = {
    "limits": cmd_limits,
    "abel-curve": cmd_abel_curve,
    "cesaro-curve": cmd_cesaro_curve,
    "mdp": cmd_mdp,
}


def main(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    args.delta_given = args.delta is not None
    if args.delta is None:
        args.delta = "1/1000"
    try:
        return COMMANDS[args.command](args, stdout)
    except SpecError as exc:
        print(f"tauberkit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
