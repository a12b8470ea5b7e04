"""Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 a design target was
not met, 4 file I/O or parse error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import circuit, engine, extraction, metrics, microstrip, planfile, touchstone
from .errors import (
    ExtractionError,
    FileFormatError,
    InvalidInputError,
    InvalidSpecError,
    NetlistError,
    SingularSystemError,
)
from .prototype import DEFAULT_RIPPLE_DB, DividerSpec, plan_for, ripple_from_return_loss

EXIT_OK, EXIT_USAGE, EXIT_TARGET, EXIT_IO = 0, 2, 3, 4


class TargetFailure(Exception):
    pass


def _positive_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals or any(not v > 0 for v in vals):
        raise argparse.ArgumentTypeError(f"ratios must all be positive, got {text!r}")
    return vals


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return v


def _grid(args, f0: float) -> np.ndarray:
    if args.points < 1:
        raise InvalidSpecError("--points must be at least 1")
    if args.points == 1:
        return np.array([args.start if args.start is not None else f0])
    start = args.start if args.start is not None else f0 - f0 / 13
    stop = args.stop if args.stop is not None else f0 + f0 / 13
    if not 0 < start < stop:
        raise InvalidSpecError(f"sweep needs 0 < start < stop, got {start} and {stop}")
    return np.linspace(start, stop, args.points)


def _write_sweep(sweep, args, default_stem: Path, out):
    targets = []
    if args.touchstone:
        targets.append(touchstone.write_touchstone(sweep, args.touchstone))
    if args.csv:
        targets.append(touchstone.write_csv(sweep, args.csv))
    if not targets:
        targets.append(touchstone.write_touchstone(sweep, default_stem.with_suffix(f".s{sweep.n_ports}p")))
    for t in targets:
        print(f"wrote {t}", file=out)


def cmd_synth(args, out):
    ripple = ripple_from_return_loss(args.rl) if args.rl is not None else args.ripple
    spec = DividerSpec(f0=args.f0, fbw=args.fbw, z0=args.z0, ratios=args.ratios, order=args.order, ripple_db=ripple)
    g, plan = plan_for(spec, None if args.exact_g else args.g_digits)
    net = engine.build_fpd_network(plan)
    pf = planfile.PlanFile(spec, g, plan, net)
    print(f"ripple = {ripple:.4f} dB", file=out)
    print("g-values: " + " ".join(f"g{k}={x:.4f}" for k, x in enumerate(g.g)), file=out)
    print(f"M_branch = {plan.m_branch:.4f}", file=out)
    for i, m in enumerate(plan.m_split, 1):
        print(f"M{i} = {m:.4f}", file=out)
    print(f"Qe = {plan.qe_in:.4f}", file=out)
    planfile.write_plan(pf, args.out)
    print(f"wrote {args.out}", file=out)


def cmd_sim(args, out):
    if args.qu is not None and not args.qu > 0:
        raise InvalidSpecError("--qu must be positive (omit it for a lossless sweep)")
    pf = planfile.read_plan(args.plan)
    freqs = _grid(args, pf.network.f0)
    sweep = engine.sparameters(pf.network, freqs, qu=args.qu, z_ref=pf.spec.z0)
    _write_sweep(sweep, args, Path(args.plan), out)


def cmd_netlist(args, out):
    pf = planfile.read_plan(args.plan)
    net = circuit.coupling_to_netlist(pf.network, args.c0, pf.spec.z0)
    text = circuit.serialize_netlist(net)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}", file=out)
    else:
        out.write(text)


def cmd_mna(args, out):
    net = circuit.parse_netlist(Path(args.netlist).read_text())
    if args.points == 1 and args.start is None:
        raise InvalidSpecError("--start is required for a single-point sweep")
    if args.points > 1 and (args.start is None or args.stop is None):
        raise InvalidSpecError("--start and --stop are required")
    freqs = _grid(args, args.start or 1.0)
    sweep = circuit.sparams_mna(net, freqs)
    _write_sweep(sweep, args, Path(args.netlist), out)


def cmd_extract(args, out):
    sweep = touchstone.read_touchstone(args.touchstone)
    if args.quantity == "qe":
        res = extraction.qe_from_group_delay(sweep, args.f0_hint, port=args.port)
        print(f"Qe = {res.value:.4f}", file=out)
    else:
        res = extraction.k_from_split_peaks(sweep, args.f0_hint)
        f1, f2 = res.diagnostics["peaks"]
        print(f"peaks = {f1:.0f} Hz, {f2:.0f} Hz", file=out)
        print(f"k = {res.value:.4f}", file=out)
    print(f"f0 = {res.f0_detected:.0f} Hz", file=out)


def cmd_tune(args, out):
    pf = planfile.read_plan(args.plan)
    net = pf.network
    lo, hi = engine.band_edges(net.f0, net.fbw)
    targets = extraction.TuneTargets(
        rl_min=args.rl_min,
        ratios=args.ratios if args.ratios else pf.spec.ratios,
        band=(args.band_lo or lo, args.band_hi or hi),
        max_iterations=args.max_evals,
    )
    res = extraction.tune(net, targets)
    print(f"cost {res.initial_cost:.6g} -> {res.cost:.6g} in {res.evaluations} evaluations", file=out)
    for i, j in res.network.edges():
        print(f"M({i + 1},{j + 1}) = {res.network.M[i, j]:.4f}", file=out)
    for p in range(res.network.n_ports):
        print(f"Qe(port {p + 1}) = {res.network.qe(p):.4f}", file=out)
    planfile.write_plan(planfile.PlanFile(pf.spec, pf.g, pf.plan, res.network), args.out)
    print(f"wrote {args.out}", file=out)
    if not res.converged:
        raise TargetFailure("tuner did not converge; best network written")


def cmd_ustrip(args, out):
    sub = microstrip.SubstrateSpec(args.er, args.h, args.tan_d)
    if args.w is not None:
        line = microstrip.microstrip_analyze(args.w, sub)
    else:
        line = microstrip.microstrip_synthesize(args.z0, sub)
    lg = microstrip.guided_wavelength(args.f, line.eeff)
    print(f"w = {line.w * 1e3:.4f} mm", file=out)
    print(f"z0 = {line.z0:.4f} ohm", file=out)
    print(f"eeff = {line.eeff:.4f}", file=out)
    print(f"guided wavelength = {lg * 1e3:.4f} mm", file=out)
    print(f"half wavelength = {lg * 500:.4f} mm", file=out)
    print(f"open-loop resonator side (estimate) = {microstrip.solr_side(args.f, line.eeff) * 1e3:.4f} mm", file=out)


def cmd_report(args, out):
    sweep = touchstone.read_touchstone(args.touchstone)
    rep = metrics.report_metrics(
        sweep, args.f0, args.fbw, rl_target_db=args.rl_min, ratio_targets=args.ratios, ratio_tol=args.ratio_tol
    )
    print(metrics.format_report(rep), file=out)
    if not rep.passed:
        raise TargetFailure("failed: " + ", ".join(rep.failures))


def _sweep_flags(p, default_points=1601):
    p.add_argument("--start", type=_positive, help="first frequency (Hz)")
    p.add_argument("--stop", type=_positive, help="last frequency (Hz)")
    p.add_argument("--points", type=int, default=default_points)
    p.add_argument("--touchstone", help="Touchstone output path (.sNp)")
    p.add_argument("--csv", help="CSV output path (dB magnitudes)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fpdsynth", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="prototype and coupling plan from a divider spec")
    p.add_argument("--f0", type=_positive, required=True)
    p.add_argument("--fbw", type=_positive, required=True)
    rip = p.add_mutually_exclusive_group()
    rip.add_argument("--ripple", type=_positive, help=f"passband ripple in dB (default {DEFAULT_RIPPLE_DB})")
    rip.add_argument("--rl", type=_positive, help="return loss in dB (converted to ripple)")
    p.add_argument("--ratios", type=_positive_list, required=True, help="output power weights, e.g. 1,2,4")
    p.add_argument("--z0", type=_positive, default=50.0)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--g-digits", type=int, default=4, help="round prototype values (default 4 decimals)")
    p.add_argument("--exact-g", action="store_true", help="use unrounded prototype values")
    p.add_argument("--out", "-o", default="plan.json")
    p.set_defaults(func=cmd_synth, ripple=DEFAULT_RIPPLE_DB)

    p = sub.add_parser("sim", help="coupling-matrix S-parameter sweep of a plan")
    p.add_argument("--plan", required=True)
    p.add_argument("--qu", type=float, help="uniform unloaded Q (omit for lossless)")
    _sweep_flags(p)
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("netlist", help="lumped realisation of a plan")
    p.add_argument("--plan", required=True)
    p.add_argument("--c0", type=_positive, default=5e-12, help="resonator capacitance (F)")
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_netlist)

    p = sub.add_parser("mna", help="nodal-analysis sweep of a netlist")
    p.add_argument("--netlist", required=True)
    _sweep_flags(p)
    p.set_defaults(func=cmd_mna)

    p = sub.add_parser("extract", help="Qe or k from a Touchstone sweep")
    p.add_argument("quantity", choices=["qe", "k"])
    p.add_argument("--touchstone", required=True)
    p.add_argument("--f0-hint", type=_positive)
    p.add_argument("--port", type=int, default=1)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("tune", help="retune coupling values toward targets")
    p.add_argument("--plan", required=True)
    p.add_argument("--rl-min", type=_positive, default=20.0)
    p.add_argument("--ratios", type=_positive_list)
    p.add_argument("--band-lo", type=_positive)
    p.add_argument("--band-hi", type=_positive)
    p.add_argument("--max-evals", type=int, default=200)
    p.add_argument("--out", "-o", default="tuned.json")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("ustrip", help="microstrip width, impedance and guided wavelength")
    p.add_argument("--er", type=float, default=microstrip.RT6010.er)
    p.add_argument("--h", type=_positive, default=microstrip.RT6010.h, help="substrate thickness (m)")
    p.add_argument("--tan-d", type=float, default=microstrip.RT6010.tan_d)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--z0", type=_positive, default=50.0, help="synthesise width for this impedance")
    g.add_argument("--w", type=_positive, help="analyse this strip width (m)")
    p.add_argument("--f", type=_positive, default=2.6e9)
    p.set_defaults(func=cmd_ustrip)

    p = sub.add_parser("report", help="figures of merit of a Touchstone sweep")
    p.add_argument("--touchstone", required=True)
    p.add_argument("--f0", type=_positive, required=True)
    p.add_argument("--fbw", type=_positive, required=True)
    p.add_argument("--rl-min", type=_positive, default=20.0)
    p.add_argument("--ratios", type=_positive_list)
    p.add_argument("--ratio-tol", type=_positive, default=0.02)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        args.func(args, out)
    except TargetFailure as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_TARGET
    except (OSError, FileFormatError, NetlistError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InvalidSpecError, InvalidInputError, ExtractionError, SingularSystemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
