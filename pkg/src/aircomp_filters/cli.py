"""Command-line interface: ``aircomp {design-filter,check,simulate,sweep}``.

Exit codes: 0 success, 1 usage or configuration error, 2 infeasible design.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, dump_config, load_config, parse_int_list
from .design import InfeasibleDesignError, check_feasibility, design_filter, verify_lemma1
from .experiments import ExperimentConfig, SweepResult, design_filters, figure_config, \
    run_sweep, simulate_trial
from .receiver import apply_filter, estimate_from_filtered
from .signal import PulseShape, hankel_lift

EXIT_USAGE = 1
EXIT_INFEASIBLE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _vec(values) -> str:
    return ",".join(_fmt(v) for v in values)


def _emit(pairs: dict, out=None) -> None:
    out = out or sys.stdout
    for key, value in pairs.items():
        if isinstance(value, bool):
            value = str(value).lower()
        elif isinstance(value, float):
            value = _fmt(value)
        print(f"{key}={value}", file=out)


def _pulse_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pulse", default="gaussian", choices=["rect", "rectangular", "gaussian"],
                   help="transmit pulse family (default: gaussian)")
    p.add_argument("--ns", type=int, required=True, help="samples per symbol N_s")
    p.add_argument("--d", type=int, required=True, help="maximum delay in samples")


def _make_pulse(args) -> PulseShape:
    try:
        return PulseShape.from_spec(args.pulse, args.ns)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_design_filter(args) -> int:
    pulse = _make_pulse(args)
    if args.matched:
        design = "matched"
    elif args.exact:
        design = "unbiased_exact"
    else:
        design = "tikhonov"
    try:
        filt = design_filter(pulse, args.d, design, args.reg)
    except InfeasibleDesignError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        _emit(exc.report.as_dict(), sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    H = hankel_lift(pulse, args.d)
    alpha = filt.taps[args.d:]
    _emit({
        "design": filt.design,
        "pulse": pulse.kind,
        "n_samples": pulse.n_samples,
        "d": args.d,
        "reg": filt.reg if filt.reg is not None else "none",
        "taps": _vec(filt.taps),
        "leading_zeros": int(np.sum(filt.taps[: args.d] == 0)),
        "residual": float(np.max(np.abs(H @ alpha - 1.0))),
        "noise_gain": filt.noise_gain,
    })
    if args.output:
        Path(args.output).write_text(json.dumps({
            "design": filt.design, "d": args.d, "reg": filt.reg,
            "pulse": pulse.kind, "pulse_taps": pulse.taps.tolist(),
            "taps": filt.taps.tolist(),
        }, indent=2) + "\n")
    return 0


def cmd_check(args) -> int:
    pulse = _make_pulse(args)
    try:
        report = check_feasibility(pulse, args.d)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    verdict = "feasible" if report.feasible else "infeasible"
    print(f"# N_s={report.n_samples} d={report.max_delay}: rank(H)={report.rank_h}, "
          f"unbiased design {verdict}; sufficient bound d <= {report.corollary2_bound}",
          file=sys.stderr)
    pairs = report.as_dict()
    if args.lemma1:
        rng = np.random.default_rng(args.seed)
        pairs["lemma1_trials"] = args.lemma1_trials
        pairs["lemma1_max_discrepancy"] = verify_lemma1(args.lemma1_trials, rng)
    _emit(pairs)
    return 0


def cmd_simulate(args) -> int:
    config = ExperimentConfig(
        n_devices=args.K, n_symbols=args.N, n_copies=args.M, d_values=(args.d,),
        ns_rule="fixed", ns_fixed=args.ns, reg=args.reg, noise_var=args.noise_var,
        pulse=args.pulse, n_trials=1, seed=args.seed, include_unbiased=args.exact)
    try:
        filters = design_filters(config, args.d)
    except InfeasibleDesignError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    frame, chan, v = simulate_trial(config, args.d, args.trial)
    f = frame.target()
    pairs = {"delays": ",".join(str(int(x)) for x in chan.delays), "f": _vec(f)}
    dump = {"v": v, "f": f, "delays": chan.delays, "h": chan.h, "messages": frame.messages}
    for name, filt in filters.items():
        y = apply_filter(v, filt)
        est = estimate_from_filtered(y, filt, config.noise_var, config.n_devices)
        pairs[f"f_hat_{name}"] = _vec(est.f_hat)
        pairs[f"mse_{name}"] = float(np.mean((f - est.f_hat) ** 2))
        dump[f"y_{name}"] = y
        dump[f"f_hat_{name}"] = est.f_hat
    _emit(pairs)
    if args.output:
        np.savez(args.output, **dump)
    return 0


def _sweep_config(args) -> ExperimentConfig:
    overrides = {}
    if args.trials is not None:
        overrides["n_trials"] = args.trials
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.d_values is not None:
        overrides["d_values"] = parse_int_list(args.d_values)
    if args.include_unbiased:
        overrides["include_unbiased"] = True
    if args.M is not None:
        overrides["n_copies"] = args.M
    if args.figure is not None:
        base = figure_config(args.figure)
    else:
        base = ExperimentConfig()
    if args.config is not None:
        base = load_config(args.config, base)
    return base.replace(**overrides)


def write_plot(result: SweepResult, path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    d = result.d_values
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.semilogy(d, result.column("proposed", "mse"), "o-", label="MSE, proposed")
    ax.semilogy(d, result.column("matched", "mse"), "s-", label="MSE, matched")
    ax.semilogy(d, result.column("proposed", "bias") ** 2, "o--", label="bias$^2$, proposed")
    ax.semilogy(d, result.column("matched", "bias") ** 2, "s--", label="bias$^2$, matched")
    ax.set_xlabel("d")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None} if str(path).endswith(".svg") else None)
    plt.close(fig)


def cmd_sweep(args) -> int:
    try:
        config = _sweep_config(args)
    except (ConfigError, ValueError, OSError) as exc:
        raise UsageError(str(exc)) from exc

    def progress(row):
        if not args.quiet:
            print(f"# d={row.d} N_s={row.n_samples} "
                  f"MSE={row.get('proposed', 'mse'):.4g} MSE_mf={row.get('matched', 'mse'):.4g} "
                  f"({row.wall_time:.1f}s)", file=sys.stderr)

    try:
        result = run_sweep(config, threads=args.threads, progress=progress)
    except InfeasibleDesignError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    csv = result.to_csv(extended=args.extended)
    if args.output in (None, "-"):
        sys.stdout.write(csv)
    else:
        Path(args.output).write_text(csv)
    outputs = {"csv": args.output or "-"}
    if args.plot:
        write_plot(result, args.plot)
        outputs["plot"] = args.plot
    manifest_path = args.manifest
    if manifest_path is None and args.output not in (None, "-"):
        manifest_path = str(args.output) + ".manifest.json"
    if manifest_path:
        outputs["manifest"] = manifest_path
        manifest = {
            "tool": "aircomp-filters",
            "version": __version__,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "seed": config.seed,
            "config": config.as_dict(),
            "config_ini": dump_config(config),
            "threads": args.threads,
            "outputs": outputs,
            "wall_time": {str(row.d): row.wall_time for row in result.rows},
        }
        Path(manifest_path).write_text(json.dumps(manifest, indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aircomp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("design-filter", help="design receive taps for a pulse and delay bound")
    _pulse_args(p)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--exact", action="store_true", help="minimum-norm exactly unbiased taps")
    group.add_argument("--matched", action="store_true", help="matched filter (taps = pulse)")
    p.add_argument("--lambda", dest="reg", type=float, default=0.1,
                   help="Tikhonov weight (default: 0.1)")
    p.add_argument("--output", "-o", help="write the design as JSON")
    p.set_defaults(func=cmd_design_filter)

    p = sub.add_parser("check", help="feasibility report for an unbiased design")
    _pulse_args(p)
    p.add_argument("--lemma1", action="store_true",
                   help="also brute-force check the slot-gain identity on random small cases")
    p.add_argument("--lemma1-trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="run one realisation and print the estimates")
    _pulse_args(p)
    p.add_argument("--K", type=int, default=100)
    p.add_argument("--N", type=int, default=10)
    p.add_argument("--M", type=int, default=10)
    p.add_argument("--noise-var", type=float, default=1.0)
    p.add_argument("--lambda", dest="reg", type=float, default=0.1)
    p.add_argument("--exact", action="store_true", help="also evaluate the exact unbiased filter")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--output", "-o", help="dump v, y and f_hat to an .npz file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="Monte-Carlo bias/MSE versus maximum delay")
    p.add_argument("--figure", type=int, choices=[3, 4],
                   help="preset: 3 -> N_s = 2d+2, 4 -> N_s = 2d+20")
    p.add_argument("--config", help="INI config file; flags override it")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--M", type=int, help="phase copies per frame")
    p.add_argument("--d-values", help="e.g. 0-10 or 0,2,4")
    p.add_argument("--include-unbiased", action="store_true",
                   help="also evaluate the exact unbiased filter (see --extended)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $AIRCOMP_THREADS or 1)")
    p.add_argument("--output", "-o", help="CSV path (default: stdout)")
    p.add_argument("--manifest", help="run manifest path (default: <csv>.manifest.json)")
    p.add_argument("--plot", help="write an MSE / bias^2 plot (.svg or .pdf)")
    p.add_argument("--extended", action="store_true", help="append diagnostic CSV columns")
    p.add_argument("--quiet", "-q", action="store_true")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"aircomp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
