"""Command-line entry point: ``otfs-outage {sweep,verify,bound}``."""

from __future__ import annotations

import argparse
import logging
import sys

from .experiment import (
    HEAVY_SIZE,
    ConfigError,
    ExperimentConfig,
    bound_table,
    format_csv,
    parse_snr_range,
    run_sweep,
    verify_report,
)


def _distortions(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad distortion list {text!r}") from None


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat JSON file with ExperimentConfig fields")
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--trials", type=int, help="Monte-Carlo trials per point")
    p.add_argument("--snr", help="SNR sweep in dB as start:stop:step (stop inclusive)")
    p.add_argument("--distortion", type=_distortions, help="comma-separated distortion targets")
    p.add_argument("--out", help="output CSV path ('-' for stdout)")
    p.add_argument("--heavy", action="store_true", help=f"use M=N={HEAVY_SIZE}")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("-M", type=int)
    p.add_argument("-N", type=int)
    p.add_argument("-P", type=int, help="number of resolvable paths")
    p.add_argument("-K", type=int, help="bits per symbol")
    p.add_argument("-v", "--verbose", action="store_true")


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    overrides = {"seed": args.seed, "trials": args.trials, "distortion": args.distortion,
                 "output_path": args.out, "workers": args.workers,
                 "M": args.M, "N": args.N, "P": args.P, "K": args.K}
    if args.snr:
        overrides["snr_db"] = parse_snr_range(args.snr)
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    cfg.__post_init__()
    if args.heavy:
        cfg.heavy = True
        cfg.M = cfg.N = HEAVY_SIZE
    return cfg.validate()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="otfs-outage", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("sweep", help="Monte-Carlo outage sweep written as CSV"))
    p_verify = sub.add_parser("verify", help="check the determinant inequalities on random channels")
    _add_common(p_verify)
    p_verify.add_argument("--campaigns", type=int, default=1000)
    p_verify.add_argument("--self-test", action="store_true",
                          help="corrupt the Gram matrix; the run must report violations")
    _add_common(sub.add_parser("bound", help="print closed-form lower-bound values"))
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")

    try:
        cfg = build_config(args)
        if args.command == "sweep":
            text = format_csv(run_sweep(cfg))
            if cfg.output_path == "-":
                sys.stdout.write(text)
            else:
                with open(cfg.output_path, "w") as fh:
                    fh.write(text)
                print(f"wrote {cfg.output_path}", file=sys.stderr)
            return 0
        if args.command == "verify":
            report = verify_report(cfg, args.campaigns, corrupt=args.self_test)
            print(report.text)
            return 0 if report.ok else 1
        rows = bound_table(cfg.P, cfg.K, cfg.distortion, cfg.snr_db)
        print("snr_db,distortion,P,K,p_out_lower_bound")
        for snr, D, P, K, value in rows:
            print(f"{snr:.10g},{D:.10g},{P},{K},{value:.10g}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
