"""Command-line front end: campaign runs, Farrow audit reports, PAPR dumps."""
from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from .dsp import FarrowFilter
from .harness import (CampaignConfig, integer_delay_mode, parse_config_text,
                      run_campaign, run_papr_only, validate_config)


def _parse_snr_spec(spec: str):
    """Accept 'start:stop:step' (inclusive) or a comma list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("snr spec must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise argparse.ArgumentTypeError("snr step must be positive")
        n = int(round((stop - start) / step))
        return tuple(start + i * step for i in range(n + 1))
    return tuple(float(p) for p in spec.split(",") if p.strip())


def _load_config(path: str) -> CampaignConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    overrides = {}
    if args.schemes:
        overrides["schemes"] = tuple(s.strip() for s in args.schemes.split(","))
    if args.snr:
        overrides["snr_db"] = args.snr
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out:
        overrides["out"] = args.out
    cfg = dataclasses.replace(cfg, **overrides)
    if args.integer_delays:
        cfg = integer_delay_mode(cfg)
    violations = validate_config(cfg)
    if violations:
        for v in violations:
            print(f"config error: {v}", file=sys.stderr)
        return 2
    def progress(done, total):
        if done % 25 == 0 or done == total:
            print(f"  trial {done}/{total}", file=sys.stderr)
    _, csv_text = run_campaign(cfg, progress=progress)
    with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text)
    print(f"wrote {cfg.out}")
    return 0


def _cmd_filter_report(args) -> int:
    farrow = FarrowFilter(args.order)
    freqs = np.linspace(-0.5, 0.5, args.points, endpoint=False)
    lines = ["mu,f,magnitude_error,phase_delay_error"]
    for mu in [round(0.1 * i, 1) for i in range(10)]:
        resp = farrow.frequency_response(mu, freqs)
        target_delay = farrow.bulk_delay + mu
        mag_err = np.abs(np.abs(resp) - 1.0)
        # bounded residual phase instead of unwrapping: near band-edge
        # response nulls the unwrapped phase is meaningless
        resid = np.angle(resp * np.exp(2j * np.pi * freqs * target_delay))
        with np.errstate(divide="ignore", invalid="ignore"):
            delay_err = np.abs(resid / (2 * np.pi * freqs))
        delay_err[freqs == 0] = 0.0
        for f, me, de in zip(freqs, mag_err, delay_err):
            lines.append(f"{f:.6g},{me:.10g},{de:.10g}")
    text = "\n".join(lines) + "\n"
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    print(f"wrote {args.out}")
    return 0


def _cmd_papr(args) -> int:
    cfg = _load_config(args.config)
    if args.trials is not None:
        cfg = dataclasses.replace(cfg, trials=args.trials)
    violations = validate_config(cfg)
    if violations:
        for v in violations:
            print(f"config error: {v}", file=sys.stderr)
        return 2
    _, csv_text = run_papr_only(cfg)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="damsim",
        description="Link-level simulator for delay-aligned single-carrier "
                    "transmission over sparse multipath channels.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a Monte-Carlo campaign")
    p_sim.add_argument("--config", required=True, help="flat key = value config file")
    p_sim.add_argument("--schemes", help="comma list: fdam,idam,ofdm")
    p_sim.add_argument("--snr", type=_parse_snr_spec,
                       help="start:stop:step (inclusive) or comma list, dB")
    p_sim.add_argument("--trials", type=int)
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--integer-delays", action="store_true",
                       help="round drawn delays to symbol multiples")
    p_sim.add_argument("--out", help="results CSV path")
    p_sim.set_defaults(func=_cmd_simulate)

    p_rep = sub.add_parser("filter-report",
                           help="audit the fractional-delay filter response")
    p_rep.add_argument("--order", type=int, default=3)
    p_rep.add_argument("--points", type=int, default=256)
    p_rep.add_argument("--out", required=True)
    p_rep.set_defaults(func=_cmd_filter_report)

    p_papr = sub.add_parser("papr", help="dump per-antenna PAPR samples")
    p_papr.add_argument("--config", required=True)
    p_papr.add_argument("--trials", type=int)
    p_papr.add_argument("--out", required=True)
    p_papr.set_defaults(func=_cmd_papr)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
