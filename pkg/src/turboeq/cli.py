"""Command line front end for the BER experiment driver.

Exit codes: 0 success, 2 configuration error, 3 runtime numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .messages import IllConditionedPrecision
from .sim import (
    AWGN_REFERENCE,
    ConfigError,
    ExperimentConfig,
    emit_csv,
    paper_preset,
    run_experiment,
)


def parse_snr_grid(text: str) -> tuple[float, ...]:
    """Parse 'a:b:step' (inclusive of b up to rounding) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"snr grid {text!r} must be a:b:step")
        a, b, step = (float(p) for p in parts)
        if step <= 0 or b < a:
            raise ConfigError(f"snr grid {text!r} must have step > 0 and b >= a")
        n = int(np.floor((b - a) / step + 1e-9)) + 1
        return tuple(float(a + k * step) for k in range(n))
    return tuple(float(p) for p in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="simulate",
        description="Monte Carlo BER comparison of turbo-equalizer variants over an ISI channel",
    )
    p.add_argument("--config", type=Path, help="JSON experiment configuration")
    p.add_argument("--preset", choices=["paper"], help="load a named built-in setup")
    p.add_argument(
        "--variant",
        action="append",
        default=None,
        help="restrict to a variant (repeatable); AWGN selects the reference receiver",
    )
    p.add_argument("--snr-db", type=str, default=None, help="grid a:b:step or comma list")
    p.add_argument("--seed", type=int, default=None, help="master seed override")
    p.add_argument("--out", type=Path, default=Path("results.csv"))
    p.add_argument("--threads", type=int, default=1)
    p.add_argument(
        "--emit-curves",
        action="store_true",
        help="also write per-variant (snr_db, ber) files next to --out",
    )
    return p


def load_config(args) -> ExperimentConfig:
    base: dict = {}
    if args.preset == "paper":
        base = paper_preset().to_dict()
    if args.config is not None:
        try:
            with open(args.config) as f:
                file_cfg = json.load(f)
        except OSError as e:
            raise ConfigError(f"config: cannot read {args.config}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config: {args.config}:{e.lineno}: {e.msg}") from e
        base.update(file_cfg)
    if not base:
        raise ConfigError("config: provide --config and/or --preset")
    cfg = ExperimentConfig.from_dict(base)
    if args.variant:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "variants": args.variant})
    if args.snr_db:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "snr_db": parse_snr_grid(args.snr_db)})
    if args.seed is not None:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "master_seed": args.seed})
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2

    try:
        records = run_experiment(
            cfg,
            threads=args.threads,
            progress=lambda rec: print(
                f"{rec.variant} @ {rec.snr_db:g} dB: ber={rec.ber:.3e} "
                f"({rec.bit_errors} errors / {rec.frames} frames)"
            ),
        )
        emit_csv(records, args.out, cfg)
        print(f"wrote {args.out}")
        if args.emit_curves:
            for variant in sorted({r.variant for r in records}):
                curve = args.out.with_suffix(f".{variant}.curve.csv")
                with open(curve, "w") as f:
                    f.write("snr_db,ber\n")
                    for r in sorted(records, key=lambda x: x.snr_db):
                        if r.variant == variant:
                            f.write(f"{r.snr_db!r},{r.ber!r}\n")
                print(f"wrote {curve}")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (FloatingPointError, IllConditionedPrecision, np.linalg.LinAlgError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
