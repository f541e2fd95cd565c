"""Monte Carlo BER experiment driver.

Frames are generated from per-frame substreams keyed by (master_seed,
frame_index), so results are reproducible and independent of how many
workers execute them.  The stopping rule is evaluated over frames in index
order: a parallel run may compute frames beyond the stopping point, but
they are discarded, which keeps the output byte-identical to a serial run.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import PROAKIS_C, ChannelSpec, apply_channel
from .decoder import Trellis, bcjr_extrinsic, channel_symbol_log_pmfs, decide_bits, demod_bridge
from .runner import TurboConfig, Variant, run_turbo
from .txchain import (
    ConvCodeSpec,
    ModulationMap,
    Termination,
    bpsk_map,
    encode,
    map_symbols,
    random_interleaver,
)

AWGN_REFERENCE = "AWGN"

_STREAM_BITS = 0
_STREAM_NOISE = 1
_STREAM_INTERLEAVER = 2


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the offending field."""


@dataclass(frozen=True)
class ExperimentConfig:
    generators: tuple[int, ...] = (0o23, 0o35)
    constraint_length: int = 5
    k_info: int = 2048
    h: tuple[float, ...] = tuple(PROAKIS_C)
    snr_db: tuple[float, ...] = (6.0,)
    variants: tuple[str, ...] = ("BP_GA", "BP_EP", "BP_PGA", "BP_EP_PGA")
    iterations: int = 30
    m_target: int | None = 3
    rho: float | None = None
    belief_reuse: bool = False
    min_frames: int = 50
    min_bit_errors: int = 200
    max_frames: int = 10000
    master_seed: int = 1
    modulation: str = "bpsk"
    record_wall_time: bool = True

    def validate(self) -> None:
        if self.k_info < 1:
            raise ConfigError("K: must be >= 1")
        if not self.snr_db:
            raise ConfigError("snr_db: grid must be nonempty")
        if self.min_bit_errors < 1:
            raise ConfigError("min_bit_errors: must be >= 1")
        if self.min_frames < 1 or self.max_frames < self.min_frames:
            raise ConfigError("min_frames/max_frames: need 1 <= min_frames <= max_frames")
        if self.iterations < 1:
            raise ConfigError("iterations: must be >= 1")
        if self.modulation != "bpsk":
            raise ConfigError(f"modulation: unsupported value {self.modulation!r}")
        known = {v.value for v in Variant} | {AWGN_REFERENCE}
        for v in self.variants:
            if v not in known:
                raise ConfigError(f"variants: unknown variant {v!r}")
        if self.rho is None and self.m_target is None:
            raise ConfigError("M/rho: one of them is required")
        try:
            ConvCodeSpec(self.generators, self.constraint_length)
        except ValueError as e:
            raise ConfigError(f"code: {e}") from e
        if len(self.h) < 1:
            raise ConfigError("channel.h: must be nonempty")

    def code(self) -> ConvCodeSpec:
        return ConvCodeSpec(self.generators, self.constraint_length, Termination.TAIL_TERMINATED)

    def modmap(self) -> ModulationMap:
        return bpsk_map()

    def to_dict(self) -> dict:
        return {
            "generators": [f"{g:o}" for g in self.generators],
            "constraint_length": self.constraint_length,
            "K": self.k_info,
            "channel": {"h": list(self.h)},
            "snr_db": list(self.snr_db),
            "variants": list(self.variants),
            "iterations": self.iterations,
            "M": self.m_target,
            "rho": self.rho,
            "belief_reuse": self.belief_reuse,
            "min_frames": self.min_frames,
            "min_bit_errors": self.min_bit_errors,
            "max_frames": self.max_frames,
            "master_seed": self.master_seed,
            "modulation": self.modulation,
            "record_wall_time": self.record_wall_time,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        kwargs = {}
        if "generators" in d:
            kwargs["generators"] = tuple(int(str(g), 8) for g in d.pop("generators"))
        for src, dst in [("K", "k_info"), ("M", "m_target")]:
            if src in d:
                kwargs[dst] = d.pop(src)
        sigma2_preset = None
        if "channel" in d:
            ch = d.pop("channel")
            if "h" in ch:
                kwargs["h"] = tuple(float(v) for v in ch["h"])
            if "rho" in ch and ch["rho"] is not None:
                kwargs["rho"] = float(ch["rho"])
            if "M" in ch and ch["M"] is not None:
                kwargs["m_target"] = int(ch["M"])
            if "snr_db" in ch:
                grid = ch["snr_db"]
                kwargs["snr_db"] = tuple(
                    float(v) for v in (grid if isinstance(grid, (list, tuple)) else [grid])
                )
            if "sigma2" in ch and ch["sigma2"] is not None:
                sigma2_preset = float(ch["sigma2"])
        for key in (
            "constraint_length",
            "snr_db",
            "variants",
            "iterations",
            "rho",
            "belief_reuse",
            "min_frames",
            "min_bit_errors",
            "max_frames",
            "master_seed",
            "modulation",
            "record_wall_time",
        ):
            if key in d:
                kwargs[key] = d.pop(key)
        unknown = set(d) - {"preset"}
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        for tup in ("snr_db", "variants"):
            if tup in kwargs:
                kwargs[tup] = tuple(kwargs[tup])
        if sigma2_preset is not None:
            # a fixed noise variance in the channel preset maps to the
            # equivalent single-point Eb/N0 grid
            probe = cls(**{**kwargs, "snr_db": (0.0,)})
            sigma2_at_0db = sigma2_from_ebn0(probe, 0.0)
            kwargs["snr_db"] = (10.0 * float(np.log10(sigma2_at_0db / sigma2_preset)),)
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()
        ).hexdigest()[:16]


def paper_preset() -> ExperimentConfig:
    """The desk-scale comparison setup: 2048-bit frames, rate-1/2 (23,35)
    octal code, BPSK over the five-tap 0.227/0.460/0.668 channel, 30
    iterations, three strong interferers."""
    return ExperimentConfig()


def sigma2_from_ebn0(cfg: ExperimentConfig, snr_db: float) -> float:
    """Noise variance for a requested Eb/N0.

    Real-valued model: sigma2 = q0 * Es / (2 * rate * B * 10^(EbN0_dB/10)),
    with q0 the channel tap energy and Es the mean symbol energy.  An
    infinite Eb/N0 is accepted as a noise-free sentinel (variance ~ 0).
    """
    if np.isinf(snr_db):
        return 1e-12
    modmap = cfg.modmap()
    es = float(np.mean(modmap.alphabet**2))
    q0 = float(np.sum(np.square(cfg.h)))
    rate = 1.0 / len(cfg.generators)
    b = modmap.bits_per_symbol
    return q0 * es / (2.0 * rate * b * 10.0 ** (snr_db / 10.0))


@dataclass
class FrameResult:
    frame_idx: int
    bit_errors: int
    bits: int
    iter_bit_errors: tuple[int, ...]


@dataclass(frozen=True)
class BerRecord:
    variant: str
    snr_db: float
    frames: int
    bit_errors: int
    ber: float
    ci_low: float
    ci_high: float
    wall_time_s: float


def wilson_interval(errors: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * float(np.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials))) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


def simulate_frame(cfg: ExperimentConfig, variant: str, snr_db: float, frame_idx: int) -> FrameResult:
    """Simulate one frame end to end with substreams keyed by frame index."""
    code = cfg.code()
    modmap = cfg.modmap()
    sigma2 = sigma2_from_ebn0(cfg, snr_db)
    bits_rng = np.random.default_rng(
        np.random.SeedSequence([cfg.master_seed, frame_idx, _STREAM_BITS])
    )
    bits = bits_rng.integers(0, 2, cfg.k_info, dtype=np.int64)
    coded = encode(bits, code)
    pi_seed = int(
        np.random.SeedSequence([cfg.master_seed, frame_idx, _STREAM_INTERLEAVER]).generate_state(1)[0]
    )
    pi = random_interleaver(coded.size, pi_seed)
    x = map_symbols(coded, modmap, pi)
    noise_rng = np.random.default_rng(
        np.random.SeedSequence([cfg.master_seed, frame_idx, _STREAM_NOISE])
    )

    if variant == AWGN_REFERENCE:
        chan = ChannelSpec(np.array([1.0]), sigma2)
        r = apply_channel(x, chan, noise_rng)
        trellis = Trellis.from_code(code)
        symbol_logp = channel_symbol_log_pmfs(r, modmap.alphabet, sigma2)
        coded_logp = demod_bridge(symbol_logp, modmap, pi)
        _, post_u = bcjr_extrinsic(coded_logp, trellis)
        bits_hat = decide_bits(post_u, cfg.k_info)
        errs = int(np.sum(bits_hat != bits))
        return FrameResult(frame_idx, errs, cfg.k_info, (errs,))

    chan = ChannelSpec(np.asarray(cfg.h), sigma2)
    r = apply_channel(x, chan, noise_rng)
    tcfg = TurboConfig(
        variant=Variant(variant),
        iterations=cfg.iterations,
        rho=cfg.rho,
        m_target=cfg.m_target,
        belief_reuse=cfg.belief_reuse,
    )
    bits_hat, trace = run_turbo(r, chan, code, modmap, pi, tcfg, truth_bits=bits)
    errs = int(np.sum(bits_hat != bits))
    return FrameResult(frame_idx, errs, cfg.k_info, tuple(trace.bit_errors))


def _frame_task(args) -> FrameResult:
    cfg_dict, variant, snr_db, frame_idx = args
    return simulate_frame(ExperimentConfig.from_dict(cfg_dict), variant, snr_db, frame_idx)


def run_point(
    cfg: ExperimentConfig,
    variant: str,
    snr_db: float,
    threads: int = 1,
    collect_frames: bool = False,
) -> tuple[BerRecord, list[FrameResult]]:
    """Accumulate frames at one (variant, SNR) point until the stopping rule fires.

    Stops at the first frame index where at least min_bit_errors errors and
    min_frames frames have accumulated, or at max_frames.  Workers may
    speculatively compute later frames; those results are discarded so the
    outcome does not depend on the worker count.
    """
    t0 = time.perf_counter()
    frames = 0
    errors = 0
    kept: list[FrameResult] = []

    def done() -> bool:
        if frames >= cfg.max_frames:
            return True
        return frames >= cfg.min_frames and errors >= cfg.min_bit_errors

    if threads <= 1:
        while not done():
            res = simulate_frame(cfg, variant, snr_db, frames)
            frames += 1
            errors += res.bit_errors
            if collect_frames:
                kept.append(res)
    else:
        cfg_dict = cfg.to_dict()
        window = 2 * threads
        with ProcessPoolExecutor(max_workers=threads) as pool:
            pending: dict[int, object] = {}
            next_submit = 0
            while not done():
                while len(pending) < window and next_submit < cfg.max_frames:
                    pending[next_submit] = pool.submit(
                        _frame_task, (cfg_dict, variant, snr_db, next_submit)
                    )
                    next_submit += 1
                res = pending.pop(frames).result()
                frames += 1
                errors += res.bit_errors
                if collect_frames:
                    kept.append(res)
            for fut in pending.values():
                fut.cancel()

    wall = time.perf_counter() - t0 if cfg.record_wall_time else 0.0
    bits = frames * cfg.k_info
    lo, hi = wilson_interval(errors, bits)
    rec = BerRecord(
        variant=variant,
        snr_db=float(snr_db),
        frames=frames,
        bit_errors=errors,
        ber=errors / bits,
        ci_low=lo,
        ci_high=hi,
        wall_time_s=wall,
    )
    return rec, kept


def run_experiment(cfg: ExperimentConfig, threads: int = 1, progress=None) -> list[BerRecord]:
    """Simulate every (variant, SNR) combination of the configuration."""
    cfg.validate()
    records = []
    for variant in cfg.variants:
        for snr in cfg.snr_db:
            rec, _ = run_point(cfg, variant, snr, threads=threads)
            records.append(rec)
            if progress is not None:
                progress(rec)
    return records


def awgn_reference(cfg: ExperimentConfig, threads: int = 1) -> list[BerRecord]:
    """Matched-filter bound style reference: same coded chain on a
    dispersion-free unit channel, decoded by BCJR alone."""
    records = []
    for snr in cfg.snr_db:
        rec, _ = run_point(cfg, AWGN_REFERENCE, snr, threads=threads)
        records.append(rec)
    return records


CSV_HEADER = "variant,snr_db,frames,bit_errors,ber,ci_low,ci_high,wall_time_s"


def format_csv(records: list[BerRecord], cfg: ExperimentConfig) -> str:
    """Render records as CSV with a reproducibility comment header."""
    if not records:
        raise ValueError("no records to emit")
    lines = [
        f"# config_hash={cfg.config_hash()} master_seed={cfg.master_seed}",
        "# sigma2 = q0*Es/(2*rate*B*10^(EbN0_dB/10)); q0 = sum h_l^2, Es = mean symbol energy",
        f"# config={json.dumps(cfg.to_dict(), sort_keys=True)}",
        CSV_HEADER,
    ]
    for rec in sorted(records, key=lambda x: (x.variant, x.snr_db)):
        # repr gives the shortest exact float form, so parse(emit(x)) == x
        lines.append(
            f"{rec.variant},{rec.snr_db!r},{rec.frames},{rec.bit_errors},"
            f"{rec.ber!r},{rec.ci_low!r},{rec.ci_high!r},{rec.wall_time_s!r}"
        )
    return "\n".join(lines) + "\n"


def emit_csv(records: list[BerRecord], path, cfg: ExperimentConfig) -> None:
    text = format_csv(records, cfg)
    try:
        with open(path, "w") as f:
            f.write(text)
    except OSError as e:
        raise OSError(f"cannot write CSV to {path}: {e}") from e


def parse_csv(path) -> list[BerRecord]:
    records = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#") or line == CSV_HEADER:
                continue
            v, snr, fr, be, ber, lo, hi, wt = line.split(",")
            records.append(
                BerRecord(v, float(snr), int(fr), int(be), float(ber), float(lo), float(hi), float(wt))
            )
    return records
