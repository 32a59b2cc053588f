"""Seeded Monte-Carlo experiment runner for decoder complexity sweeps.

Reproducibility contract: every trial draws from its own generator seeded by
``[master_seed, snr_index, trial_index]`` and every codebook from
``[master_seed, snr_index]``, so results do not depend on execution order or
the number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import decoders
from .analysis import compute_L0
from .channel import is_outage, realify, sample_channel, transmit
from .decoders import (DecodeOutcome, SphereConfig, default_radius,
                       lr_aided_decode, sphere_decode, stack_sequential_decode)
from .lattices import NestedLastCode, build_nested_code, embed_message, encode
from .mmse_dfe import apply_forward, augmented_qr

DECODERS = ("sphere", "sequential", "lr-aided")
TIMEOUT_POLICIES = ("none", "L0-formula", "fixed")
TAIL_GRID_POINTS = 64


@dataclass
class ExperimentConfig:
    M: int
    N: int
    T: int
    rate_mode: str = "fixed-R"          # "fixed-R" or "fixed-r"
    rate_bpcu: float | None = None      # used by fixed-R
    multiplexing_gain: float | None = None  # used by fixed-r: R = r log2(rho)
    snr_grid_db: list[float] = field(default_factory=list)
    trials_per_point: int = 1000
    seed: int = 0
    decoder: str = "sphere"
    zeta: float = 2.0
    timeout_policy: str = "none"
    timeout_value: float | None = None  # for the "fixed" policy
    sequential_bias: float = 1.0

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.timeout_policy not in TIMEOUT_POLICIES:
            raise ValueError(f"unknown timeout policy {self.timeout_policy!r}")
        if self.rate_mode not in ("fixed-R", "fixed-r"):
            raise ValueError(f"unknown rate mode {self.rate_mode!r}")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        grid = list(self.snr_grid_db)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("snr grid must be strictly increasing")
        if self.rate_mode == "fixed-R" and self.rate_bpcu is None:
            raise ValueError("fixed-R mode needs rate_bpcu")
        if self.rate_mode == "fixed-r" and self.multiplexing_gain is None:
            raise ValueError("fixed-r mode needs multiplexing_gain")
        if self.timeout_policy == "fixed" and not self.timeout_value:
            raise ValueError("fixed timeout policy needs timeout_value")

    def rate_at(self, rho: float) -> float:
        if self.rate_mode == "fixed-R":
            return float(self.rate_bpcu)
        return float(self.multiplexing_gain) * math.log2(rho)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(**d)


@dataclass
class TrialRecord:
    snr_db: float
    outage: bool
    decoded_ok: bool
    status: str
    total_count: int
    timeout_used: float
    channel_seed: list


@dataclass
class PointSummary:
    snr_db: float
    trials: int
    avg_complexity: float
    error_rate: float
    outage_rate: float
    timeout_rate: float
    tail: list  # list of (L, Pr(C >= L))


@dataclass
class SweepResult:
    config: ExperimentConfig
    points: list


def build_codebook(cfg: ExperimentConfig, snr_index: int) -> NestedLastCode:
    rho = 10.0 ** (cfg.snr_grid_db[snr_index] / 10.0)
    return build_nested_code(cfg.M, cfg.T, cfg.rate_at(rho), rho,
                             seed=[cfg.seed, snr_index])


def _decode(cfg: ExperimentConfig, r_factor: np.ndarray, y2: np.ndarray,
            a_matrix: np.ndarray, target: np.ndarray, radius: float,
            timeout: float) -> DecodeOutcome:
    if cfg.decoder == "sphere":
        return sphere_decode(r_factor, y2, SphereConfig(radius=radius, timeout=timeout))
    if cfg.decoder == "sequential":
        return stack_sequential_decode(r_factor, y2, bias=cfg.sequential_bias,
                                       timeout=timeout)
    return lr_aided_decode(a_matrix, target)


def run_trial(cfg: ExperimentConfig, snr_index: int, trial_index: int,
              code: NestedLastCode | None = None,
              noiseless: bool = False) -> TrialRecord:
    """One seeded trial: channel -> encode -> MMSE-DFE -> decode -> verdict.

    ``decoded_ok`` means the decoded integer point maps back to the
    transmitted codeword after reduction modulo the shaping lattice (exact
    recovery of the coded lattice coset).  With ``noiseless`` the filtered
    signal is replaced by the exact triangular model B G z, which removes
    both the additive noise and the finite-SNR forward-filter bias.
    """
    snr_db = cfg.snr_grid_db[snr_index]
    rho = 10.0 ** (snr_db / 10.0)
    if code is None:
        code = build_codebook(cfg, snr_index)
    seed_key = [cfg.seed, snr_index, trial_index]
    rng = np.random.default_rng(seed_key)

    ch = sample_channel(rng, cfg.M, cfg.N, cfg.T, rho)
    msg = rng.integers(0, code.prime, size=code.message_dim)
    x = encode(code, msg)
    z_e = embed_message(code, msg)
    gen_c = code.coding_lattice.generator

    filters = augmented_qr(realify(ch))
    a_matrix = filters.backward @ gen_c
    Q, r_factor = np.linalg.qr(a_matrix)
    d = np.sign(np.diag(r_factor))
    d[d == 0] = 1.0
    r_factor = d[:, None] * r_factor
    Q = Q * d[None, :]

    if noiseless:
        target = a_matrix @ z_e
    else:
        y = transmit(x, ch, rng)
        y_prime = apply_forward(filters, y)
        # shift by the dither and the shaping point so the transmitted
        # codeword sits on the integer point z_e of the decode lattice
        target = y_prime - filters.backward @ (x - gen_c @ z_e)
    y2 = Q.T @ target

    radius = default_radius(cfg.M, cfg.T, rho, cfg.zeta)
    if cfg.timeout_policy == "none":
        timeout = math.inf
    elif cfg.timeout_policy == "fixed":
        timeout = float(cfg.timeout_value)
    else:
        timeout = compute_L0(r_factor, radius)

    outcome = _decode(cfg, r_factor, y2, a_matrix, target, radius, timeout)

    decoded_ok = False
    if outcome.status == decoders.FOUND and outcome.z_hat is not None:
        dz = outcome.z_hat - z_e
        if not dz.any():
            decoded_ok = True
        else:
            v = gen_c @ dz
            tol = 1e-6 * max(1.0, float(np.max(np.abs(code.shaping_lattice.generator))))
            decoded_ok = code.shaper().distance(v) <= tol

    return TrialRecord(
        snr_db=snr_db,
        outage=is_outage(ch, cfg.rate_at(rho)),
        decoded_ok=decoded_ok,
        status=outcome.status,
        total_count=outcome.total_count,
        timeout_used=timeout,
        channel_seed=seed_key,
    )


def _run_chunk(args) -> list:
    cfg_dict, snr_index, code_dict, indices, noiseless = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    code = NestedLastCode.from_dict(code_dict)
    return [(t, run_trial(cfg, snr_index, t, code=code, noiseless=noiseless))
            for t in indices]


def default_tail_grid(m: int, counts) -> list:
    top = max(max(counts), m + 1)
    grid = np.unique(np.geomspace(m, top, TAIL_GRID_POINTS).round().astype(np.int64))
    return [int(v) for v in grid]


def tail_distribution(records, l_grid) -> list:
    """Empirical Pr(C >= L) on the given grid."""
    if not records:
        raise ValueError("no records")
    counts = np.array([r.total_count for r in records], dtype=np.int64)
    return [(float(L), float(np.mean(counts >= L))) for L in l_grid]


def summarize_point(records) -> PointSummary:
    n = len(records)
    counts = [r.total_count for r in records]
    m_floor = min(counts)
    grid = default_tail_grid(m_floor, counts)
    return PointSummary(
        snr_db=records[0].snr_db,
        trials=n,
        avg_complexity=float(np.mean(counts)),
        error_rate=float(np.mean([not r.decoded_ok for r in records])),
        outage_rate=float(np.mean([r.outage for r in records])),
        timeout_rate=float(np.mean([r.status == decoders.TIMED_OUT for r in records])),
        tail=tail_distribution(records, grid),
    )


def run_point(cfg: ExperimentConfig, snr_index: int, workers: int = 1,
              noiseless: bool = False, keep_records: bool = False):
    code = build_codebook(cfg, snr_index)
    n = cfg.trials_per_point
    if workers <= 1:
        records = [run_trial(cfg, snr_index, t, code=code, noiseless=noiseless)
                   for t in range(n)]
    else:
        chunks = np.array_split(np.arange(n), workers * 4)
        jobs = [(cfg.to_dict(), snr_index, code.to_dict(), [int(t) for t in c], noiseless)
                for c in chunks if len(c)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            tagged = [item for part in pool.map(_run_chunk, jobs) for item in part]
        tagged.sort(key=lambda it: it[0])
        records = [rec for _, rec in tagged]
    summary = summarize_point(records)
    return (summary, records) if keep_records else (summary, None)


def run_sweep(cfg: ExperimentConfig, workers: int = 1,
              noiseless: bool = False) -> SweepResult:
    points = []
    for snr_index in range(len(cfg.snr_grid_db)):
        summary, _ = run_point(cfg, snr_index, workers=workers, noiseless=noiseless)
        points.append(summary)
    return SweepResult(config=cfg, points=points)


def _fmt(v) -> str:
    return f"{v:.17g}"


def results_csv(sweep: SweepResult) -> str:
    lines = ["snr_db,decoder,trials,avg_C,err_rate,outage_rate,timeout_rate"]
    for p in sweep.points:
        lines.append(",".join([
            _fmt(p.snr_db), sweep.config.decoder, str(p.trials),
            _fmt(p.avg_complexity), _fmt(p.error_rate),
            _fmt(p.outage_rate), _fmt(p.timeout_rate)]))
    return "\n".join(lines) + "\n"


def tail_csv(sweep: SweepResult) -> str:
    lines = ["snr_db,L,prob"]
    for p in sweep.points:
        for L, prob in p.tail:
            lines.append(",".join([_fmt(p.snr_db), _fmt(L), _fmt(prob)]))
    return "\n".join(lines) + "\n"
