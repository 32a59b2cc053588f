import dataclasses
import json
import math

import numpy as np
import pytest

from lastsim.harness import (ExperimentConfig, SweepResult, TrialRecord,
                             build_codebook, default_tail_grid, results_csv,
                             run_point, run_sweep, run_trial, summarize_point,
                             tail_csv, tail_distribution)


def small_cfg(**kw):
    base = dict(M=1, N=1, T=1, rate_mode="fixed-R", rate_bpcu=2.0,
                snr_grid_db=[14.0], trials_per_point=20, seed=7, zeta=1.5)
    base.update(kw)
    return ExperimentConfig(**base)


# ---------------------------------------------------------------------------
# config plumbing

def test_config_round_trip_lossless():
    cfg = ExperimentConfig(M=2, N=3, T=4, rate_mode="fixed-r", multiplexing_gain=0.5,
                           snr_grid_db=[10.0, 20.0], trials_per_point=5, seed=99,
                           decoder="sequential", zeta=1.25, timeout_policy="fixed",
                           timeout_value=500.0, sequential_bias=0.75)
    clone = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert clone == cfg


def test_config_validation():
    with pytest.raises(ValueError):
        small_cfg(decoder="magic")
    with pytest.raises(ValueError):
        small_cfg(snr_grid_db=[10.0, 10.0])
    with pytest.raises(ValueError):
        small_cfg(trials_per_point=0)
    with pytest.raises(ValueError):
        small_cfg(timeout_policy="fixed")
    with pytest.raises(ValueError):
        ExperimentConfig(M=1, N=1, T=1, rate_mode="fixed-r", snr_grid_db=[10.0])


def test_rate_modes():
    cfg = small_cfg()
    assert cfg.rate_at(100.0) == 2.0
    cfg = small_cfg(rate_mode="fixed-r", rate_bpcu=None, multiplexing_gain=0.5)
    assert cfg.rate_at(100.0) == pytest.approx(0.5 * math.log2(100.0))


# ---------------------------------------------------------------------------
# trials

def test_trial_deterministic():
    cfg = small_cfg()
    code = build_codebook(cfg, 0)
    a = run_trial(cfg, 0, 3, code=code)
    b = run_trial(cfg, 0, 3, code=code)
    assert a == b


def test_noiseless_trial_decodes():
    cfg = small_cfg(trials_per_point=5)
    code = build_codebook(cfg, 0)
    m = code.dimension
    for t in range(5):
        rec = run_trial(cfg, 0, t, code=code, noiseless=True)
        assert rec.decoded_ok
        assert rec.status == "found"
        assert rec.total_count >= m


def test_fixed_timeout_at_dimension_times_out():
    cfg = small_cfg(M=2, N=2, T=3, rate_bpcu=4.0, snr_grid_db=[8.0],
                    timeout_policy="fixed", timeout_value=12)
    code = build_codebook(cfg, 0)
    statuses = [run_trial(cfg, 0, t, code=code).status for t in range(10)]
    assert statuses.count("timed-out") >= 9  # immediate cutoff at C = m


def test_l0_policy_records_threshold():
    cfg = small_cfg(M=2, N=2, T=3, rate_bpcu=4.0, snr_grid_db=[20.0],
                    timeout_policy="L0-formula")
    code = build_codebook(cfg, 0)
    rec = run_trial(cfg, 0, 0, code=code)
    assert rec.timeout_used > code.dimension
    assert rec.status == "found"


def test_decoded_ok_implies_found():
    cfg = small_cfg(M=2, N=2, T=3, rate_bpcu=4.0, snr_grid_db=[6.0],
                    trials_per_point=40)
    code = build_codebook(cfg, 0)
    for t in range(40):
        rec = run_trial(cfg, 0, t, code=code)
        if rec.decoded_ok:
            assert rec.status == "found"
        if rec.status == "found":
            assert rec.total_count >= code.dimension


def test_sequential_and_lr_paths_run():
    for dec in ["sequential", "lr-aided"]:
        cfg = small_cfg(M=2, N=2, T=2, rate_bpcu=3.0, snr_grid_db=[18.0],
                        decoder=dec, trials_per_point=8)
        code = build_codebook(cfg, 0)
        recs = [run_trial(cfg, 0, t, code=code) for t in range(8)]
        assert all(r.status == "found" for r in recs)
        assert np.mean([r.decoded_ok for r in recs]) > 0.5


# ---------------------------------------------------------------------------
# aggregation

def test_tail_distribution_examples():
    recs = [TrialRecord(10.0, False, True, "found", c, math.inf, [0, 0, i])
            for i, c in enumerate([3, 5, 7])]
    tail = dict(tail_distribution(recs, [0, 5, 100]))
    assert tail[0] == 1.0
    assert tail[5] == pytest.approx(2 / 3)
    assert tail[100] == 0.0
    with pytest.raises(ValueError):
        tail_distribution([], [1])


def test_tail_grid_geometric():
    grid = default_tail_grid(12, [12, 40, 4000])
    assert grid[0] == 12
    assert grid[-1] == 4000
    assert len(grid) <= 64
    assert all(b > a for a, b in zip(grid, grid[1:]))


def test_single_trial_aggregates_match_record():
    cfg = small_cfg(trials_per_point=1)
    summary, records = run_point(cfg, 0, keep_records=True)
    rec = records[0]
    assert summary.trials == 1
    assert summary.avg_complexity == rec.total_count
    assert summary.error_rate == float(not rec.decoded_ok)
    assert summary.outage_rate == float(rec.outage)


def test_point_summary_tail_monotone():
    cfg = small_cfg(M=2, N=2, T=2, rate_bpcu=3.0, snr_grid_db=[12.0],
                    trials_per_point=50)
    summary, _ = run_point(cfg, 0)
    probs = [p for _, p in summary.tail]
    assert all(b <= a for a, b in zip(probs, probs[1:]))
    assert probs[0] <= 1.0


def test_worker_count_does_not_change_results():
    cfg = small_cfg(M=2, N=2, T=2, rate_bpcu=3.0, snr_grid_db=[15.0],
                    trials_per_point=24)
    s1, _ = run_point(cfg, 0, workers=1)
    s2, _ = run_point(cfg, 0, workers=2)
    s8, _ = run_point(cfg, 0, workers=8)
    assert s1 == s2 == s8


def test_error_union_includes_timeouts():
    cfg = small_cfg(M=2, N=2, T=3, rate_bpcu=4.0, snr_grid_db=[10.0],
                    trials_per_point=30, timeout_policy="fixed", timeout_value=12)
    summary, records = run_point(cfg, 0, keep_records=True)
    assert summary.timeout_rate > 0.5
    assert summary.error_rate >= summary.timeout_rate  # timeouts count as errors


def test_run_sweep_matches_run_point():
    cfg = small_cfg(snr_grid_db=[12.0, 18.0], trials_per_point=10)
    sweep = run_sweep(cfg)
    assert len(sweep.points) == 2
    p0, _ = run_point(cfg, 0)
    assert sweep.points[0] == p0


def test_fixed_r_mode_runs_and_scales_rate():
    cfg = ExperimentConfig(M=1, N=1, T=2, rate_mode="fixed-r", multiplexing_gain=0.4,
                           snr_grid_db=[15.0, 21.0], trials_per_point=5, seed=3)
    lo = build_codebook(cfg, 0)
    hi = build_codebook(cfg, 1)
    assert hi.rate_bpcu > lo.rate_bpcu
    sweep = run_sweep(cfg)
    assert len(sweep.points) == 2


def test_standard_error_halves_with_double_trials():
    # with the codebook pinned, the across-seed spread of the average
    # complexity shrinks like 1/sqrt(trials) (within 30 percent); the
    # codebook must be held fixed because its dither contributes a
    # between-seed component that no number of trials averages away
    base = small_cfg(M=2, N=2, T=2, rate_bpcu=3.0, snr_grid_db=[22.0])
    code = build_codebook(base, 0)

    def spread(trials):
        avgs = []
        for seed in range(24):
            cfg = small_cfg(M=2, N=2, T=2, rate_bpcu=3.0, snr_grid_db=[22.0],
                            trials_per_point=trials, seed=1000 + seed)
            cs = [run_trial(cfg, 0, t, code=code).total_count for t in range(trials)]
            avgs.append(float(np.mean(cs)))
        return float(np.std(avgs))

    ratio = spread(50) / spread(100)
    assert math.sqrt(2.0) * 0.7 <= ratio <= math.sqrt(2.0) * 1.3


def test_sequential_saves_computation_at_25db():
    # 2x2, T=3, R=4 at 25 dB: the stack decoder extends far fewer nodes on
    # average than the fixed-radius enumeration, on the same channels
    kw = dict(M=2, N=2, T=3, rate_bpcu=4.0, snr_grid_db=[25.0],
              trials_per_point=1000, seed=31, zeta=1.0)
    sph, _ = run_point(small_cfg(decoder="sphere", **kw), 0)
    seq, _ = run_point(small_cfg(decoder="sequential", sequential_bias=1.0, **kw), 0)
    assert seq.avg_complexity < sph.avg_complexity


def test_lr_aided_error_rate_not_below_sphere():
    # reduction-aided rounding trades accuracy for fixed cost
    kw = dict(M=2, N=2, T=3, rate_bpcu=4.0, snr_grid_db=[16.0],
              trials_per_point=1500, seed=32, zeta=1.0)
    sph, _ = run_point(small_cfg(decoder="sphere", **kw), 0)
    lr, _ = run_point(small_cfg(decoder="lr-aided", **kw), 0)
    assert lr.error_rate >= sph.error_rate
    assert lr.avg_complexity == 12.0  # fixed-cost convention


# ---------------------------------------------------------------------------
# CSV output

def test_results_csv_schema_and_precision():
    cfg = small_cfg(trials_per_point=6)
    sweep = run_sweep(cfg)
    text = results_csv(sweep)
    lines = text.strip().split("\n")
    assert lines[0] == "snr_db,decoder,trials,avg_C,err_rate,outage_rate,timeout_rate"
    fields = lines[1].split(",")
    assert fields[1] == "sphere"
    assert int(fields[2]) == 6
    assert float(fields[3]) == sweep.points[0].avg_complexity
    # 17 significant digits survive the round trip
    assert float(fields[0]) == sweep.points[0].snr_db


def test_tail_csv_schema():
    cfg = small_cfg(trials_per_point=6)
    sweep = run_sweep(cfg)
    lines = tail_csv(sweep).strip().split("\n")
    assert lines[0] == "snr_db,L,prob"
    assert len(lines) > 1
    for row in lines[1:]:
        snr, L, prob = row.split(",")
        assert float(prob) <= 1.0
