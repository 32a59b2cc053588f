"""Quick oracle suites behind the ``validate`` CLI subcommand.

Each check is a scaled-down version of the full acceptance tests: fast to
run, pass/fail by the same comparisons.
"""

from __future__ import annotations

import math

import numpy as np

from .analysis import (cutoff_multiplexing_gain, dmt_exponent, l_exponent,
                       partial_det_factorization_check)
from .channel import realify, sample_channel
from .decoders import (SphereConfig, babai_nearest_plane, brute_force_cvp,
                       layer_count_enumeration, lll_reduce, sphere_decode)
from .mmse_dfe import augmented_qr


def _random_triangular(rng, m):
    A = rng.standard_normal((m, m))
    Q, R = np.linalg.qr(A)
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return d[:, None] * R


def cvp_instance(rng, m, y_scale=2.5):
    """Random CVP instance plus a brute-force box size that provably covers
    the optimum (||G^-1|| * 2 * babai_dist around the Babai point); bases
    that would need a huge box are LLL-reduced to keep the oracle tractable."""
    G = rng.standard_normal((m, m))
    y = y_scale * rng.standard_normal(m)
    for attempt in range(2):
        Q, R = np.linalg.qr(G)
        d = np.sign(np.diag(R))
        d[d == 0] = 1.0
        R = d[:, None] * R
        Q = Q * d[None, :]
        yp = Q.T @ y
        zb = babai_nearest_plane(R, yp)
        babai_dist = float(np.linalg.norm(yp - R @ zb))
        need = math.ceil(2.0 * np.linalg.norm(np.linalg.inv(G), 2) * babai_dist) + 1
        if need <= 5 or attempt == 1:
            return G, y, R, yp, babai_dist, min(need, 8)
        G, _ = lll_reduce(G)
    raise AssertionError("unreachable")


def check_cvp_oracle(instances: int = 150, seed: int = 7):
    rng = np.random.default_rng(seed)
    for _ in range(instances):
        m = int(rng.choice([2, 4]))
        G, y, R, yp, babai_dist, box = cvp_instance(rng, m, y_scale=3.0)
        out = sphere_decode(R, yp, SphereConfig(radius=babai_dist + 1e-9))
        zo = brute_force_cvp(G, y, box_bound=box)
        if out.status != "found" or not np.array_equal(out.z_hat, zo):
            return False, f"mismatch on m={m}"
    return True, f"{instances} instances agree"

def check_layer_counts(instances: int = 40, seed: int = 11):
    rng = np.random.default_rng(seed)
    for _ in range(instances):
        m = int(rng.choice([2, 3, 4]))
        R = _random_triangular(rng, m) + np.diag(0.5 * np.ones(m))
        R = np.abs(np.diag(np.diag(R))) + np.triu(R, 1)
        yp = rng.standard_normal(m)
        radius = 1.5
        out = sphere_decode(R, yp, SphereConfig(radius=radius))
        for k in range(1, m + 1):
            want = layer_count_enumeration(R, yp, radius, k)
            if out.layer_counts[m - k] != want:
                return False, f"layer {k} count mismatch"
    return True, f"{instances} instances, all layers exact"


def check_det_identity(instances: int = 100, seed: int = 13):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        M = int(rng.integers(1, 4))
        N = int(rng.integers(1, 4))
        T = int(rng.choice([1, 3]))
        rho = float(rng.uniform(2.0, 500.0))
        ch = sample_channel(rng, M, N, T, rho)
        f = augmented_qr(realify(ch))
        _, logdet_b = np.linalg.slogdet(f.backward.T @ f.backward)
        gram = np.eye(M) + rho * (ch.h_complex.conj().T @ ch.h_complex)
        _, logdet_c = np.linalg.slogdet(gram)
        rel = abs(math.expm1(logdet_b - 2 * T * logdet_c.real))
        worst = max(worst, rel)
    return worst <= 1e-8, f"max relative error {worst:.3e}"


def check_det_factorization(instances: int = 100, seed: int = 17):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        m = int(rng.integers(2, 9))
        Mm = rng.standard_normal((m, m))
        G = np.tril(rng.standard_normal((m, m))) + np.diag(rng.uniform(0.5, 2.0, m))
        for k in range(1, m + 1):
            lhs, rhs = partial_det_factorization_check(Mm, G, k)
            worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    return worst <= 1e-8, f"max relative error {worst:.3e}"


def check_closed_forms():
    ok = (cutoff_multiplexing_gain(2, 2, 3) == 0
          and cutoff_multiplexing_gain(3, 3, 5) == 1
          and l_exponent(2, 2, 3, 0) == -4.0
          and dmt_exponent(2, 2, 0) == 4.0
          and dmt_exponent(3, 3, 1) == 4.0)
    return ok, "cutoff/DMT/threshold exponents"


def run_all():
    checks = [
        ("cvp-oracle-equivalence", check_cvp_oracle),
        ("layer-count-instrumentation", check_layer_counts),
        ("mmse-dfe-determinant-identity", check_det_identity),
        ("lower-triangular-det-factorization", check_det_factorization),
        ("closed-form-exponents", check_closed_forms),
    ]
    results = []
    for name, fn in checks:
        ok, detail = fn()
        results.append((name, ok, detail))
    return results
