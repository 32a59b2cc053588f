"""Closed-form diversity/complexity exponents and node-count thresholds.

Log convention: every formula below that raises log(rho) to a power uses the
natural logarithm.  The asymptotic orders are base-independent; fixing one
base keeps the reported numbers comparable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .decoders import SingularLatticeError

_ALPHA_MARGIN = 0.25  # grid headroom above 1; larger exponents only lose


def hypersphere_volume(k: int, radius: float) -> float:
    """(pi r^2)^{k/2} / Gamma(k/2 + 1), evaluated through log-Gamma."""
    if k < 1:
        raise ValueError("dimension must be >= 1")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if radius == 0.0:
        return 0.0
    return math.exp(log_hypersphere_volume(k, radius))


def log_hypersphere_volume(k: int, radius: float) -> float:
    if radius <= 0.0:
        return -math.inf
    return 0.5 * k * math.log(math.pi * radius * radius) - math.lgamma(0.5 * k + 1.0)


def dmt_exponent(M: int, N: int, r: float) -> float:
    """Optimal diversity-multiplexing tradeoff (M - r)(N - r)."""
    if not 0 <= r <= min(M, N):
        raise ValueError("multiplexing gain must lie in [0, min(M, N)]")
    return (M - r) * (N - r)


def l_exponent(M: int, N: int, T: int, r: int) -> float:
    """Complexity-threshold SNR exponent T r (M - r)/M - (M - r)(N - r),
    defined on the integer grid r = 0, 1, ..., M."""
    if r != int(r) or not 0 <= r <= M:
        raise ValueError("l(r) is defined for integer r in {0, ..., M}")
    r = int(r)
    return T * r * (M - r) / M - (M - r) * (N - r)


def maximize_l_over_alpha(M: int, N: int, T: int, r: float,
                          grid_step: float = 0.05):
    """Grid-search the exponent of the averaged threshold over the non-outage
    set of ordered eigenvalue exponents.

    Maximizes  T * sum_i (r/M - (1-a_i)^+)^+  -  sum_i (2i-1+N-M) a_i
    over a_1 >= ... >= a_M >= 0 with sum_i (1 - a_i)^+ >= r.  Returns the
    maximum and a maximizing alpha vector.

    This is the independent oracle for :func:`l_exponent`.  The closed form
    equals the objective evaluated at the DMT-optimal pattern (M-r ones then
    r zeros) and the grid maximum is never below it, but the two can differ:
    at r = 0 the maximum sits at alpha = 0 with value 0 (closed form -MN),
    and e.g. at (M,N,T,r) = (3,3,5,1) the point (1,0,0) scores +2/3 against
    the pattern's -2/3.  Flipping a "ones"-block entry to zero trades
    T*r/M of gain for that entry's density weight, so the pattern is only
    optimal when T*r/M dominates those weights.  Callers needing the
    reported closed-form exponent should use :func:`l_exponent`; this
    routine documents where the two part ways.
    """
    if grid_step > 0.05 or grid_step <= 0:
        raise ValueError("grid_step must lie in (0, 0.05]")
    if r > M:
        raise ValueError("constraint set is empty for r > M")
    levels = np.arange(0.0, 1.0 + _ALPHA_MARGIN + grid_step / 2, grid_step)
    weights = [2 * i - 1 + N - M for i in range(1, M + 1)]
    best = -math.inf
    best_alpha = None
    # nonincreasing alpha tuples == combinations with replacement, descending
    for combo in itertools.combinations_with_replacement(levels[::-1], M):
        if sum(max(1.0 - a, 0.0) for a in combo) < r - 1e-12:
            continue
        gain = T * sum(max(r / M - max(1.0 - a, 0.0), 0.0) for a in combo)
        cost = sum(w * a for w, a in zip(weights, combo))
        val = gain - cost
        if val > best:
            best = val
            best_alpha = np.array(combo)
    if best_alpha is None:
        raise ValueError("no feasible alpha vector on the grid")
    return best, best_alpha


def cutoff_multiplexing_gain(M: int, N: int, T: int) -> int:
    """Largest multiplexing gain with bounded average complexity,
    floor(MN / (M + T))."""
    if M < 1 or N < 1 or T < 1:
        raise ValueError("M, N, T must be >= 1")
    return (M * N) // (M + T)


def compute_L0(r_upper: np.ndarray, radius: float) -> float:
    """Node-count threshold m + V(S^m(2 R_s)) * sum_k V(S^k(R_s)) / det(R_kk),
    with R_kk the lower-right k x k block.  Accumulated in the log domain so
    large dimensions do not overflow; returns inf when the final
    exponentiation would."""
    R = np.asarray(r_upper, dtype=float)
    m = R.shape[0]
    if R.shape != (m, m):
        raise ValueError("triangular factor must be square")
    diag = np.diag(R)
    if np.any(diag <= 0.0):
        raise SingularLatticeError("triangular factor must have positive diagonal")
    if radius <= 0:
        raise ValueError("radius must be positive")
    log_diag = np.log(diag)
    terms = []
    logdet_kk = 0.0
    for k in range(1, m + 1):
        logdet_kk += log_diag[m - k]  # det of the lower-right k x k block
        terms.append(log_hypersphere_volume(k, radius) - logdet_kk)
    log_sum = _logsumexp(terms)
    log_total = log_hypersphere_volume(m, 2.0 * radius) + log_sum
    if log_total > 700.0:
        return math.inf
    return m + math.exp(log_total)


def _logsumexp(values) -> float:
    top = max(values)
    if top == -math.inf:
        return -math.inf
    return top + math.log(sum(math.exp(v - top) for v in values))


def partial_det_factorization_check(m_mat: np.ndarray, g_lower: np.ndarray,
                                    k: int):
    """Both sides of det((M G)_kk) = det(M_kk) det(G_kk) for lower-triangular
    G, where _kk is the lower-right k x k block."""
    M = np.asarray(m_mat, dtype=float)
    G = np.asarray(g_lower, dtype=float)
    m = M.shape[0]
    if not 1 <= k <= m:
        raise ValueError("k out of range")
    prod = M @ G
    lhs = float(np.linalg.det(prod[m - k:, m - k:]))
    rhs = float(np.linalg.det(M[m - k:, m - k:]) * np.linalg.det(G[m - k:, m - k:]))
    return lhs, rhs


def l_out_theoretical(M: int, N: int, T: int, r: int, rho: float) -> float:
    """Average threshold 2MT + (ln rho)^{2MT} * rho^{l(r)} over non-outage
    channels."""
    return _threshold_formula(M, N, T, r, rho, exponent=2 * M * T)


def sequential_complexity_theoretical(M: int, N: int, T: int, r: int,
                                      rho: float) -> float:
    """Stack-decoder counterpart 2MT + (ln rho)^{MT} * rho^{l(r)}."""
    return _threshold_formula(M, N, T, r, rho, exponent=M * T)


def _threshold_formula(M, N, T, r, rho, exponent) -> float:
    if rho <= 1.0:
        raise ValueError("rho must exceed 1")
    lr = l_exponent(M, N, T, r)
    log_term = exponent * math.log(math.log(rho)) + lr * math.log(rho)
    if log_term > 700.0:
        return math.inf
    return 2 * M * T + math.exp(log_term)


@dataclass
class ExponentProfile:
    """Closed-form exponent summary for one (M, N, T, r) operating point."""

    M: int
    N: int
    T: int
    r: int
    d_out: float
    l_r: float
    r0: int

    @classmethod
    def build(cls, M: int, N: int, T: int, r: int) -> "ExponentProfile":
        return cls(M=M, N=N, T=T, r=r,
                   d_out=dmt_exponent(M, N, r),
                   l_r=l_exponent(M, N, T, r),
                   r0=min(cutoff_multiplexing_gain(M, N, T), min(M, N)))
