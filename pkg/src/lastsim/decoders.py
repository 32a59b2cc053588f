"""Lattice decoders: instrumented Fincke-Pohst sphere decoder, Babai,
brute-force CVP, LLL reduction, lattice-reduction aided decoding, and a
best-first stack sequential decoder.

All decoders work on the triangularized model ``y' = R z + e`` with ``R``
upper triangular and positive diagonal, except where noted.  Components are
processed backward (index m-1 down to 0), so the layer holding component
``z_k`` is reached after components ``z_{k+1}..z_m`` are fixed.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

FOUND = "found"
EMPTY_SPHERE = "empty-sphere"
TIMED_OUT = "timed-out"

_BOUND_EPS = 1e-9  # slack on enumeration interval endpoints; the metric test decides


class SingularLatticeError(ValueError):
    pass


class OracleScaleError(ValueError):
    """Raised when a brute-force oracle would exceed its tractable size."""


def round_half_away(x: float) -> int:
    """Round to nearest integer, halves away from zero (single convention
    shared by Babai and all enumeration code)."""
    if x >= 0.0:
        return int(math.floor(x + 0.5))
    return int(math.ceil(x - 0.5))


@dataclass
class SphereConfig:
    """Search configuration for :func:`sphere_decode`.

    ``radius`` is the Euclidean search radius R_s.  ``timeout`` is the node
    budget: the search stops and reports ``timed-out`` as soon as the visit
    count reaches it.
    """

    radius: float
    timeout: float = math.inf
    zeta: float | None = None  # recorded when the radius came from the default rule

    @classmethod
    def with_default_radius(cls, M: int, T: int, rho: float, zeta: float = 2.0,
                            timeout: float = math.inf) -> "SphereConfig":
        return cls(radius=default_radius(M, T, rho, zeta), timeout=timeout, zeta=zeta)


@dataclass
class DecodeOutcome:
    z_hat: np.ndarray | None
    layer_counts: list[int]
    total_count: int
    status: str
    metric: float = math.nan


def default_radius(M: int, T: int, rho: float, zeta: float) -> float:
    """Search radius sqrt(MT(1 + zeta*ln(rho))); grows just fast enough with
    SNR to keep the noise inside the sphere with high probability."""
    if M < 1 or T < 1 or rho <= 1.0 or zeta < 0:
        raise ValueError("need M,T >= 1, rho > 1 and zeta >= 0")
    return math.sqrt(M * T * (1.0 + zeta * math.log(rho)))


def _check_upper_triangular(r_upper: np.ndarray) -> np.ndarray:
    R = np.asarray(r_upper, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError("triangular factor must be square")
    if np.any(np.diag(R) <= 0.0):
        raise ValueError("triangular factor must have positive diagonal")
    return R


def sphere_decode(r_upper: np.ndarray, y_prime: np.ndarray,
                  cfg: SphereConfig) -> DecodeOutcome:
    """Fincke-Pohst enumeration inside a fixed sphere, instrumented with
    per-layer visit counts.

    Every partial vector whose accumulated metric stays within the squared
    radius is visited and counted; there is no pruning against the best leaf
    found so far and no radius shrinking.  Candidates within a layer are
    scanned in natural ascending order.  Returns the in-sphere leaf with the
    smallest metric (ties: lexicographically smallest integer vector), or
    ``empty-sphere`` when the sphere holds no lattice point.  The visit count
    is compared against ``cfg.timeout`` after every counted node; crossing it
    aborts the search with ``timed-out``.
    """
    R = _check_upper_triangular(r_upper)
    m = R.shape[0]
    y = np.asarray(y_prime, dtype=float)
    if y.shape != (m,):
        raise ValueError("target length does not match matrix size")
    if cfg.radius <= 0.0:
        raise ValueError("radius must be positive")

    rs2 = cfg.radius * cfg.radius
    timeout = cfg.timeout
    rows = R.tolist()
    yl = y.tolist()
    diag = [rows[i][i] for i in range(m)]

    counts = [0] * m
    total = 0
    best_d = math.inf
    best_z: list[int] | None = None

    z = [0] * m
    zcur = [0] * m
    zhi = [0] * m
    pdist = [0.0] * m
    center = [0.0] * m

    i = m - 1
    center[i] = yl[i]
    pdist[i] = 0.0
    s = math.sqrt(rs2)
    zcur[i] = math.ceil((yl[i] - s) / diag[i] - _BOUND_EPS)
    zhi[i] = math.floor((yl[i] + s) / diag[i] + _BOUND_EPS)

    timed_out = False
    while True:
        zi = zcur[i]
        if zi > zhi[i]:
            i += 1
            if i == m:
                break
            continue
        zcur[i] = zi + 1
        resid = center[i] - diag[i] * zi
        d = pdist[i] + resid * resid
        if d > rs2:
            continue
        z[i] = zi
        counts[i] += 1
        total += 1
        if i == 0:
            if d < best_d or (d == best_d and best_z is not None
                              and tuple(z) < tuple(best_z)):
                best_d = d
                best_z = z.copy()
            if total >= timeout:
                timed_out = True
                break
            continue
        if total >= timeout:
            timed_out = True
            break
        # extend: open the next layer down
        i -= 1
        pdist[i] = d
        row = rows[i]
        acc = yl[i]
        for j in range(i + 1, m):
            acc -= row[j] * z[j]
        center[i] = acc
        rem = rs2 - d
        s = math.sqrt(rem) if rem > 0.0 else 0.0
        di = diag[i]
        zcur[i] = math.ceil((acc - s) / di - _BOUND_EPS)
        zhi[i] = math.floor((acc + s) / di + _BOUND_EPS)

    if timed_out:
        status = TIMED_OUT
    elif best_z is None:
        status = EMPTY_SPHERE
    else:
        status = FOUND
    z_hat = None if best_z is None else np.array(best_z, dtype=np.int64)
    return DecodeOutcome(z_hat=z_hat, layer_counts=counts, total_count=total,
                         status=status, metric=best_d)


def babai_nearest_plane(r_upper: np.ndarray, y_prime: np.ndarray) -> np.ndarray:
    """Greedy layer-by-layer rounding estimate (backward substitution)."""
    R = _check_upper_triangular(r_upper)
    m = R.shape[0]
    y = np.asarray(y_prime, dtype=float)
    z = np.zeros(m, dtype=np.int64)
    for i in range(m - 1, -1, -1):
        c = y[i] - float(R[i, i + 1:] @ z[i + 1:])
        z[i] = round_half_away(c / R[i, i])
    return z


def brute_force_cvp(generator: np.ndarray, y: np.ndarray,
                    box_bound: int = 3) -> np.ndarray:
    """Reference closest-point oracle: exhaustive search over an integer box
    centred at the Babai estimate.  Ties resolve to the lexicographically
    smallest coefficient vector.  Refuses dimensions above 8."""
    G = np.asarray(generator, dtype=float)
    m = G.shape[0]
    if G.shape != (m, m):
        raise ValueError("generator must be square")
    if m > 8:
        raise OracleScaleError("brute-force CVP limited to dimension <= 8")
    y = np.asarray(y, dtype=float)
    Q, R = np.linalg.qr(G)
    dsign = np.sign(np.diag(R))
    dsign[dsign == 0] = 1.0
    R = dsign[:, None] * R
    Q = Q * dsign[None, :]
    z0 = babai_nearest_plane(R, Q.T @ y)

    ranges = [np.arange(z0[i] - box_bound, z0[i] + box_bound + 1) for i in range(m)]
    grid = np.meshgrid(*ranges, indexing="ij")
    cand = np.stack([g.ravel() for g in grid], axis=1)  # C-order => lexicographic
    diffs = cand @ G.T - y[None, :]
    d2 = np.einsum("ij,ij->i", diffs, diffs)
    return cand[int(np.argmin(d2))].astype(np.int64)


def layer_count_enumeration(r_upper: np.ndarray, y_prime: np.ndarray,
                            radius: float, k: int) -> int:
    """Independent count of the k-dimensional partial vectors within the
    radius, by direct box enumeration against the lower-right k x k block.

    Matches the sphere decoder's visit count at search depth k (component
    index m-k+1).
    """
    R = _check_upper_triangular(r_upper)
    m = R.shape[0]
    if not 1 <= k <= m:
        raise ValueError("k out of range")
    if m > 8:
        raise OracleScaleError("layer enumeration limited to dimension <= 8")
    y = np.asarray(y_prime, dtype=float)
    Rk = R[m - k:, m - k:]
    yk = y[m - k:]
    center = np.linalg.solve(Rk, yk)
    opnorm = np.linalg.norm(np.linalg.inv(Rk), 2)
    w = int(math.ceil(radius * opnorm)) + 1
    if (2 * w + 1) ** k > 5e7:
        raise OracleScaleError("enumeration box too large")
    ranges = [range(round_half_away(center[i]) - w, round_half_away(center[i]) + w + 1)
              for i in range(k)]
    rs2 = radius * radius
    count = 0
    chunk: list[tuple[int, ...]] = []
    for zt in itertools.product(*ranges):
        chunk.append(zt)
        if len(chunk) == 65536:
            diffs = np.array(chunk, dtype=float) @ Rk.T - yk[None, :]
            count += int(np.sum(np.einsum("ij,ij->i", diffs, diffs) <= rs2))
            chunk = []
    if chunk:
        diffs = np.array(chunk, dtype=float) @ Rk.T - yk[None, :]
        count += int(np.sum(np.einsum("ij,ij->i", diffs, diffs) <= rs2))
    return count


# ---------------------------------------------------------------------------
# LLL reduction and the reduction-aided decoder


def _gram_schmidt(B: np.ndarray):
    n = B.shape[1]
    Bs = B.astype(float).copy()
    mu = np.eye(n)
    norms = np.zeros(n)
    for i in range(n):
        v = B[:, i].astype(float).copy()
        for j in range(i):
            mu[i, j] = (B[:, i] @ Bs[:, j]) / norms[j]
            v -= mu[i, j] * Bs[:, j]
        Bs[:, i] = v
        norms[i] = v @ v
    return Bs, mu, norms


def lll_reduce(generator: np.ndarray, delta: float = 0.75):
    """Lenstra-Lenstra-Lovasz reduction of the basis columns.

    Returns ``(reduced, unimodular)`` with ``reduced = generator @ unimodular``
    and ``unimodular`` an integer matrix of determinant +-1.  Gram-Schmidt
    state is updated in place across swaps (no recomputation).
    """
    if not 0.25 < delta <= 1.0:
        raise ValueError("delta must lie in (0.25, 1]")
    B = np.array(generator, dtype=float)
    n = B.shape[1]
    sign, logdet = np.linalg.slogdet(B)
    if sign == 0 or not np.isfinite(logdet):
        raise SingularLatticeError("basis is rank deficient")
    U = np.eye(n, dtype=np.int64)

    _, mu, norms = _gram_schmidt(B)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round_half_away(mu[k, j])
            if q != 0:
                B[:, k] -= q * B[:, j]
                U[:, k] -= q * U[:, j]
                mu[k, :j + 1] -= q * mu[j, :j + 1]
        if norms[k] >= (delta - mu[k, k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            m_kk = mu[k, k - 1]
            b_new = norms[k] + m_kk * m_kk * norms[k - 1]
            mu[k, k - 1] = m_kk * norms[k - 1] / b_new
            norms[k] = norms[k - 1] * norms[k] / b_new
            norms[k - 1] = b_new
            tmp = mu[k - 1, :k - 1].copy()
            mu[k - 1, :k - 1] = mu[k, :k - 1]
            mu[k, :k - 1] = tmp
            for i in range(k + 1, n):
                t = mu[i, k]
                mu[i, k] = mu[i, k - 1] - m_kk * t
                mu[i, k - 1] = t + mu[k, k - 1] * mu[i, k]
            B[:, [k - 1, k]] = B[:, [k, k - 1]]
            U[:, [k - 1, k]] = U[:, [k, k - 1]]
            k = max(k - 1, 1)
    return B, U


def lr_aided_decode(channel_code_matrix: np.ndarray, target: np.ndarray,
                    delta: float = 0.75) -> DecodeOutcome:
    """LLL-reduce the channel-code matrix, round with Babai on the reduced
    basis, and map back through the unimodular transform.

    Fixed-cost decoder convention: the reported complexity is the dimension m
    and the per-layer counts stay zero.
    """
    A = np.asarray(channel_code_matrix, dtype=float)
    m = A.shape[0]
    Ared, U = lll_reduce(A, delta)
    Q, R = np.linalg.qr(Ared)
    dsign = np.sign(np.diag(R))
    dsign[dsign == 0] = 1.0
    R = dsign[:, None] * R
    Q = Q * dsign[None, :]
    zred = babai_nearest_plane(R, Q.T @ np.asarray(target, dtype=float))
    z = U @ zred
    resid = np.asarray(target, dtype=float) - A @ z
    return DecodeOutcome(z_hat=z.astype(np.int64), layer_counts=[0] * m,
                         total_count=m, status=FOUND, metric=float(resid @ resid))


# ---------------------------------------------------------------------------
# Best-first stack sequential decoder


def stack_sequential_decode(r_upper: np.ndarray, y_prime: np.ndarray,
                            bias: float, timeout: float = math.inf) -> DecodeOutcome:
    """Stack decoder with a per-depth bias: partial vectors are ranked by
    ``bias * depth - partial_metric`` and the best node is extended first.

    Children of a node are generated lazily in zig-zag order around the
    layer centre (pop a node -> push its best unseen child and the node's
    next sibling), so the infinite integer tree never has to be materialised.
    Returns the first full-length vector popped from the stack.
    """
    R = _check_upper_triangular(r_upper)
    m = R.shape[0]
    y = np.asarray(y_prime, dtype=float)
    if bias <= 0:
        raise ValueError("bias must be positive")
    rows = R.tolist()
    yl = y.tolist()
    diag = [rows[i][i] for i in range(m)]

    counts = [0] * m
    total = 0
    seq = itertools.count()

    def make_node(i: int, pdist: float, center: float, zi: int, delta: int,
                  tail: tuple[int, ...]):
        resid = center - diag[i] * zi
        d = pdist + resid * resid
        depth = m - i
        score = bias * depth - d
        return (-score, next(seq), i, pdist, center, zi, delta, d, tail)

    def first_candidate(i: int, pdist: float, tail: tuple[int, ...]):
        row = rows[i]
        acc = yl[i]
        for j in range(i + 1, m):
            acc -= row[j] * tail[j - i - 1]
        c = acc / diag[i]
        zi = round_half_away(c)
        delta = 1 if c >= zi else -1
        return make_node(i, pdist, acc, zi, delta, tail)

    heap = [first_candidate(m - 1, 0.0, ())]
    while heap:
        _, _, i, pdist, center, zi, delta, d, tail = heapq.heappop(heap)
        counts[i] += 1
        total += 1
        if total >= timeout:
            return DecodeOutcome(z_hat=None, layer_counts=counts,
                                 total_count=total, status=TIMED_OUT)
        # sibling: next zig-zag candidate at this layer
        heapq.heappush(heap, make_node(i, pdist, center, zi + delta,
                                       -(delta + (1 if delta > 0 else -1)), tail))
        if i == 0:
            z = np.array((zi,) + tail, dtype=np.int64)
            return DecodeOutcome(z_hat=z, layer_counts=counts, total_count=total,
                                 status=FOUND, metric=d)
        heapq.heappush(heap, first_candidate(i - 1, d, (zi,) + tail))
    raise RuntimeError("stack exhausted")  # unreachable: siblings are endless


# ---------------------------------------------------------------------------
# Exact closest-point search used for shaping (Schnorr-Euchner order with
# metric pruning; exact, but not instrumented and free to shrink)


def closest_point_search(r_upper: np.ndarray, y_prime: np.ndarray):
    """Exact CVP on an upper-triangular basis.  Returns ``(z, squared_dist)``.

    Visits candidates per layer in zig-zag order and prunes once the partial
    metric reaches the best full metric seen, which keeps shaping fast on
    reduced bases.  Only used internally; the instrumented decoder above is
    the object of study and never shrinks.
    """
    R = _check_upper_triangular(r_upper)
    m = R.shape[0]
    y = np.asarray(y_prime, dtype=float)
    rows = R.tolist()
    yl = y.tolist()
    diag = [rows[i][i] for i in range(m)]

    best_d = math.inf
    best_z: list[int] | None = None
    pdist = [0.0] * m
    center = [0.0] * m
    zz = [0] * m
    step = [0] * m

    i = m - 1
    center[i] = yl[i]
    pdist[i] = 0.0
    c = yl[i] / diag[i]
    zz[i] = round_half_away(c)
    step[i] = 1 if c >= zz[i] else -1

    while True:
        resid = center[i] - diag[i] * zz[i]
        d = pdist[i] + resid * resid
        if d < best_d:
            if i > 0:
                i -= 1
                pdist[i] = d
                row = rows[i]
                acc = yl[i]
                for j in range(i + 1, m):
                    acc -= row[j] * zz[j]
                center[i] = acc
                c = acc / diag[i]
                zz[i] = round_half_away(c)
                step[i] = 1 if c >= zz[i] else -1
                continue
            best_d = d
            best_z = zz.copy()
        else:
            # zig-zag at this layer is outward-monotone: nothing closer left
            i += 1
            if i == m:
                break
        zz[i] += step[i]
        step[i] = -(step[i] + (1 if step[i] > 0 else -1))

    assert best_z is not None
    return np.array(best_z, dtype=np.int64), best_d
