"""Construction-A (mod-p) lattices and nested LAST codebooks.

A codebook is built from the Loeliger mod-p ensemble: a linear code over Z_p
with systematic generator [I; P] is lifted to the lattice kappa*(C + p Z^m),
a self-similar pair (shaping lattice, coding lattice) is carved out of it,
and messages are mapped to dithered, power-constrained codewords by reducing
modulo the shaping lattice with an exact closest-point search.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .decoders import SingularLatticeError, closest_point_search, lll_reduce

_PRIME_CAP = 251
_PRIMES = [p for p in range(2, _PRIME_CAP + 1)
           if all(p % q for q in range(2, int(math.isqrt(p)) + 1))]

POWER_TARGET_FRACTION = 0.95  # calibrated mean codeword energy, fraction of MT
CALIBRATION_SAMPLES = 10_000


class RateInfeasibleError(ValueError):
    pass


@dataclass
class Lattice:
    """Full-rank lattice; basis vectors are the columns of ``generator``."""

    generator: np.ndarray
    dimension: int = 0

    def __post_init__(self):
        self.generator = np.asarray(self.generator, dtype=float)
        m = self.generator.shape[0]
        if self.generator.shape != (m, m):
            raise ValueError("generator must be square")
        self.dimension = m
        scale = float(np.max(np.abs(self.generator))) or 1.0
        sign, logdet = np.linalg.slogdet(self.generator)
        if sign == 0 or logdet < math.log(1e-12) + m * math.log(scale):
            raise SingularLatticeError("generator is numerically singular")


def fundamental_volume(lat: Lattice) -> float:
    """Volume of the Voronoi cell, sqrt(det(G^T G))."""
    sign, logdet = np.linalg.slogdet(lat.generator)
    if sign == 0:
        raise SingularLatticeError("rank-deficient generator")
    return math.exp(logdet)


def effective_radius(channel_code_matrix: np.ndarray) -> float:
    """Radius of the sphere whose volume equals the fundamental volume."""
    A = np.asarray(channel_code_matrix, dtype=float)
    m = A.shape[0]
    sign, logdet = np.linalg.slogdet(A)
    if sign == 0 or not np.isfinite(logdet):
        raise SingularLatticeError("singular channel-code matrix")
    # V(S^m(1)) = pi^{m/2} / Gamma(m/2 + 1)
    log_unit_ball = 0.5 * m * math.log(math.pi) - math.lgamma(0.5 * m + 1.0)
    return math.exp((logdet - log_unit_ball) / m)


def is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, int(math.isqrt(p)) + 1))


def construct_mod_p_lattice(p: int, code_matrix: np.ndarray, kappa: float) -> Lattice:
    """Lower-triangular generator kappa * [[I_k, 0], [P, p*I_{m-k}]] built
    from a systematic code matrix P of shape (m-k) x k over Z_p."""
    if not is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    P = np.asarray(code_matrix, dtype=np.int64)
    if P.ndim != 2:
        raise ValueError("code matrix must be 2-D")
    if P.size and (P.min() < 0 or P.max() >= p):
        raise ValueError("code matrix entries must lie in [0, p)")
    mk, k = P.shape
    m = mk + k
    G = np.zeros((m, m))
    G[:k, :k] = np.eye(k)
    G[k:, :k] = P
    G[k:, k:] = p * np.eye(mk)
    return Lattice(generator=kappa * G)


def _select_prime_power(m: int, rate_time: float) -> tuple[int, int]:
    """Smallest prime power p^k >= 2^{R*T} with k = min(m, ceil(RT/log2 p))."""
    if rate_time <= 0:
        return 2, 0
    best: tuple[int, int] | None = None
    best_log = math.inf
    for p in _PRIMES:
        lg = math.log2(p)
        k = min(m, math.ceil(rate_time / lg - 1e-12))
        size_log = k * lg
        if size_log >= rate_time - 1e-12 and size_log < best_log - 1e-12:
            best = (p, k)
            best_log = size_log
    if best is None:
        raise RateInfeasibleError(
            f"no prime power p^k >= 2^{rate_time:g} with p <= {_PRIME_CAP}, k <= {m}")
    return best


class ShapingContext:
    """Exact reduction modulo one lattice (LLL basis + closest-point search)."""

    def __init__(self, generator: np.ndarray):
        self.generator = np.asarray(generator, dtype=float)
        self.reduced, self.unimodular = lll_reduce(self.generator)
        Q, R = np.linalg.qr(self.reduced)
        d = np.sign(np.diag(R))
        d[d == 0] = 1.0
        self.r_factor = d[:, None] * R
        self.q_factor = Q * d[None, :]

    def nearest(self, v: np.ndarray) -> np.ndarray:
        z, _ = closest_point_search(self.r_factor, self.q_factor.T @ v)
        return self.reduced @ z

    def reduce_mod(self, v: np.ndarray) -> np.ndarray:
        return v - self.nearest(v)

    def distance(self, v: np.ndarray) -> float:
        _, d2 = closest_point_search(self.r_factor, self.q_factor.T @ v)
        return math.sqrt(d2)


class _CubicShaper:
    """Reduction modulo scale * Z^m (the k = 0 and k = m mod-p lattices)."""

    def __init__(self, scale: float, m: int):
        self.scale = scale
        self.generator = scale * np.eye(m)

    def nearest(self, v: np.ndarray) -> np.ndarray:
        t = np.asarray(v, dtype=float) / self.scale
        return self.scale * np.trunc(t + np.copysign(0.5, t))

    def reduce_mod(self, v: np.ndarray) -> np.ndarray:
        return v - self.nearest(v)

    def distance(self, v: np.ndarray) -> float:
        return float(np.linalg.norm(v - self.nearest(v)))


_TRELLIS_STATE_CAP = 16  # max m-k for the syndrome trellis (2^{m-k} states)


class _BinaryTrellisShaper:
    """Exact CVP on scale * (C + 2 Z^m) for a binary systematic code C.

    The squared distance splits per coordinate once each coordinate's parity
    is fixed, so the closest point reduces to min-sum decoding of C over its
    syndrome trellis (Viterbi over 2^{m-k} states), followed by nearest-
    integer-with-parity rounding.  Orders of magnitude faster than basis
    enumeration for the block lengths used here.
    """

    def __init__(self, P: np.ndarray, scale: float):
        P = np.asarray(P, dtype=np.int64) % 2
        self.mk, self.k = P.shape
        self.m = self.mk + self.k
        self.scale = scale
        G = np.zeros((self.m, self.m))
        G[:self.k, :self.k] = np.eye(self.k)
        G[self.k:, :self.k] = P
        G[self.k:, self.k:] = 2 * np.eye(self.mk)
        self.generator = scale * G
        # syndrome-increment bitmask per coordinate: info bits add their
        # column of P, parity bits add a unit vector
        self.masks = [sum(int(P[j, i]) << j for j in range(self.mk))
                      for i in range(self.k)]
        self.masks += [1 << j for j in range(self.mk)]
        states = np.arange(1 << self.mk)
        self.xor_index = {mask: states ^ mask for mask in set(self.masks)}

    def _decode_bits(self, t: np.ndarray) -> np.ndarray:
        # wrapped squared distances to the even and odd integer cosets
        r0 = t - 2.0 * np.trunc(t / 2.0 + np.copysign(0.5, t))
        d0 = r0 * r0
        s = t - 1.0
        r1 = s - 2.0 * np.trunc(s / 2.0 + np.copysign(0.5, s))
        d1 = r1 * r1
        n_states = 1 << self.mk
        metric = np.full(n_states, np.inf)
        metric[0] = 0.0
        decisions = np.zeros((self.m, n_states), dtype=np.uint8)
        for pos in range(self.m):
            xt = self.xor_index[self.masks[pos]]
            m0 = metric + d0[pos]
            m1 = metric[xt] + d1[pos]
            take1 = m1 < m0
            decisions[pos] = take1
            metric = np.where(take1, m1, m0)
        bits = np.zeros(self.m, dtype=np.int64)
        state = 0
        for pos in range(self.m - 1, -1, -1):
            b = int(decisions[pos, state])
            bits[pos] = b
            if b:
                state ^= self.masks[pos]
        return bits

    def nearest(self, v: np.ndarray) -> np.ndarray:
        t = np.asarray(v, dtype=float) / self.scale
        bits = self._decode_bits(t)
        # nearest integer with the decoded parity, per coordinate
        u = (t - bits) / 2.0
        z = bits + 2.0 * np.trunc(u + np.copysign(0.5, u))
        return self.scale * z

    def reduce_mod(self, v: np.ndarray) -> np.ndarray:
        return v - self.nearest(v)

    def distance(self, v: np.ndarray) -> float:
        return float(np.linalg.norm(v - self.nearest(v)))


def make_shaper(generator: np.ndarray, prime: int | None = None,
                message_dim: int | None = None, code_matrix: np.ndarray | None = None,
                scale: float | None = None):
    """Pick the cheapest exact reduction backend for the given lattice."""
    if prime is not None and message_dim is not None:
        m = np.asarray(generator).shape[0]
        if message_dim in (0, m):
            return _CubicShaper(scale * (prime if message_dim == 0 else 1), m)
        if prime == 2 and (m - message_dim) <= _TRELLIS_STATE_CAP:
            return _BinaryTrellisShaper(code_matrix, scale)
    return ShapingContext(generator)


def uniform_voronoi_sample(shaper, rng: np.random.Generator) -> np.ndarray:
    """Exact uniform draw from the Voronoi cell: a uniform point of the
    fundamental parallelepiped reduced modulo the lattice (the reduction is a
    measure-preserving map between the two fundamental domains)."""
    t = shaper.generator @ rng.random(shaper.generator.shape[0])
    return shaper.reduce_mod(t)


@dataclass
class NestedLastCode:
    """Nested (Voronoi) LAST codebook over a self-similar lattice pair."""

    coding_lattice: Lattice
    shaping_lattice: Lattice
    mod_p_generator: np.ndarray
    prime: int
    code_matrix: np.ndarray
    kappa: float
    phi: float
    dither: np.ndarray
    antennas: int
    blocklength: int
    rate_bpcu: float
    multiplexing_gain: float
    snr: float
    message_dim: int
    seed: object = None
    _shaping: object = field(default=None, repr=False, compare=False)

    @property
    def dimension(self) -> int:
        return 2 * self.antennas * self.blocklength

    def shaper(self):
        if self._shaping is None:
            self._shaping = make_shaper(
                self.shaping_lattice.generator, prime=self.prime,
                message_dim=self.message_dim, code_matrix=self.code_matrix,
                scale=self.phi * self.kappa)
        return self._shaping

    def to_dict(self) -> dict:
        return {
            "M": self.antennas, "T": self.blocklength, "R": self.rate_bpcu,
            "rho": self.snr, "p": self.prime, "k": self.message_dim,
            "kappa": self.kappa, "phi": self.phi,
            "P": self.code_matrix.reshape(-1).tolist(),
            "u0": self.dither.tolist(),
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "NestedLastCode":
        M, T, R, rho = d["M"], d["T"], d["R"], d["rho"]
        p, k, kappa, phi = d["p"], d["k"], d["kappa"], d["phi"]
        m = 2 * M * T
        P = np.array(d["P"], dtype=np.int64).reshape(m - k, k)
        return _assemble_code(M, T, R, rho, p, k, P, kappa, phi,
                              np.array(d["u0"], dtype=float), d.get("seed"))

    @classmethod
    def from_json(cls, payload: str) -> "NestedLastCode":
        return cls.from_dict(json.loads(payload))


def _assemble_code(M, T, R, rho, p, k, P, kappa, phi, dither, seed) -> NestedLastCode:
    lat_p = construct_mod_p_lattice(p, P, kappa)
    scale = 2.0 ** (-R / (2.0 * M))  # equals rho^{-r/2M} with r = R/log2(rho)
    shaping = Lattice(generator=phi * lat_p.generator)
    coding = Lattice(generator=scale * shaping.generator)
    return NestedLastCode(
        coding_lattice=coding, shaping_lattice=shaping,
        mod_p_generator=lat_p.generator, prime=p, code_matrix=P,
        kappa=kappa, phi=phi, dither=dither, antennas=M, blocklength=T,
        rate_bpcu=R, multiplexing_gain=R / math.log2(rho), snr=rho,
        message_dim=k, seed=seed)


def build_nested_code(M: int, T: int, rate_bpcu: float, rho: float,
                      seed) -> NestedLastCode:
    """Construct a nested LAST codebook for one operating SNR.

    Picks the smallest prime power p^k >= 2^{RT}, normalizes kappa so the
    mod-p lattice has unit fundamental volume, draws the systematic code
    matrix and dither from ``seed``, and calibrates the shaping scale so the
    empirical mean codeword energy hits POWER_TARGET_FRACTION * MT.  The
    codeword map is linear in the shaping scale, so one Monte-Carlo pass at
    unit scale pins it exactly.
    """
    if M < 1 or T < 1:
        raise ValueError("M and T must be >= 1")
    if rate_bpcu < 0:
        raise ValueError("rate must be nonnegative")
    if rho <= 1.0:
        raise ValueError("rho must exceed 1 (multiplexing gain undefined otherwise)")
    rng = np.random.default_rng(seed)
    m = 2 * M * T
    p, k = _select_prime_power(m, rate_bpcu * T)
    kappa = float(p) ** (-(m - k) / m)  # unit fundamental volume kappa^m p^{m-k} = 1
    P = rng.integers(0, p, size=(m - k, k), dtype=np.int64)
    lat_p = construct_mod_p_lattice(p, P, kappa)
    shaper_p = make_shaper(lat_p.generator, prime=p, message_dim=k,
                           code_matrix=P, scale=kappa)
    u0_unit = uniform_voronoi_sample(shaper_p, rng)

    scale = 2.0 ** (-rate_bpcu / (2.0 * M))
    gen_scaled = scale * lat_p.generator
    energy = 0.0
    n_cal = CALIBRATION_SAMPLES
    for _ in range(n_cal):
        msg = rng.integers(0, p, size=k)
        v = gen_scaled[:, :k] @ msg + u0_unit
        w = shaper_p.reduce_mod(v)
        energy += float(w @ w)
    mean_energy = energy / n_cal
    if mean_energy < 1e-12:
        phi = 1.0  # degenerate single-codeword case, nothing to calibrate
    else:
        phi = math.sqrt(POWER_TARGET_FRACTION * M * T / mean_energy)

    return _assemble_code(M, T, rate_bpcu, rho, p, k, P, kappa, phi,
                          phi * u0_unit, seed)


def encode(code: NestedLastCode, message: np.ndarray) -> np.ndarray:
    """Map a message in Z_p^k to its dithered codeword inside the shaping
    Voronoi region: x = (G z + u0) mod shaping lattice, with the modulo taken
    by exact closest-point search."""
    msg = np.asarray(message, dtype=np.int64).reshape(-1)
    if msg.shape != (code.message_dim,):
        raise ValueError("message length must equal the code dimension k")
    if msg.size and (msg.min() < 0 or msg.max() >= code.prime):
        raise ValueError("message entries must lie in [0, p)")
    raw = code.coding_lattice.generator[:, :code.message_dim] @ msg + code.dither
    return code.shaper().reduce_mod(raw)


def embed_message(code: NestedLastCode, message: np.ndarray) -> np.ndarray:
    """Systematic integer lift [message; 0] used by the encoder."""
    z = np.zeros(code.dimension, dtype=np.int64)
    z[:code.message_dim] = np.asarray(message, dtype=np.int64)
    return z
