"""Quasi-static Rayleigh MIMO channel model and its real-valued block form."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

ALPHA_SENTINEL = 1e6  # stand-in exponent for numerically zero eigenvalues


@dataclass
class ChannelRealization:
    """One fading realization: complex N x M gain matrix plus the system
    shape (T channel uses) and the normalized SNR rho = SNR / M."""

    h_complex: np.ndarray
    M: int
    N: int
    T: int
    rho: float

    def to_json(self) -> str:
        return json.dumps({
            "M": self.M, "N": self.N, "T": self.T, "rho": self.rho,
            "h_real": self.h_complex.real.tolist(),
            "h_imag": self.h_complex.imag.tolist(),
        })

    @classmethod
    def from_json(cls, payload: str) -> "ChannelRealization":
        d = json.loads(payload)
        h = np.array(d["h_real"], dtype=float) + 1j * np.array(d["h_imag"], dtype=float)
        return cls(h_complex=h, M=d["M"], N=d["N"], T=d["T"], rho=d["rho"])


@dataclass
class EigenExponents:
    lambdas: np.ndarray  # ascending, nonnegative
    alphas: np.ndarray   # alpha_i = -ln(lambda_i) / ln(rho), nonincreasing


def sample_channel(rng: np.random.Generator, M: int, N: int, T: int,
                   rho: float) -> ChannelRealization:
    """i.i.d. circularly-symmetric complex Gaussian entries, unit variance
    (1/2 per real component)."""
    if M < 1 or N < 1 or T < 1:
        raise ValueError("M, N, T must be >= 1")
    h = math.sqrt(0.5) * (rng.standard_normal((N, M))
                          + 1j * rng.standard_normal((N, M)))
    return ChannelRealization(h_complex=h, M=M, N=N, T=T, rho=rho)


def realify(ch: ChannelRealization) -> np.ndarray:
    """Real 2NT x 2MT block matrix equivalent to left-multiplying each
    channel use by sqrt(rho) * H."""
    hr = math.sqrt(ch.rho) * ch.h_complex
    block = np.block([[hr.real, -hr.imag], [hr.imag, hr.real]])
    return np.kron(np.eye(ch.T), block)


def vec_real(x_complex: np.ndarray) -> np.ndarray:
    """Stack [Re; Im] of each column (channel use) into one real vector."""
    X = np.atleast_2d(np.asarray(x_complex))
    return np.concatenate([np.concatenate([X[:, t].real, X[:, t].imag])
                           for t in range(X.shape[1])])


def transmit(x: np.ndarray, ch: ChannelRealization, rng: np.random.Generator,
             noiseless: bool = False) -> np.ndarray:
    """y = Hx + e with i.i.d. Gaussian noise of variance 1/2 per component."""
    H = realify(ch)
    x = np.asarray(x, dtype=float)
    if x.shape != (H.shape[1],):
        raise ValueError("input vector length must be 2MT")
    y = H @ x
    if not noiseless:
        y = y + math.sqrt(0.5) * rng.standard_normal(H.shape[0])
    return y


def gram_eigenvalues(ch: ChannelRealization) -> np.ndarray:
    lam = np.linalg.eigvalsh(ch.h_complex.conj().T @ ch.h_complex)
    return np.clip(lam.real, 0.0, None)


def last_rate(ch: ChannelRealization) -> float:
    """Achievable rate log2 det(I + rho * H^H H) in bits per channel use."""
    lam = gram_eigenvalues(ch)
    return float(np.sum(np.log2(1.0 + ch.rho * lam)))


def is_outage(ch: ChannelRealization, rate_bpcu: float) -> bool:
    """Closed inequality: the boundary rate counts as outage."""
    return rate_bpcu >= last_rate(ch)


def alpha_vector(ch: ChannelRealization) -> EigenExponents:
    """Eigenvalue SNR exponents alpha_i = -log(lambda_i)/log(rho)."""
    if ch.rho <= 1.0:
        raise ValueError("alpha exponents need rho > 1")
    lam = np.sort(gram_eigenvalues(ch))
    logr = math.log(ch.rho)
    alphas = np.where(lam < 1e-300, ALPHA_SENTINEL, -np.log(np.maximum(lam, 1e-300)) / logr)
    return EigenExponents(lambdas=lam, alphas=alphas)
