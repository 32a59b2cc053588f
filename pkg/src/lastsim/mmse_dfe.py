"""MMSE-DFE preprocessing via QR decomposition of the augmented channel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class MmseDfeFilters:
    forward: np.ndarray   # m x n
    backward: np.ndarray  # m x m upper triangular, positive diagonal


def augmented_qr(h_real: np.ndarray) -> MmseDfeFilters:
    """Factor the stacked matrix [H; I] = Q R (R with positive diagonal).

    The forward filter is the transpose of the upper n x m block of Q and
    the backward filter is R, so that the filtered channel behaves as
    y' = B x + e' up to the finite-SNR bias term F H - B = -B^{-T} (the
    model treats e' as the decoding noise without further whitening).
    ``det(B^T B)`` equals ``det(I + rho H_c^H H_c)^{2T}``.
    """
    H = np.asarray(h_real, dtype=float)
    if H.ndim != 2:
        raise ValueError("channel matrix must be 2-D")
    n, m = H.shape
    aug = np.vstack([H, np.eye(m)])
    Q, R = np.linalg.qr(aug, mode="reduced")
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    R = d[:, None] * R
    Q = Q * d[None, :]
    return MmseDfeFilters(forward=Q[:n].T.copy(), backward=R)


def apply_forward(filters: MmseDfeFilters, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (filters.forward.shape[1],):
        raise ValueError("received vector length does not match forward filter")
    return filters.forward @ y
