"""Event double integral: analytic latent-image reconstruction from a blurry
image plus the voxelized events of its exposure window.

The blurry image is the exposure-time mean of the latent frames; events give
the log-intensity trajectory, so the per-pixel exposure-averaged exponential
of the integrated event train relates blur and latent image by
B = E_hat[r] * I[r] at any reference boundary r. The discrete weight is
averaged over the N+1 channel boundaries so that an event-free pixel has
E_hat = 1 and reconstruction is the identity there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import VoxelGrid

__all__ = ["EdiConfig", "edi_weight", "edi_reconstruct", "edi_sequence"]


@dataclass(frozen=True)
class EdiConfig:
    """Reconstruction threshold and reference channel boundary.

    ``c`` is the threshold assumed by the reconstruction; it is deliberately
    independent of whatever threshold generated the events, so mismatch
    experiments are possible. ``ref`` indexes a channel boundary, 0..N.
    """

    c: float = 0.2
    ref: int = 0

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("threshold c must be > 0")
        if self.ref < 0:
            raise ValueError("ref must be >= 0")


def _boundary_weights(data: np.ndarray, c: float) -> np.ndarray:
    """exp(c * signed count between boundary r and each boundary), averaged.

    data: ... x N channel counts. Returns ... x (N+1) array W where
    W[..., r] is the mean over boundaries n of exp(c * S(r, n)) and
    S(r, n) is the signed sum of channels between boundaries r and n.
    """
    n = data.shape[-1]
    cum = np.zeros(data.shape[:-1] + (n + 1,))
    np.cumsum(data, axis=-1, out=cum[..., 1:])
    # S(r, n) = cum[n] - cum[r]; factor the r-dependence out of the mean
    mean_exp = np.exp(c * cum).mean(axis=-1, keepdims=True)
    return mean_exp * np.exp(-c * cum)


def edi_weight(counts: np.ndarray, c: float, ref: int) -> float:
    """Exposure-average weight E_hat[ref] for one pixel's channel counts."""
    if c <= 0:
        raise ValueError("threshold c must be > 0")
    counts = np.asarray(counts, dtype=np.float64)
    if not 0 <= ref <= counts.shape[-1]:
        raise ValueError("ref outside boundary range")
    return float(_boundary_weights(counts, c)[..., ref])


def edi_reconstruct(blurry: np.ndarray, grid: VoxelGrid, cfg: EdiConfig,
                    clamp: bool = True) -> np.ndarray:
    """Latent image at reference boundary ``cfg.ref``: I[r] = B / E_hat[r].

    Internal math is unclamped so E_hat[r] * I[r] == B holds exactly; the
    [0, 1] clamp is applied only at the output boundary (disable for
    analysis with ``clamp=False``).
    """
    blurry = np.asarray(blurry, dtype=np.float64)
    if blurry.shape != (grid.height, grid.width):
        raise ValueError(
            f"blurry image {blurry.shape} does not match grid {(grid.height, grid.width)}")
    if not 0 <= cfg.ref <= grid.n_channels:
        raise ValueError("ref outside boundary range")
    weights = _boundary_weights(grid.data, cfg.c)[..., cfg.ref]
    latent = blurry / weights
    return np.clip(latent, 0.0, 1.0) if clamp else latent


def edi_sequence(blurry: np.ndarray, grid: VoxelGrid, c: float,
                 clamp: bool = True) -> list[np.ndarray]:
    """Reconstruct at every channel boundary: N+1 latent images."""
    return [edi_reconstruct(blurry, grid, EdiConfig(c=c, ref=r), clamp=clamp)
            for r in range(grid.n_channels + 1)]
