"""DU-side combining: MMSE weights over the stacked multi-RU signal.

The combiner is computed from the true channel and thermal noise only; it
deliberately knows nothing about fronthaul quantization. Measured Bussgang
statistics (per-antenna linear gain and distortion power) enter afterwards,
in the per-stream effective gain and noise variance handed to the demapper.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, NoiseConfig


@dataclass(frozen=True)
class CombinerWeights:
    """Per-subcarrier combining vectors, shape (n_sc, n_rx_dims, n_served)."""

    w: np.ndarray


@dataclass(frozen=True)
class EqualizedStream:
    """Combined symbol estimates with their per-RE effective gain and noise.

    x_hat is (n_sc, n_symbols, n_served); eff_gain and eff_noise_var are
    (n_sc, n_served) and constant over the slot's symbols like the channel.
    """

    x_hat: np.ndarray
    eff_gain: np.ndarray
    eff_noise_var: np.ndarray

    def demapper_input(self, user: int) -> tuple[np.ndarray, np.ndarray]:
        """Unit-gain symbol estimates and matching noise variance for one user."""
        gain = self.eff_gain[:, user][:, None]
        z = self.x_hat[:, :, user] / gain
        var = (self.eff_noise_var[:, user] / np.abs(self.eff_gain[:, user]) ** 2)[:, None]
        return z, np.broadcast_to(var, z.shape)


def mmse_weights(realization: ChannelRealization, noise: NoiseConfig,
                 n_served: int | None = None) -> CombinerWeights:
    """Solve (G G^H + G_I G_I^H + sigma^2 I) w_k = g_k per subcarrier.

    Uses a batched LU solve rather than an explicit inverse; with
    sigma^2 > 0 the system is always well conditioned.
    """
    g, g_int = realization.g, realization.g_int
    n_sc, d, k = g.shape
    n_served = k if n_served is None else n_served
    if not 0 < n_served <= k:
        raise ValueError("n_served out of range")
    cov = np.einsum("ndk,nek->nde", g, g.conj(), optimize=True)
    if g_int.shape[2]:
        cov += np.einsum("ndk,nek->nde", g_int, g_int.conj(), optimize=True)
    if noise.sigma_z_sq == 0.0:
        if np.linalg.matrix_rank(cov[0]) < d:
            raise ValueError("zero noise with rank-deficient covariance: regularization required")
    cov += noise.sigma_z_sq * np.eye(d)[None, :, :]
    w = np.linalg.solve(cov, g[:, :, :n_served])
    return CombinerWeights(w=w)


def weight_residual(realization: ChannelRealization, noise: NoiseConfig,
                    weights: CombinerWeights) -> float:
    """Worst relative residual ||R w_k - g_k|| / ||g_k|| over all REs and users."""
    g = realization.g[:, :, :weights.w.shape[2]]
    cov = np.einsum("ndk,nek->nde", realization.g, realization.g.conj(), optimize=True)
    if realization.g_int.shape[2]:
        cov += np.einsum("ndk,nek->nde", realization.g_int, realization.g_int.conj(), optimize=True)
    cov += noise.sigma_z_sq * np.eye(g.shape[1])[None, :, :]
    resid = np.einsum("nde,nek->ndk", cov, weights.w, optimize=True) - g
    num = np.linalg.norm(resid, axis=1)
    den = np.linalg.norm(g, axis=1)
    return float(np.max(num / den))


def equalize(weights: CombinerWeights, received: np.ndarray,
             realization: ChannelRealization, noise: NoiseConfig,
             bussgang_alpha: np.ndarray | None = None,
             bussgang_distortion: np.ndarray | None = None) -> EqualizedStream:
    """Combine the received slot and derive per-stream gain and noise variance.

    received is (n_sc, n_symbols, n_rx_dims). When fronthaul compression is
    active, bussgang_alpha/_distortion carry the measured per-antenna linear
    gain and distortion power of the reconstructed samples; the effective
    channel becomes diag(alpha) g and the distortion adds |w_d|^2 D_d per
    receive dim. Without them the stream reduces exactly to the
    uncompressed path (alpha = 1, D = 0).
    """
    w = weights.w
    n_sc, d, k_served = w.shape
    if received.shape[0] != n_sc or received.shape[2] != d:
        raise ValueError(f"received shape {received.shape} does not match weights")
    alpha = np.ones(d, dtype=np.complex128) if bussgang_alpha is None \
        else np.asarray(bussgang_alpha, dtype=np.complex128).reshape(d)
    dist = np.zeros(d, dtype=np.float64) if bussgang_distortion is None \
        else np.asarray(bussgang_distortion, dtype=np.float64).reshape(d)

    x_hat = np.einsum("ndk,nld->nlk", w.conj(), received, optimize=True)

    g_eff = realization.g * alpha[None, :, None]
    cross_all = np.einsum("ndk,ndj->nkj", w.conj(), g_eff, optimize=True)  # (n_sc, served, users)
    eff_gain = np.empty((n_sc, k_served), dtype=np.complex128)
    inter_user = np.zeros((n_sc, k_served), dtype=np.float64)
    for k in range(k_served):
        eff_gain[:, k] = cross_all[:, k, k]
        others = np.abs(cross_all[:, k, :]) ** 2
        inter_user[:, k] = others.sum(axis=1) - others[:, k]
    if realization.g_int.shape[2]:
        gi_eff = realization.g_int * alpha[None, :, None]
        cross_int = np.einsum("ndk,ndj->nkj", w.conj(), gi_eff, optimize=True)
        inter_user += np.sum(np.abs(cross_int) ** 2, axis=2)

    wa = np.abs(w.conj() * alpha[None, :, None]) ** 2
    thermal = noise.sigma_z_sq * wa.sum(axis=1)
    quant = np.einsum("ndk,d->nk", np.abs(w) ** 2, dist, optimize=True)
    eff_noise_var = inter_user + thermal + quant
    return EqualizedStream(x_hat=x_hat, eff_gain=eff_gain, eff_noise_var=eff_noise_var)


def evm(equalized: EqualizedStream, reference: np.ndarray, user: int = 0) -> float:
    """Error vector magnitude in percent of the unit-gain estimates vs the reference."""
    ref = np.asarray(reference, dtype=np.complex128)
    z, _ = equalized.demapper_input(user)
    if z.shape != ref.shape:
        raise ValueError("shape mismatch")
    ref_pow = np.sum(np.abs(ref) ** 2)
    if ref_pow == 0.0:
        raise ValueError("zero reference power")
    return float(100.0 * np.sqrt(np.sum(np.abs(z - ref) ** 2) / ref_pow))
