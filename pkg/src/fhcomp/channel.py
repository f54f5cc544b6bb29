"""Large-scale pathloss, TDL small-scale fading, and received-signal synthesis.

The channel between RU antenna and user is g = sqrt(beta) * h: beta is a
log-distance pathloss with log-normal shadowing, h is the frequency response
of a tapped delay line with i.i.d. complex Gaussian tap gains (Rayleigh),
normalized to E|h|^2 = 1 per antenna. Doppler is fixed at 0 Hz, so h is
constant across the OFDM symbols of a slot and varies only over subcarriers.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

BOLTZMANN = 1.380649e-23


@dataclass(frozen=True)
class TdlProfile:
    """Tap delays (seconds) and normalized linear powers of a delay-line channel."""

    delays_s: np.ndarray
    powers_lin: np.ndarray
    delay_spread_s: float
    doppler_hz: float = 0.0

    def __post_init__(self):
        if self.doppler_hz != 0.0:
            raise ValueError("only 0 Hz Doppler is supported (block-static slots)")
        if np.any(self.delays_s < 0):
            raise ValueError("tap delays must be nonnegative")
        if abs(float(np.sum(self.powers_lin)) - 1.0) > 1e-9:
            raise ValueError("tap powers must sum to 1")

    @classmethod
    def from_taps(cls, delays_s, powers_db, delay_spread_s: float, doppler_hz: float = 0.0) -> "TdlProfile":
        """Build from raw taps: powers normalized, delays rescaled to the RMS delay spread."""
        delays = np.asarray(delays_s, dtype=np.float64)
        powers = 10.0 ** (np.asarray(powers_db, dtype=np.float64) / 10.0)
        powers = powers / powers.sum()
        mean = float(powers @ delays)
        rms = math.sqrt(float(powers @ delays ** 2) - mean ** 2)
        if rms > 0.0:
            delays = delays * (delay_spread_s / rms)
        return cls(delays, powers, delay_spread_s, doppler_hz)

    @classmethod
    def from_csv(cls, source, delay_spread_s: float, doppler_hz: float = 0.0) -> "TdlProfile":
        """Load 'delay_ns,power_db' rows ('#' comments allowed)."""
        if isinstance(source, (str, bytes)):
            source = io.StringIO(source if isinstance(source, str) else source.decode())
        delays, powers = [], []
        for line in source:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            d, p = line.split(",")
            delays.append(float(d) * 1e-9)
            powers.append(float(p))
        return cls.from_taps(delays, powers, delay_spread_s, doppler_hz)

    @classmethod
    def tdl_b(cls, delay_spread_s: float = 30e-9) -> "TdlProfile":
        """The shipped TDL-B (NLOS) profile at the given RMS delay spread."""
        text = resources.files("fhcomp").joinpath("profiles/tdl-b.csv").read_text()
        return cls.from_csv(text, delay_spread_s)

    def freq_correlation(self, delta_f_hz: float) -> complex:
        """Closed-form subcarrier correlation sum_p p_p * exp(-j 2 pi df tau_p)."""
        return complex(np.sum(self.powers_lin * np.exp(-2j * math.pi * delta_f_hz * self.delays_s)))


@dataclass(frozen=True)
class PathlossParams:
    """Log-distance pathloss PL(d) = pl0 + 10*exponent*log10(d/d0) with shadowing.

    Defaults are working assumptions for a desk-scale deployment, not
    calibrated against any measurement campaign.
    """

    pl0_db: float = 35.0
    d0_m: float = 1.0
    exponent: float = 3.76
    shadow_sigma_db: float = 8.0


@dataclass(frozen=True)
class LargeScale:
    """Linear power gains beta per (RU, user)."""

    beta: np.ndarray

    def __post_init__(self):
        if np.any(self.beta <= 0):
            raise ValueError("beta must be positive")


@dataclass(frozen=True)
class NoiseConfig:
    """Per-RE receiver noise power sigma_z^2."""

    sigma_z_sq: float

    def __post_init__(self):
        if self.sigma_z_sq < 0:
            raise ValueError("noise power must be nonnegative")

    @classmethod
    def from_temperature(cls, bandwidth_hz: float, temperature_k: float = 290.0) -> "NoiseConfig":
        return cls(BOLTZMANN * temperature_k * bandwidth_hz)

    @classmethod
    def from_tx_snr(cls, tx_snr_db: float, tx_power: float = 1.0) -> "NoiseConfig":
        """Noise power for a TX-SNR sweep: unit per-RE transmit power, scaled noise."""
        return cls(tx_power * 10.0 ** (-tx_snr_db / 10.0))


@dataclass(frozen=True)
class ChannelRealization:
    """Per-subcarrier stacked channel vectors for one slot.

    g has shape (n_subcarriers, n_rx_dims, n_users) and is constant across
    the slot's symbols; g_int holds the interferer channels (possibly empty).
    """

    g: np.ndarray
    g_int: np.ndarray

    @property
    def n_subcarriers(self) -> int:
        return self.g.shape[0]

    @property
    def n_rx_dims(self) -> int:
        return self.g.shape[1]

    @property
    def n_users(self) -> int:
        return self.g.shape[2]


def pathloss_beta(distances_m: np.ndarray, params: PathlossParams, rng: np.random.Generator) -> LargeScale:
    """Draw large-scale gains: log-distance pathloss plus i.i.d. log-normal shadowing."""
    d = np.asarray(distances_m, dtype=np.float64)
    if np.any(d <= 0):
        raise ValueError("distances must be positive")
    pl_db = params.pl0_db + 10.0 * params.exponent * np.log10(d / params.d0_m)
    if params.shadow_sigma_db > 0:
        pl_db = pl_db + params.shadow_sigma_db * rng.standard_normal(d.shape)
    return LargeScale(beta=10.0 ** (-pl_db / 10.0))


def _draw_freq_response(profile: TdlProfile, n_dims: int, n_users: int,
                        n_subcarriers: int, scs_hz: float, rng: np.random.Generator) -> np.ndarray:
    """(n_sc, n_dims, n_users) frequency response with E|h|^2 = 1 per entry."""
    n_taps = profile.delays_s.size
    taps = (rng.standard_normal((n_dims, n_users, n_taps))
            + 1j * rng.standard_normal((n_dims, n_users, n_taps))) / math.sqrt(2.0)
    taps *= np.sqrt(profile.powers_lin)
    freqs = np.arange(n_subcarriers) * scs_hz
    steering = np.exp(-2j * math.pi * freqs[:, None] * profile.delays_s[None, :])
    return np.einsum("np,dkp->ndk", steering, taps, optimize=True)


def realize_channel(profile: TdlProfile, large_scale: LargeScale, n_subcarriers: int,
                    scs_hz: float, rng: np.random.Generator, n_r: int = 1,
                    large_scale_int: LargeScale | None = None) -> ChannelRealization:
    """Draw one slot's channel: g = sqrt(beta) * h for all (RU antenna, user) pairs.

    beta rows are per RU and expand across that RU's n_r antennas; interferer
    channels are drawn with the same machinery when large_scale_int is given.
    """
    def expand(ls: LargeScale) -> np.ndarray:
        m, k = ls.beta.shape
        h = _draw_freq_response(profile, m * n_r, k, n_subcarriers, scs_hz, rng)
        amp = np.sqrt(np.repeat(ls.beta, n_r, axis=0))
        return h * amp[None, :, :]

    g = expand(large_scale)
    if large_scale_int is not None and large_scale_int.beta.size:
        g_int = expand(large_scale_int)
    else:
        g_int = np.zeros((n_subcarriers, g.shape[1], 0), dtype=np.complex128)
    return ChannelRealization(g=g, g_int=g_int)


def apply_channel(tx_grids: np.ndarray, interferer_grids: np.ndarray | None,
                  realization: ChannelRealization, noise: NoiseConfig,
                  rng: np.random.Generator) -> np.ndarray:
    """Received samples y[(n, l), d] = sum_k g[n, d, k] x[k, n, l] (+ interference) + noise.

    tx_grids is (n_users, n_sc, n_symbols); the result is (n_sc, n_symbols,
    n_rx_dims). Noise is i.i.d. circular Gaussian per RE and receive dim.
    """
    x = np.asarray(tx_grids, dtype=np.complex128)
    if x.ndim != 3 or x.shape[0] != realization.n_users or x.shape[1] != realization.n_subcarriers:
        raise ValueError(f"tx grid shape {x.shape} does not match the realization")
    y = np.einsum("ndk,knl->nld", realization.g, x, optimize=True)
    if interferer_grids is not None and realization.g_int.shape[2]:
        xi = np.asarray(interferer_grids, dtype=np.complex128)
        if xi.shape[0] != realization.g_int.shape[2] or xi.shape[1:] != x.shape[1:]:
            raise ValueError("interferer grid shape mismatch")
        y += np.einsum("ndk,knl->nld", realization.g_int, xi, optimize=True)
    if noise.sigma_z_sq > 0.0:
        scale = math.sqrt(noise.sigma_z_sq / 2.0)
        y += scale * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return y
