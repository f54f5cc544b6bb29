"""PRB-block IQ compression codecs and quantization analysis.

Four codecs operate on 12-sample PRB blocks in the normalized +/-1.0
full-scale domain:

* block floating point (BFP): shared 4-bit exponent + m-bit mantissas,
* block scaling (BS): shared linear scale factor + m-bit fixed point,
* mu-law: 4-bit block shift + companded m-bit codes,
* uniform: fixed step size, no per-block side info (baseline).

All codecs share one rounding rule (half away from zero) and a symmetric
mid-tread integer quantizer, except BS whose code range [-L/2, L/2-1] is
asymmetric by design. Per-block functions are thin wrappings of the
vectorized many-block kernels, so both paths are bit-identical.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .iq_core import SAMPLES_PER_PRB, as_prb_block

BFP_EXP_MIN = -8
BFP_EXP_MAX = 7
MULAW_SHIFT_MAX = 15


class CompressionMethod(enum.Enum):
    NONE = "none"
    BFP = "bfp"
    BLOCK_SCALING = "bs"
    MU_LAW = "mulaw"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class CompressionConfig:
    """Codec selection plus its knobs.

    m_bits is the per-component code width. lam is the BS headroom design
    parameter (scale = block max / lam). delta is the uniform step size;
    when None it must be resolved (see optimize_delta) before compressing.
    """

    method: CompressionMethod
    m_bits: int = 8
    lam: float = 1.0
    mu: float = 8.0
    delta: float | None = None

    def __post_init__(self):
        if not 2 <= self.m_bits <= 16:
            raise ValueError(f"m_bits must be in [2, 16], got {self.m_bits}")
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.delta is not None and self.delta <= 0:
            raise ValueError("delta must be positive when given")


@dataclass
class CompressedBlock:
    """One compressed PRB: 24 integer codes (I, Q interleaved) plus side info.

    Exactly one of exponent / scale / shift is set, matching the method.
    Uniform blocks carry their step size and mu-law blocks their mu so they
    stay self-decodable; the wire format transports neither (both are
    receiver configuration).
    """

    method: CompressionMethod
    m_bits: int
    codes: np.ndarray
    exponent: int | None = None
    scale: float | None = None
    shift: int | None = None
    delta: float | None = None
    mu: float | None = None

    def __post_init__(self):
        self.codes = np.asarray(self.codes, dtype=np.int32).reshape(24)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CompressedBlock):
            return NotImplemented
        return (
            self.method == other.method
            and self.m_bits == other.m_bits
            and np.array_equal(self.codes, other.codes)
            and self.exponent == other.exponent
            and self.scale == other.scale
            and self.shift == other.shift
            and self.delta == other.delta
            and self.mu == other.mu
        )


@dataclass
class CompressedBlocks:
    """Struct-of-arrays form of many CompressedBlocks (the hot-path layout)."""

    method: CompressionMethod
    m_bits: int
    codes: np.ndarray                       # (n_blocks, 24) int32
    exponents: np.ndarray | None = None     # (n_blocks,) int32, BFP
    scales: np.ndarray | None = None        # (n_blocks,) float64, BS
    shifts: np.ndarray | None = None        # (n_blocks,) int32, mu-law
    delta: float | None = None              # scalar, uniform
    mu: float | None = None                 # scalar, mu-law

    @property
    def n_blocks(self) -> int:
        return self.codes.shape[0]

    def block(self, i: int) -> CompressedBlock:
        return CompressedBlock(
            method=self.method,
            m_bits=self.m_bits,
            codes=self.codes[i].copy(),
            exponent=int(self.exponents[i]) if self.exponents is not None else None,
            scale=float(self.scales[i]) if self.scales is not None else None,
            shift=int(self.shifts[i]) if self.shifts is not None else None,
            delta=self.delta,
            mu=self.mu,
        )


@dataclass(frozen=True)
class BussgangStats:
    """Linear gain alpha and residual distortion of a quantizer output."""

    alpha: complex
    distortion_power: float
    cross_corr: float


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer, halves away from zero (sign-symmetric)."""
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def _interleave(samples: np.ndarray) -> np.ndarray:
    """(n, 12) complex -> (n, 24) float, I then Q per sample."""
    out = np.empty(samples.shape[:-1] + (2 * samples.shape[-1],), dtype=np.float64)
    out[..., 0::2] = samples.real
    out[..., 1::2] = samples.imag
    return out


def _deinterleave(comps: np.ndarray) -> np.ndarray:
    return comps[..., 0::2] + 1j * comps[..., 1::2]


def _check_samples(samples: np.ndarray) -> np.ndarray:
    samples = np.asarray(samples, dtype=np.complex128)
    if samples.ndim != 2 or samples.shape[1] != SAMPLES_PER_PRB:
        raise ValueError(f"expected (n_blocks, {SAMPLES_PER_PRB}) samples, got {samples.shape}")
    if not np.all(np.isfinite(samples.view(np.float64))):
        raise ValueError("non-finite IQ samples")
    return samples


def _block_max(comps: np.ndarray) -> np.ndarray:
    return np.max(np.abs(comps), axis=1)


def _ceil_log2(x: np.ndarray) -> np.ndarray:
    """Exact ceil(log2(x)) for x > 0 via frexp (no float-log fuzz).

    x = f * 2**E with f in [0.5, 1): ceil(log2 x) = E except when f == 0.5
    exactly, where log2 x = E - 1.
    """
    f, e = np.frexp(x)
    return np.where(f == 0.5, e - 1, e).astype(np.int32)


def _midtread_codes(values: np.ndarray, m_bits: int) -> np.ndarray:
    """Mid-tread quantizer codes over [-1, 1]: step 2**(1-m), clamp +/-(2**(m-1)-1)."""
    step = 2.0 ** (1 - m_bits)
    cmax = 2 ** (m_bits - 1) - 1
    return np.clip(round_half_away(values / step), -cmax, cmax).astype(np.int32)


# --- BFP ---------------------------------------------------------------

def bfp_compress_blocks(samples: np.ndarray, cfg: CompressionConfig) -> CompressedBlocks:
    """Block floating point: shared exponent e = ceil(log2(block max)), clamped
    to the 4-bit range [-8, 7]; mantissas y / 2**e mid-tread quantized."""
    if cfg.method is not CompressionMethod.BFP:
        raise ValueError("config method must be BFP")
    comps = _interleave(_check_samples(samples))
    bmax = _block_max(comps)
    exps = np.full(bmax.shape, BFP_EXP_MIN, dtype=np.int32)
    nz = bmax > 0.0
    exps[nz] = np.clip(_ceil_log2(bmax[nz]), BFP_EXP_MIN, BFP_EXP_MAX)
    mantissas = comps * np.exp2(-exps.astype(np.float64))[:, None]
    codes = _midtread_codes(mantissas, cfg.m_bits)
    return CompressedBlocks(CompressionMethod.BFP, cfg.m_bits, codes, exponents=exps)


def bfp_compress(block, cfg: CompressionConfig) -> CompressedBlock:
    return bfp_compress_blocks(as_prb_block(block)[None, :], cfg).block(0)


# --- Block scaling -----------------------------------------------------

def bs_compress_blocks(samples: np.ndarray, cfg: CompressionConfig) -> CompressedBlocks:
    """Block scaling: scale S = block max / lam, codes = round(y/S * (L/2-1))
    clipped to [-L/2, L/2-1] with L = 2**m. All-zero blocks get S = 0."""
    if cfg.method is not CompressionMethod.BLOCK_SCALING:
        raise ValueError("config method must be BLOCK_SCALING")
    comps = _interleave(_check_samples(samples))
    half = 2 ** (cfg.m_bits - 1)
    scales = _block_max(comps) / cfg.lam
    safe = np.where(scales > 0.0, scales, 1.0)
    scaled = comps / safe[:, None]
    codes = np.clip(round_half_away(scaled * (half - 1)), -half, half - 1).astype(np.int32)
    codes[scales == 0.0] = 0
    return CompressedBlocks(CompressionMethod.BLOCK_SCALING, cfg.m_bits, codes, scales=scales)


def bs_compress(block, cfg: CompressionConfig) -> CompressedBlock:
    return bs_compress_blocks(as_prb_block(block)[None, :], cfg).block(0)


# --- mu-law ------------------------------------------------------------

def mulaw_compand(v: np.ndarray, mu: float) -> np.ndarray:
    """F(v) = sgn(v) * ln(1 + mu|v|) / ln(1 + mu), odd and increasing on [-1, 1]."""
    return np.sign(v) * np.log1p(mu * np.abs(v)) / math.log1p(mu)


def mulaw_expand(f: np.ndarray, mu: float) -> np.ndarray:
    """Inverse companding: sgn(f) * ((1 + mu)**|f| - 1) / mu."""
    return np.sign(f) * np.expm1(np.abs(f) * math.log1p(mu)) / mu


def _mulaw_shift(bmax: np.ndarray) -> np.ndarray:
    """Smallest s in [0, 15] with block max * 2**s >= 0.5 (15 for all-zero blocks)."""
    shifts = np.full(bmax.shape, MULAW_SHIFT_MAX, dtype=np.int32)
    nz = bmax > 0.0
    # bmax = f * 2**E, f in [0.5, 1): the smallest shift is max(0, -E)
    _, e = np.frexp(bmax[nz])
    shifts[nz] = np.clip(-e, 0, MULAW_SHIFT_MAX)
    return shifts


def mulaw_compress_blocks(samples: np.ndarray, cfg: CompressionConfig) -> CompressedBlocks:
    """mu-law: left-shift the block toward full scale (4-bit shift), compand the
    shifted components, mid-tread quantize the companded values."""
    if cfg.method is not CompressionMethod.MU_LAW:
        raise ValueError("config method must be MU_LAW")
    comps = _interleave(_check_samples(samples))
    shifts = _mulaw_shift(_block_max(comps))
    scaled = np.clip(comps * np.exp2(shifts.astype(np.float64))[:, None], -1.0, 1.0)
    codes = _midtread_codes(mulaw_compand(scaled, cfg.mu), cfg.m_bits)
    return CompressedBlocks(CompressionMethod.MU_LAW, cfg.m_bits, codes, shifts=shifts, mu=cfg.mu)


def mulaw_compress(block, cfg: CompressionConfig) -> CompressedBlock:
    return mulaw_compress_blocks(as_prb_block(block)[None, :], cfg).block(0)


# --- Uniform baseline --------------------------------------------------

def uniform_compress_blocks(samples: np.ndarray, cfg: CompressionConfig) -> CompressedBlocks:
    """Uniform: codes = round(y/delta) clamped to +/-(2**(m-1)-1), no side info.

    The reconstruction code*delta then stays inside the overload boundary
    +/-(delta/2)(2**m - 1); inputs beyond it incur overload distortion.
    """
    if cfg.method is not CompressionMethod.UNIFORM:
        raise ValueError("config method must be UNIFORM")
    if cfg.delta is None:
        raise ValueError("uniform codec requires delta (set it or use optimize_delta)")
    comps = _interleave(_check_samples(samples))
    cmax = 2 ** (cfg.m_bits - 1) - 1
    codes = np.clip(round_half_away(comps / cfg.delta), -cmax, cmax).astype(np.int32)
    return CompressedBlocks(CompressionMethod.UNIFORM, cfg.m_bits, codes, delta=cfg.delta)


def uniform_compress(block, cfg: CompressionConfig) -> CompressedBlock:
    return uniform_compress_blocks(as_prb_block(block)[None, :], cfg).block(0)


# --- Shared dispatch and inverse ---------------------------------------

_COMPRESSORS = {
    CompressionMethod.BFP: bfp_compress_blocks,
    CompressionMethod.BLOCK_SCALING: bs_compress_blocks,
    CompressionMethod.MU_LAW: mulaw_compress_blocks,
    CompressionMethod.UNIFORM: uniform_compress_blocks,
}


def compress_blocks(samples: np.ndarray, cfg: CompressionConfig) -> CompressedBlocks:
    """Method-dispatched vectorized compression of (n_blocks, 12) samples."""
    if cfg.method not in _COMPRESSORS:
        raise ValueError(f"{cfg.method} is pass-through, nothing to compress")
    return _COMPRESSORS[cfg.method](samples, cfg)


def compress(block, cfg: CompressionConfig) -> CompressedBlock:
    return compress_blocks(as_prb_block(block)[None, :], cfg).block(0)


def decompress_blocks(cb: CompressedBlocks) -> np.ndarray:
    """Vectorized inverse of compress_blocks; returns (n_blocks, 12) complex."""
    codes = cb.codes.astype(np.float64)
    if cb.method is CompressionMethod.BFP:
        step = 2.0 ** (1 - cb.m_bits)
        comps = codes * step * np.exp2(cb.exponents.astype(np.float64))[:, None]
    elif cb.method is CompressionMethod.BLOCK_SCALING:
        half = 2 ** (cb.m_bits - 1)
        comps = codes * (cb.scales / (half - 1))[:, None]
    elif cb.method is CompressionMethod.MU_LAW:
        if cb.mu is None:
            raise ValueError("mu-law CompressedBlocks is missing mu")
        step = 2.0 ** (1 - cb.m_bits)
        comps = mulaw_expand(codes * step, cb.mu)
        comps = comps * np.exp2(-cb.shifts.astype(np.float64))[:, None]
    elif cb.method is CompressionMethod.UNIFORM:
        if cb.delta is None:
            raise ValueError("uniform CompressedBlocks is missing delta")
        comps = codes * cb.delta
    else:
        raise ValueError(f"cannot decompress method {cb.method}")
    return _deinterleave(comps)


def decompress(cb: CompressedBlock) -> np.ndarray:
    """Reconstruct one PRB block from its compressed form."""
    _validate_side_info(cb)
    batch = CompressedBlocks(
        method=cb.method,
        m_bits=cb.m_bits,
        codes=cb.codes[None, :],
        exponents=None if cb.exponent is None else np.array([cb.exponent], dtype=np.int32),
        scales=None if cb.scale is None else np.array([cb.scale], dtype=np.float64),
        shifts=None if cb.shift is None else np.array([cb.shift], dtype=np.int32),
        delta=cb.delta,
        mu=cb.mu,
    )
    return decompress_blocks(batch)[0]


def _validate_side_info(cb: CompressedBlock) -> None:
    expected = {
        CompressionMethod.BFP: cb.exponent is not None,
        CompressionMethod.BLOCK_SCALING: cb.scale is not None,
        CompressionMethod.MU_LAW: cb.shift is not None and cb.mu is not None,
        CompressionMethod.UNIFORM: cb.delta is not None,
    }
    if cb.method not in expected:
        raise ValueError(f"cannot decompress method {cb.method}")
    if not expected[cb.method]:
        raise ValueError(f"side info missing for {cb.method.value} block")


# --- Analysis ----------------------------------------------------------

def bussgang_estimate(original: np.ndarray, quantized: np.ndarray) -> BussgangStats:
    """Least-squares linear decomposition q = alpha*y + delta of a quantizer output.

    alpha is the LS gain, so the residual delta is empirically uncorrelated
    with y by construction; cross_corr reports the normalized residual
    correlation as a sanity figure.
    """
    y = np.asarray(original, dtype=np.complex128).reshape(-1)
    q = np.asarray(quantized, dtype=np.complex128).reshape(-1)
    if y.size != q.size:
        raise ValueError("length mismatch")
    y_pow = np.sum(np.abs(y) ** 2)
    if y_pow == 0.0:
        raise ValueError("zero-power input")
    alpha = complex(np.sum(q * np.conj(y)) / y_pow)
    delta = q - alpha * y
    d_pow = np.sum(np.abs(delta) ** 2)
    cross = 0.0 if d_pow == 0.0 else float(np.abs(np.sum(delta * np.conj(y))) / math.sqrt(d_pow * y_pow))
    return BussgangStats(alpha=alpha, distortion_power=float(d_pow / y.size), cross_corr=cross)


def sqnr(original: np.ndarray, quantized: np.ndarray) -> float:
    """Signal-to-quantization-noise ratio in dB; +inf when distortion is zero."""
    y = np.asarray(original, dtype=np.complex128).reshape(-1)
    q = np.asarray(quantized, dtype=np.complex128).reshape(-1)
    if y.size != q.size:
        raise ValueError("length mismatch")
    noise = np.sum(np.abs(q - y) ** 2)
    if noise == 0.0:
        return math.inf
    return float(10.0 * np.log10(np.sum(np.abs(y) ** 2) / noise))


# --- Uniform step-size optimization ------------------------------------

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_DELTA_SEED = 0x5E11


def _uniform_recon(comps: np.ndarray, delta: float, m_bits: int) -> np.ndarray:
    if m_bits == 1:
        # two-level lattice +/-(delta/2): the mid-tread grid degenerates at 1 bit
        return np.where(comps >= 0.0, 0.5 * delta, -0.5 * delta)
    cmax = 2 ** (m_bits - 1) - 1
    return np.clip(round_half_away(comps / delta), -cmax, cmax) * delta


def optimize_delta(m_bits: int, input_power: float, n_samples: int = 100_000, seed: int = _DELTA_SEED) -> float:
    """Step size minimizing MSE for circularly symmetric Gaussian input.

    input_power is the complex sample power E|y|^2 (per-component variance is
    input_power/2). Golden-section search over the simulated MSE of the
    uniform quantizer on a fixed-seed draw; deterministic for fixed seed.
    """
    if m_bits < 1:
        raise ValueError("m_bits must be >= 1")
    if input_power <= 0.0:
        raise ValueError("input_power must be positive")
    sigma_c = math.sqrt(input_power / 2.0)
    rng = np.random.default_rng(seed)
    comps = sigma_c * rng.standard_normal(2 * n_samples)

    def mse(delta: float) -> float:
        err = _uniform_recon(comps, delta, m_bits) - comps
        return float(np.mean(err * err))

    lo, hi = 1e-3 * sigma_c, 8.0 * sigma_c
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = mse(c), mse(d)
    while b - a > 1e-7 * sigma_c:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = mse(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = mse(d)
    return float(0.5 * (a + b))


def full_scale_gain(samples: np.ndarray) -> float:
    """Gain mapping the largest |I|/|Q| component to full scale 1.0 (1.0 if all zero)."""
    peak = np.max(np.abs(np.asarray(samples, dtype=np.complex128).view(np.float64)))
    return 1.0 if peak == 0.0 else float(1.0 / peak)
