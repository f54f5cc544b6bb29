"""Bit-exact fronthaul serialization of compressed PRB blocks.

Wire section layout (one per PRB, MSB-first within bytes):

====  =========================================================
byte  contents
====  =========================================================
0     method nibble | (m_bits - 1) nibble
1     BS scale shift nibble (zero for other methods) | reserved
2-3   PRB index, big-endian
4     compression parameter byte
5..   24 sample codes, m_bits two's complement each, I then Q
====  =========================================================

The parameter byte is the offset-binary exponent (e + 8, high nibble
reserved) for BFP, the Q1.7 scale mantissa for BS, the block shift (high
nibble reserved) for mu-law, and zero for uniform. The payload after the
4-byte header is always 8 + 24*m_bits bits; 24*m_bits is a multiple of 8,
so sections byte-align without padding. The layout is self-contained for
loopback testing and not interoperable with real O-RU equipment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compression import (
    CompressedBlock,
    CompressedBlocks,
    CompressionMethod,
    round_half_away,
)

METHOD_CODES = {
    CompressionMethod.NONE: 0,
    CompressionMethod.BFP: 1,
    CompressionMethod.BLOCK_SCALING: 2,
    CompressionMethod.MU_LAW: 3,
    CompressionMethod.UNIFORM: 4,
}
HEADER_BYTES = 4


class WireFormatError(ValueError):
    """Malformed wire payload: bad length, header mismatch, or reserved bits set."""


@dataclass(frozen=True)
class Q17Scale:
    """Unsigned Q1.7 fixed-point mantissa with a 4-bit power-of-two shift.

    Represented value = mantissa/128 * 2**shift. The shift extends the plain
    Q1.7 range [0, 255/128] to scales up to 255/128 * 2**15.
    """

    shift: int
    mantissa: int

    def __post_init__(self):
        if not 0 <= self.shift <= 15:
            raise ValueError("shift must fit 4 bits")
        if not 0 <= self.mantissa <= 255:
            raise ValueError("mantissa must fit 8 bits")

    @property
    def value(self) -> float:
        return self.mantissa / 128.0 * 2.0 ** self.shift


def q17_encode_many(scales: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized Q1.7-with-shift quantization; returns (shifts, mantissas)."""
    s = np.asarray(scales, dtype=np.float64).reshape(-1)
    if np.any(s < 0.0) or not np.all(np.isfinite(s)):
        raise ValueError("scales must be finite and nonnegative")
    raw = s * 128.0
    shifts = np.zeros(s.shape, dtype=np.int64)
    for _ in range(15):
        grow = round_half_away(raw / np.exp2(shifts.astype(np.float64))) > 255
        if not grow.any():
            break
        shifts[grow] += 1
    mantissas = round_half_away(raw / np.exp2(shifts.astype(np.float64))).astype(np.int64)
    if np.any(mantissas > 255):
        raise ValueError("scale exceeds the Q1.7-with-shift range")
    return shifts, mantissas


def q17_encode(scale: float) -> Q17Scale:
    """Quantize a nonnegative scale to Q1.7-with-shift (idempotent on its grid)."""
    shifts, mantissas = q17_encode_many(np.array([scale]))
    return Q17Scale(shift=int(shifts[0]), mantissa=int(mantissas[0]))


def section_nbytes(m_bits: int) -> int:
    """Total wire bytes for one PRB section: 4 header + 1 param + 3*m_bits code bytes."""
    return HEADER_BYTES + 1 + 3 * m_bits


def fronthaul_load(n_prb: int, n_symbols: int, n_antennas: int, m_bits: int) -> int:
    """Compressed payload bits per slot: blocks * (param byte + 24 m-bit codes)."""
    if min(n_prb, n_symbols, n_antennas, m_bits) < 1:
        raise ValueError("all arguments must be >= 1")
    return n_prb * n_symbols * n_antennas * (8 + 24 * m_bits)


def _codes_to_bytes(codes: np.ndarray, m_bits: int) -> np.ndarray:
    """(n, 24) int codes -> (n, 3*m_bits) payload bytes, MSB-first."""
    lo, hi = -(2 ** (m_bits - 1)), 2 ** (m_bits - 1) - 1
    if codes.min(initial=0) < lo or codes.max(initial=0) > hi:
        raise WireFormatError(f"code out of {m_bits}-bit two's-complement range")
    unsigned = (codes.astype(np.int64) & (2 ** m_bits - 1)).astype(np.uint32)
    shifts = np.arange(m_bits - 1, -1, -1, dtype=np.uint32)
    bits = ((unsigned[..., None] >> shifts) & 1).astype(np.uint8)
    return np.packbits(bits.reshape(codes.shape[0], 24 * m_bits), axis=1)


def _bytes_to_codes(payload: np.ndarray, m_bits: int) -> np.ndarray:
    """(n, 3*m_bits) payload bytes -> (n, 24) int32 codes (sign-extended)."""
    bits = np.unpackbits(payload, axis=1).reshape(payload.shape[0], 24, m_bits)
    weights = (1 << np.arange(m_bits - 1, -1, -1, dtype=np.int64))
    unsigned = bits.astype(np.int64) @ weights
    return np.where(unsigned >= 2 ** (m_bits - 1), unsigned - 2 ** m_bits, unsigned).astype(np.int32)


def pack_blocks(cbs: CompressedBlocks, first_prb_index: int = 0,
                prb_indices: np.ndarray | None = None) -> bytes:
    """Serialize many blocks into consecutive wire sections.

    PRB indices default to first_prb_index, first_prb_index + 1, ...; pass
    prb_indices to label sections explicitly (e.g. per-symbol PRB numbering).
    """
    method = cbs.method
    if method not in METHOD_CODES or method is CompressionMethod.NONE:
        raise WireFormatError("pass-through blocks are never serialized")
    n, m = cbs.n_blocks, cbs.m_bits
    if prb_indices is None:
        prb = first_prb_index + np.arange(n, dtype=np.int64)
    else:
        prb = np.asarray(prb_indices, dtype=np.int64).reshape(-1)
        if prb.size != n:
            raise WireFormatError("prb_indices length must match the block count")
    if prb.min(initial=0) < 0 or prb.max(initial=0) > 0xFFFF:
        raise WireFormatError("PRB index must fit 16 bits")

    out = np.zeros((n, section_nbytes(m)), dtype=np.uint8)
    out[:, 0] = (METHOD_CODES[method] << 4) | (m - 1)
    out[:, 2] = prb >> 8
    out[:, 3] = prb & 0xFF
    if method is CompressionMethod.BFP:
        exps = cbs.exponents.astype(np.int64)
        if exps.min() < -8 or exps.max() > 7:
            raise WireFormatError("BFP exponent out of 4-bit signed range")
        out[:, 4] = (exps + 8).astype(np.uint8)
    elif method is CompressionMethod.BLOCK_SCALING:
        shifts, mantissas = q17_encode_many(cbs.scales)
        out[:, 1] = (shifts << 4).astype(np.uint8)
        out[:, 4] = mantissas.astype(np.uint8)
    elif method is CompressionMethod.MU_LAW:
        shifts = cbs.shifts.astype(np.int64)
        if shifts.min() < 0 or shifts.max() > 15:
            raise WireFormatError("mu-law shift out of 4-bit range")
        out[:, 4] = shifts.astype(np.uint8)
    out[:, 5:] = _codes_to_bytes(cbs.codes, m)
    return out.tobytes()


def unpack_blocks(
    data: bytes,
    method: CompressionMethod,
    m_bits: int,
    n_blocks: int,
    delta: float | None = None,
    mu: float = 8.0,
) -> tuple[CompressedBlocks, np.ndarray]:
    """Parse consecutive wire sections; returns the blocks and their PRB indices.

    delta and mu are receiver-side configuration (they are not on the wire):
    delta is required to reconstruct uniform blocks, mu defaults to 8.
    """
    nbytes = section_nbytes(m_bits)
    raw = np.frombuffer(data, dtype=np.uint8)
    if raw.size != n_blocks * nbytes:
        raise WireFormatError(f"payload is {raw.size} bytes, expected {n_blocks * nbytes}")
    sec = raw.reshape(n_blocks, nbytes)

    expected0 = (METHOD_CODES[method] << 4) | (m_bits - 1)
    if np.any(sec[:, 0] != expected0):
        raise WireFormatError("section header does not match the declared method/m_bits")
    if np.any(sec[:, 1] & 0x0F):
        raise WireFormatError("reserved bits set in header byte 1")
    prb = (sec[:, 2].astype(np.int64) << 8) | sec[:, 3]

    exponents = scales = shifts = None
    out_delta = out_mu = None
    if method is CompressionMethod.BFP:
        if np.any(sec[:, 1] & 0xF0) or np.any(sec[:, 4] & 0xF0):
            raise WireFormatError("reserved bits set in BFP section")
        exponents = sec[:, 4].astype(np.int32) - 8
    elif method is CompressionMethod.BLOCK_SCALING:
        shift4 = sec[:, 1] >> 4
        scales = sec[:, 4].astype(np.float64) / 128.0 * np.exp2(shift4.astype(np.float64))
    elif method is CompressionMethod.MU_LAW:
        if np.any(sec[:, 1] & 0xF0) or np.any(sec[:, 4] & 0xF0):
            raise WireFormatError("reserved bits set in mu-law section")
        shifts = sec[:, 4].astype(np.int32)
        out_mu = mu
    elif method is CompressionMethod.UNIFORM:
        if np.any(sec[:, 1] & 0xF0) or np.any(sec[:, 4]):
            raise WireFormatError("reserved bits set in uniform section")
        if delta is None:
            raise WireFormatError("uniform sections need the configured delta to decode")
        out_delta = delta
    else:
        raise WireFormatError(f"method {method} is not wire-decodable")

    codes = _bytes_to_codes(np.ascontiguousarray(sec[:, 5:]), m_bits)
    cbs = CompressedBlocks(method, m_bits, codes, exponents=exponents, scales=scales,
                           shifts=shifts, delta=out_delta, mu=out_mu)
    return cbs, prb


def pack(cb: CompressedBlock, prb_index: int = 0) -> bytes:
    """Serialize one compressed PRB block into its wire section."""
    cbs = CompressedBlocks(
        method=cb.method,
        m_bits=cb.m_bits,
        codes=cb.codes[None, :],
        exponents=None if cb.exponent is None else np.array([cb.exponent], dtype=np.int32),
        scales=None if cb.scale is None else np.array([cb.scale], dtype=np.float64),
        shifts=None if cb.shift is None else np.array([cb.shift], dtype=np.int32),
        delta=cb.delta,
        mu=cb.mu,
    )
    return pack_blocks(cbs, first_prb_index=prb_index)


def unpack(
    data: bytes,
    method: CompressionMethod,
    m_bits: int,
    delta: float | None = None,
    mu: float = 8.0,
) -> tuple[CompressedBlock, int]:
    """Parse one wire section; inverse of pack up to BS-scale Q1.7 quantization."""
    cbs, prb = unpack_blocks(data, method, m_bits, 1, delta=delta, mu=mu)
    return cbs.block(0), int(prb[0])
