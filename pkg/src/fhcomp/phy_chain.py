"""Transmit/receive bit pipeline: CRC, FEC, Gray QAM mapping, max-log demapping.

Desk-scale stand-in for the NR PUSCH chain: one CRC-16 protected code block
per transport block, a quasi-cyclic LDPC code per nominal rate, square Gray
QAM at unit average power, and a per-axis max-log soft demapper. LLR sign
convention throughout: positive means bit 0 is more likely; values are
clamped to +/-LLR_MAX.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .ldpc import LdpcCode, load_code

LLR_MAX = 50.0
CRC_BITS = 16
N_SYMBOLS_PER_SLOT = 14


class Modulation(enum.Enum):
    QPSK = 2
    QAM16 = 4
    QAM64 = 6
    QAM256 = 8

    @property
    def bits_per_symbol(self) -> int:
        return self.value


@dataclass(frozen=True)
class McsConfig:
    """Modulation and coding scheme: constellation, target rate, allocation, TBS."""

    modulation: Modulation
    code_rate: float
    n_prb: int
    tbs: int

    def __post_init__(self):
        if not 0.0 < self.code_rate < 1.0:
            raise ValueError("code_rate must be in (0, 1)")
        if self.n_prb < 1 or self.tbs < 1:
            raise ValueError("n_prb and tbs must be positive")
        if self.tbs + CRC_BITS > self.capacity_bits:
            raise ValueError("tbs exceeds the slot's raw bit capacity")

    @property
    def capacity_bits(self) -> int:
        return self.modulation.bits_per_symbol * 12 * self.n_prb * N_SYMBOLS_PER_SLOT


# Table-driven MCS presets; tbs_table values larger than the selected code's
# info capacity are clamped by resolve_mcs (desk-scale single code block).
MCS_TABLE = {
    1: (Modulation.QPSK, 120 / 1024, 25, 848),
    2: (Modulation.QAM16, 434 / 1024, 25, 6016),
    3: (Modulation.QAM64, 616 / 1024, 25, 13064),
    4: (Modulation.QAM256, 682.5 / 1024, 25, 18960),
}

_CODE_REGISTRY = {
    "rate_1_8": 1 / 8,
    "rate_1_2": 1 / 2,
    "rate_5_8": 5 / 8,
    "rate_2_3": 2 / 3,
}


def code_for_rate(code_rate: float) -> LdpcCode:
    """Shipped code with nominal rate closest to the requested one."""
    name = min(_CODE_REGISTRY, key=lambda k: abs(_CODE_REGISTRY[k] - code_rate))
    return load_code(name)


def resolve_mcs(index: int) -> tuple[McsConfig, dict]:
    """Preset MCS by table index; TBS clamped to the code's info capacity.

    Returns the config and a metadata dict recording any clamping.
    """
    if index not in MCS_TABLE:
        raise ValueError(f"MCS index must be one of {sorted(MCS_TABLE)}")
    modulation, rate, n_prb, tbs_table = MCS_TABLE[index]
    code = code_for_rate(rate)
    tbs = min(tbs_table, code.k - CRC_BITS)
    meta = {"mcs_index": index, "tbs_table": tbs_table, "tbs": tbs,
            "tbs_scale": tbs / tbs_table, "code": f"n={code.n},k={code.k}"}
    return McsConfig(modulation, rate, n_prb, tbs), meta


# --- CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF) ----------------------

@njit(cache=True, nogil=True)
def _crc16_bits(bits):
    crc = 0xFFFF
    for i in range(bits.size):
        fb = ((crc >> 15) & 1) ^ bits[i]
        crc = (crc << 1) & 0xFFFF
        if fb:
            crc ^= 0x1021
    return crc


def crc16(bits: np.ndarray) -> int:
    """CRC-16/CCITT-FALSE over a bit sequence (MSB-first semantics)."""
    return int(_crc16_bits(np.ascontiguousarray(bits, dtype=np.uint8)))


def _int_to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


@dataclass
class TransportBlock:
    """Payload bits plus their CRC-16, computed on construction."""

    payload: np.ndarray
    crc: int = -1

    def __post_init__(self):
        self.payload = np.ascontiguousarray(self.payload, dtype=np.uint8).reshape(-1)
        computed = crc16(self.payload)
        if self.crc == -1:
            self.crc = computed
        elif self.crc != computed:
            raise ValueError("CRC does not match payload")

    @classmethod
    def random(cls, tbs: int, rng: np.random.Generator) -> "TransportBlock":
        return cls(rng.integers(0, 2, tbs, dtype=np.uint8))

    def info_bits(self) -> np.ndarray:
        """payload || 16 CRC bits, the FEC information sequence."""
        return np.concatenate([self.payload, _int_to_bits(self.crc, CRC_BITS)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransportBlock):
            return NotImplemented
        return self.crc == other.crc and np.array_equal(self.payload, other.payload)


# --- Gray QAM mapping ---------------------------------------------------

@lru_cache(maxsize=None)
def _pam_levels(bits_per_axis: int) -> np.ndarray:
    """Gray-labeled PAM amplitudes, indexed by the axis bit label.

    Label 0...0 maps to the most positive amplitude; adjacent amplitudes
    differ in exactly one label bit. Scaled so the resulting square QAM has
    unit average power.
    """
    b = bits_per_axis
    labels = np.arange(2 ** b)
    # inverse binary-reflected Gray: amplitude index from label
    idx = labels.copy()
    shift = 1
    while shift < b:
        idx ^= idx >> shift
        shift <<= 1
    amps = (2 ** b - 1) - 2 * idx
    norm = math.sqrt(2.0 * (4 ** b - 1) / 3.0)
    out = np.zeros(2 ** b)
    out[labels] = amps / norm
    return out


@lru_cache(maxsize=None)
def constellation(modulation: Modulation) -> np.ndarray:
    """Unit-power Gray constellation, indexed by the symbol's MSB-first bit label."""
    b = modulation.bits_per_symbol // 2
    pam = _pam_levels(b)
    labels = np.arange(4 ** b)
    return pam[labels >> b] + 1j * pam[labels & (2 ** b - 1)]


def modulate(bits: np.ndarray, modulation: Modulation) -> np.ndarray:
    """Map bits to Gray QAM symbols; first half of each symbol's bits is I, second Q."""
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    qm = modulation.bits_per_symbol
    if bits.size % qm:
        raise ValueError(f"bit count {bits.size} not divisible by {qm}")
    groups = bits.reshape(-1, qm)
    weights = 1 << np.arange(qm - 1, -1, -1)
    return constellation(modulation)[groups @ weights]


def soft_demap(eq_symbols: np.ndarray, noise_var, modulation: Modulation) -> np.ndarray:
    """Per-axis max-log LLRs over the Gray constellation, clamped to +/-LLR_MAX.

    noise_var is the complex noise variance per symbol (scalar or per-symbol
    array). For square Gray QAM the exact 2D max-log LLR separates into
    independent I and Q problems, each over 2**(Qm/2) PAM points.
    """
    syms = np.asarray(eq_symbols, dtype=np.complex128).reshape(-1)
    var = np.broadcast_to(np.asarray(noise_var, dtype=np.float64), syms.shape)
    if np.any(var <= 0.0):
        raise ValueError("noise variances must be positive")
    qm = modulation.bits_per_symbol
    b = qm // 2
    pam = _pam_levels(b)
    llrs = np.empty((syms.size, qm), dtype=np.float64)
    for axis, vals in ((0, syms.real), (1, syms.imag)):
        dist = (vals[:, None] - pam[None, :]) ** 2
        labels = np.arange(2 ** b)
        for i in range(b):
            bit = (labels >> (b - 1 - i)) & 1
            m0 = dist[:, bit == 0].min(axis=1)
            m1 = dist[:, bit == 1].min(axis=1)
            llrs[:, axis * b + i] = (m1 - m0) / var
    return np.clip(llrs.reshape(-1), -LLR_MAX, LLR_MAX)


# --- Transport block FEC ------------------------------------------------

def encode(tb: TransportBlock, mcs: McsConfig) -> np.ndarray:
    """Systematic codeword for one TB: payload || CRC || zero padding, LDPC encoded.

    The codeword must fit the slot allocation; callers map it to the grid
    and fill any remaining resource elements separately.
    """
    code = code_for_rate(mcs.code_rate)
    info = tb.info_bits()
    if info.size > code.k:
        raise ValueError(f"tbs {tb.payload.size} + CRC exceeds code info capacity {code.k}")
    if code.n > mcs.capacity_bits:
        raise ValueError("codeword does not fit the slot allocation")
    padded = np.zeros(code.k, dtype=np.uint8)
    padded[:info.size] = info
    return code.encode(padded)


def decode(llrs: np.ndarray, mcs: McsConfig) -> tuple[TransportBlock | None, bool]:
    """Min-sum decode of one TB; pass flag = parity satisfied AND CRC matches.

    Known-zero padding positions get a strong prior before decoding. Returns
    the decoded TB (None when the payload CRC cannot be honored) and the flag.
    """
    code = code_for_rate(mcs.code_rate)
    llrs = np.asarray(llrs, dtype=np.float64).reshape(-1)
    if llrs.size != code.n:
        raise ValueError(f"expected {code.n} LLRs, got {llrs.size}")
    n_info = mcs.tbs + CRC_BITS
    boosted = llrs.astype(np.float32).copy()
    boosted[n_info:code.k] = LLR_MAX  # shortening: padding bits are known zeros
    hard, parity_ok, _ = code.decode(boosted)
    payload = hard[:mcs.tbs]
    crc_rx = int(hard[mcs.tbs:n_info] @ (1 << np.arange(CRC_BITS - 1, -1, -1)))
    crc_ok = crc16(payload) == crc_rx
    tb = TransportBlock(payload.copy(), crc=crc_rx) if crc_ok else None
    return tb, bool(parity_ok and crc_ok)
