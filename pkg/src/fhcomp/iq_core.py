"""Core IQ sample, PRB block, and resource grid types.

All amplitudes are normalized so that +/-1.0 is full scale; the codecs in
:mod:`fhcomp.compression` operate in this domain. A PRB block is the atomic
compression unit: 12 complex samples (one PRB within one OFDM symbol).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SAMPLES_PER_PRB = 12


def as_prb_block(samples) -> np.ndarray:
    """Validate and return one PRB block as a (12,) complex128 array."""
    block = np.asarray(samples, dtype=np.complex128).reshape(-1)
    if block.size != SAMPLES_PER_PRB:
        raise ValueError(f"PRB block must hold exactly {SAMPLES_PER_PRB} samples, got {block.size}")
    if not np.all(np.isfinite(block.view(np.float64))):
        raise ValueError("PRB block contains non-finite samples")
    return block


@dataclass(frozen=True)
class TopologyConfig:
    """Coordination-region topology: RU count, antennas per RU, user counts."""

    m_coor: int = 8
    n_r: int = 1
    k_serv: int = 2
    k_coor: int = 2
    k_int: int = 0

    def __post_init__(self):
        if min(self.m_coor, self.k_serv, self.k_coor, self.k_int) < 0:
            raise ValueError("topology counts must be nonnegative")
        if self.n_r < 1:
            raise ValueError("n_r must be >= 1")
        if self.k_serv > self.k_coor:
            raise ValueError("k_serv must not exceed k_coor")

    @property
    def n_rx_dims(self) -> int:
        """Stacked receive dimension over all RUs."""
        return self.m_coor * self.n_r


class ResourceGrid:
    """Frequency-domain slot grid: (subcarrier, symbol, antenna) complex samples.

    The sample array is made read-only on construction; grids are value
    objects and safe to share between workers.
    """

    def __init__(self, n_subcarriers: int, n_symbols: int = 14, n_antennas: int = 1, data=None):
        if n_subcarriers % SAMPLES_PER_PRB != 0:
            raise ValueError("n_subcarriers must be a multiple of 12")
        if n_symbols < 1 or n_antennas < 1:
            raise ValueError("n_symbols and n_antennas must be >= 1")
        shape = (n_subcarriers, n_symbols, n_antennas)
        if data is None:
            data = np.zeros(shape, dtype=np.complex128)
        else:
            data = np.array(data, dtype=np.complex128)
            if data.shape != shape:
                raise ValueError(f"data shape {data.shape} != {shape}")
            if not np.all(np.isfinite(data.view(np.float64))):
                raise ValueError("grid contains non-finite samples")
        data.setflags(write=False)
        self.data = data

    @property
    def n_subcarriers(self) -> int:
        return self.data.shape[0]

    @property
    def n_symbols(self) -> int:
        return self.data.shape[1]

    @property
    def n_antennas(self) -> int:
        return self.data.shape[2]

    @property
    def n_prb(self) -> int:
        return self.n_subcarriers // SAMPLES_PER_PRB

    def __eq__(self, other) -> bool:
        return isinstance(other, ResourceGrid) and np.array_equal(self.data, other.data)


def grid_to_prb_blocks(grid: ResourceGrid, antenna: int, symbol: int) -> list[np.ndarray]:
    """Slice one (antenna, symbol) column into PRB blocks in ascending subcarrier order.

    Block b covers subcarriers [12*b, 12*b + 11]; concatenating the blocks
    reproduces the column losslessly.
    """
    if not 0 <= antenna < grid.n_antennas:
        raise IndexError(f"antenna {antenna} out of range [0, {grid.n_antennas})")
    if not 0 <= symbol < grid.n_symbols:
        raise IndexError(f"symbol {symbol} out of range [0, {grid.n_symbols})")
    column = grid.data[:, symbol, antenna]
    return [column[b * SAMPLES_PER_PRB:(b + 1) * SAMPLES_PER_PRB].copy() for b in range(grid.n_prb)]


def prb_blocks_to_grid(blocks, antenna: int, symbol: int, grid: ResourceGrid) -> ResourceGrid:
    """Write PRB blocks back into one (antenna, symbol) column; inverse of grid_to_prb_blocks.

    Returns a new grid; the input grid is not modified.
    """
    if not 0 <= antenna < grid.n_antennas:
        raise IndexError(f"antenna {antenna} out of range [0, {grid.n_antennas})")
    if not 0 <= symbol < grid.n_symbols:
        raise IndexError(f"symbol {symbol} out of range [0, {grid.n_symbols})")
    blocks = [as_prb_block(b) for b in blocks]
    if len(blocks) * SAMPLES_PER_PRB != grid.n_subcarriers:
        raise ValueError(
            f"{len(blocks)} blocks cover {len(blocks) * SAMPLES_PER_PRB} subcarriers, "
            f"grid has {grid.n_subcarriers}"
        )
    data = grid.data.copy()
    data[:, symbol, antenna] = np.concatenate(blocks)
    return ResourceGrid(grid.n_subcarriers, grid.n_symbols, grid.n_antennas, data)
