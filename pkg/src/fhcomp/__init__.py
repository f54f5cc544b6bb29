"""Uplink fronthaul IQ compression codecs and a desk-scale DD-MIMO BLER simulator."""

from .compression import (
    BussgangStats,
    CompressedBlock,
    CompressionConfig,
    CompressionMethod,
    bussgang_estimate,
    compress,
    decompress,
    optimize_delta,
    sqnr,
)
from .iq_core import ResourceGrid, TopologyConfig, grid_to_prb_blocks, prb_blocks_to_grid

__version__ = "0.1.0"

__all__ = [
    "BussgangStats",
    "CompressedBlock",
    "CompressionConfig",
    "CompressionMethod",
    "ResourceGrid",
    "TopologyConfig",
    "bussgang_estimate",
    "compress",
    "decompress",
    "grid_to_prb_blocks",
    "optimize_delta",
    "prb_blocks_to_grid",
    "sqnr",
]
