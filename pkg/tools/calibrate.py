#!/usr/bin/env python3
"""Coarse BLER scans used to choose acceptance-test SNR grids. Dev tool."""

import sys
import time

import numpy as np

sys.path.insert(0, "src")

from fhcomp.compression import CompressionConfig, CompressionMethod
from fhcomp.phy_chain import resolve_mcs
from fhcomp.sim_harness import SimConfig, run_sweep

SEED = 2024


def scan(mcs_index, method, m_bits, snrs, n_tbs=100, max_errors=40, seed=SEED):
    mcs, _ = resolve_mcs(mcs_index)
    cfg = SimConfig(
        mcs=mcs,
        codec=CompressionConfig(CompressionMethod(method), m_bits=m_bits),
        snr_points_db=tuple(snrs),
        n_tbs=n_tbs,
        max_errors=max_errors,
        master_seed=seed,
        n_workers=1,
    )
    t0 = time.time()
    pts = run_sweep(cfg)
    line = " ".join(f"{p.tx_snr_db:.0f}:{p.bler:.3f}" for p in pts)
    print(f"MCS{mcs_index} {method} m={m_bits}: {line}  [{time.time()-t0:.0f}s]", flush=True)
    return pts


if __name__ == "__main__":
    which = sys.argv[1] if len(sys.argv) > 1 else "coarse"
    if which == "coarse":
        scan(1, "none", 8, np.arange(85, 126, 5.0), n_tbs=60)
        scan(2, "none", 8, np.arange(95, 136, 5.0), n_tbs=60)
        scan(4, "none", 8, np.arange(105, 151, 5.0), n_tbs=60)
    elif which == "qpsk":
        scan(1, "none", 8, np.arange(88, 109, 2.0), n_tbs=200)
        scan(1, "bs", 2, np.arange(88, 109, 2.0), n_tbs=200)
        scan(1, "uniform", 2, np.arange(88, 115, 2.0), n_tbs=200)
    elif which == "qam256":
        scan(4, "none", 8, np.arange(110, 141, 2.0), n_tbs=200)
        scan(4, "bs", 5, np.arange(110, 149, 2.0), n_tbs=200)
        scan(4, "uniform", 5, np.arange(110, 149, 4.0), n_tbs=200)
        for m in (6, 7, 8):
            for meth in ("bs", "bfp", "mulaw", "uniform"):
                scan(4, meth, m, np.arange(110, 145, 2.0), n_tbs=150)
