"""Monte-Carlo BLER engine and the fhc command line.

Sweeps TX-SNR for one (MCS, codec) configuration over a DD-MIMO uplink:
every trial runs the full pipeline (TB generation, FEC, QAM, TDL channel,
per-RU fronthaul compression with a real wire round trip, MMSE combining,
demapping, decoding) and reports the decoder pass flag for user 0.

Reproducibility contract: results are a pure function of (config,
master_seed). Geometry is drawn once per sweep; each trial derives its own
generator from SeedSequence(master_seed, spawn_key=(1, snr_index, trial)),
and the early-termination rule scans trial results in index order, so CSV
output is bit-identical for any worker count.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import struct
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import compression as comp
from . import fronthaul_wire as wire
from .channel import (
    ChannelRealization,
    LargeScale,
    NoiseConfig,
    PathlossParams,
    TdlProfile,
    apply_channel,
    pathloss_beta,
    realize_channel,
)
from .compression import CompressionConfig, CompressionMethod
from .iq_core import SAMPLES_PER_PRB, TopologyConfig
from .phy_chain import (
    McsConfig,
    Modulation,
    N_SYMBOLS_PER_SLOT,
    TransportBlock,
    constellation,
    decode,
    encode,
    modulate,
    resolve_mcs,
    soft_demap,
)
from .receiver import equalize, mmse_weights

WILSON_Z = 1.959963984540054  # 95% two-sided
DEFAULT_MAX_ERRORS = 200
_GEOMETRY_KEY = 0
_TRIAL_KEY = 1


@dataclass(frozen=True)
class SimConfig:
    """Full description of one BLER sweep (all fields JSON-serializable)."""

    mcs: McsConfig
    codec: CompressionConfig
    topology: TopologyConfig = TopologyConfig()
    snr_points_db: tuple = (0.0, 5.0, 10.0)
    n_tbs: int = 1000
    max_errors: int = DEFAULT_MAX_ERRORS
    master_seed: int = 1
    scs_hz: float = 30e3
    delay_spread_ns: float = 30.0
    tdl_profile_path: str | None = None
    pathloss: PathlossParams = PathlossParams()
    region_radius_m: float = 100.0
    ru_ring_radius_m: float = 70.0
    min_dist_m: float = 5.0
    interferer_ring_m: tuple = (150.0, 300.0)
    n_workers: int | None = None
    out: str | None = None

    def __post_init__(self):
        if self.n_tbs < 1:
            raise ValueError("n_tbs must be >= 1")
        snrs = tuple(float(s) for s in self.snr_points_db)
        if any(b <= a for a, b in zip(snrs, snrs[1:])):
            raise ValueError("snr_points_db must be strictly increasing")
        object.__setattr__(self, "snr_points_db", snrs)

    @classmethod
    def from_dict(cls, raw: dict) -> "SimConfig":
        """Build from the flat key-value config document."""
        data = dict(raw)

        def pop(key, default):
            return data.pop(key) if key in data else default

        mcs_index = pop("mcs", 2)
        mcs, _ = resolve_mcs(int(mcs_index))
        method = CompressionMethod(pop("method", "none"))
        m_bits = int(pop("m_bits", 8))
        codec = CompressionConfig(
            method=method, m_bits=m_bits,
            lam=float(pop("lambda", 1.0)), mu=float(pop("mu", 8.0)),
            delta=(lambda d: None if d is None else float(d))(pop("delta", None)),
        )
        topology = TopologyConfig(
            m_coor=int(pop("m_coor", 8)), n_r=int(pop("n_r", 1)),
            k_serv=int(pop("k_serv", 2)), k_coor=int(pop("k_coor", 2)),
            k_int=int(pop("k_int", 0)),
        )
        pathloss = PathlossParams(
            pl0_db=float(pop("pl0_db", 35.0)), d0_m=float(pop("d0_m", 1.0)),
            exponent=float(pop("pathloss_exponent", 3.76)),
            shadow_sigma_db=float(pop("shadow_sigma_db", 8.0)),
        )
        cfg = cls(
            mcs=mcs, codec=codec, topology=topology,
            snr_points_db=tuple(pop("snr_points_db", (0.0, 5.0, 10.0))),
            n_tbs=int(pop("n_tbs", 1000)),
            max_errors=int(pop("max_errors", DEFAULT_MAX_ERRORS)),
            master_seed=int(pop("master_seed", 1)),
            scs_hz=float(pop("scs_hz", 30e3)),
            delay_spread_ns=float(pop("delay_spread_ns", 30.0)),
            tdl_profile_path=pop("tdl_profile", None),
            pathloss=pathloss,
            region_radius_m=float(pop("region_radius_m", 100.0)),
            ru_ring_radius_m=float(pop("ru_ring_radius_m", 70.0)),
            min_dist_m=float(pop("min_dist_m", 5.0)),
            interferer_ring_m=tuple(pop("interferer_ring_m", (150.0, 300.0))),
            n_workers=(lambda w: None if w is None else int(w))(pop("n_workers", None)),
            out=pop("out", None),
        )
        if data:
            raise ValueError(f"unknown config keys: {sorted(data)}")
        return cfg

    @classmethod
    def from_json(cls, path: str) -> "SimConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def profile(self) -> TdlProfile:
        ds = self.delay_spread_ns * 1e-9
        if self.tdl_profile_path:
            with open(self.tdl_profile_path) as fh:
                return TdlProfile.from_csv(fh, ds)
        return TdlProfile.tdl_b(ds)


@dataclass(frozen=True)
class SimPoint:
    """One Monte-Carlo cell: TX-SNR, error counts, BLER with Wilson 95% CI."""

    tx_snr_db: float
    tb_errors: int
    tb_total: int
    bler: float = field(init=False)
    ci_low: float = field(init=False)
    ci_high: float = field(init=False)

    def __post_init__(self):
        if not 0 <= self.tb_errors <= self.tb_total:
            raise ValueError("error count out of range")
        lo, hi = wilson_interval(self.tb_errors, self.tb_total)
        object.__setattr__(self, "bler", self.tb_errors / self.tb_total)
        object.__setattr__(self, "ci_low", lo)
        object.__setattr__(self, "ci_high", hi)


def wilson_interval(errors: int, total: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson score 95% interval for a binomial proportion."""
    if total < 1:
        raise ValueError("total must be >= 1")
    p = errors / total
    denom = 1.0 + z * z / total
    center = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1.0 - p) / total + z * z / (4.0 * total * total)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# --- Geometry and per-sweep context -------------------------------------

@dataclass
class _SweepContext:
    """Everything shared (read-only) by all trials of one sweep."""

    cfg: SimConfig
    profile: TdlProfile
    large_scale: LargeScale
    large_scale_int: LargeScale | None
    ru_xy: np.ndarray
    ue_xy: np.ndarray
    int_xy: np.ndarray
    n_subcarriers: int
    unit_delta: float | None   # optimize_delta(m_bits, 1.0), uniform codec only


def _place_geometry(cfg: SimConfig):
    """RUs on a ring, UEs uniform in the service disc, interferers in an annulus."""
    topo = cfg.topology
    rng = np.random.default_rng(np.random.SeedSequence(cfg.master_seed, spawn_key=(_GEOMETRY_KEY,)))
    angles = 2 * math.pi * np.arange(topo.m_coor) / max(topo.m_coor, 1)
    ru_xy = cfg.ru_ring_radius_m * np.stack([np.cos(angles), np.sin(angles)], axis=1)

    def draw_disc(count, r_lo, r_hi):
        pts = np.zeros((count, 2))
        for i in range(count):
            while True:
                r = math.sqrt(rng.uniform(r_lo ** 2, r_hi ** 2))
                a = rng.uniform(0, 2 * math.pi)
                xy = np.array([r * math.cos(a), r * math.sin(a)])
                if ru_xy.size == 0 or np.min(np.linalg.norm(ru_xy - xy, axis=1)) >= cfg.min_dist_m:
                    pts[i] = xy
                    break
        return pts

    ue_xy = draw_disc(topo.k_coor, 0.0, cfg.region_radius_m)
    int_xy = draw_disc(topo.k_int, *cfg.interferer_ring_m)
    return rng, ru_xy, ue_xy, int_xy


def _build_context(cfg: SimConfig) -> _SweepContext:
    rng, ru_xy, ue_xy, int_xy = _place_geometry(cfg)
    dist = np.linalg.norm(ru_xy[:, None, :] - ue_xy[None, :, :], axis=2)
    large_scale = pathloss_beta(dist, cfg.pathloss, rng)
    large_scale_int = None
    if cfg.topology.k_int:
        dist_i = np.linalg.norm(ru_xy[:, None, :] - int_xy[None, :, :], axis=2)
        large_scale_int = pathloss_beta(dist_i, cfg.pathloss, rng)
    unit_delta = None
    if cfg.codec.method is CompressionMethod.UNIFORM and cfg.codec.delta is None:
        unit_delta = comp.optimize_delta(cfg.codec.m_bits, 1.0)
    return _SweepContext(
        cfg=cfg, profile=cfg.profile(), large_scale=large_scale,
        large_scale_int=large_scale_int, ru_xy=ru_xy, ue_xy=ue_xy, int_xy=int_xy,
        n_subcarriers=12 * cfg.mcs.n_prb, unit_delta=unit_delta,
    )


# --- The per-trial pipeline ----------------------------------------------

def _grid_from_symbols(symbols: np.ndarray, n_sc: int, n_sym: int) -> np.ndarray:
    """Fill subcarrier-major within each symbol: grid[n, l] = symbols[l*n_sc + n]."""
    return symbols.reshape(n_sym, n_sc).T


def _symbols_from_grid(grid: np.ndarray) -> np.ndarray:
    return grid.T.reshape(-1)


def _grid_to_blocks(grid: np.ndarray) -> np.ndarray:
    """(n_sc, n_sym) -> (n_sym * n_prb, 12) PRB blocks, subcarrier-major per symbol."""
    n_sc, n_sym = grid.shape
    return grid.T.reshape(n_sym * (n_sc // SAMPLES_PER_PRB), SAMPLES_PER_PRB)


def _blocks_to_grid(blocks: np.ndarray, n_sc: int, n_sym: int) -> np.ndarray:
    return blocks.reshape(n_sym, n_sc).T


def _fronthaul_stage(y: np.ndarray, cfg: SimConfig, unit_delta: float | None):
    """Compress, wire-round-trip, and decompress every RU antenna's slot.

    The samples are scaled to codec full scale per antenna (gain inverted
    after reconstruction) and the Bussgang statistics of the reconstruction
    are measured per antenna for the demapper's noise model.
    """
    n_sc, n_sym, n_dims = y.shape
    n_blocks = n_sym * (n_sc // SAMPLES_PER_PRB)
    prb_idx = np.tile(np.arange(n_sc // SAMPLES_PER_PRB), n_sym)
    y_hat = np.empty_like(y)
    alpha = np.empty(n_dims, dtype=np.complex128)
    dist = np.empty(n_dims, dtype=np.float64)
    for d in range(n_dims):
        plane = y[:, :, d]
        gain = comp.full_scale_gain(plane)
        scaled = plane * gain
        codec = cfg.codec
        if codec.method is CompressionMethod.UNIFORM and codec.delta is None:
            power = float(np.mean(np.abs(scaled) ** 2))
            codec = replace(codec, delta=unit_delta * math.sqrt(power))
        blocks = _grid_to_blocks(scaled)
        cbs = comp.compress_blocks(blocks, codec)
        payload = wire.pack_blocks(cbs, prb_indices=prb_idx)
        cbs_rx, _ = wire.unpack_blocks(payload, codec.method, codec.m_bits, n_blocks,
                                       delta=codec.delta, mu=codec.mu)
        recon = _blocks_to_grid(comp.decompress_blocks(cbs_rx), n_sc, n_sym) / gain
        y_hat[:, :, d] = recon
        stats = comp.bussgang_estimate(plane.reshape(-1), recon.reshape(-1))
        alpha[d] = stats.alpha
        dist[d] = stats.distortion_power
    return y_hat, alpha, dist


def _trial_rng(master_seed: int, snr_index: int, trial_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=(_TRIAL_KEY, snr_index, trial_index))
    return np.random.default_rng(seq)


def run_trial(cfg: SimConfig, snr_db: float, trial_index: int,
              snr_index: int = 0, ctx: _SweepContext | None = None) -> bool:
    """One full pipeline pass; returns True when user 0's TB decodes cleanly."""
    if ctx is None:
        ctx = _build_context(cfg)
    rng = _trial_rng(cfg.master_seed, snr_index, trial_index)
    mcs, topo = cfg.mcs, cfg.topology
    n_sc, n_sym = ctx.n_subcarriers, N_SYMBOLS_PER_SLOT
    qm = mcs.modulation.bits_per_symbol

    # transmit side: user 0 carries the measured TB, other users random data
    tb = TransportBlock.random(mcs.tbs, rng)
    cw = encode(tb, mcs)
    pad = (-cw.size) % qm
    coded = np.concatenate([cw, np.zeros(pad, dtype=np.uint8)]) if pad else cw
    data_syms = modulate(coded, mcs.modulation)
    n_total = n_sc * n_sym
    n_filler = n_total - data_syms.size
    if n_filler < 0:
        raise ValueError("codeword does not fit the slot")
    lut = constellation(mcs.modulation)
    tx = np.empty((topo.k_coor, n_sc, n_sym), dtype=np.complex128)
    filler = lut[rng.integers(0, lut.size, n_filler)]
    tx[0] = _grid_from_symbols(np.concatenate([data_syms, filler]), n_sc, n_sym)
    for k in range(1, topo.k_coor):
        tx[k] = _grid_from_symbols(lut[rng.integers(0, lut.size, n_total)], n_sc, n_sym)
    tx_int = None
    if topo.k_int:
        qpsk = constellation(Modulation.QPSK)
        tx_int = qpsk[rng.integers(0, 4, (topo.k_int, n_sc, n_sym))]

    # channel
    noise = NoiseConfig.from_tx_snr(snr_db)
    realization = realize_channel(ctx.profile, ctx.large_scale, n_sc, cfg.scs_hz, rng,
                                  n_r=topo.n_r, large_scale_int=ctx.large_scale_int)
    y = apply_channel(tx, tx_int, realization, noise, rng)

    # fronthaul compression (pass-through when method is NONE)
    if cfg.codec.method is CompressionMethod.NONE:
        y_hat, alpha, dist = y, None, None
    else:
        y_hat, alpha, dist = _fronthaul_stage(y, cfg, ctx.unit_delta)

    # DU: combine, demap user 0's codeword REs, decode
    weights = mmse_weights(realization, noise, n_served=topo.k_serv)
    eq = equalize(weights, y_hat, realization, noise,
                  bussgang_alpha=alpha, bussgang_distortion=dist)
    z, var = eq.demapper_input(0)
    z_seq = _symbols_from_grid(z)[:data_syms.size]
    var_seq = _symbols_from_grid(var)[:data_syms.size].real
    llrs = soft_demap(z_seq, var_seq, mcs.modulation)[:cw.size]
    decoded, ok = decode(llrs, mcs)
    return bool(ok and decoded == tb)


def _point_from_flags(snr_db: float, flags: list[bool], max_errors: int) -> SimPoint:
    """Deterministic early-termination scan in trial-index order."""
    errors = total = 0
    for passed in flags:
        total += 1
        errors += 0 if passed else 1
        if errors >= max_errors:
            break
    return SimPoint(tx_snr_db=snr_db, tb_errors=errors, tb_total=total)


def _resolve_workers(cfg: SimConfig) -> int:
    if cfg.n_workers is not None:
        return max(1, cfg.n_workers)
    env = os.environ.get("FHC_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def run_sweep(cfg: SimConfig, csv_writer=None, progress=None) -> list[SimPoint]:
    """Run every SNR point; stream rows through csv_writer as they finish.

    Trials are scheduled in fixed-size batches over a thread pool; the
    early-termination rule consumes flags in index order, so the outcome is
    independent of the worker count and schedule.
    """
    ctx = _build_context(cfg)
    workers = _resolve_workers(cfg)
    batch = max(8, 4 * workers)
    points: list[SimPoint] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for snr_index, snr_db in enumerate(cfg.snr_points_db):
            flags: list[bool] = []
            errors = 0
            for start in range(0, cfg.n_tbs, batch):
                idxs = range(start, min(start + batch, cfg.n_tbs))
                flags.extend(pool.map(
                    lambda t: run_trial(cfg, snr_db, t, snr_index=snr_index, ctx=ctx), idxs))
                errors = sum(1 for f in flags if not f)
                if _early_stop(flags, cfg.max_errors):
                    break
            point = _point_from_flags(snr_db, flags, cfg.max_errors)
            points.append(point)
            if csv_writer is not None:
                csv_writer(cfg, point)
            if progress is not None:
                progress(point)
    return points


def _early_stop(flags: list[bool], max_errors: int) -> bool:
    errors = 0
    for passed in flags:
        errors += 0 if passed else 1
        if errors >= max_errors:
            return True
    return False


# --- Curve summaries ------------------------------------------------------

@dataclass(frozen=True)
class CurveSummary:
    """BLER curve with its target crossing and difference vs a baseline curve."""

    points: tuple
    target_bler: float
    snr_at_target: float | None
    snr_difference: float | None
    undefined_reason: str | None = None


def snr_at_target(points: list[SimPoint], target_bler: float) -> tuple[float | None, str | None]:
    """SNR where the curve crosses the target, log-linear in (dB, log10 BLER).

    Zero-error points are floored at 0.5/total for interpolation. Returns
    (None, reason) when the curve never brackets the target from above.
    """
    if not points:
        return None, "empty curve"
    floored = [max(p.bler, 0.5 / p.tb_total) for p in points]
    if floored[0] <= target_bler:
        return None, f"already at/below target at lowest SNR {points[0].tx_snr_db} dB"
    for i in range(len(points) - 1):
        b0, b1 = floored[i], floored[i + 1]
        if b0 > target_bler >= b1:
            s0, s1 = points[i].tx_snr_db, points[i + 1].tx_snr_db
            frac = (math.log10(b0) - math.log10(target_bler)) / (math.log10(b0) - math.log10(b1))
            return s0 + (s1 - s0) * frac, None
    return None, "curve never reaches the target within the swept range"


def snr_difference(curve: list[SimPoint], baseline: list[SimPoint],
                   target_bler: float = 0.1) -> tuple[float | None, str | None]:
    """Extra dB the curve needs vs the baseline to hit the target BLER."""
    s_curve, why_c = snr_at_target(curve, target_bler)
    s_base, why_b = snr_at_target(baseline, target_bler)
    if s_curve is None:
        return None, f"curve: {why_c}"
    if s_base is None:
        return None, f"baseline: {why_b}"
    return s_curve - s_base, None


def summarize_curve(curve: list[SimPoint], baseline: list[SimPoint],
                    target_bler: float = 0.1) -> CurveSummary:
    s_at, why = snr_at_target(curve, target_bler)
    diff, why2 = snr_difference(curve, baseline, target_bler)
    return CurveSummary(points=tuple(curve), target_bler=target_bler,
                        snr_at_target=s_at, snr_difference=diff,
                        undefined_reason=why or why2)


# --- CSV and metadata -----------------------------------------------------

CSV_FIELDS = ["method", "m_bits", "modulation", "code_rate", "tx_snr_db",
              "tb_total", "tb_errors", "bler", "ci_low", "ci_high"]


def csv_row(cfg: SimConfig, point: SimPoint) -> dict:
    return {
        "method": cfg.codec.method.value,
        "m_bits": cfg.codec.m_bits,
        "modulation": cfg.mcs.modulation.name,
        "code_rate": format(cfg.mcs.code_rate, ".10g"),
        "tx_snr_db": format(point.tx_snr_db, ".10g"),
        "tb_total": point.tb_total,
        "tb_errors": point.tb_errors,
        "bler": format(point.bler, ".10g"),
        "ci_low": format(point.ci_low, ".10g"),
        "ci_high": format(point.ci_high, ".10g"),
    }


def sweep_metadata(cfg: SimConfig) -> dict:
    ctx = _build_context(cfg)
    meta = {
        "mcs": {"modulation": cfg.mcs.modulation.name, "code_rate": cfg.mcs.code_rate,
                "n_prb": cfg.mcs.n_prb, "tbs": cfg.mcs.tbs},
        "codec": {"method": cfg.codec.method.value, "m_bits": cfg.codec.m_bits,
                  "lambda": cfg.codec.lam, "mu": cfg.codec.mu, "delta": cfg.codec.delta},
        "topology": vars(cfg.topology) | {},
        "master_seed": cfg.master_seed,
        "snr_points_db": list(cfg.snr_points_db),
        "n_tbs": cfg.n_tbs,
        "max_errors": cfg.max_errors,
        "ru_xy_m": ctx.ru_xy.tolist(),
        "ue_xy_m": ctx.ue_xy.tolist(),
        "interferer_xy_m": ctx.int_xy.tolist(),
        "beta_db": (10 * np.log10(ctx.large_scale.beta)).tolist(),
        "agc": "per-antenna slot peak normalization before the codec, inverted after",
        "demapper_noise": "thermal + inter-stream + measured Bussgang distortion, "
                          "per-antenna alpha applied to effective gains",
        "uniform_unit_delta": ctx.unit_delta,
    }
    return meta


# --- CLI -------------------------------------------------------------------

_FILE_MAGIC = b"FHC1"


def _cmd_load(args) -> int:
    print(wire.fronthaul_load(args.prb, args.symbols, args.antennas, args.bits))
    return 0


def _cmd_sqnr(args) -> int:
    method = CompressionMethod(args.method)
    cfg = CompressionConfig(method, m_bits=args.bits)
    rng = np.random.default_rng(args.seed)
    samples = (rng.standard_normal((args.blocks, 12)) + 1j * rng.standard_normal((args.blocks, 12))) / math.sqrt(2)
    if method is CompressionMethod.UNIFORM:
        cfg = replace(cfg, delta=comp.optimize_delta(args.bits, 1.0))
    cbs = comp.compress_blocks(samples, cfg)
    recon = comp.decompress_blocks(cbs)
    stats = comp.bussgang_estimate(samples.reshape(-1), recon.reshape(-1))
    print(f"sqnr_db={comp.sqnr(samples.reshape(-1), recon.reshape(-1)):.4f}")
    print(f"alpha={stats.alpha.real:.6f}{stats.alpha.imag:+.6f}j")
    print(f"distortion_power={stats.distortion_power:.6e}")
    print(f"cross_corr={stats.cross_corr:.6e}")
    return 0


def _read_iq_file(path: str) -> np.ndarray:
    raw = np.fromfile(path, dtype="<f4")
    if raw.size % 2:
        raise ValueError(f"{path}: odd float count, expected (re, im) pairs")
    return raw[0::2].astype(np.float64) + 1j * raw[1::2].astype(np.float64)


def _write_iq_file(path: str, samples: np.ndarray) -> None:
    out = np.empty(2 * samples.size, dtype="<f4")
    out[0::2] = samples.real
    out[1::2] = samples.imag
    out.tofile(path)


def _cmd_compress(args) -> int:
    method = CompressionMethod(args.method)
    cfg = CompressionConfig(method, m_bits=args.bits, delta=args.delta)
    samples = _read_iq_file(getattr(args, "in"))
    n_samples = samples.size
    pad = (-n_samples) % SAMPLES_PER_PRB
    padded = np.concatenate([samples, np.zeros(pad, dtype=np.complex128)])
    blocks = padded.reshape(-1, SAMPLES_PER_PRB)
    if method is CompressionMethod.UNIFORM and cfg.delta is None:
        power = float(np.mean(np.abs(samples) ** 2)) if n_samples else 1.0
        cfg = replace(cfg, delta=comp.optimize_delta(args.bits, max(power, 1e-30)))
    cbs = comp.compress_blocks(blocks, cfg)
    payload = wire.pack_blocks(cbs, prb_indices=np.arange(blocks.shape[0]) % 0x10000)
    header = _FILE_MAGIC + struct.pack("<BBBBIdd", 1, wire.METHOD_CODES[method],
                                       cfg.m_bits, 0, n_samples,
                                       cfg.delta or 0.0, cfg.mu)
    with open(args.out, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    print(f"{n_samples} samples -> {len(payload)} payload bytes ({blocks.shape[0]} PRBs)")
    return 0


def _cmd_decompress(args) -> int:
    with open(getattr(args, "in"), "rb") as fh:
        blob = fh.read()
    if blob[:4] != _FILE_MAGIC:
        raise ValueError("not an fhc compressed file")
    version, mcode, m_bits, _flags, n_samples, delta, mu = struct.unpack("<BBBBIdd", blob[4:28])
    if version != 1:
        raise ValueError(f"unsupported container version {version}")
    method = {v: k for k, v in wire.METHOD_CODES.items()}[mcode]
    payload = blob[28:]
    n_blocks = -(-n_samples // SAMPLES_PER_PRB)
    cbs, _ = wire.unpack_blocks(payload, method, m_bits, n_blocks,
                                delta=delta or None, mu=mu)
    samples = comp.decompress_blocks(cbs).reshape(-1)[:n_samples]
    _write_iq_file(args.out, samples)
    print(f"{n_samples} samples reconstructed")
    return 0


def _cmd_simulate(args) -> int:
    cfg = SimConfig.from_json(args.config)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if args.workers is not None:
        cfg = replace(cfg, n_workers=args.workers)
    out = args.out or cfg.out
    if not out:
        raise ValueError("no output path: pass --out or set 'out' in the config")

    with open(out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()

        def emit(cfg_, point):
            writer.writerow(csv_row(cfg_, point))
            fh.flush()

        def progress(point):
            print(f"snr={point.tx_snr_db:+.2f} dB  bler={point.bler:.4g} "
                  f"({point.tb_errors}/{point.tb_total})", file=sys.stderr, flush=True)

        run_sweep(cfg, csv_writer=emit, progress=progress)
    with open(out + ".meta.json", "w") as fh:
        json.dump(sweep_metadata(cfg), fh, indent=2)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fhc", description="Fronthaul IQ compression toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a BLER sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="CSV output path (overrides config)")
    p.add_argument("--seed", type=int, default=None, help="master seed override")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sqnr", help="SQNR and Bussgang stats on Gaussian blocks")
    p.add_argument("--method", required=True, choices=["bfp", "bs", "mulaw", "uniform"])
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--blocks", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_sqnr)

    p = sub.add_parser("compress", help="compress a raw IQ file (LE float32 re,im pairs)")
    p.add_argument("--in", required=True)
    p.add_argument("--method", required=True, choices=["bfp", "bs", "mulaw", "uniform"])
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--delta", type=float, default=None, help="uniform step (optimized if omitted)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_compress)

    p = sub.add_parser("decompress", help="reconstruct IQ samples from a compressed file")
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_decompress)

    p = sub.add_parser("load", help="fronthaul load in bits per slot")
    p.add_argument("--prb", type=int, required=True)
    p.add_argument("--symbols", type=int, required=True)
    p.add_argument("--antennas", type=int, required=True)
    p.add_argument("--bits", type=int, required=True)
    p.set_defaults(func=_cmd_load)
    return parser


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"fhc: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"fhc: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
