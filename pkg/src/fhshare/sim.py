"""Slot-level simulation of the hopping network.

Every user redraws its sub-band subset each slot; the simulator tallies,
per user, the number of interference-free sub-bands and the empirical
frequency of each interference level on the sub-bands the user occupies.
Those tallies are the ground truth the closed forms are checked against.

Sampling is reproducible: slots are processed in fixed-size blocks and
each (user, block) pair owns a generator seeded from (master_seed, user,
block), so results are identical for any worker count.
"""
from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .gains import sample_occupancy
from .model import (
    HoppingProfile,
    NetworkScenario,
    enumerate_interference_spectrum,
)

SLOT_BLOCK = 1 << 14

_DUMP_HEADER = struct.Struct("<QQ")


@dataclass(frozen=True)
class SimConfig:
    scenario: NetworkScenario
    profiles: tuple
    n_slots: int
    master_seed: int

    def __post_init__(self):
        object.__setattr__(self, "profiles", tuple(self.profiles))
        if len(self.profiles) != self.scenario.n_users:
            raise ValueError("one profile per user required")
        if self.n_slots < 1:
            raise ValueError("n_slots must be >= 1")


@dataclass(frozen=True, eq=False)
class SimStats:
    """Aggregates over all simulated slots.

    free_mean/free_se: per-user mean and standard error of the count of
    the user's own sub-bands with no interference in a slot.
    level_c/level_freq/level_se: per-user arrays aligned with the user's
    enumerated interference levels; frequencies are per-slot fractions of
    the user's occupied sub-bands, averaged over slots where the user
    occupied at least one sub-band (level_slots counts them).
    """

    n_slots: int
    free_mean: np.ndarray
    free_se: np.ndarray
    level_c: tuple
    level_freq: tuple
    level_se: tuple
    level_slots: np.ndarray


def _match_levels(c_sorted: np.ndarray, realized: np.ndarray) -> np.ndarray:
    """Indices of realized increments within the enumerated level grid."""
    idx = np.searchsorted(c_sorted, realized)
    idx = np.clip(idx, 0, len(c_sorted) - 1)
    left = np.clip(idx - 1, 0, len(c_sorted) - 1)
    use_left = np.abs(realized - c_sorted[left]) < np.abs(realized - c_sorted[idx])
    idx = np.where(use_left, left, idx)
    err = np.abs(realized - c_sorted[idx])
    tol = 1e-6 * np.maximum(np.abs(c_sorted[idx]), 1.0) + 1e-12
    if np.any(err > tol):
        raise RuntimeError("simulated interference level not in the enumerated grid")
    return idx


def _run_block(cfg: SimConfig, level_c: Sequence[np.ndarray], block: int, size: int):
    scenario = cfg.scenario
    n, u = scenario.n_users, scenario.n_subbands
    occ = []
    counts = []
    for k in range(n):
        rng = np.random.default_rng(
            np.random.SeedSequence(
                entropy=int(cfg.master_seed) & ((1 << 128) - 1),
                spawn_key=(k, block),
            )
        )
        o, c = sample_occupancy(cfg.profiles[k], u, rng, size)
        occ.append(o)
        counts.append(c)

    free_sum = np.zeros(n)
    free_sq = np.zeros(n)
    freq_sum = [np.zeros(len(level_c[i])) for i in range(n)]
    freq_sq = [np.zeros(len(level_c[i])) for i in range(n)]
    freq_slots = np.zeros(n, dtype=np.int64)

    for i in range(n):
        others = np.zeros((size, u), dtype=bool)
        c_real = np.zeros((size, u))
        for k in range(n):
            if k == i:
                continue
            others |= occ[k]
            amp = float(scenario.gains[k, i]) ** 2 / np.maximum(counts[k], 1)
            amp = np.where(counts[k] > 0, amp, 0.0)
            c_real += occ[k] * amp[:, None]
        free = (occ[i] & ~others).sum(axis=1).astype(float)
        free_sum[i] = free.sum()
        free_sq[i] = (free * free).sum()

        rows, cols = np.nonzero(occ[i])
        if rows.size:
            lvl = _match_levels(level_c[i], c_real[rows, cols])
            per_slot = np.zeros((size, len(level_c[i])))
            np.add.at(per_slot, (rows, lvl), 1.0)
            active = counts[i] > 0
            frac = per_slot[active] / counts[i][active, None]
            freq_sum[i] = frac.sum(axis=0)
            freq_sq[i] = (frac * frac).sum(axis=0)
            freq_slots[i] = int(active.sum())
    return free_sum, free_sq, freq_sum, freq_sq, freq_slots


def run(cfg: SimConfig, threads: int = 1) -> SimStats:
    """Simulate cfg.n_slots slots and aggregate the tallies."""
    n = cfg.scenario.n_users
    spectra = [
        enumerate_interference_spectrum(cfg.scenario, cfg.profiles, i) for i in range(n)
    ]
    level_c = [s.c_values for s in spectra]

    blocks = []
    start = 0
    b = 0
    while start < cfg.n_slots:
        size = min(SLOT_BLOCK, cfg.n_slots - start)
        blocks.append((b, size))
        start += size
        b += 1

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda a: _run_block(cfg, level_c, *a), blocks))
    else:
        parts = [_run_block(cfg, level_c, *a) for a in blocks]

    free_sum = np.zeros(n)
    free_sq = np.zeros(n)
    freq_sum = [np.zeros(len(level_c[i])) for i in range(n)]
    freq_sq = [np.zeros(len(level_c[i])) for i in range(n)]
    freq_slots = np.zeros(n, dtype=np.int64)
    for fs, f2, qs, q2, qn in parts:
        free_sum += fs
        free_sq += f2
        for i in range(n):
            freq_sum[i] += qs[i]
            freq_sq[i] += q2[i]
        freq_slots += qn

    slots = cfg.n_slots
    free_mean = free_sum / slots
    free_var = np.maximum((free_sq - slots * free_mean**2) / max(slots - 1, 1), 0.0)
    free_se = np.sqrt(free_var / slots)

    freq_mean = []
    freq_se = []
    for i in range(n):
        m = freq_slots[i]
        if m > 0:
            mean = freq_sum[i] / m
            var = np.maximum((freq_sq[i] - m * mean**2) / max(m - 1, 1), 0.0)
            se = np.sqrt(var / m)
        else:
            mean = np.full(len(level_c[i]), np.nan)
            se = np.full(len(level_c[i]), np.nan)
        freq_mean.append(mean)
        freq_se.append(se)

    return SimStats(
        n_slots=slots,
        free_mean=free_mean,
        free_se=free_se,
        level_c=tuple(level_c),
        level_freq=tuple(freq_mean),
        level_se=tuple(freq_se),
        level_slots=freq_slots,
    )


def sample_received(
    scenario: NetworkScenario,
    profiles: Sequence[HoppingProfile],
    user: int,
    n_samples: int,
    seed: int,
    threads: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """Draw received-signal samples for one user's fixed state.

    The user transmits on its first v sub-bands; interferers hop. Returns
    (y, z), both (n_samples, u): z is interference plus noise, y adds the
    user's own signal. Rows are independent slots.
    """
    if not profiles[user].is_fixed:
        raise ValueError("sample_received requires a fixed hop count for the user")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    n, u = scenario.n_users, scenario.n_subbands
    v = profiles[user].fixed_v
    power = scenario.total_power
    sigma = float(np.sqrt(scenario.noise_power))

    blocks = []
    start = 0
    b = 0
    while start < n_samples:
        size = min(SLOT_BLOCK, n_samples - start)
        blocks.append((b, size))
        start += size
        b += 1

    def one(args):
        block, size = args
        rng = np.random.default_rng(
            np.random.SeedSequence(
                entropy=int(seed) & ((1 << 128) - 1), spawn_key=(block,)
            )
        )
        z = rng.standard_normal((size, u)) * sigma
        for k in range(n):
            if k == user:
                continue
            occ, counts = sample_occupancy(profiles[k], u, rng, size)
            std = np.where(counts > 0, np.sqrt(power / np.maximum(counts, 1)), 0.0)
            x = rng.standard_normal((size, u)) * std[:, None]
            z += occ * (float(scenario.gains[k, user]) * x)
        y = z.copy()
        if v > 0:
            own = rng.standard_normal((size, v)) * np.sqrt(power / v)
            y[:, :v] += float(scenario.gains[user, user]) * own
        return y, z

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, blocks))
    else:
        parts = [one(a) for a in blocks]
    y = np.concatenate([p[0] for p in parts], axis=0)
    z = np.concatenate([p[1] for p in parts], axis=0)
    return y, z


def write_sample_dump(path, samples: np.ndarray) -> None:
    """Binary columnar dump: header (u, n_samples) as little-endian
    uint64, then row-major little-endian float64 payload."""
    arr = np.ascontiguousarray(np.asarray(samples, dtype="<f8"))
    if arr.ndim != 2:
        raise ValueError("samples must be 2-D (n_samples, u)")
    with open(path, "wb") as fh:
        fh.write(_DUMP_HEADER.pack(arr.shape[1], arr.shape[0]))
        fh.write(arr.tobytes(order="C"))


def read_sample_dump(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(_DUMP_HEADER.size)
        if len(head) != _DUMP_HEADER.size:
            raise ValueError("truncated dump header")
        u, n = _DUMP_HEADER.unpack(head)
        payload = fh.read()
    expect = u * n * 8
    if len(payload) != expect:
        raise ValueError(f"dump payload has {len(payload)} bytes, expected {expect}")
    return np.frombuffer(payload, dtype="<f8").reshape(n, u).copy()
