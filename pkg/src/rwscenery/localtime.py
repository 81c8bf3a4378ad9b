"""Exact combinatorial counts over a walk path.

All quantities here are integers computed exactly from local-time tables:

* w(omega, J, l)           -- visits to site l during the index window J
* V(omega, I, J, p)        -- pairs (u, v) in I x J with Z_u - Z_v = p
* V_n(omega, p)            -- self-intersections at displacement p
* W_n(omega, l1, l2, l3)   -- quadruples with prescribed mutual displacements,
                              via the product formula
                              sum_x w(x) w(x+l1) w(x+l2) w(x+l3)
                              (the four indices range independently over the
                              window, so the factorization is exact)

Tables are keyed by packed integer coordinates for d <= 3 and by tuples
otherwise.  Counts are 64-bit with explicit overflow guards (n <= 2^31).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import math

import numpy as np

from .walk import WalkPath

_PACK_BITS = {1: (62,), 2: (31, 31), 3: (20, 20, 20)}


def _pack_shift_ok(points: np.ndarray, d: int) -> bool:
    if d not in _PACK_BITS:
        return False
    bits = _PACK_BITS[d]
    if points.size == 0:
        return True
    lim = np.array([2**b - 1 for b in bits], dtype=np.int64)
    return bool(np.all(np.abs(points) < lim))


def pack_sites(points: np.ndarray, d: int) -> np.ndarray:
    """Pack (m, d) integer coordinates into uint64 keys, order-preserving per field."""
    bits = _PACK_BITS[d]
    keys = np.zeros(points.shape[0], dtype=np.uint64)
    shift = 0
    for j in range(d - 1, -1, -1):
        field = (points[:, j].astype(np.int64) + (1 << bits[j])).astype(np.uint64)
        keys |= field << np.uint64(shift)
        shift += bits[j] + 1
    return keys


@dataclass
class LocalTimeTable:
    """Visit counts of a path over an index window [start, stop)."""

    window: tuple
    dimension: int
    sites: np.ndarray   # (m, d) int64
    counts: np.ndarray  # (m,) int64
    keys: Optional[np.ndarray] = None  # sorted uint64 packed keys, None for d > 3

    def __post_init__(self):
        if self.keys is None and _pack_shift_ok(self.sites, self.dimension):
            self.keys = pack_sites(self.sites, self.dimension)

    def __len__(self) -> int:
        return len(self.counts)

    def total(self) -> int:
        return int(self.counts.sum())

    def get(self, site) -> int:
        site = np.asarray(site, dtype=np.int64).reshape(1, self.dimension)
        found = self.lookup(site)
        return int(found[0])

    def lookup(self, points: np.ndarray) -> np.ndarray:
        """Counts at each of the given points (0 where unvisited)."""
        points = np.asarray(points, dtype=np.int64).reshape(-1, self.dimension)
        if self.keys is not None and _pack_shift_ok(points, self.dimension):
            wanted = pack_sites(points, self.dimension)
            pos = np.searchsorted(self.keys, wanted)
            pos = np.minimum(pos, len(self.keys) - 1) if len(self.keys) else pos
            out = np.zeros(len(points), dtype=np.int64)
            if len(self.keys):
                hit = self.keys[pos] == wanted
                out[hit] = self.counts[pos[hit]]
            return out
        table = {tuple(s): int(c) for s, c in zip(self.sites, self.counts)}
        return np.array([table.get(tuple(p), 0) for p in points], dtype=np.int64)

    def as_dict(self) -> dict:
        return {tuple(int(c) for c in s): int(c2) for s, c2 in zip(self.sites, self.counts)}

    def to_csv(self) -> str:
        headers = {1: "site_x", 2: "site_x,site_y", 3: "site_x,site_y,site_z"}
        header = headers.get(self.dimension,
                             ",".join(f"site_{i}" for i in range(self.dimension)))
        lines = [header + ",count"]
        for s, c in zip(self.sites, self.counts):
            lines.append(",".join(str(int(v)) for v in s) + f",{int(c)}")
        return "\n".join(lines) + "\n"


def local_times(path: WalkPath, window) -> LocalTimeTable:
    """Local-time table w(omega, [start, stop), .) in linear time."""
    start, stop = int(window[0]), int(window[1])
    pos = path.window_positions(start, stop)
    d = path.model.dimension
    if pos.shape[0] == 0:
        return LocalTimeTable((start, stop), d,
                              np.zeros((0, d), dtype=np.int64),
                              np.zeros(0, dtype=np.int64))
    if _pack_shift_ok(pos, d):
        keys = pack_sites(pos, d)
        uniq, first, counts = np.unique(keys, return_index=True, return_counts=True)
        return LocalTimeTable((start, stop), d, pos[first].copy(),
                              counts.astype(np.int64), keys=uniq)
    table = {}
    for p in map(tuple, pos):
        table[p] = table.get(p, 0) + 1
    items = sorted(table.items())
    sites = np.array([s for s, _ in items], dtype=np.int64).reshape(len(items), d)
    counts = np.array([c for _, c in items], dtype=np.int64)
    return LocalTimeTable((start, stop), d, sites, counts)


def pair_count_tables(tab_i: LocalTimeTable, tab_j: LocalTimeTable, p) -> int:
    """V = sum_x w_I(x) w_J(x - p), iterating over the smaller table."""
    p = np.asarray(p, dtype=np.int64)
    if len(tab_i) <= len(tab_j):
        other = tab_j.lookup(tab_i.sites - p)
        return int(np.dot(tab_i.counts, other))
    other = tab_i.lookup(tab_j.sites + p)
    return int(np.dot(tab_j.counts, other))


def pair_count(path: WalkPath, window_i, window_j, p) -> int:
    """V(omega, I, J, p) = #{(u, v) in I x J : Z_u - Z_v = p}."""
    tab_i = local_times(path, window_i)
    tab_j = local_times(path, window_j)
    return pair_count_tables(tab_i, tab_j, p)


def self_intersections(path: WalkPath, n_prefix: int, p=None) -> int:
    """V_n(omega, p) over the prefix window [0, n_prefix); p defaults to 0."""
    if p is None:
        p = (0,) * path.model.dimension
    tab = local_times(path, (0, n_prefix))
    if not np.any(np.asarray(p)):
        return int(np.dot(tab.counts, tab.counts))
    return pair_count_tables(tab, tab, p)


def quadruple_count(path: WalkPath, n_prefix: int, ells) -> int:
    """W_n = sum_x w(x) w(x+l1) w(x+l2) w(x+l3) over the prefix table."""
    if len(ells) != 3:
        raise ValueError("quadruple_count expects three displacement vectors")
    tab = local_times(path, (0, n_prefix))
    if len(tab) == 0:
        return 0
    factors = [tab.counts]
    for ell in ells:
        ell = np.asarray(ell, dtype=np.int64)
        factors.append(tab.lookup(tab.sites + ell))
    max_count = max(int(f.max(initial=0)) for f in factors)
    if max_count < 2**15:  # product of four fits int64
        prod = factors[0] * factors[1] * factors[2] * factors[3]
        return int(prod.sum())
    return sum(int(a) * int(b) * int(c) * int(e)
               for a, b, c, e in zip(*factors))


def max_local_time(path: WalkPath, n_prefix: int) -> int:
    """sup_l w_n(omega, l) over the prefix window."""
    tab = local_times(path, (0, n_prefix))
    return int(tab.counts.max(initial=0))


def erdos_taylor_ratio(path: WalkPath, n_prefix: int) -> float:
    """sup_l w_n / (log n)^2; the planar limit of this ratio is 1/pi."""
    if n_prefix < 2:
        raise ValueError("need n_prefix >= 2")
    return max_local_time(path, n_prefix) / math.log(n_prefix) ** 2
