"""End-to-end (c, r)-approximate nearest neighbor search built on the
lattice hash family: multi-table index with m-fold concatenated hashes,
plus the planted-neighbor benchmark generator and its file formats.

Distance threshold r is fixed to 1 by rescaling the data; the index
stores a scale factor that places the operating distance at the chosen
point of the collision curve.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from .cvp import Decoder, EnumDecoder
from .errors import BuildError, GenerationError, InvalidArgumentError
from .lattice import Lattice
from .lshcore import draw_hash
from .stats import as_stream, normal_boxmuller


def plan_params(n: int, c: float, p1: float, p2: float):
    """Classic LSH parameter plan.

    rho = ln(1/p1)/ln(1/p2), m = ceil(log_{1/p2} n) hashes per table,
    tables = ceil(n^rho).
    """
    if not (0.0 < p2 < p1 < 1.0):
        raise InvalidArgumentError(
            f"need 0 < p2 < p1 < 1 (not locality-sensitive), got p1={p1}, p2={p2}"
        )
    if n < 1:
        raise InvalidArgumentError(f"n must be positive, got {n}")
    rho = math.log(1.0 / p1) / math.log(1.0 / p2)
    m = math.ceil(math.log(n) / math.log(1.0 / p2)) if n > 1 else 1
    tables = math.ceil(n**rho)
    return m, tables, rho


@dataclass(frozen=True)
class AnnConfig:
    n: int
    d: int
    c: float
    k: int
    m: int
    tables: int
    seed: int
    r: float = 1.0

    def __post_init__(self):
        if self.m < 1 or self.tables < 1:
            raise InvalidArgumentError("m and tables must be >= 1")
        if self.c <= 1.0:
            raise InvalidArgumentError(f"approximation factor must exceed 1, got {self.c}")


class AnnIndex:
    """tables x m hash draws over a shared lattice, with exact integer
    bucket keys.  Read-only after build; safe for concurrent queries."""

    def __init__(self, config: AnnConfig, lattice: Lattice, decoder: Decoder,
                 hash_bank: list, buckets: list, points: np.ndarray, scale: float):
        self.config = config
        self.lattice = lattice
        self.decoder = decoder
        self.hash_bank = hash_bank  # tables x m HashFunction
        self.buckets = buckets  # per table: dict key -> list of point ids
        self.points = points
        self.scale = scale

    def key_for(self, table: int, q: np.ndarray) -> tuple:
        parts = []
        for h in self.hash_bank[table]:
            res = h.decoder.decode(h.m_proj @ (self.scale * q) + h.shift)
            parts.extend(int(z) for z in res.coeffs)
        return tuple(parts)


def build(config: AnnConfig, points: np.ndarray, lattice: Lattice,
          decoder: Decoder | None = None, scale: float = 1.0) -> AnnIndex:
    """Hash every point into every table under its concatenated key.

    `scale` maps data space onto the collision curve's operating point:
    hashing uses scale * point.  Randomness derives from config.seed.
    """
    points = np.ascontiguousarray(np.asarray(points, dtype=float))
    if points.ndim != 2 or points.shape != (config.n, config.d):
        raise InvalidArgumentError(f"points must be {config.n} x {config.d}")
    if not np.all(np.isfinite(points)):
        bad = int(np.nonzero(~np.isfinite(points).all(axis=1))[0][0])
        raise BuildError("points contain non-finite values", point_id=bad)
    decoder = decoder if decoder is not None else EnumDecoder(lattice)
    stream = as_stream(config.seed).child("ann-build")
    hash_bank = []
    for t in range(config.tables):
        row = [draw_hash(lattice, decoder, config.d, stream.generator(t, j))
               for j in range(config.m)]
        hash_bank.append(row)
    scaled = points * scale
    buckets = []
    for t in range(config.tables):
        keys_per_hash = []
        for h in hash_bank[t]:
            coeffs, status = decoder.decode_batch(scaled @ h.m_proj.T + h.shift)
            if np.any(status != 0):
                raise BuildError(
                    "decoder budget exceeded while hashing",
                    point_id=int(np.nonzero(status != 0)[0][0]),
                )
            keys_per_hash.append(coeffs)
        concat = np.concatenate(keys_per_hash, axis=1)
        table: dict = {}
        for pid in range(config.n):
            key = tuple(int(v) for v in concat[pid])
            table.setdefault(key, []).append(pid)
        buckets.append(table)
    return AnnIndex(config, lattice, decoder, hash_bank, buckets, points, scale)


def query(index: AnnIndex, q: np.ndarray, budget: int | None = None):
    """Probe the query's bucket in each table; return the id of the first
    candidate within c*r (None if no examined candidate qualifies).

    Examines at most `budget` distinct candidates (default 3 * tables).
    """
    q = np.asarray(q, dtype=float)
    if not np.all(np.isfinite(q)):
        raise InvalidArgumentError("query must be finite")
    cfg = index.config
    if budget is None:
        budget = 3 * cfg.tables
    threshold = cfg.c * cfg.r
    seen = set()
    best_id, best_dist = None, math.inf
    examined = 0
    for t in range(cfg.tables):
        key = index.key_for(t, q)
        for pid in index.buckets[t].get(key, ()):
            if pid in seen:
                continue
            seen.add(pid)
            examined += 1
            dist = float(np.linalg.norm(index.points[pid] - q))
            if dist <= threshold:
                return pid
            if dist < best_dist:
                best_id, best_dist = pid, dist
            if examined >= budget:
                return best_id if best_dist <= threshold else None
    return best_id if best_dist <= threshold else None


# ---------------------------------------------------------------------------
# Planted-neighbor benchmark

@dataclass(frozen=True)
class PlantedDataset:
    points: np.ndarray  # n x d, background then planted
    queries: np.ndarray  # q x d
    planted_ids: np.ndarray  # q, planted_ids[j] is the neighbor of query j
    inputs: dict = field(default_factory=dict)


def gen_planted(n: int, d: int, c: float, queries: int, seed_or_stream) -> PlantedDataset:
    """Random background plus one planted neighbor at distance exactly 1
    per query; everything else concentrates beyond c*r.

    Background and queries are standard normal in R^d, where pairwise
    distances concentrate around sqrt(2d) >> c; a feasibility bound on the
    collision probability rejects configurations that cannot separate.
    """
    if d < 8:
        raise InvalidArgumentError(f"d must be >= 8, got {d}")
    if queries < 0 or n <= queries:
        raise InvalidArgumentError(f"need 0 <= queries < n, got queries={queries}, n={n}")
    # P(|x - q| <= c) for independent standard normals is P(chi2_d <= c^2/2).
    p_violate = float(chi2.cdf(c * c / 2.0, d))
    expected_violations = (n - queries) * max(queries, 1) * p_violate
    if expected_violations > 0.01:
        raise GenerationError(
            f"cannot separate: expected {expected_violations:.2g} background points within "
            f"c*r of a query at n={n}, d={d}, c={c} (increase d or decrease n)"
        )
    stream = as_stream(seed_or_stream).child("planted")
    rng = stream.generator("data")
    n_background = n - queries
    background = normal_boxmuller(rng, (n_background, d))
    qpts = normal_boxmuller(rng, (queries, d)) if queries else np.zeros((0, d))
    dirs = normal_boxmuller(rng, (queries, d)) if queries else np.zeros((0, d))
    if queries:
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    planted = qpts + dirs
    points = np.concatenate([background, planted], axis=0)
    planted_ids = np.arange(n_background, n, dtype=np.int64)
    return PlantedDataset(
        points=points,
        queries=qpts,
        planted_ids=planted_ids,
        inputs={"n": n, "d": d, "c": c, "queries": queries, "seed": as_stream(seed_or_stream).seed},
    )


# ---------------------------------------------------------------------------
# File formats

_MAGIC = b"LLSH"


def save_dataset(points: np.ndarray, path):
    """Binary point file: magic 'LLSH', u32 n, u32 d, then n*d little-endian
    float64, row-major."""
    points = np.ascontiguousarray(np.asarray(points, dtype="<f8"))
    n, d = points.shape
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", n, d))
        fh.write(points.tobytes())


def load_dataset(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise InvalidArgumentError(f"{path}: bad magic {magic!r}")
        n, d = struct.unpack("<II", fh.read(8))
        data = np.frombuffer(fh.read(8 * n * d), dtype="<f8")
        if data.size != n * d:
            raise InvalidArgumentError(f"{path}: truncated dataset")
    return data.reshape(n, d).astype(float)


def save_ground_truth(planted_ids: np.ndarray, path):
    with open(path, "w") as fh:
        fh.write("query_id,planted_id\n")
        for qid, pid in enumerate(planted_ids):
            fh.write(f"{qid},{int(pid)}\n")


def load_ground_truth(path) -> np.ndarray:
    ids = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "query_id,planted_id":
            raise InvalidArgumentError(f"{path}: unexpected header {header!r}")
        for line in fh:
            if line.strip():
                qid, pid = line.strip().split(",")
                ids.append((int(qid), int(pid)))
    ids.sort()
    return np.array([pid for _, pid in ids], dtype=np.int64)
