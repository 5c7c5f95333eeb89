"""The lattice hash family, Voronoi-cell sampling, Monte Carlo collision
curves, and LSH exponent estimation.

A hash draw is a Gaussian projection M (entries N(0, 1/k)) composed with
a randomly shifted CVP decode: h(a) = CV_L(M a + t).  The collision
probability of a pair at distance D equals the probability that a
uniform point of the Voronoi cell survives an N(0, D^2/k I_k)
perturbation, which is what estimate_p samples: exactly two decoder
calls per trial.
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm

from .cvp import Decoder, EnumDecoder
from .errors import EstimationError, InsufficientDataError, InvalidArgumentError
from .lattice import Lattice, sample_fundamental
from .stats import Estimate, as_stream, iter_blocks, normal_boxmuller


@dataclass(frozen=True)
class HashFunction:
    """One draw from the hash family: h(a) = CV_L(M a + t)."""

    m_proj: np.ndarray  # k x d, entries N(0, 1/k)
    shift: np.ndarray  # uniform over a fundamental domain
    lattice: Lattice
    decoder: Decoder

    @property
    def d(self) -> int:
        return self.m_proj.shape[1]


def draw_hash(lattice: Lattice, decoder: Decoder, d: int, rng: np.random.Generator) -> HashFunction:
    k = lattice.k
    m_proj = normal_boxmuller(rng, (k, d)) / math.sqrt(k)
    shift = sample_fundamental(lattice, rng)
    return HashFunction(m_proj=m_proj, shift=shift, lattice=lattice, decoder=decoder)


def hash_point(h: HashFunction, a: np.ndarray) -> tuple:
    """Exact integer hash key of a point."""
    a = np.asarray(a, dtype=float)
    if a.shape[-1] != h.d:
        raise InvalidArgumentError(f"point dimension {a.shape[-1]} != hash dimension {h.d}")
    result = h.decoder.decode(h.m_proj @ a + h.shift)
    return tuple(int(z) for z in result.coeffs)


def hash_batch(h: HashFunction, points: np.ndarray) -> list[tuple]:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    coeffs, status = h.decoder.decode_batch(points @ h.m_proj.T + h.shift)
    if np.any(status != 0):
        raise EstimationError("decoder budget exceeded while hashing")
    return [tuple(int(z) for z in row) for row in coeffs]


def sample_voronoi(lattice: Lattice, rng: np.random.Generator, decoder: Decoder | None = None) -> np.ndarray:
    """Uniform point of the Voronoi cell: recenter a fundamental-domain
    sample by its closest lattice vector.  One decoder call."""
    decoder = decoder if decoder is not None else EnumDecoder(lattice)
    u = sample_fundamental(lattice, rng)
    res = decoder.decode(u)
    return u - res.vector


# ---------------------------------------------------------------------------
# Collision probability estimation

def _p_block(lattice: Lattice, decoder: Decoder, delta: float, stream, block_index: int, size: int):
    rng = stream.block_generator(block_index)
    k = lattice.k
    u = rng.random((size, k)) @ lattice.basis.columns.T
    z1, st1 = decoder.decode_batch(u)
    x = u - decoder.vectors_for(z1)
    if delta > 0.0:
        x = x + normal_boxmuller(rng, (size, k)) * (delta / math.sqrt(k))
    z2, st2 = decoder.decode_batch(x)
    bad = (st1 != 0) | (st2 != 0)
    good = ~bad
    successes = int(np.count_nonzero(np.all(z2 == 0, axis=1) & good))
    return successes, int(np.count_nonzero(bad))


def estimate_p(
    lattice: Lattice,
    delta: float,
    trials: int,
    seed_or_stream,
    decoder: Decoder | None = None,
    workers: int = 1,
) -> Estimate:
    """Monte Carlo estimate of the collision probability at distance delta.

    Samples x uniform in the Voronoi cell and y ~ N(0, delta^2/k I_k);
    success iff x + y decodes back to the zero coefficient vector.
    Wilson 95% interval; decoder budget failures are counted and the
    estimate fails if they exceed 0.1% of trials.
    """
    if trials < 100:
        raise InvalidArgumentError(f"trials must be >= 100, got {trials}")
    if delta < 0:
        raise InvalidArgumentError(f"delta must be nonnegative, got {delta}")
    decoder = decoder if decoder is not None else EnumDecoder(lattice)
    stream = as_stream(seed_or_stream).child("p", _delta_label(delta))
    blocks = list(iter_blocks(trials))
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(lambda ib: _p_block(lattice, decoder, delta, stream, *ib), blocks)
            )
    else:
        results = [_p_block(lattice, decoder, delta, stream, i, b) for i, b in blocks]
    successes = sum(r[0] for r in results)
    failures = sum(r[1] for r in results)
    if failures > 0.001 * trials:
        raise EstimationError(f"{failures}/{trials} trials hit the decoder budget")
    clean = trials - failures
    return Estimate.from_counts(successes, clean, failures)


def _delta_label(delta: float) -> int:
    # Stable integer label for substream derivation.
    return int(np.float64(delta).view(np.int64))


@dataclass(frozen=True)
class CollisionCurve:
    """Estimated collision probabilities over an increasing delta grid."""

    deltas: np.ndarray
    p_hat: np.ndarray
    ci_half: np.ndarray
    trials: int
    k: int
    lattice_id: str = ""

    def __post_init__(self):
        deltas = np.asarray(self.deltas, dtype=float)
        p_hat = np.asarray(self.p_hat, dtype=float)
        ci_half = np.asarray(self.ci_half, dtype=float)
        if not (len(deltas) == len(p_hat) == len(ci_half)):
            raise InvalidArgumentError("curve arrays must share length")
        if np.any(np.diff(deltas) <= 0):
            raise InvalidArgumentError("delta grid must be strictly increasing")
        if np.any(deltas <= 0):
            raise InvalidArgumentError("deltas must be positive")
        object.__setattr__(self, "deltas", deltas)
        object.__setattr__(self, "p_hat", p_hat)
        object.__setattr__(self, "ci_half", ci_half)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("delta,p_hat,ci_half,trials\n")
            for d, p, ci in zip(self.deltas, self.p_hat, self.ci_half):
                fh.write(f"{d:.17g},{p:.17g},{ci:.17g},{self.trials}\n")

    @classmethod
    def from_csv(cls, path, k: int = 0, lattice_id: str = "") -> "CollisionCurve":
        rows = []
        with open(path) as fh:
            header = fh.readline().strip()
            if header != "delta,p_hat,ci_half,trials":
                raise InvalidArgumentError(f"{path}: unexpected curve header {header!r}")
            for line in fh:
                if line.strip():
                    rows.append(line.strip().split(","))
        deltas = np.array([float(r[0]) for r in rows])
        p_hat = np.array([float(r[1]) for r in rows])
        ci = np.array([float(r[2]) for r in rows])
        trials = int(rows[0][3]) if rows else 0
        return cls(deltas=deltas, p_hat=p_hat, ci_half=ci, trials=trials, k=k, lattice_id=lattice_id)


def default_delta_grid(k: int, c: float, points: int = 17) -> np.ndarray:
    """Geometric grid around the k^(1/4) operating point, spanning
    [k^(1/4)/4, 4 c k^(1/4)]."""
    center = k**0.25
    return np.geomspace(0.25 * center, 4.0 * c * center, points)


def estimate_curve(
    lattice: Lattice,
    grid: np.ndarray,
    trials: int,
    seed_or_stream,
    decoder: Decoder | None = None,
    workers: int = 1,
    lattice_id: str = "",
) -> CollisionCurve:
    """estimate_p at every grid point with a shared trial budget.

    The budget is split evenly: each of the g grid points gets
    trials // g trials (must come out >= 100).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise InvalidArgumentError("grid must be a nonempty 1-D array")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise InvalidArgumentError("grid must be positive and strictly increasing")
    per_point = trials // len(grid)
    if per_point < 100:
        raise InvalidArgumentError(
            f"budget {trials} over {len(grid)} grid points leaves {per_point} < 100 trials each"
        )
    stream = as_stream(seed_or_stream).child("curve")
    p_hat = np.empty(len(grid))
    ci = np.empty(len(grid))
    for i, delta in enumerate(grid):
        est = estimate_p(lattice, float(delta), per_point, stream.child(i), decoder, workers)
        p_hat[i] = est.p_hat
        ci[i] = est.ci_half
    return CollisionCurve(
        deltas=grid, p_hat=p_hat, ci_half=ci, trials=per_point, k=lattice.k, lattice_id=lattice_id
    )


# ---------------------------------------------------------------------------
# LSH exponent

@dataclass(frozen=True)
class RhoEstimate:
    """min over usable grid deltas of ln(1/p_D) / ln(1/p_{cD})."""

    rho: float
    argmin_delta: float
    c: float
    curve: CollisionCurve


def interp_log_p(curve: CollisionCurve, delta: float) -> float | None:
    """Log-linear interpolation of ln p_hat in ln delta.

    Returns None when delta falls outside the grid or either bracketing
    estimate is degenerate (exactly 0 or 1).
    """
    deltas, p = curve.deltas, curve.p_hat
    if delta < deltas[0] * (1 - 1e-12) or delta > deltas[-1] * (1 + 1e-12):
        return None
    j = int(np.searchsorted(deltas, delta))
    if j < len(deltas) and abs(deltas[j] - delta) <= 1e-12 * delta:
        return math.log(p[j]) if 0.0 < p[j] < 1.0 else None
    if j == 0 or j == len(deltas):
        return None
    lo, hi = j - 1, j
    if not (0.0 < p[lo] < 1.0 and 0.0 < p[hi] < 1.0):
        return None
    t = (math.log(delta) - math.log(deltas[lo])) / (math.log(deltas[hi]) - math.log(deltas[lo]))
    return (1.0 - t) * math.log(p[lo]) + t * math.log(p[hi])


def estimate_rho(curve: CollisionCurve, c: float) -> RhoEstimate:
    """Minimize ln(1/p_D)/ln(1/p_{cD}) over the usable grid points.

    Degenerate estimates (p_hat exactly 0 or 1) are excluded rather than
    clamped; cD values are log-linearly interpolated on the grid.
    """
    if c < 1.0:
        raise InvalidArgumentError(f"c must be >= 1, got {c}")
    best = None
    for i, delta in enumerate(curve.deltas):
        p = curve.p_hat[i]
        if not 0.0 < p < 1.0:
            continue
        log_pc = interp_log_p(curve, c * delta)
        if log_pc is None or log_pc >= 0.0:
            continue
        ratio = math.log(p) / log_pc if c > 1.0 else 1.0
        if best is None or ratio < best[0]:
            best = (ratio, float(delta))
    if best is None:
        raise InsufficientDataError(
            "no usable grid point: estimates degenerate or c*delta out of range"
        )
    return RhoEstimate(rho=best[0], argmin_delta=best[1], c=c, curve=curve)


# ---------------------------------------------------------------------------
# Closed-form Z^k collision curve (independent quadrature oracle)

def zk_collision_probability(k: int, delta: float) -> float:
    """Exact collision probability for the integer lattice Z^k.

    Per coordinate the cell is [-1/2, 1/2] and the perturbation is
    N(0, delta^2/k), so p = p1(delta/sqrt(k))^k with p1 the 1-D survival
    probability computed by quadrature.
    """
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    if delta < 0:
        raise InvalidArgumentError(f"delta must be nonnegative, got {delta}")
    if delta == 0.0:
        return 1.0
    sigma = delta / math.sqrt(k)

    def survive(u):
        return norm.cdf((0.5 - u) / sigma) - norm.cdf((-0.5 - u) / sigma)

    p1, _ = quad(survive, -0.5, 0.5, epsabs=1e-14, epsrel=1e-13, limit=200)
    return float(p1) ** k


def zk_collision_curve(k: int, grid: np.ndarray) -> CollisionCurve:
    grid = np.asarray(grid, dtype=float)
    p = np.array([zk_collision_probability(k, d) for d in grid])
    return CollisionCurve(
        deltas=grid, p_hat=p, ci_half=np.zeros_like(p), trials=0, k=k, lattice_id=f"zk:{k}(oracle)"
    )
