"""Reproducible random streams and Monte Carlo bookkeeping.

Trial-indexed substreams: every estimator processes trials in fixed-size
blocks, and the generator for block ``i`` depends only on (seed, label
path, i).  Totals are commutative sums over blocks, so results are
byte-identical for a given seed regardless of how blocks are scheduled
across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Trials per substream block.  Part of the reproducibility contract:
# changing it changes which substream a trial draws from.
BLOCK_SIZE = 4096

# Two-sided 95% normal quantile, used for every Wilson interval.
Z95 = 1.959963984540054


class RandomStream:
    """A named, splittable random stream rooted at a 64-bit seed.

    Children are addressed by hashable integer/string labels; the same
    (seed, path) always yields the same generator state.
    """

    def __init__(self, seed, path=()):
        self.seed = int(seed)
        self.path = tuple(path)

    def child(self, *labels) -> "RandomStream":
        return RandomStream(self.seed, self.path + labels)

    def generator(self, *labels) -> np.random.Generator:
        """Fresh numpy Generator for this stream extended by ``labels``."""
        entropy = [self.seed & 0xFFFFFFFFFFFFFFFF]
        for lab in self.path + labels:
            if isinstance(lab, str):
                entropy.extend(lab.encode("utf-8"))
            else:
                entropy.append(int(lab) & 0xFFFFFFFFFFFFFFFF)
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))

    def block_generator(self, block_index: int) -> np.random.Generator:
        return self.generator("block", block_index)

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, path={self.path})"


def as_stream(seed_or_stream) -> RandomStream:
    if isinstance(seed_or_stream, RandomStream):
        return seed_or_stream
    return RandomStream(int(seed_or_stream))


def normal_boxmuller(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normal draws via Box-Muller over rng.random() uniforms.

    Pinned transform (instead of the generator's native ziggurat) so that
    Gaussian streams are reproducible from the documented uniform stream.
    """
    shape = (size,) if np.isscalar(size) else tuple(size)
    n = int(np.prod(shape))
    half = (n + 1) // 2
    u1 = rng.random(half)
    u2 = rng.random(half)
    # 1 - u1 lies in (0, 1], so the log is finite.
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    theta = 2.0 * np.pi * u2
    z = np.concatenate([radius * np.cos(theta), radius * np.sin(theta)])[:n]
    return z.reshape(shape)


def wilson_halfwidth(successes: int, trials: int, z: float = Z95) -> float:
    """Half-width of the Wilson score interval at confidence z."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    denom = 1.0 + z * z / trials
    half = (z / denom) * np.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials))
    return float(half)


def wilson_interval(successes: int, trials: int, z: float = Z95):
    """Wilson score interval (lo, hi), clipped to [0, 1]."""
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = wilson_halfwidth(successes, trials, z)
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo probability estimate with a 95% Wilson half-width."""

    p_hat: float
    ci_half: float
    trials: int
    successes: int
    failures: int = 0

    @classmethod
    def from_counts(cls, successes: int, trials: int, failures: int = 0) -> "Estimate":
        return cls(
            p_hat=successes / trials,
            ci_half=wilson_halfwidth(successes, trials),
            trials=trials,
            successes=successes,
            failures=failures,
        )

    def to_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "ci_half": self.ci_half,
            "trials": self.trials,
            "successes": self.successes,
            "failures": self.failures,
        }


def iter_blocks(trials: int):
    """Yield (block_index, block_size) covering ``trials`` trials."""
    n_blocks = (trials + BLOCK_SIZE - 1) // BLOCK_SIZE
    for i in range(n_blocks):
        yield i, min(BLOCK_SIZE, trials - i * BLOCK_SIZE)
