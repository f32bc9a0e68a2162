"""Order statistics, truncation, Hamming distance and seeded Laplace noise.

Order statistics are 1-indexed everywhere in this package. Out-of-range
positions resolve to a padding value: ``-pad`` below position 1 and ``+pad``
above position ``n``. ``pad=math.inf`` gives the plain extended-real padding;
``pad=T`` gives the padding used for data truncated at level ``T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

__all__ = [
    "InvalidParameterError",
    "TooFewPointsError",
    "SortedSample",
    "NoiseSource",
    "ConstantNoise",
    "as_sample",
    "as_sorted",
    "truncate",
    "sort_sample",
    "order_stat",
    "padded_order_stats",
    "hamming_distance",
    "left_median_index",
    "empirical_median",
    "sample_standard_laplace",
    "derive_seed",
]


class InvalidParameterError(ValueError):
    """A numeric parameter is outside its admissible range."""


class TooFewPointsError(InvalidParameterError):
    """A sample has fewer points than the operation needs."""


@dataclass(frozen=True)
class SortedSample:
    """Nondecreasing sample with 1-indexed order-statistic access."""

    ordered: np.ndarray

    @property
    def n(self) -> int:
        return int(self.ordered.shape[0])

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, k: int) -> float:
        return order_stat(self, k)


ArrayLike = Union[Sequence[float], np.ndarray, SortedSample]


def as_sample(x: ArrayLike, min_size: int = 2) -> np.ndarray:
    """Validate `x` as a finite 1-d float sample and return it as an array."""
    if isinstance(x, SortedSample):
        arr = x.ordered
    else:
        arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise InvalidParameterError(f"sample must be one-dimensional, got shape {arr.shape}")
    if arr.shape[0] < min_size:
        raise TooFewPointsError(f"need at least {min_size} points, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError("sample contains NaN or infinite values")
    return arr


def sort_sample(x: ArrayLike) -> SortedSample:
    """Sort a sample into nondecreasing order (stable for ties)."""
    if isinstance(x, SortedSample):
        if x.n < 2:
            raise TooFewPointsError(f"need at least 2 points, got {x.n}")
        return x
    arr = np.sort(as_sample(x), kind="stable")
    arr.setflags(write=False)
    return SortedSample(arr)


def as_sorted(x: ArrayLike) -> SortedSample:
    return x if isinstance(x, SortedSample) else sort_sample(x)


def _check_positive(name: str, value: float) -> None:
    if not (value > 0):
        raise InvalidParameterError(f"{name} must be positive, got {value}")


def truncate(u, T: float):
    """Clamp `u` to ``[-T, T]``. Works elementwise on arrays."""
    _check_positive("T", T)
    if np.ndim(u) == 0:
        return float(min(max(u, -T), T))
    return np.clip(u, -T, T)


def order_stat(s: SortedSample, k: int, pad: float = math.inf) -> float:
    """Return the k-th order statistic (1-indexed), padded outside ``1..n``."""
    if k < 1:
        return -pad
    if k > s.n:
        return pad
    return float(s.ordered[k - 1])


def padded_order_stats(s: SortedSample, lo: int, hi: int, pad: float = math.inf) -> np.ndarray:
    """Vectorised `order_stat` for positions ``lo..hi`` inclusive."""
    n = s.n
    out = np.empty(hi - lo + 1, dtype=float)
    idx = np.arange(lo, hi + 1)
    below = idx < 1
    above = idx > n
    inside = ~(below | above)
    out[below] = -pad
    out[above] = pad
    out[inside] = s.ordered[idx[inside] - 1]
    return out


def hamming_distance(x: ArrayLike, x_prime: ArrayLike) -> int:
    """Number of positions at which two equal-length samples differ."""
    a = np.asarray(x, dtype=float)
    b = np.asarray(x_prime, dtype=float)
    if a.shape != b.shape:
        raise InvalidParameterError(f"length mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))


def left_median_index(n: int) -> int:
    if n < 2:
        raise TooFewPointsError(f"need at least 2 points, got {n}")
    return n // 2


def empirical_median(x: ArrayLike) -> float:
    """Left empirical median, the ``floor(n/2)``-th order statistic.

    For odd ``n`` this is strictly below the middle observation; e.g. the
    median of ``(1, 2, 3)`` is 1.
    """
    s = as_sorted(x)
    return order_stat(s, left_median_index(s.n))


def derive_seed(base_seed: int, stream: int) -> int:
    """Deterministic 63-bit seed for stream `stream` of `base_seed`."""
    seq = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(int(stream),))
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


class NoiseSource:
    """Seeded random stream. Single owner; derive children for parallel work."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._seq = np.random.SeedSequence(self.seed)
        self._gen = np.random.Generator(np.random.PCG64(self._seq))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def spawn(self, count: int) -> list["NoiseSource"]:
        children = []
        for child_seq in self._seq.spawn(count):
            child = NoiseSource.__new__(NoiseSource)
            child.seed = self.seed
            child._seq = child_seq
            child._gen = np.random.Generator(np.random.PCG64(child_seq))
            children.append(child)
        return children

    def open_uniform(self, size=None):
        """Uniform draws on the open interval (0, 1)."""
        k = self._gen.integers(0, 2**53, size=size)
        return (k + 0.5) * 2.0**-53

    def standard_laplace(self, size=None):
        """Lap(1) draws (density ``exp(-|u|)/2``) by inverting the CDF."""
        p = self.open_uniform(size)
        if size is None:
            return math.log(2.0 * p) if p < 0.5 else -math.log(2.0 * (1.0 - p))
        p = np.asarray(p)
        return np.where(p < 0.5, np.log(2.0 * p), -np.log(2.0 * (1.0 - p)))


class ConstantNoise(NoiseSource):
    """Noise source that replays fixed Laplace values in order (for tests).

    A single value is repeated forever; a sequence is consumed in order and
    raises once exhausted.
    """

    def __init__(self, values):
        self._values = list(np.atleast_1d(np.asarray(values, dtype=float)))
        self._repeat = len(self._values) == 1
        self._pos = 0
        self.seed = 0

    def _next(self) -> float:
        if self._repeat:
            return self._values[0]
        if self._pos >= len(self._values):
            raise RuntimeError("ConstantNoise exhausted")
        v = self._values[self._pos]
        self._pos += 1
        return v

    def standard_laplace(self, size=None):
        if size is None:
            return self._next()
        return np.array([self._next() for _ in range(int(np.prod(size)))]).reshape(size)

    def open_uniform(self, size=None):
        raise NotImplementedError("ConstantNoise only supplies Laplace draws")

    def spawn(self, count: int):
        return [self] * count


def sample_standard_laplace(rng: NoiseSource, size=None):
    return rng.standard_laplace(size)
