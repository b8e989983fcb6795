"""Finite Haar expansions and their square-function norms.

An expansion is a finite formal sum  u = sum_I x_I h_I  over dyadic intervals,
with coefficient vectors x_I in R^d (d = 1 is the scalar case) and the
L-infinity normalised Haar functions h_I. All square functions are step
functions that are constant on the 2^N leaves of the finest level N, so every
norm integral below is a finite leaf sum with no quadrature error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .dyadic import DyadicInterval, IntervalFamily

CoeffMap = Mapping[DyadicInterval, "float | Iterable[float]"]


class HaarExpansion:
    """Sparse Haar coefficients up to a fixed maximum level.

    Zero coefficient vectors are dropped on construction, so the key set of
    ``coeffs`` equals the Haar support. Values are tuples of floats of length
    ``dimension`` and must be finite.
    """

    __slots__ = ("max_level", "dimension", "coeffs")

    def __init__(self, max_level: int, dimension: int, coeffs: CoeffMap) -> None:
        if max_level < 0:
            raise ValueError(f"max_level must be nonnegative, got {max_level}")
        if dimension < 1:
            raise ValueError(f"dimension must be positive, got {dimension}")
        cleaned: dict[DyadicInterval, tuple[float, ...]] = {}
        for interval in sorted(coeffs):
            if interval.level > max_level:
                raise ValueError(
                    f"interval {interval} exceeds max level {max_level}"
                )
            raw = coeffs[interval]
            vector = (
                (float(raw),)
                if isinstance(raw, (int, float))
                else tuple(float(c) for c in raw)
            )
            if len(vector) != dimension:
                raise ValueError(
                    f"coefficient at {interval} has length {len(vector)}, "
                    f"expected {dimension}"
                )
            if not all(math.isfinite(c) for c in vector):
                raise ValueError(f"coefficient at {interval} is not finite")
            if any(vector):
                cleaned[interval] = vector
        object.__setattr__(self, "max_level", max_level)
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "coeffs", cleaned)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("HaarExpansion is immutable")

    @classmethod
    def scalar(cls, max_level: int, coeffs: CoeffMap) -> "HaarExpansion":
        return cls(max_level, 1, coeffs)

    @property
    def support(self) -> tuple[DyadicInterval, ...]:
        return tuple(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def support_family(self) -> IntervalFamily:
        return IntervalFamily(self.coeffs, max_level=self.max_level)

    def restrict(self, intervals: Iterable[DyadicInterval]) -> "HaarExpansion":
        """Sub-expansion keeping only the given support intervals."""
        kept = {i: self.coeffs[i] for i in intervals if i in self.coeffs}
        return HaarExpansion(self.max_level, self.dimension, kept)

    def coefficient_square(self, interval: DyadicInterval) -> float:
        """Squared Euclidean length of the coefficient vector at `interval`."""
        vector = self.coeffs.get(interval)
        if vector is None:
            return 0.0
        return math.fsum(c * c for c in vector)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HaarExpansion):
            return NotImplemented
        return (
            self.max_level == other.max_level
            and self.dimension == other.dimension
            and self.coeffs == other.coeffs
        )

    def __repr__(self) -> str:
        return (
            f"HaarExpansion(max_level={self.max_level}, "
            f"dimension={self.dimension}, support={len(self.coeffs)})"
        )


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Function constant on each leaf [j*2^-N, (j+1)*2^-N) of level N."""

    max_level: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.values.shape != (1 << self.max_level,):
            raise ValueError(
                f"expected {1 << self.max_level} leaf values, "
                f"got shape {self.values.shape}"
            )

    def __call__(self, t: float) -> float:
        if not 0.0 <= t < 1.0:
            raise ValueError(f"point {t} outside [0, 1)")
        return float(self.values[int(t * (1 << self.max_level))])

    def lp_norm(self, p: float) -> float:
        if p <= 0:
            raise ValueError(f"p must be positive, got {p}")
        return float(np.mean(np.abs(self.values) ** p) ** (1.0 / p))

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


def leaf_slice(interval: DyadicInterval, max_level: int) -> slice:
    """Index range of the level-`max_level` leaves below `interval`."""
    shift = max_level - interval.level
    if shift < 0:
        raise ValueError(f"interval {interval} is finer than level {max_level}")
    return slice(interval.position << shift, (interval.position + 1) << shift)


def square_leaf_sums(u: HaarExpansion) -> np.ndarray:
    """Leafwise values of S(u)^2, i.e. sum_I |x_I|^2 1_I."""
    sums = np.zeros(1 << u.max_level)
    for interval in u.coeffs:
        sums[leaf_slice(interval, u.max_level)] += u.coefficient_square(interval)
    return sums


def evaluate_haar(interval: DyadicInterval, t: float) -> int:
    """+1 on the left half of the interval, -1 on the right half, 0 outside."""
    if not interval.left <= t < interval.right:
        return 0
    midpoint = (interval.left + interval.right) / 2
    return 1 if t < midpoint else -1


def square_function(u: HaarExpansion) -> StepFunction:
    """t -> (sum_I |x_I|^2 1_I(t))^(1/2) with Euclidean coefficient norms.

    For d > 1 this is the Hilbert-space closed form of the randomised square
    function: averaging independent signs in L^2 reproduces the square sum
    exactly, so no sampling is involved.
    """
    return StepFunction(u.max_level, np.sqrt(square_leaf_sums(u)))


def q_variation(u: HaarExpansion, q: float) -> StepFunction:
    """t -> (sum_I |x_I|^q 1_I(t))^(1/q); scalar expansions only."""
    if u.dimension != 1:
        raise ValueError("q-variation is defined for scalar expansions only")
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    sums = np.zeros(1 << u.max_level)
    for interval, (value,) in u.coeffs.items():
        sums[leaf_slice(interval, u.max_level)] += abs(value) ** q
    return StepFunction(u.max_level, sums ** (1.0 / q))


def hp_norm(u: HaarExpansion, p: float) -> float:
    """L^p norm of the square function, 0 < p <= 2."""
    if not 0 < p <= 2:
        raise ValueError(f"p must lie in (0, 2], got {p}")
    sums = square_leaf_sums(u)
    return float(np.mean(sums ** (p / 2.0)) ** (1.0 / p))


def tl_norm(u: HaarExpansion, p: float, q: float) -> float:
    """L^p norm of the q-variation, 0 < p <= q < infinity."""
    if not 0 < p <= q:
        raise ValueError(f"need 0 < p <= q, got p={p}, q={q}")
    return q_variation(u, q).lp_norm(p)


def convexify(u: HaarExpansion, q: float) -> HaarExpansion:
    """Coefficientwise power |x_I|^(q/2); support is preserved."""
    if u.dimension != 1:
        raise ValueError("convexification is defined for scalar expansions only")
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    powered = {
        interval: abs(value) ** (q / 2.0)
        for interval, (value,) in u.coeffs.items()
    }
    return HaarExpansion(u.max_level, 1, powered)


def l2_norm(u: HaarExpansion) -> float:
    """(sum_I |x_I|^2 |I|)^(1/2), the H^2 norm computed from coefficients."""
    return math.sqrt(
        math.fsum(
            u.coefficient_square(interval) * 2.0 ** (-interval.level)
            for interval in u.coeffs
        )
    )


def multiply(phi: Mapping[DyadicInterval, float], u: HaarExpansion) -> HaarExpansion:
    """Coefficientwise multiplier phi * u; missing phi entries count as 0."""
    scaled = {}
    for interval, vector in u.coeffs.items():
        factor = phi.get(interval, 0.0)
        if factor:
            scaled[interval] = tuple(factor * c for c in vector)
    return HaarExpansion(u.max_level, u.dimension, scaled)
