"""Constructive summing weights for Haar coefficient multipliers.

Given a nonzero expansion u with block decomposition (u_i, G_i, I_i) and a
per-instance normalizer A, the weight attached to a support interval I in
block i is

    w_I = (1/A) * |I_i|^(1 - p/2) / ||u_i||_2^(2 - p) * |x_I|^2 |I| / ||u||^p.

A is the smallest constant >= 1 with sum_i |I_i|^(1-p/2) ||u_i||_2^p
<= A ||u||^p, which makes sum_I w_I <= 1 automatic and turns the multiplier
bound ||phi.u|| <= A^(1/p) ||u|| (sum |phi_I|^s w_I)^(1/s) into a
deterministic inequality rather than a statistical one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .atomic import AtomicDecomposition, appendix_constant, decompose
from .dyadic import DyadicInterval
from .errors import ZeroInputError
from .haar import HaarExpansion, convexify, hp_norm, l2_norm, multiply, tl_norm

_SUM_TOL = 1e-12
_BOUND_RTOL = 1e-9


@dataclass(frozen=True)
class PietschMeasure:
    """Nonnegative weights per interval, their normalizer A, and the summing
    exponent s (2 for Hardy-space weights, q for Triebel-Lizorkin ones)."""

    weights: dict[DyadicInterval, float]
    normalizer: float
    exponent: float

    def total(self) -> float:
        return math.fsum(self.weights.values())


@dataclass(frozen=True)
class MultiplierReport:
    lhs: float
    rhs: float
    constant: float
    weighted_sum: float
    ok: bool

    def as_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "constant": self.constant,
            "weighted_sum": self.weighted_sum,
            "ok": self.ok,
        }


def validate_measure(m: PietschMeasure, u: HaarExpansion) -> bool:
    """Invariants: weights nonnegative, total <= 1, support inside u's."""
    if any(w < 0 for w in m.weights.values()):
        return False
    if m.total() > 1.0 + _SUM_TOL:
        return False
    return all(interval in u.coeffs for interval in m.weights)


def _assemble(
    u: HaarExpansion, p: float, dec: AtomicDecomposition, exponent: float
) -> PietschMeasure:
    norm_p = hp_norm(u, p)
    norm_p_p = norm_p**p
    block_factors: list[tuple[float, float]] = []
    total = 0.0
    for block, top in dec.pieces:
        l2_sq = math.fsum(
            u.coefficient_square(i) * 2.0 ** (-i.level) for i in block
        )
        top_measure = 2.0 ** (-top.level)
        factor = top_measure ** (1.0 - p / 2.0) * l2_sq ** ((p - 2.0) / 2.0)
        block_factors.append((factor, l2_sq))
        total += top_measure ** (1.0 - p / 2.0) * l2_sq ** (p / 2.0)
    normalizer = max(1.0, total / norm_p_p)
    weights: dict[DyadicInterval, float] = {}
    for (factor, _), (block, _) in zip(block_factors, dec.pieces):
        scale = factor / (normalizer * norm_p_p)
        for interval in block:
            weights[interval] = (
                scale * u.coefficient_square(interval) * 2.0 ** (-interval.level)
            )
    return PietschMeasure(
        weights=dict(sorted(weights.items())),
        normalizer=normalizer,
        exponent=exponent,
    )


def weights_hp(u: HaarExpansion, p: float) -> PietschMeasure:
    """Weights for a scalar multiplier into the p-Hardy space, 0 < p <= 2."""
    if u.is_zero:
        raise ZeroInputError("weights need a nonzero expansion")
    if u.dimension != 1:
        raise ValueError("weights_hp expects a scalar expansion")
    return _assemble(u, p, decompose(u, p), exponent=2.0)


def weights_tl(u: HaarExpansion, p: float, q: float) -> PietschMeasure:
    """Weights for the Triebel-Lizorkin multiplier bound, 0 < p <= q.

    Obtained by decomposing the q/2-convexification |u|^(q/2) in the Hardy
    space with exponent 2p/q; the summing exponent is q.
    """
    if u.is_zero:
        raise ZeroInputError("weights need a nonzero expansion")
    if u.dimension != 1:
        raise ValueError("weights_tl expects a scalar expansion")
    if not 0 < p <= q:
        raise ValueError(f"need 0 < p <= q, got p={p}, q={q}")
    powered = convexify(u, q)
    inner_p = 2.0 * p / q
    return _assemble(powered, inner_p, decompose(powered, inner_p), exponent=q)


def weights_vector(u: HaarExpansion, p: float) -> PietschMeasure:
    """Weights for a vector-coefficient multiplier, Euclidean coefficient
    space, summing exponent 2.

    Per block the exact level-2 measure is mu_I = |x_I|^2 |I| / ||u_i||_2^2;
    the assembled weight w_I = ||u_i||_2^p |I_i|^(1-p/2) mu_I / (A ||u||^p)
    reduces to the same formula as the scalar case with Euclidean norms.
    """
    if u.is_zero:
        raise ZeroInputError("weights need a nonzero expansion")
    return _assemble(u, p, decompose(u, p), exponent=2.0)


def h2_measure(u: HaarExpansion) -> dict[DyadicInterval, float]:
    """The exact probability weights |x_I|^2 |I| / ||u||_2^2 of one block.

    For a multiplier into the level-2 space these weights witness the bound
    ||phi.u||_2^2 = ||u||_2^2 * sum |phi_I|^2 mu_I with equality.
    """
    if u.is_zero:
        raise ZeroInputError("h2_measure needs a nonzero expansion")
    denom = l2_norm(u) ** 2
    return {
        interval: u.coefficient_square(interval) * 2.0 ** (-interval.level) / denom
        for interval in u.coeffs
    }


def check_multiplier_bound(
    u: HaarExpansion,
    p: float,
    phi: dict[DyadicInterval, float],
    m: PietschMeasure,
    q: float | None = None,
) -> MultiplierReport:
    """Evaluate ||phi.u|| <= C ||u|| (sum |phi_I|^s w_I)^(1/s).

    The route is chosen by the measure: exponent s = 2 with a scalar u checks
    the Hardy-space bound with C = A^(1/p); s = q checks the
    Triebel-Lizorkin bound with C = A^(1/p); a vector u checks the Euclidean
    vector bound with C = (A / a_p)^(1/p), where a_p is 1 for p <= 1 and the
    appendix constant (at Carleson constant 4) to the power -p otherwise.
    """
    if not all(interval in u.coeffs for interval in m.weights):
        raise ValueError("measure does not match the expansion")
    s = m.exponent
    if q is not None and abs(s - q) > 1e-12:
        raise ValueError(f"measure exponent {s} does not match q={q}")
    weighted = math.fsum(
        abs(phi.get(interval, 0.0)) ** s * weight
        for interval, weight in m.weights.items()
    )
    product = multiply(phi, u)
    if u.dimension > 1:
        lhs = hp_norm(product, p)
        norm = hp_norm(u, p)
        lower = 1.0 if p <= 1 else appendix_constant(p, 4) ** (-p)
        constant = (m.normalizer / lower) ** (1.0 / p)
    elif s != 2.0:
        lhs = tl_norm(product, p, s)
        norm = tl_norm(u, p, s)
        constant = m.normalizer ** (1.0 / p)
    else:
        lhs = hp_norm(product, p)
        norm = hp_norm(u, p)
        constant = m.normalizer ** (1.0 / p)
    rhs = constant * norm * weighted ** (1.0 / s)
    return MultiplierReport(
        lhs=lhs,
        rhs=rhs,
        constant=constant,
        weighted_sum=weighted,
        ok=lhs <= rhs * (1.0 + _BOUND_RTOL),
    )
