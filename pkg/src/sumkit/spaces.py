"""The two matrix-domain spaces over l1 and their norm/membership tooling.

Both spaces are absolutely-summable domains of a strict triangle built
from a weight pair: ``int-bv`` uses the integrated triangle, ``d-bv`` the
differentiated one.  The norm of x is the l1 norm of the transformed
sequence, so every question about the space reduces to a question about
l1 through the triangle and its closed-form inverse.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .core import (ConditionVerdict, LazySequence, Scalar, SpaceTag,
                   TruncationSchedule, partial_sum, space_evidence)
from .errors import UnsupportedSpaceError
from .operators import (TriangleOperator, WeightPair, apply_triangle,
                        differentiated_inverse, differentiated_triangle,
                        integrated_inverse, integrated_triangle)


class SpaceName(Enum):
    INT_BV = "int-bv"
    D_BV = "d-bv"


@dataclass
class DomainSpace:
    """A domain space: its name, weights, and the defining triangle."""

    name: SpaceName
    weights: WeightPair
    triangle: TriangleOperator
    base: SpaceTag = SpaceTag.L1


def domain_space(name, wp: WeightPair) -> DomainSpace:
    name = SpaceName(name) if not isinstance(name, SpaceName) else name
    if name is SpaceName.INT_BV:
        return DomainSpace(name, wp, integrated_triangle(wp))
    return DomainSpace(name, wp, differentiated_triangle(wp))


def domain_norm(space: DomainSpace, x: LazySequence, n: int) -> Scalar:
    """Partial norm: sum of |(T x)_m| for m <= n (exact in exact mode)."""
    y = apply_triangle(space.triangle, x)
    total = y.zero()
    for m in range(1, n + 1):
        total += abs(y.at(m))
    return total


def membership_evidence(space: DomainSpace, x: LazySequence,
                        sched: TruncationSchedule) -> ConditionVerdict:
    """l1 evidence for the transformed sequence T x."""
    y = apply_triangle(space.triangle, x)
    verdict = space_evidence(y, SpaceTag.L1, sched)
    verdict.aux["domain"] = space.name.value
    return verdict


def embed_from_l1(space: DomainSpace, y: LazySequence) -> LazySequence:
    """The inverse image x with T x = y; the isometry from l1 onto the space."""
    if space.name is SpaceName.INT_BV:
        return integrated_inverse(space.weights, y)
    return differentiated_inverse(space.weights, y)


def ak_tail_norm(space: DomainSpace, x: LazySequence, m: int, n_eval: int) -> Scalar:
    """Partial norm of x with its first ``m`` coordinates zeroed.

    Only ``d-bv`` carries the coordinate-section (AK) property, so that is
    the only space this is defined for; a vanishing tail certifies that
    the coordinate sections converge to x in norm.
    """
    if space.name is not SpaceName.D_BV:
        raise UnsupportedSpaceError(
            f"tail norms for coordinate sections are only defined on "
            f"{SpaceName.D_BV.value!r}, not {space.name.value!r}")
    if m < 0:
        raise ValueError("the section length m must be >= 0")
    if n_eval < m:
        raise ValueError("evaluation bound must reach past the zeroed prefix")
    return domain_norm(space, x.zeroed_prefix(m), n_eval)
