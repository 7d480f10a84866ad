"""Parametric shape families normalized to unit equivalent radius.

Every family member has |E| equal to the unit-ball volume of its
dimension (2 on the line, pi in the plane), so the equal-volume ball is
always the unit ball and members of different families land on the same
(asymmetry, deficit) axes.  The family parameter measures departure from
the ball; parameter 0 (where admissible) is the ball itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .shapes import Ball, Dumbbell, Ellipse, FourierDisk, Interval, UnionShape

__all__ = ["FAMILY_NAMES", "FamilyMember", "generate_family"]

FAMILY_NAMES = (
    "ellipse-ecc",
    "fourier-disk",
    "dumbbell",
    "two-balls",
    "offset-bump",
    "two-intervals",
)

_FOURIER_K = 3
# Disjointness margins used by the two-piece families.
_BUMP_GAP = 0.3


@dataclass(frozen=True)
class FamilyMember:
    """One generated shape together with its family coordinates."""

    family: str
    param: float
    shape: object

    @property
    def dim(self) -> int:
        return self.shape.dim


def _ellipse(t: float) -> Ellipse:
    if t < 0.0:
        raise ValueError("ellipse elongation parameter must be >= 0")
    a = math.sqrt(1.0 + t)
    # a * b = 1 keeps the area at pi exactly; t = 0 is the unit disk
    return Ellipse((0.0, 0.0), a, 1.0 / a)


def _fourier(t: float) -> FourierDisk:
    if not 0.0 <= t < 1.0:
        raise ValueError("fourier amplitude must lie in [0, 1)")
    if t == 0.0:
        return FourierDisk((0.0, 0.0), 1.0, 0.0, _FOURIER_K)
    # area = pi r0^2 (1 + t^2/2); solve r0 so the area is pi exactly
    r0 = 1.0 / math.sqrt(1.0 + 0.5 * t * t)
    return FourierDisk((0.0, 0.0), r0, t, _FOURIER_K)


def _dumbbell(t: float, h: float | None) -> Dumbbell:
    if not 0.0 < t < 1.0:
        raise ValueError("dumbbell neck fraction must lie in (0, 1)")
    raw = Dumbbell(0.75, 1.0, 1.5 * t)
    scale = math.sqrt(math.pi / raw.volume)
    member = raw.scaled(scale)
    if h is not None and member.neck <= 2.0 * h:
        raise ValueError(
            f"neck width {member.neck:.4g} needs more than two cells at h={h}"
        )
    return member


def _two_balls(t: float, h: float | None) -> UnionShape:
    # two half-volume balls whose centers sit 2t apart
    rho = 1.0 / math.sqrt(2.0)
    gap = 2.0 * t - 2.0 * rho
    if gap <= 0.0:
        raise ValueError("separation parameter must exceed the ball radius")
    if h is not None and gap <= 2.0 * h:
        raise ValueError(
            f"gap {gap:.4g} needs more than two cells at h={h}"
        )
    return UnionShape((Ball((-t, 0.0), rho), Ball((t, 0.0), rho)))


def _offset_bump(t: float, h: float | None) -> UnionShape:
    # main ball of area pi(1-t) plus a detached bump of area pi t
    if not 0.0 < t <= 0.5:
        raise ValueError("bump fraction must lie in (0, 0.5]")
    r_main = math.sqrt(1.0 - t)
    r_bump = math.sqrt(t)
    if h is not None and 2.0 * r_bump <= 2.0 * h:
        raise ValueError(
            f"bump diameter {2 * r_bump:.4g} needs more than two cells at h={h}"
        )
    cx = r_main + _BUMP_GAP + r_bump
    return UnionShape((Ball((0.0, 0.0), r_main), Ball((cx, 0.0), r_bump)))


def _two_intervals(t: float, h: float | None) -> object:
    # unit-length halves separated by a gap t; t = 0 is the 1D ball
    if t < 0.0:
        raise ValueError("gap parameter must be >= 0")
    if t == 0.0:
        return Interval(-1.0, 1.0)
    if h is not None and t <= 2.0 * h:
        raise ValueError(f"gap {t:.4g} needs more than two cells at h={h}")
    half = 0.5 * t
    return UnionShape(
        (Interval(-1.0 - half, -half), Interval(half, 1.0 + half))
    )


def generate_family(name: str, params, *, h: float | None = None):
    """Build the named family at the given parameter values.

    `h` enables the resolution gates (necks and gaps must span more than
    two cells to survive rasterization).  Members come back in the order
    of `params`; each shape carries exact volume and boundary length.
    """
    builders = {
        "ellipse-ecc": lambda t: _ellipse(t),
        "fourier-disk": lambda t: _fourier(t),
        "dumbbell": lambda t: _dumbbell(t, h),
        "two-balls": lambda t: _two_balls(t, h),
        "offset-bump": lambda t: _offset_bump(t, h),
        "two-intervals": lambda t: _two_intervals(t, h),
    }
    if name not in builders:
        raise ValueError(
            f"unknown family {name!r}; choose one of {', '.join(FAMILY_NAMES)}"
        )
    members = []
    for raw in params:
        t = float(raw)
        members.append(FamilyMember(name, t, builders[name](t)))
    return members
