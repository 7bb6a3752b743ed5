"""Center-distance, direction membership and overlap math over bounding boxes."""

from __future__ import annotations

import math
from enum import Enum

from .snapshot import Box, Element


class Dir(Enum):
    BELOW = "below"
    ABOVE = "above"
    LEFT_OF = "leftof"
    RIGHT_OF = "rightof"


class Overlap(Enum):
    NONE = "none"
    PARTIAL = "partial"
    CONTAINS = "contains"
    CONTAINED_BY = "containedby"


def center(box: Box) -> tuple[float, float]:
    return (box.x + box.w / 2.0, box.y + box.h / 2.0)


def distance(a: Element, b: Element) -> float:
    """Euclidean distance between box centers."""
    ax, ay = center(a.box)
    bx, by = center(b.box)
    return math.hypot(ax - bx, ay - by)


def direction_match(
    candidate: Element,
    reference: Element,
    direction: Dir,
    max_distance: float | None = None,
) -> bool:
    """Half-plane membership on centers; an element never matches itself.

    Diagonal neighbors match two directions at once; axis alignment is a
    ranking concern, not a membership one.
    """
    if candidate.id == reference.id:
        return False
    cx, cy = center(candidate.box)
    rx, ry = center(reference.box)
    if direction is Dir.BELOW:
        ok = cy > ry
    elif direction is Dir.ABOVE:
        ok = cy < ry
    elif direction is Dir.RIGHT_OF:
        ok = cx > rx
    else:
        ok = cx < rx
    if ok and max_distance is not None:
        ok = distance(candidate, reference) <= max_distance
    return ok


def overlap(a: Element, b: Element) -> Overlap:
    ab, bb = a.box, b.box
    ax1, ay1 = ab.x + ab.w, ab.y + ab.h
    bx1, by1 = bb.x + bb.w, bb.y + bb.h
    if ax1 < bb.x or bx1 < ab.x or ay1 < bb.y or by1 < ab.y:
        return Overlap.NONE
    a_in_b = ab.x >= bb.x and ab.y >= bb.y and ax1 <= bx1 and ay1 <= by1
    b_in_a = bb.x >= ab.x and bb.y >= ab.y and bx1 <= ax1 and by1 <= ay1
    # Identical boxes are mutually containing; report Partial so that
    # Contains and ContainedBy stay exact mirrors of each other.
    if a_in_b and b_in_a:
        return Overlap.PARTIAL
    if b_in_a:
        return Overlap.CONTAINS
    if a_in_b:
        return Overlap.CONTAINED_BY
    return Overlap.PARTIAL
