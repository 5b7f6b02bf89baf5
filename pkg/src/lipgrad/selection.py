"""Nondominated box selection on the (d, F) diagram.

Each box is a dot with abscissa d (half squared diagonal) and ordinate F
(minimum of its gradient linearization). For a Lipschitz estimate k > 0 the
bound of a box is F - k * d, so the boxes achieving the smallest bound for
at least one k are exactly the dots on the lower-right convex hull of the
diagram, from the global minimum-F dot to the largest-d dot. DIRECT-style
center dots reuse the same machinery with F = f(center).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Dot:
    box_id: int
    d: float
    F: float
    s: int


@dataclass(frozen=True)
class HullResult:
    """Nondominated dots ordered by increasing d.

    ``slopes[i]`` is the (k_lo, k_hi) interval of Lipschitz estimates for
    which ``selected[i]`` attains the minimal bound; the largest-d dot has
    k_hi = inf and the smallest-d dot k_lo = 0. Dots tied at the same
    (d, F) share one interval.
    """

    selected: tuple[int, ...]
    dots: tuple[Dot, ...]
    slopes: tuple[tuple[float, float], ...]


def group_representatives(partition, s_lo: int, s_hi: int) -> list[Dot]:
    """Minimal-F dot(s) of every nonempty group with s in [s_lo, s_hi].

    Ties on F within a group are all included; empty groups are skipped.
    Boxes must have been characterized (F cached) to be visible.
    """
    if s_lo > s_hi:
        raise ValueError("s_lo must not exceed s_hi")
    dots = []
    for s in range(s_lo, s_hi + 1):
        for F, box_id in partition.group_min_entries(s):
            dots.append(Dot(box_id, partition.boxes[box_id].d, F, s))
    return dots


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def nondominated(dots) -> HullResult:
    """Dots with the smallest bound F - k*d for at least one k > 0.

    Collinear dots on a hull edge tie at the edge's slope and are all kept,
    as are dots sharing the same (d, F).
    """
    if not dots:
        raise ValueError("nondominated() needs at least one dot")
    best: dict[float, tuple[float, list[Dot]]] = {}
    for dot in sorted(dots, key=lambda t: (t.d, t.F, t.box_id)):
        if dot.d <= 0:
            raise ValueError(f"dot {dot.box_id} has nonpositive d")
        cur = best.get(dot.d)
        if cur is None or dot.F < cur[0]:
            best[dot.d] = (dot.F, [dot])
        elif dot.F == cur[0]:
            cur[1].append(dot)

    pts = sorted((d, F) for d, (F, _) in best.items())
    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) < 0:
            hull.pop()
        hull.append(p)

    # keep the part right of the minimum-F vertex (largest d among minima);
    # anything left of it is dominated for every positive slope
    f_min = min(F for _, F in hull)
    start = max(i for i, (_, F) in enumerate(hull) if F == f_min)
    hull = hull[start:]

    edge_slopes = [
        (F2 - F1) / (d2 - d1) for (d1, F1), (d2, F2) in zip(hull, hull[1:])
    ]
    selected: list[int] = []
    sel_dots: list[Dot] = []
    slopes: list[tuple[float, float]] = []
    for i, (d, F) in enumerate(hull):
        k_lo = 0.0 if i == 0 else edge_slopes[i - 1]
        k_hi = math.inf if i == len(hull) - 1 else edge_slopes[i]
        for dot in best[d][1]:
            selected.append(dot.box_id)
            sel_dots.append(dot)
            slopes.append((k_lo, k_hi))
    return HullResult(tuple(selected), tuple(sel_dots), tuple(slopes))


def xi_value(f_min: float, epsilon: float) -> float:
    """Improvement margin xi = epsilon * |f_min| (the DIRECT convention)."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    return epsilon * abs(f_min)


def improvement_filter(hull: HullResult, f_min: float, xi: float) -> list[int]:
    """Hull dots whose best attainable bound undercuts f_min - xi.

    Each dot is tested at the top of its slope interval, where its bound is
    smallest; the largest-d dot has an unbounded interval and always passes.
    """
    keep = []
    for box_id, dot, (_, k_hi) in zip(hull.selected, hull.dots, hull.slopes):
        if math.isinf(k_hi) or dot.F - k_hi * dot.d <= f_min - xi:
            keep.append(box_id)
    return keep


def hull_snapshot_lines(dots, hull: HullResult) -> list[str]:
    """Serialized diagram: every dot with a selected flag, then the slopes."""
    chosen = set(hull.selected)
    lines = [
        f"D {t.box_id} {t.d!r} {t.F!r} {t.s} {1 if t.box_id in chosen else 0}"
        for t in sorted(dots, key=lambda t: (t.d, t.F, t.box_id))
    ]
    for (k_lo, k_hi), box_id in zip(hull.slopes, hull.selected):
        lines.append(f"S {box_id} {k_lo!r} {k_hi!r}")
    return lines
