"""Gradient-based lower bounds over hyperintervals.

For a box with trial vertex a, gradient g = f'(a) and an overestimate k of
the gradient's Lipschitz constant,

    f(x) >= f(a) + <g, x - a> - 0.5 * k * |x - a|^2   for x in the box.

Minimizing the linear part over the box (attained at a vertex z) and
relaxing the quadratic term by the squared diagonal yields the certified
bound R(k) = F - k * d, with F the linearization minimum and d half the
squared diagonal. F and d do not depend on k; R decreases in k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import Box, GridVertex, VertexRecord, frac_lt


@dataclass(frozen=True)
class Characteristic:
    """Diagram coordinates of a box: its (d, F) dot and the vertex z."""

    z: GridVertex
    F: float
    d: float


def _vertex_and_value(box: Box, grad) -> tuple[GridVertex, float]:
    coords = []
    total = 0.0
    for j, (pa, pb) in enumerate(zip(box.a.coords, box.b.coords)):
        g = grad[j]
        if frac_lt(pa, pb):
            pick_a = g >= 0.0
        else:
            pick_a = g < 0.0
        if pick_a:
            coords.append(pa)
        else:
            coords.append(pb)
            total += g * (box.b_real[j] - box.a_real[j])
    return GridVertex(tuple(coords)), total


def linearization_vertex(box: Box, grad) -> GridVertex:
    """The box vertex minimizing the linear model f(a) + <grad, x - a>.

    Per axis: the a-side endpoint when moving toward b would not decrease
    the model, the b-side endpoint otherwise; a zero partial takes the
    a-side when b > a and the b-side when b < a.
    """
    z, _ = _vertex_and_value(box, grad)
    return z


def F_value(box: Box, rec: VertexRecord) -> float:
    """Minimum of the gradient linearization over the box; F <= f(a)."""
    _, total = _vertex_and_value(box, rec.gradient)
    return rec.f_value + total


def characterize(box: Box, rec: VertexRecord) -> Characteristic:
    """Compute the (z, F, d) triple cached on a box at creation time."""
    z, total = _vertex_and_value(box, rec.gradient)
    return Characteristic(z, rec.f_value + total, box.d)


def characteristic_R(box: Box, rec: VertexRecord, khat: float) -> float:
    """Lower bound of f over the box for gradient-Lipschitz estimate khat.

    Valid (R <= min f on the box) whenever khat is at least the true
    constant on the box.
    """
    if khat <= 0:
        raise ValueError("khat must be positive")
    return F_value(box, rec) - khat * box.d


def eval_minorant(box: Box, rec: VertexRecord, khat: float, x) -> float:
    """The quadratic minorant Q(x, khat) at a point of the box.

    Intended for property tests and diagrams, not the search itself.
    """
    if khat <= 0:
        raise ValueError("khat must be positive")
    q = rec.f_value
    norm_sq = 0.0
    for j, (ar, br) in enumerate(zip(box.a_real, box.b_real)):
        lo, hi = (ar, br) if ar <= br else (br, ar)
        slack = 1e-9 * max(1.0, hi - lo)
        if not lo - slack <= x[j] <= hi + slack:
            raise ValueError(f"point outside box on axis {j}: {x[j]} not in [{lo}, {hi}]")
        dx = x[j] - ar
        q += rec.gradient[j] * dx
        norm_sq += dx * dx
    return q - 0.5 * khat * norm_sq
