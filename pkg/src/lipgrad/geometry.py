"""Exact base-3 hyperinterval partitioning with a shared vertex database.

Trisection only ever produces coordinates of the form k / 3^m along each
axis, so vertices are stored as exact grid fractions relative to the domain
and database lookups never rely on floating-point comparisons. Every value
and gradient is therefore computed at most once per distinct vertex.

Boxes carry an oriented main diagonal (a, b): ``a`` is the trial vertex and
the coordinates of ``b`` need not be larger than those of ``a``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

_POW3 = [1]


def pow3(k: int) -> int:
    """3**k with memoization."""
    while len(_POW3) <= k:
        _POW3.append(_POW3[-1] * 3)
    return _POW3[k]


class GridFraction(NamedTuple):
    """num / 3**depth in [0, 1], kept in normalized form."""

    num: int
    depth: int

    @property
    def value(self) -> float:
        return self.num / pow3(self.depth)

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, pow3(self.depth))

    def __str__(self) -> str:
        return f"{self.num}/{pow3(self.depth)}"


def grid_fraction(num: int, depth: int) -> GridFraction:
    """Normalized grid fraction: depth 0, or numerator not divisible by 3."""
    if depth < 0 or num < 0 or num > pow3(depth):
        raise ValueError(f"not a grid coordinate in [0, 1]: {num}/3^{depth}")
    while depth > 0 and num % 3 == 0:
        num //= 3
        depth -= 1
    return GridFraction(num, depth)


def frac_lt(p: GridFraction, q: GridFraction) -> bool:
    """Exact p < q (NamedTuple ordering would compare fields, not values)."""
    m = max(p.depth, q.depth)
    return p.num * pow3(m - p.depth) < q.num * pow3(m - q.depth)


def third_points(p: GridFraction, q: GridFraction) -> tuple[GridFraction, GridFraction]:
    """The two interior points splitting [p, q] in thirds.

    Returns ((p + 2q)/3, (2p + q)/3): the first lies two thirds of the way
    from p to q, the second one third of the way.
    """
    m = max(p.depth, q.depth)
    pn = p.num * pow3(m - p.depth)
    qn = q.num * pow3(m - q.depth)
    return grid_fraction(pn + 2 * qn, m + 1), grid_fraction(2 * pn + qn, m + 1)


class GridVertex(NamedTuple):
    """A grid point: one GridFraction per axis, relative to the domain."""

    coords: tuple[GridFraction, ...]

    def real(self, lower, edge) -> tuple[float, ...]:
        return tuple(
            lo + c.num / pow3(c.depth) * ed
            for c, lo, ed in zip(self.coords, lower, edge)
        )

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.coords)


def vertex(*pairs: tuple[int, int]) -> GridVertex:
    """Convenience constructor from (num, depth) pairs."""
    return GridVertex(tuple(grid_fraction(n, d) for n, d in pairs))


def corner_vertex(dim: int, upper: bool) -> GridVertex:
    one_or_zero = grid_fraction(1 if upper else 0, 0)
    return GridVertex((one_or_zero,) * dim)


@dataclass(frozen=True, slots=True)
class VertexRecord:
    """Objective value and gradient at a vertex; written once, never updated."""

    f_value: float
    gradient: tuple[float, ...]
    trial_index: int


@dataclass(slots=True)
class Box:
    """A hyperinterval [a, b] with trial vertex ``a`` and group index ``s``.

    ``d`` is half the squared real diagonal. ``F`` and ``z`` (the minimum of
    the gradient linearization over the box and the vertex attaining it) are
    cached once the trial record exists; they never change afterwards.
    """

    id: int
    s: int
    a: GridVertex
    b: GridVertex
    a_real: tuple[float, ...]
    b_real: tuple[float, ...]
    d: float
    F: float = float("nan")
    z: Optional[GridVertex] = None


def longest_side(box: Box, edges: Optional[tuple[Fraction, ...]] = None) -> int:
    """Index of the longest real side; ties go to the smallest axis index.

    ``edges`` are the real domain edge lengths as Fractions; omitted means
    all axes share one edge length (hypercube), so grid lengths decide.
    Comparisons are exact either way.
    """
    if edges is None:
        best_num = best_depth = -1
        best_j = 0
        for j, (pa, pb) in enumerate(zip(box.a.coords, box.b.coords)):
            m = pa.depth if pa.depth >= pb.depth else pb.depth
            num = abs(pa.num * pow3(m - pa.depth) - pb.num * pow3(m - pb.depth))
            if best_num < 0 or num * pow3(best_depth) > best_num * pow3(m):
                best_num, best_depth, best_j = num, m, j
        return best_j
    best = None
    best_j = 0
    for j, (pa, pb) in enumerate(zip(box.a.coords, box.b.coords)):
        m = max(pa.depth, pb.depth)
        num = abs(pa.num * pow3(m - pa.depth) - pb.num * pow3(m - pb.depth))
        length = Fraction(num, pow3(m)) * edges[j]
        if best is None or length > best:
            best = length
            best_j = j
    return best_j


def volume(box: Box) -> Fraction:
    """Exact box volume in grid coordinates (domain scaled to the unit cube)."""
    v = Fraction(1)
    for pa, pb in zip(box.a.coords, box.b.coords):
        m = max(pa.depth, pb.depth)
        num = abs(pa.num * pow3(m - pa.depth) - pb.num * pow3(m - pb.depth))
        if num == 0:
            raise ValueError(f"degenerate box {box.id}")
        v *= Fraction(num, pow3(m))
    return v


def diagonal_sq(box: Box) -> float:
    """Squared real length of the main diagonal."""
    return sum((br - ar) ** 2 for ar, br in zip(box.a_real, box.b_real))


def heap_min_entries(heap: list, live) -> list:
    """All minimum-key entries ``(key, ident)`` of a lazy-deletion heap.

    Entries whose ident is not in ``live`` are discarded; ties on the key are
    all returned (sorted by ident) and pushed back.
    """
    out = []
    while heap:
        key, ident = heap[0]
        if ident not in live:
            heapq.heappop(heap)
            continue
        if out and key != out[0][0]:
            break
        out.append(heapq.heappop(heap))
    for entry in out:
        heapq.heappush(heap, entry)
    return out


class Partition:
    """The live set of hyperintervals plus the shared vertex database.

    Confined to a single optimizer run; not safe for concurrent mutation.
    ``vertex_db`` may be shared read/append across replays of the same
    subdivision sequence, which then triggers zero re-evaluations.
    """

    def __init__(self, problem, start_vertex: str = "a", vertex_db=None):
        self.lower = tuple(float(v) for v in problem.lower)
        self.upper = tuple(float(v) for v in problem.upper)
        self.edge = tuple(u - l for l, u in zip(self.lower, self.upper))
        if any(e <= 0 for e in self.edge):
            raise ValueError("domain must have positive edge lengths")
        self._edge_fracs = (
            None if len(set(self.edge)) == 1 else tuple(Fraction(e) for e in self.edge)
        )
        self.vertex_db: dict[GridVertex, VertexRecord] = (
            vertex_db if vertex_db is not None else {}
        )
        self.evals_performed = 0
        self.boxes: dict[int, Box] = {}
        self.groups: dict[int, set[int]] = {}
        self._gheaps: dict[int, list] = {}
        self._group_diag_sq: dict[int, float] = {}
        self._trial_boxes: dict[GridVertex, set[int]] = {}
        self.q_inf = 0
        self.q_0 = 0

        dim = len(self.lower)
        if start_vertex == "a":
            va, vb = corner_vertex(dim, False), corner_vertex(dim, True)
        elif start_vertex == "b":
            va, vb = corner_vertex(dim, True), corner_vertex(dim, False)
        else:
            raise ValueError("start_vertex must be 'a' or 'b'")
        self.initial_vertex = va
        self.get_or_eval(va, problem)
        self._add_box(1, 0, va, vb)

    @property
    def m(self) -> int:
        return len(self.boxes)

    @property
    def eval_counter(self) -> int:
        return len(self.vertex_db)

    def get_or_eval(self, v: GridVertex, problem) -> VertexRecord:
        """Read the record for ``v`` or evaluate f and f' there exactly once."""
        rec = self.vertex_db.get(v)
        if rec is None:
            x = np.asarray(v.real(self.lower, self.edge))
            f_val = float(problem.f(x))
            grad = tuple(float(g) for g in problem.grad(x))
            rec = VertexRecord(f_val, grad, len(self.vertex_db) + 1)
            self.vertex_db[v] = rec
            self.evals_performed += 1
        return rec

    def trisect(self, t: int, problem) -> tuple[Box, Box, Box, Optional[VertexRecord]]:
        """Split box ``t`` perpendicular to its longest side into equal thirds.

        The middle child keeps id ``t``; the children adjacent to the old
        ``a`` and ``b`` vertices get ids m+1 and m+2. Returns the children
        plus the record of the new trial point, or None if it was reused.
        """
        box = self.boxes[t]
        i = longest_side(box, self._edge_fracs)
        u_f, v_f = third_points(box.a.coords[i], box.b.coords[i])
        u = GridVertex(box.a.coords[:i] + (u_f,) + box.a.coords[i + 1:])
        v = GridVertex(box.b.coords[:i] + (v_f,) + box.b.coords[i + 1:])
        lo_i, ed_i = self.lower[i], self.edge[i]
        u_real = box.a_real[:i] + (lo_i + u_f.value * ed_i,) + box.a_real[i + 1:]
        v_real = box.b_real[:i] + (lo_i + v_f.value * ed_i,) + box.b_real[i + 1:]

        before = len(self.vertex_db)
        rec = self.get_or_eval(u, problem)
        new_rec = rec if len(self.vertex_db) > before else None

        s_child = box.s + 1
        m = len(self.boxes)
        # children share side lengths, hence one d for all three
        d = 0.5 * sum((br - ar) ** 2 for ar, br in zip(u_real, v_real))
        self._remove_box(box)
        middle = self._add_box(t, s_child, u, v, u_real, v_real, d)
        low = self._add_box(m + 1, s_child, box.a, v, box.a_real, v_real, d)
        high = self._add_box(m + 2, s_child, u, box.b, u_real, box.b_real, d)

        if s_child > self.q_0:
            self.q_0 = s_child
        while not self.groups.get(self.q_inf):
            self.q_inf += 1
        return middle, low, high, new_rec

    def set_characteristic(self, box_id: int, F: float, z: GridVertex) -> None:
        """Cache (F, z) on a box and index it for group-minimum queries."""
        box = self.boxes[box_id]
        box.F = F
        box.z = z
        heapq.heappush(self._gheaps.setdefault(box.s, []), (F, box_id))

    def group_min_entries(self, s: int) -> list[tuple[float, int]]:
        """(F, id) for every box attaining the minimal F in group ``s``."""
        live = self.groups.get(s)
        heap = self._gheaps.get(s)
        if not live or not heap:
            return []
        return heap_min_entries(heap, live)

    def boxes_at_vertex(self, v: GridVertex) -> set[int]:
        """Ids of live boxes whose trial vertex is ``v``."""
        return self._trial_boxes.get(v, set())

    def max_diagonal_sq(self) -> float:
        """Squared diagonal of the largest live boxes (group q_inf).

        One canonical value per group: boxes of a group share their side
        lengths, so this avoids last-ulp jitter between group members.
        """
        return self._group_diag_sq[self.q_inf]

    def snapshot_lines(self) -> list[str]:
        """One line per box: id, s, a-coords, b-coords as exact fractions."""
        return [
            f"{b.id} {b.s} {b.a} {b.b}"
            for b in sorted(self.boxes.values(), key=lambda b: b.id)
        ]

    def _add_box(
        self, box_id: int, s: int, a: GridVertex, b: GridVertex,
        a_real=None, b_real=None, d=None,
    ) -> Box:
        if a_real is None:
            a_real = a.real(self.lower, self.edge)
        if b_real is None:
            b_real = b.real(self.lower, self.edge)
        if any(pa == pb for pa, pb in zip(a.coords, b.coords)):
            raise AssertionError(f"degenerate child box {box_id}")
        if d is None:
            d = 0.5 * sum((br - ar) ** 2 for ar, br in zip(a_real, b_real))
        box = Box(box_id, s, a, b, a_real, b_real, d)
        self.boxes[box_id] = box
        self.groups.setdefault(s, set()).add(box_id)
        self._group_diag_sq.setdefault(s, 2.0 * d)
        self._trial_boxes.setdefault(a, set()).add(box_id)
        return box

    def _remove_box(self, box: Box) -> None:
        del self.boxes[box.id]
        self.groups[box.s].discard(box.id)
        self._trial_boxes[box.a].discard(box.id)
