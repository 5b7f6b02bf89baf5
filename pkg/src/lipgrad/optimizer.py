"""Two-phase global optimizer driven by gradient lower bounds.

An exploration phase repeatedly selects nondominated boxes among the larger
groups and trisects those whose best bound undercuts the record by the
improvement margin; it hands over to a record improvement phase as soon as
the record value gains at least 1%, or after its final iteration when the
record box is not among the smallest. The record phase trisects the record
box up to N times, stopping early once the gradient at the record vertex
points outward along every side of its box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from . import bounding, selection
from .geometry import GridVertex, Partition, VertexRecord
from .stopping import (
    REASON_BUDGET,
    REASON_DIAGONAL,
    REASON_TARGET,
    StopTarget,
    target_reached,
)


@dataclass
class OptConfig:
    """Run parameters shared by the gradient method and the baselines.

    The trial budget ``p_max`` is always enforced; ``target`` and
    ``diagonal`` (largest diagonal relative to the initial one) are optional
    additional stop rules.
    """

    epsilon: float = 1e-4
    p_max: int = 1_000_000
    start_vertex: str = "a"
    target: Optional[StopTarget] = None
    diagonal: Optional[float] = None
    keep_trace: bool = False

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.p_max < 1:
            raise ValueError("p_max must be at least 1")
        if self.start_vertex not in ("a", "b"):
            raise ValueError("start_vertex must be 'a' or 'b'")
        if self.diagonal is not None and not 0.0 < self.diagonal <= 1.0:
            raise ValueError("diagonal threshold must be in (0, 1]")


def config_from_text(text: str) -> OptConfig:
    """Parse a key=value config (newline or semicolon separated).

    Keys: epsilon, pmax, start, diagonal, target_delta, target_x (comma
    separated coordinates; requires target_delta).
    """
    fields: dict[str, str] = {}
    for chunk in text.replace(";", "\n").splitlines():
        chunk = chunk.strip()
        if not chunk or chunk.startswith("#"):
            continue
        key, _, value = chunk.partition("=")
        fields[key.strip()] = value.strip()
    target = None
    if "target_x" in fields:
        x_star = tuple(float(v) for v in fields["target_x"].split(","))
        target = StopTarget(x_star, float(fields["target_delta"]))
    return OptConfig(
        epsilon=float(fields.get("epsilon", 1e-4)),
        p_max=int(fields.get("pmax", 1_000_000)),
        start_vertex=fields.get("start", "a"),
        target=target,
        diagonal=float(fields["diagonal"]) if "diagonal" in fields else None,
    )


@dataclass
class RunReport:
    """Outcome of one run under the common stop rules."""

    method: str
    trials: int
    boxes: int
    f_min: float
    x_min: tuple[float, ...]
    stop_reason: str
    history: list[tuple[int, float, float]]
    trace: Optional[list[tuple[int, tuple[float, ...], float, float, str]]] = None
    snapshot: Optional[list[str]] = None


class OptState:
    """Full mutable state of one run: partition, record triple, counters."""

    def __init__(self, problem, config: OptConfig, partition: Partition):
        self.problem = problem
        self.config = config
        self.partition = partition
        self.f_min = math.inf
        self.x_min: GridVertex = partition.initial_vertex
        self.record_box = 1
        self.p = 0
        self.f_min_prec = math.inf
        self.k = 1
        self.k_g = 0
        self.k_l = 0
        self.phase = "init"
        self.stop_reason: Optional[str] = None
        self.history: list[tuple[int, float, float]] = []
        self.trace: Optional[list] = [] if config.keep_trace else None
        self._initial_diag_sq = partition.max_diagonal_sq()

    @property
    def trials(self) -> int:
        return self.partition.evals_performed


def initialize(problem, config: OptConfig) -> OptState:
    """Step 0: one trial at the chosen corner, a single box of group 0."""
    partition = Partition(problem, config.start_vertex)
    state = OptState(problem, config, partition)
    first = partition.initial_vertex
    rec = partition.vertex_db[first]
    _characterize(state, partition.boxes[1])
    update_record(state, first, rec)
    x = first.real(partition.lower, partition.edge)
    if state.trace is not None:
        state.trace.append((rec.trial_index, x, rec.f_value, state.f_min, state.phase))
    _check_target(state, x)
    _check_stop(state)
    state.history.append((state.trials, state.f_min, partition.max_diagonal_sq()))
    return state


def update_record(state: OptState, vtx: GridVertex, rec: VertexRecord) -> None:
    """Adopt a strictly better record value and re-resolve the record box."""
    if rec.f_value < state.f_min:
        state.f_min = rec.f_value
        state.x_min = vtx
        _resolve_record_box(state)


def exploration_iteration(state: OptState, g_hi: int) -> None:
    """One selection + subdivision sweep over groups [q_inf, g_hi].

    An empty selection is legal; the iteration then only advances the
    counter.
    """
    part = state.partition
    dots = selection.group_representatives(part, part.q_inf, g_hi)
    chosen: list[int] = []
    if dots:
        hull = selection.nondominated(dots)
        xi = selection.xi_value(state.f_min, state.config.epsilon)
        chosen = selection.improvement_filter(hull, state.f_min, xi)
    state.k += 1
    for box_id in chosen:
        _subdivide(state, box_id)
        if state.stop_reason:
            break
    state.history.append((state.trials, state.f_min, part.max_diagonal_sq()))


def exploration_phase(state: OptState) -> str:
    """Steps 1.1-1.5; returns 'local', 're-explore' or 'stopped'."""
    state.f_min_prec = state.f_min
    state.phase = "explore"
    n = state.problem.dim
    for k_g in range(1, n + 1):
        state.k_g = k_g
        g_hi = (state.partition.q_inf + state.p + 1) // 2
        exploration_iteration(state, g_hi)
        if state.stop_reason:
            return "stopped"
        if _improved_one_percent(state.f_min, state.f_min_prec):
            return "local"
    exploration_iteration(state, state.p)
    if state.stop_reason:
        return "stopped"
    if state.p < state.partition.q_0:
        return "local"
    return "re-explore"


def gradient_aligned(grad, a_real, b_real) -> bool:
    """True when every gradient component points outward along its box side."""
    return all(g * (br - ar) >= 0.0 for g, ar, br in zip(grad, a_real, b_real))


def record_phase(state: OptState) -> None:
    """Step 2: up to N trisections of the (possibly moving) record box."""
    state.k += 1
    state.phase = "local"
    part = state.partition
    for k_l in range(1, state.problem.dim + 1):
        state.k_l = k_l
        box = part.boxes[state.record_box]
        rec = part.vertex_db[box.a]
        if gradient_aligned(rec.gradient, box.a_real, box.b_real):
            break
        _subdivide(state, box.id)
        if state.stop_reason:
            return
    state.history.append((state.trials, state.f_min, part.max_diagonal_sq()))


def run(problem, config: OptConfig) -> RunReport:
    """Alternate exploration and record improvement until a stop rule fires."""
    state = initialize(problem, config)
    while not state.stop_reason:
        switch = exploration_phase(state)
        if switch == "local" and not state.stop_reason:
            record_phase(state)
    return _report(state)


def _improved_one_percent(f_min: float, f_prec: float) -> bool:
    return f_min <= f_prec - 0.01 * abs(f_prec)


def _characterize(state: OptState, box) -> None:
    rec = state.partition.vertex_db[box.a]
    ch = bounding.characterize(box, rec)
    state.partition.set_characteristic(box.id, ch.F, ch.z)


def _resolve_record_box(state: OptState) -> None:
    # the record vertex always remains the trial vertex of at least one box
    part = state.partition
    ids = part.boxes_at_vertex(state.x_min)
    best = min(ids, key=lambda i: (part.boxes[i].F, -part.boxes[i].d, i))
    state.record_box = best
    state.p = part.boxes[best].s


def _subdivide(state: OptState, box_id: int) -> None:
    part = state.partition
    middle, low, high, new_rec = part.trisect(box_id, state.problem)
    for box in (middle, low, high):
        _characterize(state, box)
    if new_rec is not None:
        update_record(state, middle.a, new_rec)
        if state.trace is not None:
            state.trace.append(
                (new_rec.trial_index, middle.a_real, new_rec.f_value,
                 state.f_min, state.phase)
            )
        _check_target(state, middle.a_real)
    _resolve_record_box(state)
    _check_stop(state)


def _check_target(state: OptState, x_real) -> None:
    cfg = state.config
    if cfg.target is not None and state.stop_reason is None:
        if target_reached(x_real, cfg.target, state.partition.lower, state.partition.upper):
            state.stop_reason = REASON_TARGET


def _check_stop(state: OptState) -> None:
    if state.stop_reason:
        return
    if state.trials >= state.config.p_max:
        state.stop_reason = REASON_BUDGET
        return
    if state.config.diagonal is not None:
        rel = math.sqrt(state.partition.max_diagonal_sq() / state._initial_diag_sq)
        if rel <= state.config.diagonal:
            state.stop_reason = REASON_DIAGONAL


def _report(state: OptState) -> RunReport:
    part = state.partition
    if not state.history or state.history[-1][0] != state.trials:
        state.history.append((state.trials, state.f_min, part.max_diagonal_sq()))
    return RunReport(
        method="new",
        trials=state.trials,
        boxes=part.m,
        f_min=state.f_min,
        x_min=state.x_min.real(part.lower, part.edge),
        stop_reason=state.stop_reason,
        history=state.history,
        trace=state.trace,
        snapshot=part.snapshot_lines() if state.config.keep_trace else None,
    )
