import math
from types import SimpleNamespace

import numpy as np
import pytest

from lipgrad import baselines, optimizer
from lipgrad.optimizer import (
    OptConfig,
    config_from_text,
    exploration_iteration,
    gradient_aligned,
    initialize,
    record_phase,
    run,
    update_record,
    _improved_one_percent,
    _resolve_record_box,
)
from lipgrad.problems import Problem, quadratic, with_audit
from lipgrad.stopping import StopTarget
from util import flat_problem, make_vertex, wavy_problem


def test_initialize_single_box():
    state = initialize(flat_problem(2, value=7.0), OptConfig(p_max=100))
    assert state.f_min == 7.0
    assert state.partition.m == 1
    assert state.partition.boxes[1].s == 0
    assert state.p == 0 and state.record_box == 1
    assert state.stop_reason is None


def test_initialize_budget_one_stops_immediately():
    state = initialize(flat_problem(2), OptConfig(p_max=1))
    assert state.stop_reason == "budget"
    assert state.trials == 1


def test_initialize_from_vertex_b():
    prob = wavy_problem(2)
    cfg = OptConfig(p_max=10, start_vertex="b", keep_trace=True)
    state = initialize(prob, cfg)
    assert state.trace[0][1] == (1.0, 1.0)
    assert state.f_min == prob.f(np.array([1.0, 1.0]))


def test_one_percent_improvement_rule():
    assert _improved_one_percent(-10.2, -10.0)
    assert not _improved_one_percent(-10.05, -10.0)
    assert _improved_one_percent(-10.1, -10.0)


def test_gradient_aligned_examples():
    assert not gradient_aligned((0.5, 1.0), (0.0, 0.0), (1.0, -1.0))
    assert gradient_aligned((0.5, 1.0), (0.0, 0.0), (1.0, 1.0))
    assert gradient_aligned((0.0, 0.0), (0.0, 0.0), (1.0, -1.0))


def test_update_record_requires_strict_improvement():
    prob = flat_problem(2)  # every value equal
    state = initialize(prob, OptConfig(p_max=100))
    first_vertex = state.x_min
    vertex2 = make_vertex((2, 1), 0)
    rec2 = state.partition.get_or_eval(vertex2, prob)
    update_record(state, vertex2, rec2)
    assert state.x_min == first_vertex  # tie does not move the record


def test_record_box_always_carries_the_record_point():
    def f(x):
        return float(-x[0] - x[1])

    def grad(x):
        return np.array([-1.0, -1.0])

    prob = Problem("lin", 2, (0.0, 0.0), (1.0, 1.0), f, grad)
    state = initialize(prob, OptConfig(p_max=50))
    for _ in range(6):
        exploration_iteration(state, state.partition.q_0)
    box = state.partition.boxes[state.record_box]
    assert box.a == state.x_min
    assert state.p == box.s
    assert state.f_min == min(r.f_value for r in state.partition.vertex_db.values())


def test_record_box_tie_resolution_rule():
    # minimal F first, then larger d, then smaller id
    boxes = {
        1: SimpleNamespace(F=2.0, d=1.0, s=3),
        2: SimpleNamespace(F=2.0, d=0.5, s=4),
        3: SimpleNamespace(F=5.0, d=1.0, s=3),
    }
    part = SimpleNamespace(boxes=boxes, boxes_at_vertex=lambda v: {1, 2, 3})
    state = SimpleNamespace(partition=part, x_min="v", record_box=None, p=None)
    _resolve_record_box(state)
    assert state.record_box == 1 and state.p == 3


def test_exploration_phase_group_ranges(monkeypatch):
    # Step 1.1 sweeps groups up to ceil((q_inf + p)/2), the final iteration
    # up to p itself
    state = initialize(wavy_problem(2), OptConfig(p_max=1000))
    for _ in range(8):
        exploration_iteration(state, state.partition.q_0)
    seen = []

    def spy(st, g_hi):
        seen.append((st.partition.q_inf, st.p, g_hi))
        exploration_iteration(st, g_hi)

    monkeypatch.setattr(optimizer, "exploration_iteration", spy)
    optimizer.exploration_phase(state)
    assert len(seen) == 3  # N Step-1.1 sweeps plus the final one
    for q_inf, p, g_hi in seen[:-1]:
        assert g_hi == -(-(q_inf + p) // 2)
    assert seen[-1][2] == seen[-1][1]


def test_exploration_phase_switch_after_final_iteration(monkeypatch):
    # with no record improvement the phase hands over to the record phase
    # exactly when the record box is not among the smallest
    state = initialize(flat_problem(2), OptConfig(p_max=10_000))
    monkeypatch.setattr(optimizer, "exploration_iteration", lambda st, g_hi: None)
    state.p = 0
    state.partition.q_0 = 3
    assert optimizer.exploration_phase(state) == "local"
    state.p = 3
    assert optimizer.exploration_phase(state) == "re-explore"


def test_exploration_iteration_single_box_is_subdivided():
    state = initialize(wavy_problem(2), OptConfig(p_max=100))
    exploration_iteration(state, 0)
    assert state.partition.m == 3
    assert state.k == 2


def test_record_phase_is_bounded_by_dimension():
    state = initialize(wavy_problem(2), OptConfig(p_max=1000))
    exploration_iteration(state, 0)
    m_before = state.partition.m
    record_phase(state)
    assert state.partition.m - m_before <= 2 * 2  # at most N subdivisions, 2 boxes each


def test_record_phase_stops_on_outward_gradient():
    # minimum at the trial corner: gradient already aligned, no subdivision
    prob = quadratic([0.0, 0.0], name="corner")
    state = initialize(prob, OptConfig(p_max=1000))
    m_before = state.partition.m
    record_phase(state)
    assert state.partition.m == m_before


def test_run_on_quadratic_finds_target():
    prob = quadratic([0.3, 0.7], name="quad2d")
    report = run(prob, OptConfig(target=StopTarget(prob.known_opt[0], 1e-4), p_max=100_000))
    assert report.stop_reason == "target_found"
    assert report.trials < 500
    assert abs(report.x_min[0] - 0.3) <= 0.01 and abs(report.x_min[1] - 0.7) <= 0.01
    # the derivative-free baseline needs the same order of trials; both are
    # far below the budget
    direct = baselines.direct_run(prob, OptConfig(target=StopTarget(prob.known_opt[0], 1e-4)))
    assert direct.stop_reason == "target_found" and direct.trials < 500


def test_run_budget_is_exact():
    prob, audit = with_audit(wavy_problem(2))
    report = run(prob, OptConfig(p_max=37))
    assert report.stop_reason == "budget"
    assert report.trials == 37
    assert audit.f_calls == 37 and audit.grad_calls == 37


def test_run_history_is_monotone():
    report = run(wavy_problem(2), OptConfig(p_max=300))
    trials = [h[0] for h in report.history]
    f_mins = [h[1] for h in report.history]
    assert all(a <= b for a, b in zip(trials, trials[1:]))
    assert all(a >= b for a, b in zip(f_mins, f_mins[1:]))


def test_run_diagonal_stop_rule():
    report = run(wavy_problem(2), OptConfig(p_max=100_000, diagonal=0.2))
    assert report.stop_reason == "diagonal"
    rel = math.sqrt(report.history[-1][2] / report.history[0][2])
    assert rel <= 0.2


def test_run_is_deterministic():
    cfg = OptConfig(p_max=200, keep_trace=True)
    r1 = run(wavy_problem(2), cfg)
    r2 = run(wavy_problem(2), cfg)
    assert r1.trace == r2.trace
    assert r1.snapshot == r2.snapshot
    assert (r1.trials, r1.boxes, r1.f_min, r1.x_min) == (r2.trials, r2.boxes, r2.f_min, r2.x_min)


def test_run_alternates_phases():
    cls_prob = wavy_problem(2)
    report = run(cls_prob, OptConfig(p_max=400, keep_trace=True))
    phases = [entry[4] for entry in report.trace]
    assert "explore" in phases
    assert "local" in phases
    # never more than N new trials in a row during record improvement
    streak = 0
    for phase in phases:
        streak = streak + 1 if phase == "local" else 0
        assert streak <= 2


def test_config_validation():
    with pytest.raises(ValueError):
        OptConfig(epsilon=-1.0)
    with pytest.raises(ValueError):
        OptConfig(p_max=0)
    with pytest.raises(ValueError):
        OptConfig(start_vertex="c")
    with pytest.raises(ValueError):
        OptConfig(diagonal=1.5)


def test_config_from_text():
    cfg = config_from_text("epsilon=1e-3; pmax=500; start=b; target_x=0.3,0.7; target_delta=1e-4")
    assert cfg.epsilon == 1e-3
    assert cfg.p_max == 500
    assert cfg.start_vertex == "b"
    assert cfg.target == StopTarget((0.3, 0.7), 1e-4)
    assert config_from_text("").p_max == 1_000_000
