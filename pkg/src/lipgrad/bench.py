"""Benchmark harness: method-by-class runs, comparison criteria, diagrams.

Every (method, problem) pair runs under the same stop rule (target hit or
trial budget) and the same trial accounting. Aggregation is single-threaded
and ordered by problem index, so reports are byte-identical no matter how
many workers executed the runs.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import baselines, optimizer, problems
from .optimizer import OptConfig, RunReport
from .stopping import REASON_TARGET, StopTarget, target_reached  # noqa: F401  (re-export)

_METHOD_ORDER = ("new", "direct", "directl")


def run_method(name: str, problem: problems.Problem, config: OptConfig) -> RunReport:
    if name == "new":
        return optimizer.run(problem, config)
    if name == "direct":
        return baselines.direct_run(problem, config)
    if name == "directl":
        return baselines.directl_run(problem, config)
    raise ValueError(f"unknown method {name!r} (expected new, direct or directl)")


def criterion_C1(trials: list[int], solved: list[bool]) -> tuple[int, int, int]:
    """Worst-case trial count: (max, 1-based index of first max, #unsolved).

    Unsolved entries carry the budget they exhausted, so with any unsolved
    problem the value is a lower bound and is rendered as "> value (j)".
    """
    worst = max(trials)
    s_star = trials.index(worst) + 1
    return worst, s_star, sum(1 for ok in solved if not ok)


def format_c1(c1: tuple[int, int, int]) -> str:
    value, s_star, unsolved = c1
    if unsolved:
        return f"> {value} ({unsolved})"
    return f"{value} (s={s_star})"


def criterion_C3(trials: list[int], solved: list[bool], p_max: int) -> tuple[float, bool]:
    """Average trial count, substituting the budget for unsolved problems.

    The flag marks the value as a lower estimate of the true average.
    """
    adjusted = [t if ok else p_max for t, ok in zip(trials, solved)]
    return sum(adjusted) / len(adjusted), not all(solved)


def criterion_C4(trials_new: list[int], trials_other: list[int]) -> tuple[int, int]:
    """(p, q): problems where the competitor did strictly fewer / more trials."""
    if len(trials_new) != len(trials_other):
        raise ValueError("trial lists must have equal length")
    p = sum(1 for a, b in zip(trials_new, trials_other) if b < a)
    q = sum(1 for a, b in zip(trials_new, trials_other) if a < b)
    return p, q


def fifty_percent(trials: list[int]) -> int:
    """Smallest budget solving at least half of the problems' runs."""
    k = (len(trials) + 1) // 2
    return sorted(trials)[k - 1]


def _ratio(comp: float, comp_unsolved: bool, new: float, new_unsolved: bool) -> str:
    prefix = ""
    if comp_unsolved and not new_unsolved:
        prefix = "> "
    elif new_unsolved and not comp_unsolved:
        prefix = "< "
    elif comp_unsolved and new_unsolved:
        prefix = "~ "
    return f"{prefix}{comp / new:.2f}"


@dataclass
class ClassReport:
    """Per-problem results and the C1-C4 summary for one class run."""

    class_info: dict
    methods: list[str]
    delta: float
    p_max: int
    epsilon: float
    rows: list[dict]
    summaries: dict[str, dict]
    c4: dict[str, tuple[int, int]]
    ratios: dict[str, dict[str, str]]
    invalid: list[tuple[int, str]]

    def to_text(self) -> str:
        info = self.class_info
        out = [
            f"class: {info['difficulty']} dim={info['dim']} count={info['count']} "
            f"seed={info['seed']}",
            f"delta={self.delta!r} p_max={self.p_max} epsilon={self.epsilon!r}",
        ]
        if self.invalid:
            for index, msg in self.invalid:
                out.append(f"warning: problem {index} invalid, excluded: {msg}")
        out.append(f"{'method':<9} {'50%':>8} {'100% (C1)':>18} {'C2':>9} {'C3':>12}")
        for m in self.methods:
            s = self.summaries[m]
            c3 = f"{'> ' if s['c3_lower_bound'] else ''}{s['c3']:.2f}"
            out.append(
                f"{m:<9} {s['fifty']:>8} {format_c1(s['c1']):>18} "
                f"{s['c2']:>9} {c3:>12}"
            )
        for other, (p, q) in self.c4.items():
            out.append(f"C4 {other}:new = {p}:{q}")
        for other, r in self.ratios.items():
            out.append(f"improvement {other}/new: C1 {r['c1']}  C3 {r['c3']}")
        return "\n".join(out) + "\n"

    def to_csv(self) -> str:
        lines = ["index,method,trials,boxes,solved,valid"]
        for row in self.rows:
            for m in self.methods:
                if row["valid"]:
                    r = row["results"][m]
                    lines.append(
                        f"{row['index']},{m},{r['trials']},{r['boxes']},"
                        f"{int(r['solved'])},1"
                    )
                else:
                    lines.append(f"{row['index']},{m},,,,0")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "class": self.class_info,
            "delta": self.delta,
            "p_max": self.p_max,
            "epsilon": self.epsilon,
            "methods": self.methods,
            "rows": self.rows,
            "summaries": self.summaries,
            "c4": {k: list(v) for k, v in self.c4.items()},
            "ratios": self.ratios,
            "invalid": [list(item) for item in self.invalid],
        }
        return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def _run_one(args) -> dict:
    cls, index, methods, delta, p_max, epsilon = args
    try:
        problem = problems.generate(cls, index)
    except problems.GenerationError as exc:
        return {"index": index, "valid": False, "error": str(exc), "results": {}}
    x_star, _ = problem.known_opt
    target = StopTarget(x_star, delta)
    results = {}
    for m in methods:
        config = OptConfig(epsilon=epsilon, p_max=p_max, target=target)
        report = run_method(m, problem, config)
        results[m] = {
            "trials": report.trials,
            "boxes": report.boxes,
            "solved": report.stop_reason == REASON_TARGET,
            "f_min": report.f_min,
        }
    return {"index": index, "valid": True, "error": "", "results": results}


def run_class(
    methods,
    cls: problems.ProblemClass,
    delta: float,
    p_max: int,
    workers: int = 1,
    epsilon: float = 1e-4,
    out_dir=None,
) -> ClassReport:
    """Run every method on every problem of the class and aggregate C1-C4."""
    methods = list(methods)
    if not methods:
        raise ValueError("need at least one method")
    for m in methods:
        if m not in _METHOD_ORDER:
            raise ValueError(f"unknown method {m!r}")
    jobs = [
        (cls, index, tuple(methods), delta, p_max, epsilon)
        for index in range(1, cls.count + 1)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_one, jobs))
    else:
        rows = [_run_one(job) for job in jobs]
    rows.sort(key=lambda row: row["index"])

    invalid = [(row["index"], row["error"]) for row in rows if not row["valid"]]
    valid_rows = [row for row in rows if row["valid"]]
    if not valid_rows:
        raise problems.GenerationError("every problem of the class failed to generate")

    summaries = {}
    for m in methods:
        trials = [row["results"][m]["trials"] for row in valid_rows]
        boxes = [row["results"][m]["boxes"] for row in valid_rows]
        solved = [row["results"][m]["solved"] for row in valid_rows]
        c1 = criterion_C1(trials, solved)
        c3, lower = criterion_C3(trials, solved, p_max)
        summaries[m] = {
            "c1": c1,
            "c2": boxes[c1[1] - 1],
            "c3": c3,
            "c3_lower_bound": lower,
            "fifty": fifty_percent(trials),
            "unsolved": c1[2],
        }

    c4 = {}
    ratios = {}
    if "new" in methods:
        new_trials = [row["results"]["new"]["trials"] for row in valid_rows]
        new_unsolved = summaries["new"]["unsolved"] > 0
        for m in methods:
            if m == "new":
                continue
            other_trials = [row["results"][m]["trials"] for row in valid_rows]
            c4[m] = criterion_C4(new_trials, other_trials)
            other_unsolved = summaries[m]["unsolved"] > 0
            ratios[m] = {
                "c1": _ratio(summaries[m]["c1"][0], other_unsolved,
                             summaries["new"]["c1"][0], new_unsolved),
                "c3": _ratio(summaries[m]["c3"], other_unsolved,
                             summaries["new"]["c3"], new_unsolved),
            }

    report = ClassReport(
        class_info=dict(
            seed=cls.seed, dim=cls.dim, count=cls.count, difficulty=cls.difficulty,
            n_minima=cls.n_minima,
        ),
        methods=methods,
        delta=delta,
        p_max=p_max,
        epsilon=epsilon,
        rows=rows,
        summaries={m: dict(s, c1=list(s["c1"])) for m, s in summaries.items()},
        c4=c4,
        ratios=ratios,
        invalid=invalid,
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(report.to_text())
        (out / "report.csv").write_text(report.to_csv())
        (out / "report.json").write_text(report.to_json())
    return report


# -- trace files and diagrams -------------------------------------------------

def write_trace(report: RunReport, problem: problems.Problem, path) -> None:
    """Line-oriented run trace: domain header, trial points, final boxes."""
    if report.trace is None or report.snapshot is None:
        raise ValueError("run was not configured with keep_trace=True")
    lines = [
        "# domain "
        + ",".join(repr(v) for v in problem.lower)
        + " "
        + ",".join(repr(v) for v in problem.upper)
    ]
    for idx, x, f, f_min, phase in report.trace:
        lines.append(
            f"T {idx} {','.join(repr(v) for v in x)} {f!r} {f_min!r} {phase}"
        )
    lines.extend(f"B {line}" for line in report.snapshot)
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace(path) -> dict:
    """Parse a trace file into domain bounds, trial points and boxes."""
    lower = upper = None
    trials = []
    boxes = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("# domain"):
            _, _, lo_s, hi_s = line.split()
            lower = tuple(float(v) for v in lo_s.split(","))
            upper = tuple(float(v) for v in hi_s.split(","))
        elif line.startswith("T "):
            _, idx, xs, f, f_min, phase = line.split()
            trials.append(
                (int(idx), tuple(float(v) for v in xs.split(",")),
                 float(f), float(f_min), phase)
            )
        elif line.startswith("B "):
            _, box_id, s, a_s, b_s = line.split()
            a = tuple(_parse_frac(v) for v in a_s.split(","))
            b = tuple(_parse_frac(v) for v in b_s.split(","))
            boxes.append((int(box_id), int(s), a, b))
    if lower is None:
        raise ValueError(f"{path}: missing domain header")
    return {"lower": lower, "upper": upper, "trials": trials, "boxes": boxes}


def _parse_frac(text: str) -> float:
    num, _, den = text.partition("/")
    return int(num) / int(den)


def read_hull_snapshot(path) -> dict:
    """Parse the selection module's hull snapshot lines."""
    dots = []
    slopes = []
    for raw in Path(path).read_text().splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "D":
            dots.append(
                dict(box_id=int(parts[1]), d=float(parts[2]), F=float(parts[3]),
                     s=int(parts[4]), selected=bool(int(parts[5])))
            )
        elif parts[0] == "S":
            slopes.append((int(parts[1]), float(parts[2]), float(parts[3])))
    return {"dots": dots, "slopes": slopes}


_SVG_SIZE = 640
_SVG_MARGIN = 50


def _svg_document(body: list[str]) -> str:
    size = _SVG_SIZE + 2 * _SVG_MARGIN
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def _axes() -> list[str]:
    m = _SVG_MARGIN
    top = m
    bottom = m + _SVG_SIZE
    right = m + _SVG_SIZE
    return [
        f'<line x1="{m}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{m}" y1="{bottom}" x2="{m}" y2="{top}" stroke="black"/>',
    ]


def emit_diagram(source, kind: str, out) -> Path:
    """Render a trace (partition2d) or hull snapshot (hull) as an SVG file."""
    if kind == "partition2d":
        svg = _partition_svg(read_trace(source))
    elif kind == "hull":
        svg = _hull_svg(read_hull_snapshot(source))
    else:
        raise ValueError(f"unknown diagram kind {kind!r}")
    out = Path(out)
    out.write_text(svg)
    return out


def _partition_svg(trace: dict) -> str:
    if len(trace["lower"]) != 2:
        raise ValueError("partition2d diagrams require a two-dimensional domain")
    lo = trace["lower"]
    hi = trace["upper"]
    edge = (hi[0] - lo[0], hi[1] - lo[1])
    m = _SVG_MARGIN

    def px(u):  # normalized x -> pixels
        return m + u * _SVG_SIZE

    def py(v):  # normalized y -> pixels, flipped
        return m + (1.0 - v) * _SVG_SIZE

    body = _axes()
    for _box_id, _s, a, b in sorted(trace["boxes"], key=lambda t: t[0]):
        x0, x1 = sorted((a[0], b[0]))
        y0, y1 = sorted((a[1], b[1]))
        body.append(
            f'<rect x="{px(x0):.2f}" y="{py(y1):.2f}" '
            f'width="{(x1 - x0) * _SVG_SIZE:.2f}" height="{(y1 - y0) * _SVG_SIZE:.2f}" '
            f'fill="none" stroke="black" stroke-width="0.8"/>'
        )
    for idx, x, _f, _f_min, _phase in trace["trials"]:
        u = (x[0] - lo[0]) / edge[0]
        v = (x[1] - lo[1]) / edge[1]
        body.append(f'<circle cx="{px(u):.2f}" cy="{py(v):.2f}" r="3" fill="black"/>')
        body.append(
            f'<text x="{px(u) + 4:.2f}" y="{py(v) - 4:.2f}" font-size="10">{idx}</text>'
        )
    return _svg_document(body)


def _hull_svg(snapshot: dict) -> str:
    dots = snapshot["dots"]
    body = _axes()
    if dots:
        d_max = max(t["d"] for t in dots) or 1.0
        f_lo = min(t["F"] for t in dots)
        f_hi = max(t["F"] for t in dots)
        f_span = (f_hi - f_lo) or 1.0
        m = _SVG_MARGIN

        def px(d):
            return m + (d / d_max) * (_SVG_SIZE * 0.95)

        def py(F):
            return m + (1.0 - (F - f_lo) / f_span) * (_SVG_SIZE * 0.9) + _SVG_SIZE * 0.05

        chosen = sorted((t for t in dots if t["selected"]), key=lambda t: t["d"])
        if len(chosen) > 1:
            points = " ".join(f"{px(t['d']):.2f},{py(t['F']):.2f}" for t in chosen)
            body.append(f'<polyline points="{points}" fill="none" stroke="black"/>')
        for t in dots:
            fill = "black" if t["selected"] else "white"
            body.append(
                f'<circle cx="{px(t["d"]):.2f}" cy="{py(t["F"]):.2f}" r="5" '
                f'fill="{fill}" stroke="black"/>'
            )
        body.append(
            f'<text x="{m + _SVG_SIZE - 10}" y="{m + _SVG_SIZE + 30}" font-size="12">d</text>'
        )
        body.append(f'<text x="{m - 30}" y="{m + 10}" font-size="12">F</text>')
    return _svg_document(body)
