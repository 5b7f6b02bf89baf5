"""Objective functions for the optimizer and the benchmark harness.

Provides the problem contract (value + gradient over a box domain), a fixed
analytic suite with closed-form gradient-Lipschitz constants, and a seeded
generator of continuously differentiable multiextremal test problems with a
known global minimizer.

Generated problems are a paraboloid deformed inside pairwise-disjoint balls.
Inside ball i the function is blended toward a local quadratic cup with
bottom value v_i using the weight w = (1 - (rho/r)^2)^2, rho = |x - c_i|;
w and its gradient vanish at the ball boundary, so the function is C^1
everywhere, and the blend is a convex combination, so f >= min(v_i, 0) with
the unique global minimum at the center of the designated global ball.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np


class GenerationError(RuntimeError):
    """Problem-class parameters could not be realized (e.g. balls do not fit)."""


@dataclass(frozen=True)
class Problem:
    """A box-constrained objective with an analytic gradient.

    ``f`` and ``grad`` take a length-``dim`` point; evaluations must be pure.
    ``f_batch``, when present, evaluates an ``(M, dim)`` array of points at
    once and exists only for test oracles and certificates.
    """

    name: str
    dim: int
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    f: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    known_opt: Optional[tuple[tuple[float, ...], float]] = None
    known_K: Optional[float] = None
    f_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @property
    def edge(self) -> tuple[float, ...]:
        return tuple(u - l for l, u in zip(self.lower, self.upper))


@dataclass
class EvalAudit:
    """Mutable call counters attached by :func:`with_audit`."""

    f_calls: int = 0
    grad_calls: int = 0


def with_audit(problem: Problem) -> tuple[Problem, EvalAudit]:
    """Wrap a problem so every f / gradient call is counted."""
    audit = EvalAudit()

    def f(x):
        audit.f_calls += 1
        return problem.f(x)

    def grad(x):
        audit.grad_calls += 1
        return problem.grad(x)

    wrapped = Problem(
        name=problem.name,
        dim=problem.dim,
        lower=problem.lower,
        upper=problem.upper,
        f=f,
        grad=grad,
        known_opt=problem.known_opt,
        known_K=problem.known_K,
        f_batch=None,
    )
    return wrapped, audit


def quadratic(
    center,
    matrix=None,
    lower=None,
    upper=None,
    name: str = "quadratic",
) -> Problem:
    """f(x) = (x-c)' A (x-c) with symmetric A (identity by default).

    The gradient 2A(x-c) has Lipschitz constant 2*rho(A) (spectral radius),
    recorded in ``known_K``. ``known_opt`` is set when A is positive
    semidefinite and the center lies inside the bounds.
    """
    c = np.asarray(center, dtype=float)
    n = c.size
    A = np.eye(n) if matrix is None else np.asarray(matrix, dtype=float)
    A = 0.5 * (A + A.T)
    eigs = np.linalg.eigvalsh(A)
    K = 2.0 * float(np.max(np.abs(eigs)))
    lo = tuple(float(v) for v in (np.zeros(n) if lower is None else np.asarray(lower, float)))
    hi = tuple(float(v) for v in (np.ones(n) if upper is None else np.asarray(upper, float)))

    def f(x):
        r = np.asarray(x, dtype=float) - c
        return float(r @ A @ r)

    def grad(x):
        r = np.asarray(x, dtype=float) - c
        return 2.0 * (A @ r)

    def f_batch(X):
        R = np.asarray(X, dtype=float) - c
        return np.einsum("ij,jk,ik->i", R, A, R)

    opt = None
    if float(np.min(eigs)) >= 0.0 and all(l <= ci <= u for l, ci, u in zip(lo, c, hi)):
        opt = (tuple(float(v) for v in c), 0.0)
    return Problem(name, n, lo, hi, f, grad, known_opt=opt, known_K=K, f_batch=f_batch)


def random_quadratic(rng: np.random.Generator, dim: int) -> Problem:
    """A random (possibly indefinite) quadratic on [0, 1]^dim with known K."""
    M = rng.uniform(-1.0, 1.0, size=(dim, dim))
    c = rng.uniform(0.2, 0.8, size=dim)
    return quadratic(c, M + M.T, lower=[0.0] * dim, upper=[1.0] * dim, name=f"randquad{dim}d")


def _trig_axis_minimum() -> tuple[float, float]:
    """Global minimum of t^2 + sin(5*pi*t)/10 on [0, 1].

    Dense scan locates the winning basin; bisection on the derivative
    2t + (pi/2) cos(5*pi*t) then pins the minimizer.
    """
    t = np.linspace(0.0, 1.0, 20001)
    g = t * t + np.sin(5.0 * math.pi * t) / 10.0
    i = int(np.argmin(g))
    lo = max(0.0, t[i] - 1e-3)
    hi = min(1.0, t[i] + 1e-3)

    def dg(u):
        return 2.0 * u + 0.5 * math.pi * math.cos(5.0 * math.pi * u)

    if dg(lo) > 0 or dg(hi) < 0:  # minimum at the boundary of the scan cell
        ts = lo if g[i] > lo * lo + math.sin(5 * math.pi * lo) / 10 else t[i]
        return float(ts), float(ts * ts + math.sin(5 * math.pi * ts) / 10.0)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if dg(mid) < 0:
            lo = mid
        else:
            hi = mid
    ts = 0.5 * (lo + hi)
    return float(ts), float(ts * ts + math.sin(5.0 * math.pi * ts) / 10.0)


def trig_separable(dim: int) -> Problem:
    """f(x) = sum x_j^2 + sin(5*pi*x_j)/10 on [0, 1]^dim (multiextremal)."""
    ts, fs = _trig_axis_minimum()

    def f(x):
        x = np.asarray(x, dtype=float)
        return float(np.sum(x * x + np.sin(5.0 * math.pi * x) / 10.0))

    def grad(x):
        x = np.asarray(x, dtype=float)
        return 2.0 * x + 0.5 * math.pi * np.cos(5.0 * math.pi * x)

    def f_batch(X):
        X = np.asarray(X, dtype=float)
        return np.sum(X * X + np.sin(5.0 * math.pi * X) / 10.0, axis=1)

    # |d2/dt2| = |2 - 2.5*pi^2 sin(5 pi t)| <= 2 + 2.5*pi^2, separable
    K = 2.0 + 2.5 * math.pi * math.pi
    opt = (tuple([ts] * dim), dim * fs)
    return Problem(
        f"trig{dim}d", dim, tuple([0.0] * dim), tuple([1.0] * dim),
        f, grad, known_opt=opt, known_K=K, f_batch=f_batch,
    )


def analytic_suite() -> list[Problem]:
    """Fixed problems with closed-form gradient-Lipschitz constants."""
    aniso = np.array([[3.0, 1.0, 0.0], [1.0, 2.0, 0.5], [0.0, 0.5, 1.0]])
    return [
        quadratic([0.0], lower=[-1.0], upper=[1.0], name="quad1d"),
        quadratic([0.3, 0.7], name="quad2d"),
        quadratic([0.2, -0.3, 0.5], aniso, lower=[-1.0] * 3, upper=[1.0] * 3, name="quad3d-aniso"),
        trig_separable(1),
        trig_separable(2),
    ]


def fd_check(problem: Problem, samples: int = 100, step: float = 1e-6, seed: int = 0) -> float:
    """Max relative error between analytic and central-difference gradients.

    Uses per-axis steps of ``step * (upper - lower)`` at interior points;
    errors are scaled by max(1, |grad|_inf) so near-flat regions do not blow
    up the ratio.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    rng = np.random.default_rng(seed)
    lo = np.asarray(problem.lower)
    hi = np.asarray(problem.upper)
    h = step * (hi - lo)
    worst = 0.0
    for _ in range(samples):
        x = rng.uniform(lo + 2 * h, hi - 2 * h)
        g = np.asarray(problem.grad(x), dtype=float)
        fd = np.empty_like(g)
        for j in range(problem.dim):
            xp = x.copy()
            xm = x.copy()
            xp[j] += h[j]
            xm[j] -= h[j]
            fd[j] = (problem.f(xp) - problem.f(xm)) / (2.0 * h[j])
        err = float(np.max(np.abs(fd - g))) / max(1.0, float(np.max(np.abs(g))))
        worst = max(worst, err)
    return worst


@dataclass(frozen=True)
class ProblemClass:
    """Descriptor of a reproducible class of generated problems.

    ``difficulty`` only picks default knobs; the stored knob values are what
    define the class. Same descriptor -> identical problems on any platform.
    """

    seed: int
    dim: int
    count: int = 100
    difficulty: str = "simple"
    n_minima: int = 10
    global_radius: float = 0.22
    radius_range: tuple[float, float] = (0.10, 0.22)
    value_gap: float = 0.30
    lower: float = -1.0
    upper: float = 1.0


_DIFFICULTY_KNOBS = {
    "simple": dict(global_radius=0.22, radius_range=(0.10, 0.22), value_gap=0.30),
    "hard": dict(global_radius=0.10, radius_range=(0.06, 0.13), value_gap=0.08),
}


def problem_class(
    dim: int,
    difficulty: str = "simple",
    seed: int = 0,
    count: int = 100,
    n_minima: int = 10,
) -> ProblemClass:
    """Build a class descriptor with difficulty-derived generator knobs."""
    try:
        knobs = _DIFFICULTY_KNOBS[difficulty]
    except KeyError:
        raise ValueError(f"unknown difficulty {difficulty!r}") from None
    return ProblemClass(seed=seed, dim=dim, count=count, difficulty=difficulty,
                        n_minima=n_minima, **knobs)


_F_STAR = -1.0
_SEPARATION = 0.04
_PLACEMENT_TRIES = 2000


def generate(cls: ProblemClass, index: int) -> Problem:
    """Problem number ``index`` (1-based) of the class, deterministically.

    The global minimum is f* = -1 at the center of the first placed ball;
    every other deformation bottom sits at least ``value_gap`` above f*, and
    the undeformed paraboloid never goes below 0.
    """
    if not 1 <= index <= cls.count:
        raise ValueError(f"index {index} outside 1..{cls.count}")
    rng = np.random.default_rng([cls.seed, cls.dim, index])
    n = cls.dim
    lo = np.full(n, cls.lower)
    hi = np.full(n, cls.upper)

    radii = [cls.global_radius] + [
        float(rng.uniform(*cls.radius_range)) for _ in range(cls.n_minima - 1)
    ]
    centers: list[np.ndarray] = []
    for i, r in enumerate(radii):
        placed = False
        for _ in range(_PLACEMENT_TRIES):
            c = rng.uniform(lo + r + _SEPARATION, hi - r - _SEPARATION)
            if all(
                float(np.linalg.norm(c - cj)) >= r + rj + _SEPARATION
                for cj, rj in zip(centers, radii)
            ):
                centers.append(c)
                placed = True
                break
        if not placed:
            raise GenerationError(
                f"could not place ball {i + 1}/{cls.n_minima} (dim={n}, "
                f"radius={r:.3f}); shrink radii or n_minima"
            )

    T = rng.uniform(lo, hi)
    values = np.empty(cls.n_minima)
    values[0] = _F_STAR
    values[1:] = rng.uniform(_F_STAR + cls.value_gap, -0.05, size=cls.n_minima - 1)

    C = np.vstack(centers)
    R = np.asarray(radii)
    R2 = R * R

    def f(x):
        x = np.asarray(x, dtype=float)
        dT = x - T
        p = float(dT @ dT)
        dx = x - C
        rho2 = np.einsum("ij,ij->i", dx, dx)
        inside = np.nonzero(rho2 < R2)[0]
        if inside.size == 0:
            return p
        i = int(inside[0])
        u = rho2[i] / R2[i]
        w = (1.0 - u) ** 2
        h = values[i] + rho2[i]
        return p + w * (h - p)

    def grad(x):
        x = np.asarray(x, dtype=float)
        dT = x - T
        p = float(dT @ dT)
        gp = 2.0 * dT
        dx = x - C
        rho2 = np.einsum("ij,ij->i", dx, dx)
        inside = np.nonzero(rho2 < R2)[0]
        if inside.size == 0:
            return gp
        i = int(inside[0])
        u = rho2[i] / R2[i]
        w = (1.0 - u) ** 2
        h = values[i] + rho2[i]
        gw = -2.0 * (1.0 - u) * (2.0 * dx[i] / R2[i])
        gh = 2.0 * dx[i]
        return gp + w * (gh - gp) + (h - p) * gw

    def f_batch(X):
        X = np.asarray(X, dtype=float)
        dT = X - T
        out = np.einsum("ij,ij->i", dT, dT)
        for i in range(cls.n_minima):
            dx = X - C[i]
            rho2 = np.einsum("ij,ij->i", dx, dx)
            mask = rho2 < R2[i]
            if not np.any(mask):
                continue
            u = rho2[mask] / R2[i]
            w = (1.0 - u) ** 2
            h = values[i] + rho2[mask]
            out[mask] = out[mask] + w * (h - out[mask])
        return out

    name = f"gen-{cls.difficulty}-{n}d-s{cls.seed}-p{index}"
    opt = (tuple(float(v) for v in centers[0]), _F_STAR)
    return Problem(
        name, n, tuple(lo), tuple(hi), f, grad,
        known_opt=opt, known_K=None, f_batch=f_batch,
    )


def class_manifest(cls: ProblemClass) -> dict:
    """Auditable description of a class: knobs plus every known optimum."""
    entries = []
    for i in range(1, cls.count + 1):
        p = generate(cls, i)
        x_star, f_star = p.known_opt
        entries.append({"index": i, "x_star": list(x_star), "f_star": f_star})
    return {
        "seed": cls.seed,
        "dim": cls.dim,
        "count": cls.count,
        "difficulty": cls.difficulty,
        "n_minima": cls.n_minima,
        "global_radius": cls.global_radius,
        "radius_range": list(cls.radius_range),
        "value_gap": cls.value_gap,
        "lower": cls.lower,
        "upper": cls.upper,
        "problems": entries,
    }


def write_manifest(cls: ProblemClass, path) -> None:
    Path(path).write_text(json.dumps(class_manifest(cls), indent=1, sort_keys=True))


def load_manifest(path) -> ProblemClass:
    """Rebuild the class descriptor from a manifest file."""
    data = json.loads(Path(path).read_text())
    return ProblemClass(
        seed=data["seed"],
        dim=data["dim"],
        count=data["count"],
        difficulty=data["difficulty"],
        n_minima=data["n_minima"],
        global_radius=data["global_radius"],
        radius_range=tuple(data["radius_range"]),
        value_gap=data["value_gap"],
        lower=data["lower"],
        upper=data["upper"],
    )
