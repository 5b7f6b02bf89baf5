"""Stop rules shared by the gradient method and the baselines."""

from __future__ import annotations

from dataclasses import dataclass

REASON_BUDGET = "budget"
REASON_TARGET = "target_found"
REASON_DIAGONAL = "diagonal"


@dataclass(frozen=True)
class StopTarget:
    """Known minimizer plus the volume-based accuracy coefficient."""

    x_star: tuple[float, ...]
    delta: float

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must be in (0, 1]")


def target_reached(x, target: StopTarget, lower, upper) -> bool:
    """True when x lies within delta^(1/N) of x* per axis, scaled by the edges."""
    n = len(target.x_star)
    tol = target.delta ** (1.0 / n)
    return all(
        abs(xi - si) <= tol * (hi - lo)
        for xi, si, lo, hi in zip(x, target.x_star, lower, upper)
    )
