"""Scheduling rule for approximate passes.

After a pass that reuses cached planes instead of calling the exact oracle,
the training loop must decide whether another such pass is worth its cost.
The rule compares the objective gain per unit time of the most recent
approximate pass against the average gain per unit time of the whole
current iteration; approximate passes continue only while the recent slope
is the steeper one. This extrapolates the recent behavior of the
runtime-versus-objective curve: a flattening slope means the cached planes
are exhausted and fresh oracle calls will pay off more.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["IterationProgress", "MIN_DURATION", "should_continue_approx"]

# Durations are clamped from below so simulated clocks and passes faster
# than the clock resolution never divide by zero.
MIN_DURATION = 1e-9


@dataclass(frozen=True)
class IterationProgress:
    """Timing and objective snapshot of the current outer iteration.

    ``last_pass_gain`` and ``last_pass_duration`` describe the most recent
    approximate pass; ``approx_passes_done`` counts the approximate passes
    already run this iteration, letting the decision stay a pure function
    of its inputs.
    """

    iter_start_bound: float
    iter_start_time: float
    last_pass_gain: float
    last_pass_duration: float
    approx_passes_done: int = 0


def should_continue_approx(
    progress: IterationProgress, now: float, current_bound: float
) -> bool:
    """Decide whether the training loop should run another approximate pass.

    The first consultation of an iteration always grants a pass: the slope
    comparison needs the gain and duration of at least one approximate pass,
    and running one is the cheapest way to obtain that data point. After
    that, returns True iff the last pass's gain per unit time exceeds the
    average gain per unit time since the iteration started. A pass that
    gained nothing always stops the sequence, and an iteration whose elapsed
    time is still below the clock resolution stops after the granted pass.
    """
    if progress.approx_passes_done == 0:
        return True
    if progress.last_pass_gain <= 0.0:
        return False
    elapsed = now - progress.iter_start_time
    if elapsed < MIN_DURATION:
        return False
    last_slope = progress.last_pass_gain / max(progress.last_pass_duration, MIN_DURATION)
    iteration_slope = (current_bound - progress.iter_start_bound) / elapsed
    return last_slope > iteration_slope
