"""Approximate-pass scheduling rule."""

import structsvm as ss
from structsvm.autotune import IterationProgress, should_continue_approx


def _progress(gain, duration, passes_done=1, start_bound=0.0, start_time=0.0):
    return IterationProgress(
        iter_start_bound=start_bound,
        iter_start_time=start_time,
        last_pass_gain=gain,
        last_pass_duration=duration,
        approx_passes_done=passes_done,
    )


class TestSlopeRule:
    def test_zero_gain_stops(self):
        progress = _progress(gain=0.0, duration=1.0)
        assert should_continue_approx(progress, now=2.0, current_bound=3.0) is False

    def test_steeper_recent_slope_continues(self):
        # Last pass gained 2 in 1 unit; the iteration gained 3 in 2 units.
        progress = _progress(gain=2.0, duration=1.0)
        assert should_continue_approx(progress, now=2.0, current_bound=3.0) is True

    def test_flatter_recent_slope_stops(self):
        # Last pass gained 1 in 2 units; the iteration gained 3 in 2 units.
        progress = _progress(gain=1.0, duration=2.0)
        assert should_continue_approx(progress, now=2.0, current_bound=3.0) is False

    def test_first_consultation_always_grants_a_pass(self):
        progress = _progress(gain=0.0, duration=0.0, passes_done=0)
        assert should_continue_approx(progress, now=5.0, current_bound=0.0) is True

    def test_frozen_clock_stops_after_granted_pass(self):
        progress = _progress(gain=1.0, duration=0.0, passes_done=1)
        assert should_continue_approx(progress, now=0.0, current_bound=1.0) is False

    def test_tiny_duration_is_clamped_not_divided(self):
        progress = _progress(gain=1.0, duration=0.0, passes_done=1)
        assert should_continue_approx(progress, now=2.0, current_bound=1.0) is True


class TestInvariances:
    def test_pure_function(self):
        progress = _progress(gain=2.0, duration=1.0)
        results = {should_continue_approx(progress, 2.0, 3.0) for _ in range(10)}
        assert results == {True}

    def test_time_scale_invariance(self):
        for scale in (10.0, 1000.0, 1e6):
            base = should_continue_approx(_progress(2.0, 1.0), now=2.0, current_bound=3.0)
            scaled = should_continue_approx(
                _progress(2.0, 1.0 * scale, start_time=0.0), now=2.0 * scale, current_bound=3.0
            )
            assert base == scaled

    def test_gain_scale_invariance(self):
        for scale in (0.01, 7.0, 1e4):
            base = should_continue_approx(_progress(2.0, 1.0), now=2.0, current_bound=3.0)
            scaled = should_continue_approx(
                _progress(2.0 * scale, 1.0, start_bound=0.0), now=2.0, current_bound=3.0 * scale
            )
            assert base == scaled
