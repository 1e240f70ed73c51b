"""Tests for domain randomization draws."""

import numpy as np

from src.env.randomization import DomainRandomization, sample_domain_randomization, stack_field
from src.schemas import PhysicsConfig, RandomizationRanges


def test_draws_stay_within_ranges():
    ranges = RandomizationRanges()
    rng = np.random.default_rng(7)
    for _ in range(200):
        draw = sample_domain_randomization(rng, ranges)
        for name in ("added_base_mass", "friction", "restitution", "gravity_delta", "com_shift",
                     "motor_strength", "kp_scale", "kd_scale", "resample_interval"):
            low, high = getattr(ranges, name)
            assert low <= getattr(draw, name) <= high
        assert len(draw.motor_offset) == 4
        assert all(ranges.motor_offset[0] <= value <= ranges.motor_offset[1] for value in draw.motor_offset)


def test_same_seed_same_draw():
    ranges = RandomizationRanges()
    first = sample_domain_randomization(np.random.default_rng(3), ranges)
    second = sample_domain_randomization(np.random.default_rng(3), ranges)
    assert first == second


def test_degenerate_range_is_constant():
    ranges = RandomizationRanges(friction=(0.5, 0.5))
    draw = sample_domain_randomization(np.random.default_rng(0), ranges)
    assert draw.friction == 0.5


def test_nominal_draw_is_identity():
    draw = DomainRandomization.nominal(PhysicsConfig())
    assert draw.added_base_mass == 0.0
    assert draw.motor_strength == 1.0
    assert draw.kp_scale == 1.0 and draw.kd_scale == 1.0
    assert draw.motor_offset == (0.0, 0.0, 0.0, 0.0)
    assert draw.friction == PhysicsConfig().friction_coefficient


def test_as_record_flattens_offsets():
    record = DomainRandomization.nominal(PhysicsConfig()).as_record()
    assert "motor_offset" not in record
    assert record["motor_offset_3"] == 0.0


def test_stack_field():
    draws = [DomainRandomization.nominal(PhysicsConfig()) for _ in range(3)]
    np.testing.assert_array_equal(stack_field(draws, "kp_scale"), np.ones(3))
