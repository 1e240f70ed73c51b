"""Tests for the actor-critic network and its hand-written gradient."""

import numpy as np
import pytest

from src.learner.network import NetworkSpec, PolicyNetwork, Upstream, backward, build_layout, forward


@pytest.fixture
def spec():
    return NetworkSpec(obs_dim=5, action_dim=2, hidden_sizes=(8, 6))


def scalar_loss(network, observation, upstream):
    out = forward(network, observation)
    return float(
        np.sum(out.mean * upstream.mean)
        + np.sum(out.log_std * upstream.log_std)
        + np.sum(out.value * upstream.value)
    )


def test_layout_is_contiguous(spec):
    layout = build_layout(spec)
    offset = 0
    for index, shape in layout.values():
        assert index.start == offset
        offset = index.stop
        assert index.stop - index.start == int(np.prod(shape))
    assert PolicyNetwork(spec).param_count == offset


def test_separate_actor_and_critic_trunks(spec):
    layout = build_layout(spec)
    assert "actor.hidden0.weight" in layout
    assert "critic.hidden0.weight" in layout


def test_forward_shapes_and_initial_log_std(spec, rng):
    network = PolicyNetwork(spec, seed=3)
    out = forward(network, rng.standard_normal((7, 5)))
    assert out.mean.shape == (7, 2)
    assert out.value.shape == (7,)
    np.testing.assert_allclose(out.log_std, spec.init_log_std)


def test_same_seed_same_parameters(spec):
    np.testing.assert_array_equal(PolicyNetwork(spec, seed=9).params, PolicyNetwork(spec, seed=9).params)


def test_wrong_parameter_count_raises(spec):
    with pytest.raises(ValueError):
        PolicyNetwork(spec, params=np.zeros(3))


def test_backward_matches_finite_differences(spec, rng):
    network = PolicyNetwork(spec, seed=1)
    network.params += 0.1 * rng.standard_normal(network.param_count)
    network.clamp_log_std()
    observation = rng.standard_normal((4, 5))
    upstream = Upstream(
        mean=rng.standard_normal((4, 2)), log_std=rng.standard_normal(2), value=rng.standard_normal(4)
    )
    grad = backward(network, observation, upstream)

    eps = 1e-6
    for index in rng.choice(network.param_count, size=20, replace=False):
        plus = network.copy()
        plus.params[index] += eps
        minus = network.copy()
        minus.params[index] -= eps
        numeric = (scalar_loss(plus, observation, upstream) - scalar_loss(minus, observation, upstream)) / (2 * eps)
        scale = max(abs(numeric), abs(grad[index]), 1e-6)
        assert abs(numeric - grad[index]) / scale < 1e-4, f"parameter {index}"


def test_clamped_log_std_has_no_gradient(spec):
    network = PolicyNetwork(spec)
    network.view("log_std")[:] = 5.0
    upstream = Upstream(mean=np.zeros((1, 2)), log_std=np.ones(2), value=np.zeros(1))
    grad = backward(network, np.zeros((1, 5)), upstream)
    np.testing.assert_array_equal(grad[network.layout["log_std"][0]], 0.0)


def test_spec_json_round_trip(spec):
    assert NetworkSpec.from_json(spec.to_json()) == spec
    assert len(spec.digest()) == 32
