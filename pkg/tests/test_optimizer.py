import numpy as np
import pytest
from pydantic import ValidationError

from mediated_gates.models.schemas import OptimizerConfig
from mediated_gates.services.optimizer import cluster_points, multistart_minimize, sample_starts

CENTER = np.array([0.3, -1.2, 2.0])


def shifted_sphere(x):
    return float(np.sum((np.asarray(x) - CENTER) ** 2))


def test_config_validation():
    with pytest.raises(ValidationError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ValidationError):
        OptimizerConfig(depth=5, max_depth=3)
    assert OptimizerConfig(depth_policy="fixed", depth=5, max_depth=3).depth == 5


def test_sample_starts_puts_seeds_first():
    cfg = OptimizerConfig(restarts=4)
    starts = sample_starts(3, cfg, np.random.default_rng(0), seeds=[CENTER])
    assert starts.shape == (5, 3)
    assert np.array_equal(starts[0], CENTER)
    assert np.all(np.abs(starts[1:]) <= np.pi)


def test_cluster_points_keeps_best_per_basin():
    points = [np.array([0.0]), np.array([0.1]), np.array([3.0])]
    values = [0.5, 0.2, 0.9]
    assert cluster_points(points, values, radius=0.5) == [1, 2]


def test_multistart_finds_minimum():
    cfg = OptimizerConfig(restarts=4)
    result = multistart_minimize(shifted_sphere, 3, cfg)
    assert result.converged
    assert result.fun < 1e-14
    assert result.x == pytest.approx(CENTER, abs=1e-6)
    assert result.trace == sorted(result.trace, reverse=True)


def test_multistart_is_deterministic():
    cfg = OptimizerConfig(restarts=6, seed=11)
    a = multistart_minimize(shifted_sphere, 3, cfg, rng_key=(2, 0))
    b = multistart_minimize(shifted_sphere, 3, cfg, rng_key=(2, 0))
    assert np.array_equal(a.x, b.x)
    assert a.fun == b.fun


def test_seed_start_is_used():
    cfg = OptimizerConfig(restarts=1)
    result = multistart_minimize(shifted_sphere, 3, cfg, seeds=[CENTER + 1e-9])
    assert result.converged
    assert result.starts_used == 1


def test_worker_pool_matches_serial():
    serial = multistart_minimize(shifted_sphere, 3, OptimizerConfig(restarts=6, workers=1))
    pooled = multistart_minimize(shifted_sphere, 3, OptimizerConfig(restarts=6, workers=2))
    assert np.array_equal(serial.x, pooled.x)
    assert serial.fun == pooled.fun


def floored_sphere(x):
    return 1.0 + shifted_sphere(x)


def test_polish_drops_stalled_basins():
    cfg = OptimizerConfig(restarts=4, polish_candidates=2, polish_rounds=50, stall_rounds=3)
    result = multistart_minimize(floored_sphere, 3, cfg)
    assert not result.converged
    assert result.fun == pytest.approx(1.0, abs=1e-10)
    polish_rounds = len(result.trace) - result.starts_used
    assert polish_rounds <= cfg.polish_candidates * cfg.stall_rounds


def test_polish_stops_at_basin_evaluation_cap():
    cfg = OptimizerConfig(
        restarts=2,
        probe_iterations=5,
        polish_candidates=1,
        polish_rounds=16,
        stall_rounds=16,
        basin_evaluations=40,
    )
    result = multistart_minimize(floored_sphere, 3, cfg)
    polish_rounds = len(result.trace) - result.starts_used
    assert 1 <= polish_rounds <= 4
