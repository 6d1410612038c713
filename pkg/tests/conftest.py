from typing import Any, Dict

import numpy as np
import pytest

from rootcloak.config import Settings
from rootcloak.core.construction import Construction, resolve_config
from rootcloak.geometry.metricfield import HamiltonianField, Piece
from rootcloak.logging.logger import LoggingConfig
from rootcloak.logging.transport import EventBus


def small_settings(**overrides: Any) -> Settings:
    """Settings sized for tests: quiet logging, inline execution, coarse grids."""
    values: Dict[str, Any] = {
        "n": 2,
        "logger": {"type": "none", "progress_display": False},
        "executor": {"max_workers": 1},
        "epsilon_search": {"grid_resolution": 11, "iterations": 24},
        "integrator": {"rel_tol": 1e-11, "abs_tol": 1e-11},
        "verification": {
            "rays": 3,
            "symmetry_samples": 200,
            "energy_points": 500,
            "section_rays": 3,
            "obstruction_grid": 11,
        },
    }
    values.update(overrides)
    return Settings(**values)


@pytest.fixture(autouse=True)
def isolated_event_bus():
    """Each test gets a fresh event bus with no listeners left over."""
    EventBus.reset()
    yield
    LoggingConfig.shutdown()
    EventBus.reset()


@pytest.fixture(autouse=True)
def no_config_file(tmp_path, monkeypatch):
    """Run from an empty directory so no rootcloak.config.yaml is picked up."""
    monkeypatch.chdir(tmp_path)


@pytest.fixture(scope="session")
def construction_n2() -> Construction:
    return resolve_config(small_settings())


@pytest.fixture(scope="session")
def construction_n3() -> Construction:
    return resolve_config(small_settings(n=3))


@pytest.fixture(scope="session")
def field_n2(construction_n2) -> HamiltonianField:
    return construction_n2.field


@pytest.fixture(scope="session")
def perturbed_field(field_n2) -> HamiltonianField:
    """Same data, but ball 2 is copied without its rotation, so the reflections are no longer isometries."""
    pieces = list(field_n2.pieces)
    pieces[1] = Piece(center=pieces[1].center, rotation=np.eye(field_n2.n))
    return field_n2.with_pieces(tuple(pieces))


@pytest.fixture
def ball_points():
    return points_in_ball


def points_in_ball(center: np.ndarray, radius: float, count: int, seed: int = 0, shrink: float = 0.95) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n = center.shape[0]
    directions = rng.normal(size=(count, n))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = shrink * radius * rng.uniform(0.0, 1.0, size=count) ** (1.0 / n)
    return center + radii[:, None] * directions
