"""
Pytest configuration and fixtures for the anisotropic walk verification engine
"""

import json
import os

import pytest

# Set test environment before any settings are created
os.environ["ENVIRONMENT"] = "testing"
os.environ["LOG_FILE"] = ""
os.environ["LOG_LEVEL"] = "WARNING"
os.environ["WALK_N_JOBS"] = "1"


@pytest.fixture
def uniform_quarter():
    """Isotropic simple walk: p_j = 1/4 everywhere"""
    from core_engine.profiles import StepProfile

    return StepProfile.uniform(0.25)


@pytest.fixture
def periodic_two():
    """Period-2 profile [1/4, 1/2], gamma = 3/2"""
    from core_engine.profiles import StepProfile

    return StepProfile.periodic([0.25, 0.5])


@pytest.fixture
def periodic_three():
    """Period-3 profile [0.2, 0.35, 0.5]"""
    from core_engine.profiles import StepProfile

    return StepProfile.periodic([0.2, 0.35, 0.5])


@pytest.fixture
def comb():
    """Two-dimensional comb: horizontal edges only on y = 0"""
    from core_engine.profiles import StepProfile

    return StepProfile.comb()


@pytest.fixture
def half_comb():
    """Square lattice above, comb teeth below"""
    from core_engine.profiles import StepProfile

    return StepProfile.half_plane_half_comb()


@pytest.fixture
def profile_file(tmp_path):
    """Factory writing a profile config to a temporary JSON file"""
    def write(data, name="profile.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data) if not isinstance(data, str) else data, encoding="utf-8")
        return str(path)

    return write


@pytest.fixture
def out_dir(tmp_path):
    """Output directory for CLI artifacts"""
    path = tmp_path / "out"
    path.mkdir()
    return str(path)


@pytest.fixture
def configure(monkeypatch):
    """Factory overriding WALK_* variables and reloading settings; restored afterwards"""
    from config import reload_settings

    def apply(**env):
        for key, value in env.items():
            monkeypatch.setenv(key, str(value))
        return reload_settings()

    yield apply
    monkeypatch.undo()
    reload_settings()
