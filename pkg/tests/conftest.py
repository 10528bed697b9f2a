"""Shared pytest fixtures for AlgeMech tests."""

import os
import tempfile
from collections.abc import Generator
from pathlib import Path

import numpy as np
import pytest
from pytest_mock import MockerFixture

from algemech.core.algebroid import AlgebroidModel, builtin
from algemech.core.expr import ExprField, FieldDomain

ALMOST_LIE_BUILTINS = ["tm1", "tm2", "so3", "heis3", "action1"]
RIGID_BODY_INERTIA = (1.0, 2.0, 3.0)


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Create a temporary directory for test files.

    Yields:
        Path to temporary directory that is cleaned up after test.
    """
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def config_home(temp_dir: Path, mocker: MockerFixture) -> Path:
    """Point the configuration directory at a fresh temporary directory.

    Returns:
        The ``algemech`` config directory (not yet created)
    """
    env = {k: v for k, v in os.environ.items() if not k.startswith("ALGEMECH_")}
    env["XDG_CONFIG_HOME"] = str(temp_dir)
    mocker.patch.dict(os.environ, env, clear=True)
    mocker.patch("os.name", "posix")
    return temp_dir / "algemech"


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def tm1() -> AlgebroidModel:
    return builtin("tm1")


@pytest.fixture
def tm2() -> AlgebroidModel:
    return builtin("tm2")


@pytest.fixture
def so3() -> AlgebroidModel:
    return builtin("so3")


@pytest.fixture
def heis3() -> AlgebroidModel:
    return builtin("heis3")


@pytest.fixture
def action1() -> AlgebroidModel:
    return builtin("action1")


@pytest.fixture
def broken2() -> AlgebroidModel:
    return builtin("broken2")


@pytest.fixture(params=ALMOST_LIE_BUILTINS)
def almost_lie_model(request: pytest.FixtureRequest) -> AlgebroidModel:
    """Each almost-Lie builtin in turn."""
    return builtin(request.param)


@pytest.fixture
def rigid_body_h(so3: AlgebroidModel) -> ExprField:
    """Rigid body Hamiltonian with inertia diag(1, 2, 3)."""
    I1, I2, I3 = RIGID_BODY_INERTIA
    return so3.field(f"0.5*(xi1^2/{I1} + xi2^2/{I2} + xi3^2/{I3})", FieldDomain.ESTAR)


@pytest.fixture
def rigid_body_l(so3: AlgebroidModel) -> ExprField:
    """Rigid body Lagrangian with inertia diag(1, 2, 3)."""
    I1, I2, I3 = RIGID_BODY_INERTIA
    return so3.field(f"0.5*({I1}*y1^2 + {I2}*y2^2 + {I3}*y3^2)", FieldDomain.E)


@pytest.fixture
def free_particle_l(tm1: AlgebroidModel) -> ExprField:
    return tm1.field("0.5*y1^2", FieldDomain.E)
