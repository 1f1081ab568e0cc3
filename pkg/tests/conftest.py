"""Shared fixtures: canned synthetic trials reused across test modules."""
from __future__ import annotations

import pytest

from gaitassist.simgait import GaitParams, generate


@pytest.fixture(scope="session")
def clean_trial():
    """20 s noise-free trial at the reference gait parameters."""
    return generate(GaitParams(seed=1), duration_s=20.0)


@pytest.fixture(scope="session")
def clean_trial_60s():
    """60 s noise-free trial used by the acceptance checks."""
    return generate(GaitParams(seed=7), duration_s=60.0)
