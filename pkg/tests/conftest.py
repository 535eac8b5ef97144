"""Shared fixtures and scenario-suite discovery for the test suite."""

from pathlib import Path

import numpy as np
import pytest

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def scenario_paths(include_controls: bool = True) -> list[Path]:
    paths = sorted(SCENARIO_DIR.glob("*.json"))
    assert paths, f"no scenario files in {SCENARIO_DIR}"
    if include_controls:
        return paths
    return [p for p in paths if not p.name.startswith("control_")]


# Shipped controls and the named error each one must abort with.
CONTROL_ERRORS = {
    "control_boundary_zero.json": "BoundaryHitsZero",
    "control_cap_sensitive.json": "CapSensitive",
    "control_flipflop.json": "NotStabilized",
    "control_inadmissible_homotopy.json": "InadmissibleHomotopy",
    "control_noncoercive_browder.json": "RadiusSearchFailed",
    "control_nonmonotone_defigueiredo.json": "HypothesisViolated",
}


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
