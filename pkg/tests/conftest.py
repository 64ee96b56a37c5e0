import os

import pytest

SCENARIO_DIR = os.path.join(
    os.path.dirname(__file__), "..", "src", "edgesim", "scenarios"
)

BUNDLED = [
    "default",
    "tau_sweep",
    "prompt_heavy",
    "ultra_low_vector",
    "ultra_low_split",
    "ultra_low_cloud",
    "rag",
    "full_edge",
    "split_sweep",
]


def scenario_path(name: str) -> str:
    return os.path.abspath(os.path.join(SCENARIO_DIR, f"{name}.json"))


@pytest.fixture(scope="session")
def bundled_results():
    """One engine run per bundled scenario, shared across tests."""
    from edgesim.engine import run
    from edgesim.scenario import parse_scenario

    results = {}
    for name in BUNDLED:
        results[name] = run(parse_scenario(scenario_path(name)))
    return results
