import time
from functools import lru_cache

import pytest

from heisenberg_anneal.experiments import preset, run_preset


@lru_cache(maxsize=None)
def _timed_run(name):
    t0 = time.perf_counter()
    report = run_preset(preset(name))
    return report, time.perf_counter() - t0


@pytest.fixture(scope="session")
def preset_run():
    """Callable ``name -> (AnnealReport, seconds)``; each preset is annealed once per session."""
    return _timed_run


@pytest.fixture(scope="session")
def report(preset_run):
    return lambda name: preset_run(name)[0]
