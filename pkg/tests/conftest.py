"""Shared fixtures.

The full staged simulation is expensive (about ten seconds), so a single
run of the benchmark configuration is shared session-wide; tests that
need a written bundle reuse the same result.
"""

import pytest

from percopod.cli import RunConfig, run_pipeline, write_bundle


@pytest.fixture(scope="session")
def benchmark_run():
    """RunResult for the default configuration (534 nodes, derived horizon)."""
    return run_pipeline(RunConfig())


@pytest.fixture(scope="session")
def benchmark_bundle(benchmark_run, tmp_path_factory):
    """Path to a bundle written from the shared benchmark run."""
    out = tmp_path_factory.mktemp("bundle")
    write_bundle(benchmark_run, out)
    return out
