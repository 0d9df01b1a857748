"""
Pytest configuration file.
"""
import sys
import os
import pytest

# Add src directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))


def pytest_configure(config):
    config.addinivalue_line("markers", "integration: desk-scale ensembles that take minutes")


# Common fixtures for acceptance runs
@pytest.fixture(scope="session")
def ensemble_config():
    """Ensemble sizes for the acceptance sweeps."""
    return {
        "trials": int(os.environ.get("TRIGPERTURB_TRIALS", "200")),
        "workers": int(os.environ.get("TRIGPERTURB_WORKERS", str(os.cpu_count() or 1))),
        "seed": 20240601,
    }


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    """Point the default output directory at a per-test temp dir."""
    monkeypatch.setenv("TRIGPERTURB_OUTPUT_DIR", str(tmp_path))
    return tmp_path
