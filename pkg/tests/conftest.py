import sys
import shutil
import pytest
import numpy as np
from pathlib import Path

root_dir = Path(__file__).parent.parent
sys.path.append(str(root_dir))

from matpair.settings import settings

from .config import result_dir


def pytest_addoption(parser):
    parser.addoption("--full", action="store_true", help="run the complete acceptance sweeps")
    parser.addoption("--oracle", action="store_true", help="dense scalar reachability search")


@pytest.fixture(scope="session", autouse=True)
def clear_results():
    if result_dir.exists():
        for file in result_dir.iterdir():
            if file.is_dir():
                shutil.rmtree(file)
            else:
                file.unlink()
    result_dir.mkdir(exist_ok=True)


@pytest.fixture(autouse=True)
def default_settings():
    settings.restore()
    yield
    settings.restore()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


@pytest.fixture()
def full(request):
    return bool(request.config.getoption("--full"))


@pytest.fixture()
def oracle(request):
    return bool(request.config.getoption("--oracle"))
