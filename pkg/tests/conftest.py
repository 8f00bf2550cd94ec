from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def mini_dir():
    return DATA / "mini_classic4"


@pytest.fixture(scope="session")
def mini_experiment(mini_dir):
    from mrfir.classic4 import load_classic4
    from mrfir.experiment import Experiment

    return Experiment.build(load_classic4(mini_dir))
