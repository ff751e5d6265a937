import numpy as np
import pytest

from xfmr_aging import dataset
from xfmr_aging.dataset import LabeledDataset


def toy_dataset(n: int = 10, seed: int = 0, fn=None) -> LabeledDataset:
    """Small (θ_A, K) cloud with a smooth positive target."""
    rng = np.random.default_rng(seed)
    x = np.column_stack([rng.uniform(-5, 30, n), rng.uniform(0.3, 1.1, n)])
    y = fn(x) if fn is not None else 1e-4 * np.exp(0.05 * x[:, 0]) * x[:, 1] ** 2
    return LabeledDataset(x, y)


@pytest.fixture
def toy10():
    return toy_dataset(10)


@pytest.fixture(scope="session")
def synthetic_year():
    series = dataset.synthesize(hours=8760, seed=0)
    return dataset.label(series)


@pytest.fixture(scope="session")
def year_split(synthetic_year):
    return dataset.split(synthetic_year, dataset.SplitSpec(seed=0))
