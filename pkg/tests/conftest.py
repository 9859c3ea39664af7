import sys
from pathlib import Path

import numpy as np
import pytest

from timex.data import Task, TemporalDataset
from timex.models import InProcessModel

FIXTURES = Path(__file__).parent / "fixtures"


def constant_model(num_features, sequence_length, value=0.3, task=Task.REGRESSION):
    return InProcessModel(
        lambda values: np.full(values.shape[0], value),
        num_features, sequence_length, task, name=f"const({value})",
    )


def first_cell_model(num_features, sequence_length):
    """f(X) = x_{1,1}: the value of feature 1 at timestep 1."""
    return InProcessModel(
        lambda values: values[:, 0, 0].copy(), num_features, sequence_length
    )


def cell_model(num_features, sequence_length, feature, timestep):
    """f(X) = the value of one (1-based) feature/timestep cell."""
    return InProcessModel(
        lambda values: values[:, feature - 1, timestep - 1].copy(),
        num_features, sequence_length,
    )


def mean_over_sequence_model(num_features, sequence_length, feature=1):
    return InProcessModel(
        lambda values: values[:, feature - 1, :].mean(axis=1),
        num_features, sequence_length,
    )


def toy_server_cmd(mode: str) -> tuple[str, list[str]]:
    return sys.executable, [str(FIXTURES / "toy_server.py"), mode]


@pytest.fixture
def tiny_dataset():
    """M=2, D=1, L=3 with values [[1,2,3]], [[4,5,6]]."""
    values = np.array([[[1.0, 2.0, 3.0]], [[4.0, 5.0, 6.0]]])
    return TemporalDataset(values, np.array([0.0, 1.0]))


@pytest.fixture
def hand_dataset():
    """M=2, D=1, L=2: x1=[1,0], x2=[3,0], targets equal to x_{1,1}."""
    values = np.array([[[1.0, 0.0]], [[3.0, 0.0]]])
    return TemporalDataset(values, np.array([1.0, 3.0]))


def normal_dataset(m, d, length, seed=0, targets=None):
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((m, d, length))
    if targets is None:
        targets = np.zeros(m)
    return TemporalDataset(values, targets)
