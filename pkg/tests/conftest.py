import json
from pathlib import Path

import numpy as np
import pytest

from pradequacy.dataset import DataTable


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def regression_table(n=100, beta=(1.0, 0.5), sigma=1.0, seed=0, names=("y", "x")):
    g = np.random.default_rng(seed)
    k = len(beta) - 1
    X = g.standard_normal((n, k))
    y = beta[0] + X @ np.asarray(beta[1:]) + sigma * g.standard_normal(n)
    cols = {names[0]: y}
    for j in range(k):
        cols[names[1] if k == 1 else f"x{j + 1}"] = X[:, j]
    return DataTable.from_columns(cols)


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj), encoding="utf-8")
    return path
