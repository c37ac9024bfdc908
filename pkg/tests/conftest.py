import os

os.environ["DATABASE_URL"] = "sqlite://"

import json

import pytest
from fastapi.testclient import TestClient

from bellineq.main import app
from bellineq.schemas.optimize import OptimizerConfig


@pytest.fixture
def client():
    return TestClient(app)


@pytest.fixture
def quick_config():
    return OptimizerConfig(restarts=4, seed=11)


@pytest.fixture
def trivial_catalog(tmp_path):
    # 2 P(A1) <= 2 is never violated
    path = tmp_path / "trivial.json"
    path.write_text(json.dumps({
        "name": "trivial",
        "arity": 3,
        "terms": [{"A": 1, "B": 0, "C": 0, "coeff": "2"}],
        "K": "2",
    }))
    return path
