import json
from pathlib import Path

import pytest

pytest.importorskip("convsql_trainer", reason="trainer package not installed")

from convsql_trainer import TrainConfig, train

FIXTURES = Path(__file__).parent / "fixtures"
MULTITASK = FIXTURES / "toy_multitask.jsonl"
SQL_GEN = FIXTURES / "toy_sql_gen.jsonl"

# shared with the corpus-side client; both ends must pass the same vectors
PROTOCOL_VECTORS = (
    Path(__file__).resolve().parent.parent.parent
    / "tests"
    / "fixtures"
    / "protocol_vectors.json"
)

OVERFIT_CONFIG = TrainConfig(
    stage1_epochs=200,
    stage2_epochs=150,
    stage1_lr=3e-3,
    stage2_lr=1e-3,
    optimizer="adam",
    seed=0,
)


@pytest.fixture(scope="session")
def protocol_vectors():
    return json.loads(PROTOCOL_VECTORS.read_text())


@pytest.fixture(scope="session")
def overfit_run(tmp_path_factory):
    """One expensive memorization run, shared by every test that needs it."""
    out = tmp_path_factory.mktemp("overfit")
    result = train(SQL_GEN, SQL_GEN, OVERFIT_CONFIG, out)
    return result
