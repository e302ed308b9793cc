import json
from pathlib import Path

import pytest

from convsql.corpus import CorpusConfig, DatasetSpec, load_interactions
from convsql.schema import load_schemas

FIXTURES = Path(__file__).parent / "fixtures"


def read_gold_sqls():
    out = []
    for line in (FIXTURES / "gold_sqls.txt").read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        db_id, sql = line.split("\t", 1)
        out.append((db_id, sql))
    return out


@pytest.fixture(scope="session")
def schemas():
    return load_schemas(FIXTURES / "tables.json")


@pytest.fixture(scope="session")
def gold_sqls():
    return read_gold_sqls()


@pytest.fixture(scope="session")
def sparc_interactions():
    return load_interactions(FIXTURES / "interactions_sparc.json", dataset="sparc")


@pytest.fixture()
def corpus_config():
    return CorpusConfig(
        datasets=(
            DatasetSpec(
                name="sparc",
                interactions_path=str(FIXTURES / "interactions_sparc.json"),
                tables_path=str(FIXTURES / "tables.json"),
            ),
            DatasetSpec(
                name="spider",
                interactions_path=str(FIXTURES / "interactions_spider.json"),
                tables_path=str(FIXTURES / "tables.json"),
                context_independent=True,
            ),
        )
    )


@pytest.fixture(scope="session")
def match_pairs():
    return json.loads((FIXTURES / "match_pairs.json").read_text())
