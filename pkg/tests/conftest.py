import pytest

from formulary import IndexBuilder, IndexSnapshot

from corpus import corpus_records, toy_records


def build_snapshot(records) -> IndexSnapshot:
    builder = IndexBuilder()
    for record in records:
        builder.add_document(record)
    return builder.commit()


@pytest.fixture(scope="session")
def toy_snapshot() -> IndexSnapshot:
    return build_snapshot(toy_records())


@pytest.fixture(scope="session")
def fixture_snapshot() -> IndexSnapshot:
    return build_snapshot(corpus_records())
