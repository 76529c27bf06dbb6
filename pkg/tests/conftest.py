from pathlib import Path

import pytest

from veintex.markup import parse_document

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def load_fixture(name: str):
    path = fixture_path(name)
    return parse_document(path.read_bytes(), source_name=str(path))


@pytest.fixture(scope="session")
def goriot():
    return load_fixture("goriot.vxd")


@pytest.fixture(scope="session")
def demo4():
    return load_fixture("demo4.vxd")
