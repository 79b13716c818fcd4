import sys
from pathlib import Path

import pytest

import spirvkit as sk

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def g12():
    return sk.load_pinned("1.2")


@pytest.fixture(scope="session")
def g16():
    return sk.load_pinned("unified1")


@pytest.fixture(scope="session")
def opencl_ext():
    return sk.load_pinned_extended()


@pytest.fixture(scope="session")
def factory():
    return sk.instruction_factory()
