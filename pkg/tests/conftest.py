import logging
from pathlib import Path

import pytest
from typer.testing import CliRunner

from minram.config import Settings
from minram.models import FieldData, NilpotentGroup, PcGroup
from minram.quadfield import field_data

EXAMPLE_GROUPS = Path(__file__).resolve().parent.parent / "docs" / "examples" / "groups"


@pytest.fixture
def h27() -> PcGroup:
    """Heisenberg group of order 27 and exponent 3."""
    return PcGroup(prime=3, gens=3, commutators=[(2, 1, [(3, 1)])])


@pytest.fixture
def wreath81() -> PcGroup:
    """Z/3 wr Z/3: order 81, class 3, exponent 9."""
    return PcGroup(prime=3, gens=4, commutators=[(2, 1, [(3, 1)]), (3, 1, [(4, 1)])])


@pytest.fixture
def h27_group(h27: PcGroup) -> NilpotentGroup:
    return NilpotentGroup.from_sylows(h27)


@pytest.fixture
def rational() -> FieldData:
    return field_data("Q")


@pytest.fixture(scope="session")
def quad23() -> FieldData:
    return field_data(-23)


@pytest.fixture
def settings() -> Settings:
    return Settings(scan_limit=10**6)


@pytest.fixture
def example_group():
    def _path(name: str) -> Path:
        return EXAMPLE_GROUPS / f"{name}.json"

    return _path


@pytest.fixture
def runner() -> CliRunner:
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:
        # newer click keeps stderr apart already
        return CliRunner()


@pytest.fixture
def restore_logging():
    """The CLI reconfigures the root logger; put the previous handlers back afterwards."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers = handlers
    root.setLevel(level)
