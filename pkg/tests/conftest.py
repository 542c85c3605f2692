import json
import os
import sys
from pathlib import Path

import pytest

# allow running the suite from a bare checkout, without an editable install
_SRC = Path(__file__).parent.parent / "src"
if str(_SRC) not in sys.path:
    sys.path.insert(0, str(_SRC))

FIXTURES = Path(__file__).parent / "fixtures"


def load_fixture(name: str):
    return json.loads((FIXTURES / name).read_text())


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


@pytest.fixture
def base_seed() -> int:
    return int(os.environ.get("EVASION_SEED", "20240817"))
