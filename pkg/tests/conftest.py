import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

from easic import default_library, parse_blif

DESIGNS_DIR = REPO / "designs"

# corpus order used for union/settling experiments: diverse designs
# first, derivative ones last
CORPUS_ORDER = [
    "sbm29", "crc8s", "adder8", "lfsr16", "alu6", "counter8",
    "mux16", "cmp4", "parity12", "incr8", "gray8", "majvote9",
]


@pytest.fixture(scope="session")
def lib():
    return default_library()


@pytest.fixture(scope="session")
def designs():
    """name -> parsed corpus netlist (treat as read-only)."""
    out = {}
    for name in CORPUS_ORDER:
        path = DESIGNS_DIR / f"{name}.blif"
        out[name] = parse_blif(path.read_text(encoding="utf-8"))
    return out


@pytest.fixture(scope="session")
def designs_dir():
    return DESIGNS_DIR
