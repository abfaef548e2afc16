"""Shared fixtures: named curves, reference a(p) values and a scratch cache directory."""
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from curves.catalogue import named_curve  # noqa: E402

# a(p) of [1,1,0,-2582,48720] for p <= 173
E6_TABLE = {
    2: -1, 3: -1, 5: -4, 7: -4, 11: -6, 13: -6, 17: -7, 19: -8, 23: -8, 29: -6,
    31: -8, 37: -11, 41: -10, 43: -11, 47: -10, 53: -13, 59: -3, 61: -10, 67: -12, 71: -15,
    73: -11, 79: -10, 83: -8, 89: -6, 97: -10, 101: -7, 103: 4, 107: 4, 109: -13, 113: 0,
    127: -20, 131: -20, 137: -9, 139: -12, 149: -6, 151: -10, 157: -9, 163: -14, 167: 12, 173: 4,
}

ZETA_ZEROS = [14.134725141734693, 21.022039638771555, 25.010857580145688,
              30.424876125859513, 32.935061587739189]


@pytest.fixture
def e1():
    return named_curve("E1")


@pytest.fixture
def e6():
    return named_curve("E6")


@pytest.fixture
def c15():
    return named_curve("C15")


@pytest.fixture
def cache_dir(tmp_path):
    path = tmp_path / "cache"
    path.mkdir()
    return path
