import math

import pytest

from hybridzeta.zeta_eval import find_zeros, height_of_index

MILLION_INDEX = 10**6 + 40


@pytest.fixture(scope="session")
def zeros_1e4():
    # enough zeros for 100-zero windows around [1e4 - 5, 1e4 + 5]
    return find_zeros(1e4 - 300, 1e4 + 300)


@pytest.fixture(scope="session")
def million_zero():
    """(zero table, t0) with t0 the ordinate of zero number 10^6 + 40."""
    approx = float(height_of_index(MILLION_INDEX))
    table = find_zeros(approx - 80, approx + 90)
    t0 = float(table.offsets[MILLION_INDEX - table.index_offset])
    return table, t0


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)
