import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from biphoton_transfer import LatticeSpec
from biphoton_transfer.masks import PAPER_MASKS_1D, PAPER_MASKS_2D, parse_mask_terms

LAMBDA_X = 1.0 / 7.0  # mm, as in the bundled scenarios

SCENARIO_DIR = os.path.join(os.path.dirname(__file__), "..", "scenarios", "paper")


@pytest.fixture(scope="session")
def lattice_1d():
    return LatticeSpec(51, 1, LAMBDA_X)


@pytest.fixture(scope="session")
def lattice_2d():
    return LatticeSpec(27, 2, LAMBDA_X)


@pytest.fixture(scope="session")
def masks_1d(lattice_1d):
    return {name: parse_mask_terms(terms, lattice_1d)
            for name, terms in PAPER_MASKS_1D.items()}


@pytest.fixture(scope="session")
def masks_2d(lattice_2d):
    return {name: parse_mask_terms(terms, lattice_2d)
            for name, terms in PAPER_MASKS_2D.items()}
