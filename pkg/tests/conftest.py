import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from toralab.lattice import AspectRatio, distinct_spectrum
from toralab.goodset import GoodSetParams, sigma_good_nums
from toralab.potentials import trig_potential
from toralab.solver import assemble, build_basis, eigensolve


@pytest.fixture(scope="session")
def square():
    return AspectRatio(1, 1)


@pytest.fixture(scope="session")
def cos_run(square):
    """Weak-coupling cosine potential solved at a small cutoff, shared."""
    potential = trig_potential({(1, 0): 0.1, (-1, 0): 0.1})
    basis = build_basis(100.0, square)
    ham = assemble(potential, basis)
    spectrum = distinct_spectrum(ham.gershgorin_upper() + 16.0, square)
    params = GoodSetParams()
    good = sigma_good_nums(spectrum, params)
    pairs = eigensolve(ham, spectrum, good_nums=good)
    return {
        "potential": potential,
        "basis": basis,
        "ham": ham,
        "spectrum": spectrum,
        "params": params,
        "good": good,
        "pairs": pairs,
    }
