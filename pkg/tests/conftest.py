import numpy as np
import pytest

from qflo.benchmarks import (
    depolarizing_hamiltonian,
    one_qubit_benchmark,
    two_qubit_benchmark,
)
from qflo.hamiltonian import (
    HamiltonianDecomposition,
    PauliString,
    WeightedTerm,
)


@pytest.fixture(scope="session")
def one_qubit():
    return one_qubit_benchmark()


@pytest.fixture(scope="session")
def two_qubit():
    return two_qubit_benchmark()


@pytest.fixture(scope="session")
def depolarizing():
    return depolarizing_hamiltonian()


def random_hamiltonian(rng, n_qubits, n_terms):
    letters = "IXYZ"
    terms = []
    while len(terms) < n_terms:
        s = "".join(rng.choice(list(letters)) for _ in range(n_qubits))
        terms.append(
            WeightedTerm(
                weight=float(rng.uniform(0.05, 1.0)),
                pauli=PauliString(s),
                sign=int(rng.choice([-1, 1])),
            )
        )
    return HamiltonianDecomposition(terms)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
