"""Weighted Pauli-sum Hamiltonians H = sum_j h_j H_j with h_j > 0, |H_j| = 1.

Text format: one term per non-comment line, ``<real coefficient> <pauli letters>``,
with ``#`` starting a comment.  Negative coefficients have their sign folded
into the operator so that every stored weight is strictly positive and every
term has spectral norm exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .linalg import spectral_norm

QUBIT_CAP = 10

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class HamiltonianFormatError(ValueError):
    """Malformed Hamiltonian text."""


class DimensionCapError(ValueError):
    """Dense materialization above the configured qubit cap."""


@dataclass(frozen=True)
class PauliString:
    letters: str

    def __post_init__(self):
        if not self.letters:
            raise HamiltonianFormatError("empty Pauli string")
        bad = set(self.letters) - set("IXYZ")
        if bad:
            raise HamiltonianFormatError(
                f"invalid Pauli character(s) {sorted(bad)} in {self.letters!r}"
            )

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    def dense(self) -> np.ndarray:
        return reduce(np.kron, (_PAULI[c] for c in self.letters))


@dataclass(frozen=True)
class WeightedTerm:
    weight: float
    pauli: PauliString
    sign: int = 1

    def __post_init__(self):
        if not self.weight > 0:
            raise HamiltonianFormatError(f"term weight must be > 0, got {self.weight}")
        if self.sign not in (-1, 1):
            raise HamiltonianFormatError(f"term sign must be +-1, got {self.sign}")

    def dense(self) -> np.ndarray:
        return self.sign * self.pauli.dense()


class HamiltonianDecomposition:
    """Immutable term list with lambda, Lambda and the sampling distribution."""

    def __init__(self, terms):
        terms = tuple(terms)
        if not terms:
            raise HamiltonianFormatError("Hamiltonian has no terms")
        n = terms[0].pauli.n_qubits
        for t in terms:
            if t.pauli.n_qubits != n:
                raise HamiltonianFormatError(
                    f"inconsistent Pauli string lengths: {t.pauli.letters!r} vs {n} qubits"
                )
        self.terms = terms
        self.n_qubits = n
        weights = np.array([t.weight for t in terms], dtype=float)
        self.lam = float(weights.sum())
        self.lam_max = float(weights.max())
        self.probabilities = weights / self.lam
        self._cdf = np.cumsum(self.probabilities)
        self._cdf[-1] = 1.0
        self._dense_terms = None
        self._unitary_cache: dict[float, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    def dense_terms(self, qubit_cap: int = QUBIT_CAP) -> np.ndarray:
        if self.n_qubits > qubit_cap:
            raise DimensionCapError(
                f"{self.n_qubits} qubits exceeds the cap of {qubit_cap}"
            )
        if self._dense_terms is None:
            self._dense_terms = np.stack([t.dense() for t in self.terms])
        return self._dense_terms

    def dense(self, qubit_cap: int = QUBIT_CAP) -> np.ndarray:
        terms = self.dense_terms(qubit_cap)
        weights = np.array([t.weight for t in self.terms])
        return np.tensordot(weights, terms, axes=1)

    def term_unitaries(self, angle: float, qubit_cap: int = QUBIT_CAP) -> np.ndarray:
        """exp(-i angle H_j) for every term, stacked (L, d, d).

        Pauli strings square to the identity, so the exponential is
        cos(angle) I - i sin(angle) sign P exactly.  Cached per angle.
        """
        cached = self._unitary_cache.get(angle)
        if cached is not None:
            return cached
        terms = self.dense_terms(qubit_cap)
        eye = np.eye(self.dim)
        c, s = np.cos(angle), np.sin(angle)
        signs = np.array([t.sign for t in self.terms])
        U = c * eye[None, :, :] - 1j * s * signs[:, None, None] * terms
        self._unitary_cache[angle] = U
        return U

    def sample_term(self, rng) -> int:
        """Draw an index j with probability p_j = h_j / lambda.

        Binary search of one uniform draw against the cumulative distribution;
        deterministic given the rng stream.
        """
        u = rng.random()
        return int(np.searchsorted(self._cdf, u, side="right"))

    def sample_terms(self, rng, count: int) -> np.ndarray:
        u = rng.random(count)
        return np.searchsorted(self._cdf, u, side="right")

    def serialize(self) -> str:
        lines = [
            f"{t.sign * t.weight:.17g} {t.pauli.letters}" for t in self.terms
        ]
        return "\n".join(lines) + "\n"

    def spectral_norm_bound_defect(self) -> float:
        """spectral_norm(dense(H)) - lambda; should never exceed ~1e-9."""
        return spectral_norm(self.dense()) - self.lam


def parse_hamiltonian(text: str) -> HamiltonianDecomposition:
    terms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise HamiltonianFormatError(
                f"line {lineno}: expected '<coefficient> <pauli letters>', got {raw!r}"
            )
        try:
            coeff = float(parts[0])
        except ValueError:
            raise HamiltonianFormatError(
                f"line {lineno}: invalid coefficient {parts[0]!r}"
            ) from None
        if coeff == 0.0:
            raise HamiltonianFormatError(f"line {lineno}: zero coefficient")
        sign = 1 if coeff > 0 else -1
        terms.append(WeightedTerm(abs(coeff), PauliString(parts[1]), sign))
    if not terms:
        raise HamiltonianFormatError("no terms found (empty file?)")
    return HamiltonianDecomposition(terms)


def load_hamiltonian(path) -> HamiltonianDecomposition:
    with open(path, encoding="utf-8") as fh:
        return parse_hamiltonian(fh.read())
