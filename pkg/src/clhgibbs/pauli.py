"""Sparse multi-qubit Pauli strings with exact phase bookkeeping.

A string is a map qubit-id -> letter in {X, Y, Z} together with a phase
in {1, -1, 1j, -1j}. Identity factors are never stored, so the support
is exactly the key set. Products and commutation are computed
symbolically; no dense matrices are involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_LETTERS = ("I", "X", "Y", "Z")

# single-qubit products: _MUL[a][b] = (phase, letter) for a*b
_MUL = {
    "I": {"I": (1, "I"), "X": (1, "X"), "Y": (1, "Y"), "Z": (1, "Z")},
    "X": {"I": (1, "X"), "X": (1, "I"), "Y": (1j, "Z"), "Z": (-1j, "Y")},
    "Y": {"I": (1, "Y"), "X": (-1j, "Z"), "Y": (1, "I"), "Z": (1j, "X")},
    "Z": {"I": (1, "Z"), "X": (1j, "Y"), "Y": (-1j, "X"), "Z": (1, "I")},
}

_DENSE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """A phased tensor product of single-qubit Paulis."""

    factors: dict = field(default_factory=dict)
    phase: complex = 1

    def __post_init__(self):
        clean = {q: p for q, p in self.factors.items() if p != "I"}
        for q, p in clean.items():
            if p not in ("X", "Y", "Z"):
                raise ValueError(f"bad Pauli letter {p!r} on qubit {q}")
        if self.phase not in (1, -1, 1j, -1j):
            raise ValueError(f"phase must be a fourth root of unity, got {self.phase}")
        object.__setattr__(self, "factors", dict(sorted(clean.items())))

    @property
    def support(self):
        return tuple(self.factors)

    def __mul__(self, other):
        if not isinstance(other, PauliString):
            return NotImplemented
        phase = self.phase * other.phase
        out = dict(self.factors)
        for q, p in other.factors.items():
            ph, letter = _MUL[out.get(q, "I")][p]
            phase *= ph
            if letter == "I":
                out.pop(q, None)
            else:
                out[q] = letter
        return PauliString(out, phase)

    def commutes_with(self, other):
        """Symbolic commutation: even number of anticommuting sites."""
        odd = 0
        for q, p in self.factors.items():
            p2 = other.factors.get(q, "I")
            if p2 != "I" and p2 != p:
                odd ^= 1
        return odd == 0

    def conj(self):
        return PauliString(self.factors, np.conj(self.phase))

    def is_hermitian(self):
        return self.phase in (1, -1)

    def dense(self, qubits):
        """Dense matrix on the given ordered qubit list."""
        out = np.array([[self.phase]], dtype=complex)
        for q in qubits:
            out = np.kron(out, _DENSE[self.factors.get(q, "I")])
        return out

    def to_letter_string(self, qubits):
        return "".join(self.factors.get(q, "I") for q in qubits)

    @classmethod
    def from_letters(cls, qubits, letters, phase=1):
        if len(qubits) != len(letters):
            raise ValueError("qubit list and letter string length mismatch")
        return cls(dict(zip(qubits, letters)), phase)

    def __repr__(self):
        body = " ".join(f"{p}{q}" for q, p in self.factors.items()) or "I"
        pre = {1: "", -1: "-", 1j: "i", -1j: "-i"}[self.phase]
        return f"{pre}{body}"


def identity():
    return PauliString({}, 1)


def product(strings):
    out = identity()
    for s in strings:
        out = out * s
    return out
