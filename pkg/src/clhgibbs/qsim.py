"""Two quantum backends.

Dense: exact density matrices for verification at small size (state
dimension capped at 4096). Frame: a classical record of joint +/-1
eigenvalues over a commuting Pauli generating set, valid whenever every
operation stays inside the common eigenbasis sector, which is the case
for all the sampling pipelines in this package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import gf2
from .pauli import PauliString, product

DENSE_CAP = 4096
EIG_CLUSTER_GAP = 1e-8


class QsimError(ValueError):
    pass


# ---------------------------------------------------------------------------
# dense backend


@dataclass
class DensityMatrixState:
    sites: tuple
    dims: tuple
    matrix: np.ndarray

    def __post_init__(self):
        self.sites = tuple(self.sites)
        self.dims = tuple(int(d) for d in self.dims)
        self.matrix = np.asarray(self.matrix, dtype=complex)
        d = int(np.prod(self.dims))
        if self.matrix.shape != (d, d):
            raise QsimError(f"matrix shape {self.matrix.shape} mismatches dims {self.dims}")

    @property
    def dim(self):
        return self.matrix.shape[0]

    def validate(self):
        if abs(np.trace(self.matrix).real - 1.0) > 1e-10:
            raise QsimError("density matrix trace deviates from 1")
        if np.min(np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2)) < -1e-9:
            raise QsimError("density matrix has a significantly negative eigenvalue")
        return self


@dataclass(frozen=True)
class MeasurementOutcome:
    term: object
    value: float
    post_state: object


def maximally_mixed(sites, dims):
    d = int(np.prod(dims))
    return DensityMatrixState(sites, dims, np.eye(d, dtype=complex) / d)


def exact_gibbs_state(ham, beta, site_order=None):
    """exp(-beta H) / tr(exp(-beta H)) via eigendecomposition in log space."""
    order = list(site_order) if site_order is not None else sorted(ham.site_dims)
    d = int(np.prod([ham.site_dims[s] for s in order]))
    if d > DENSE_CAP:
        raise QsimError(f"dense Gibbs oracle refused at dimension {d}")
    h = ham.dense_matrix(order)
    evals, vecs = np.linalg.eigh(h)
    logw = -beta * evals
    w = np.exp(logw - logsumexp(logw))
    rho = (vecs * w) @ vecs.conj().T
    return DensityMatrixState(order, [ham.site_dims[s] for s in order], rho)


def trace_distance(rho, sigma):
    a = rho.matrix if isinstance(rho, DensityMatrixState) else np.asarray(rho)
    b = sigma.matrix if isinstance(sigma, DensityMatrixState) else np.asarray(sigma)
    if a.shape != b.shape:
        raise QsimError("trace distance needs equal dimensions")
    return 0.5 * float(np.sum(np.linalg.svd(a - b, compute_uv=False)))


def term_projectors(term, state_sites, state_dims):
    """Eigenvalue/projector pairs of a local term, embedded in the state space.

    Pauli payloads use the exact (I +/- P)/2 split; dense payloads are
    eigendecomposed with eigenvalues clustered at the 1e-8 gap.
    """
    dims_map = dict(zip(state_sites, state_dims))
    if term.is_pauli():
        p = term.pauli.dense(state_sites)
        eye = np.eye(p.shape[0])
        return [(term.coeff, (eye + p) / 2), (-term.coeff, (eye - p) / 2)]
    mat = term.matrix_on(state_sites, dims_map)
    evals, vecs = np.linalg.eigh(mat)
    pairs = []
    i = 0
    while i < len(evals):
        j = i
        while j + 1 < len(evals) and evals[j + 1] - evals[j] < EIG_CLUSTER_GAP:
            j += 1
        sub = vecs[:, i : j + 1]
        pairs.append((float(np.mean(evals[i : j + 1])), sub @ sub.conj().T))
        i = j + 1
    return pairs


def measure_term(state, term, rng):
    """Projective measurement of one Hamiltonian term.

    Dense backend: Born-rule sampling with state update. Frame backend:
    deterministic readout of the stored eigenvalue; the state does not
    change because all generators are co-diagonal.
    """
    if isinstance(state, PauliFrameState):
        return MeasurementOutcome(term.term_id, state.term_value(term), state)
    pairs = term_projectors(term, state.sites, state.dims)
    probs = np.array([max(np.trace(proj @ state.matrix).real, 0.0) for _, proj in pairs])
    probs = probs / probs.sum()
    k = int(rng.choice(len(pairs), p=probs))
    val, proj = pairs[k]
    post = proj @ state.matrix @ proj
    post = post / np.trace(post).real
    state.matrix = post
    return MeasurementOutcome(term.term_id, val, state)


def apply_pauli(state, pstring):
    """Conjugate by a Pauli: dense rho -> P rho P^dag; frame flips signs."""
    if isinstance(state, PauliFrameState):
        for i, g in enumerate(state.generators):
            if not g.commutes_with(pstring):
                state.signs[i] = -state.signs[i]
        return state
    p = pstring.dense(state.sites)
    state.matrix = p @ state.matrix @ p.conj().T
    return state


# ---------------------------------------------------------------------------
# frame backend


@dataclass
class PauliFrameState:
    """Joint eigenvalue record over a commuting Pauli generating set.

    ``signs[i]`` is the +/-1 eigenvalue of the unsigned Pauli
    ``generators[i]``. Product relations among generators are kept as
    parity constraints so that sampling and updates stay consistent.
    """

    generators: tuple
    signs: np.ndarray
    qubits: tuple
    constraints: tuple = ()  # (uint8 subset vector, required sign)

    def copy(self):
        return PauliFrameState(self.generators, self.signs.copy(), self.qubits, self.constraints)

    def term_value(self, term):
        """Eigenvalue of a local term given the stored generator signs."""
        if not term.is_pauli():
            raise QsimError("frame backend handles Pauli terms only")
        sign = self.pauli_sign(term.pauli)
        return float(term.coeff) * sign

    def pauli_sign(self, pstring):
        """Sign of a Hermitian Pauli expressible as a generator product."""
        try:
            i = self.generators.index(PauliString(pstring.factors, 1))
            base = int(self.signs[i])
        except ValueError:
            base = self._solve_sign(pstring)
        return base * int(np.real(pstring.phase))

    def _solve_sign(self, pstring):
        mat = _symplectic_matrix(self.generators, self.qubits)
        target = _symplectic_rows([PauliString(pstring.factors, 1)], self.qubits)[0]
        combo = gf2.solve(mat.T, target)
        if combo is None:
            raise QsimError("Pauli not expressible in the frame's generator set")
        prod = product([self.generators[i] for i in np.nonzero(combo)[0]])
        alpha = prod.phase
        if alpha not in (1, -1):
            raise QsimError("generator product has imaginary phase")
        return int(np.real(alpha)) * int(np.prod(self.signs[np.nonzero(combo)[0]], initial=1))

    def check_constraints(self):
        for subset, want in self.constraints:
            got = int(np.prod(self.signs[np.nonzero(subset)[0]], initial=1))
            if got != want:
                return False
        return True


def _symplectic_rows(strings, qubits):
    pos = {q: i for i, q in enumerate(qubits)}
    rows = np.zeros((len(strings), 2 * len(qubits)), dtype=np.uint8)
    for r, s in enumerate(strings):
        for q, letter in s.factors.items():
            if letter in ("X", "Y"):
                rows[r, pos[q]] = 1
            if letter in ("Z", "Y"):
                rows[r, len(qubits) + pos[q]] = 1
    return rows


def _symplectic_matrix(generators, qubits):
    return _symplectic_rows(generators, qubits)


def frame_constraints(generators, qubits):
    """Product relations: subsets whose Pauli product is +/- identity."""
    mat = _symplectic_rows(generators, qubits)
    cons = []
    for row in gf2.nullspace(mat):
        members = [generators[i] for i in np.nonzero(row)[0]]
        if not members:
            continue
        prod = product(members)
        if prod.factors:
            raise QsimError("nullspace row does not multiply to identity")
        if prod.phase not in (1, -1):
            raise QsimError("inconsistent generator phases")
        cons.append((row.copy(), int(np.real(prod.phase))))
    return tuple(cons)


def frame_initialize_mixed(generators, rng, extra_constraints=()):
    """Uniform eigenvalue assignment subject to all product constraints.

    Generators must pairwise commute (checked symbolically). Constraint
    parities are the GF(2) relations among the generators' symplectic
    rows; extra (subset, sign) pairs may be appended.
    """
    gens = tuple(PauliString(g.factors, 1) for g in generators)
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            if not gens[i].commutes_with(gens[j]):
                raise QsimError(f"generators {i} and {j} anticommute")
    qubits = tuple(sorted({q for g in gens for q in g.support}))
    cons = list(frame_constraints(gens, qubits)) + list(extra_constraints)
    k = len(gens)
    if not cons:
        signs = rng.choice([1, -1], size=k).astype(np.int64)
        return PauliFrameState(gens, signs, qubits, ())
    amat = np.stack([c[0] for c in cons])
    bvec = np.array([0 if c[1] == 1 else 1 for c in cons], dtype=np.uint8)
    base = gf2.solve(amat, bvec)
    if base is None:
        raise QsimError("inconsistent frame constraints")
    kernel = gf2.nullspace(amat)
    bits = base.copy()
    for row in kernel:
        if rng.integers(2):
            bits ^= row
    signs = (1 - 2 * bits.astype(np.int64))
    return PauliFrameState(gens, signs, qubits, tuple(cons))


def frame_from_signs(generators, signs):
    gens = tuple(PauliString(g.factors, 1) for g in generators)
    qubits = tuple(sorted({q for g in gens for q in g.support}))
    cons = frame_constraints(gens, qubits)
    state = PauliFrameState(gens, np.asarray(signs, dtype=np.int64).copy(), qubits, cons)
    if not state.check_constraints():
        raise QsimError("sign assignment violates generator product constraints")
    return state
