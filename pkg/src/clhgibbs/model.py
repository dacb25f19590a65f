"""Commuting local Hamiltonians: terms, lattice geometry, builders, and JSON I/O.

Site ids on a 2D lattice are row-major vertex indices (x + L*y). A
plaquette is named by its lower-left vertex; its color follows the
chessboard rule (even coordinate sum = white = Z-type, odd = black =
X-type). Dense term payloads are stored traceless: adding a multiple of
the identity to a term never changes the Gibbs state, so the offset is
stripped at construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliString

HERMITIAN_RTOL = 1e-10
COMMUTE_RTOL = 1e-9
MAX_DENSE_DIM = 4096


class ModelError(ValueError):
    """Structural or validation failure while building a Hamiltonian."""


@dataclass(frozen=True)
class LocalTerm:
    """One Hermitian term: either a scaled Pauli string or a dense matrix.

    ``support`` is the ordered tuple of site ids the payload acts on. For a
    Pauli payload the string's support must be contained in ``support``;
    for a dense payload the matrix dimension must equal the product of the
    site dimensions (supplied by the owning Hamiltonian at validation).
    """

    term_id: object
    support: tuple
    pauli: PauliString | None = None
    coeff: float | None = None
    dense: np.ndarray | None = None
    color: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(self.support))
        if (self.pauli is None) == (self.dense is None):
            raise ModelError(f"term {self.term_id}: exactly one payload kind required")
        if self.color not in (None, "black", "white"):
            raise ModelError(f"term {self.term_id}: bad color {self.color!r}")
        if self.pauli is not None:
            if self.coeff is None or self.coeff == 0:
                raise ModelError(f"term {self.term_id}: Pauli term needs nonzero coefficient")
            if not self.pauli.is_hermitian():
                raise ModelError(f"term {self.term_id}: Pauli phase must be real")
            if not self.pauli.factors:
                raise ModelError(f"term {self.term_id}: identity-only Pauli term")
            if not set(self.pauli.support) <= set(self.support):
                raise ModelError(f"term {self.term_id}: Pauli acts outside declared support")
        else:
            mat = np.asarray(self.dense, dtype=complex)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise ModelError(f"term {self.term_id}: dense payload must be square")
            if mat.shape[0] > MAX_DENSE_DIM:
                raise ModelError(f"term {self.term_id}: dense payload dimension over {MAX_DENSE_DIM}")
            scale = max(np.linalg.norm(mat), 1.0)
            if np.linalg.norm(mat - mat.conj().T) > HERMITIAN_RTOL * scale:
                raise ModelError(f"term {self.term_id}: non-Hermitian term")
            mat = (mat + mat.conj().T) / 2
            mat = mat - (np.trace(mat) / mat.shape[0]) * np.eye(mat.shape[0])
            mat.setflags(write=False)
            object.__setattr__(self, "dense", mat)

    def is_pauli(self):
        return self.pauli is not None

    def matrix(self, site_dims):
        """Dense payload on the full support, in support order."""
        if self.dense is not None:
            return self.dense
        return self.coeff * self.pauli.dense(self.support)

    def matrix_on(self, sites, site_dims):
        """Dense payload embedded into the ordered site list ``sites``."""
        return embed_matrix(self.matrix(site_dims), self.support, sites, site_dims)


def embed_matrix(mat, support, sites, site_dims):
    """Embed ``mat`` (acting on ``support`` in order) into the ordered site list."""
    missing = [s for s in sites if s not in support]
    order = list(support) + missing
    dims = [site_dims[s] for s in order]
    pad = int(np.prod([site_dims[s] for s in missing], initial=1))
    big = np.kron(mat, np.eye(pad))
    perm = [order.index(s) for s in sites]
    n = len(order)
    tensor = big.reshape(dims + dims)
    tensor = tensor.transpose(perm + [n + p for p in perm])
    d = int(np.prod(dims))
    return tensor.reshape(d, d)


@dataclass(frozen=True)
class Plaquette:
    term_id: object
    vertices: tuple
    color: str


@dataclass(frozen=True)
class Lattice2D:
    """Square lattice with qubits on vertices and terms on plaquettes."""

    L: int
    topology: str  # "plane" | "torus" | "punctured"
    plaquettes: tuple = ()
    punctures: tuple = ()  # (white term id, black term id) when punctured
    consistent_coloring: bool = True

    @property
    def n_sites(self):
        return self.L * self.L

    def vertex_id(self, x, y):
        return x + self.L * y

    def vertex_xy(self, v):
        return v % self.L, v // self.L

    def boundary_vertices(self):
        if self.topology != "plane":
            return frozenset()
        L = self.L
        return frozenset(
            self.vertex_id(x, y)
            for x in range(L)
            for y in range(L)
            if x == 0 or y == 0 or x == L - 1 or y == L - 1
        )


def _cell_vertices(cx, cy, L, wrap):
    if wrap:
        xs = (cx % L, (cx + 1) % L)
        ys = (cy % L, (cy + 1) % L)
    else:
        xs = (cx, cx + 1)
        ys = (cy, cy + 1)
    return tuple(x + L * y for y in ys for x in xs)  # (SW, SE, NW, NE)


def make_lattice(L, topology, punctures=None):
    """Enumerate plaquettes of an L x L vertex lattice.

    plane: (L-1)^2 cells; torus: L^2 cells with wrap. ``punctured`` is a
    torus with one white and one black cell id removed. Cell id = id of
    its lower-left vertex. On an odd-side torus the chessboard coloring
    is inconsistent across the wrap; the lattice records that fact.
    """
    if L < 3:
        raise ModelError("lattice side must be at least 3")
    if topology not in ("plane", "torus", "punctured"):
        raise ModelError(f"unknown topology {topology!r}")
    wrap = topology != "plane"
    span = L if wrap else L - 1
    removed = ()
    if topology == "punctured":
        if punctures is None:
            punctures = (0 + L * 0, 1 + L * 0)  # white cell (0,0), black cell (1,0)
        pw, pb = punctures
        if _cell_color(pw, L) != "white" or _cell_color(pb, L) != "black":
            raise ModelError("punctures must name one white and one black cell")
        removed = (pw, pb)
    plaqs = []
    for cy in range(span):
        for cx in range(span):
            tid = cx + L * cy
            if tid in removed:
                continue
            plaqs.append(Plaquette(tid, _cell_vertices(cx, cy, L, wrap), _cell_color(tid, L)))
    return Lattice2D(
        L=L,
        topology=topology,
        plaquettes=tuple(plaqs),
        punctures=tuple(removed),
        consistent_coloring=not (wrap and L % 2 == 1),
    )


def _cell_color(tid, L):
    cx, cy = tid % L, tid // L
    return "white" if (cx + cy) % 2 == 0 else "black"


@dataclass(frozen=True)
class Chain1D:
    n: int
    r: int = 2
    ring: bool = False


@dataclass(frozen=True)
class CommutingHamiltonian:
    """A list of local terms over sites of arbitrary dimension."""

    terms: tuple
    site_dims: dict
    geometry: object = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "site_dims", dict(self.site_dims))
        ids = [t.term_id for t in self.terms]
        if len(set(ids)) != len(ids):
            raise ModelError("duplicate term ids")
        for t in self.terms:
            for s in t.support:
                if s not in self.site_dims:
                    raise ModelError(f"term {t.term_id}: unknown site {s}")
            if t.dense is not None:
                want = int(np.prod([self.site_dims[s] for s in t.support]))
                if t.dense.shape[0] != want:
                    raise ModelError(
                        f"term {t.term_id}: dense payload dim {t.dense.shape[0]} != site product {want}"
                    )
            else:
                for s in t.pauli.support:
                    if self.site_dims[s] != 2:
                        raise ModelError(f"term {t.term_id}: Pauli letter on non-qubit site {s}")

    @property
    def sites(self):
        return tuple(self.site_dims)

    def term(self, term_id):
        for t in self.terms:
            if t.term_id == term_id:
                return t
        raise KeyError(term_id)

    def total_dim(self):
        return int(np.prod(list(self.site_dims.values())))

    def dense_matrix(self, site_order=None):
        """Full dense Hamiltonian; refuses above the dense cap."""
        order = list(site_order) if site_order is not None else sorted(self.site_dims)
        d = int(np.prod([self.site_dims[s] for s in order]))
        if d > MAX_DENSE_DIM:
            raise ModelError(f"dense assembly refused at dimension {d}")
        h = np.zeros((d, d), dtype=complex)
        for t in self.terms:
            h += t.matrix_on(order, self.site_dims)
        return h


@dataclass(frozen=True)
class CommutationReport:
    ok: bool
    violations: tuple  # ((term_id_i, term_id_j, commutator_norm), ...)


def verify_commuting(ham):
    """Check every pair of terms commutes; symbolic for Pauli pairs, dense otherwise."""
    bad = []
    terms = ham.terms
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            a, b = terms[i], terms[j]
            shared = set(a.support) & set(b.support)
            if not shared:
                continue
            if a.is_pauli() and b.is_pauli():
                if not a.pauli.commutes_with(b.pauli):
                    norm = _dense_commutator_norm(a, b, ham.site_dims)
                    bad.append((a.term_id, b.term_id, norm))
            else:
                norm = _dense_commutator_norm(a, b, ham.site_dims)
                union = sorted(set(a.support) | set(b.support))
                scale = np.linalg.norm(a.matrix_on(union, ham.site_dims)) * np.linalg.norm(
                    b.matrix_on(union, ham.site_dims)
                )
                if norm > COMMUTE_RTOL * max(scale, 1e-300):
                    bad.append((a.term_id, b.term_id, norm))
    return CommutationReport(ok=not bad, violations=tuple(bad))


def _dense_commutator_norm(a, b, site_dims):
    union = sorted(set(a.support) | set(b.support))
    ma = a.matrix_on(union, site_dims)
    mb = b.matrix_on(union, site_dims)
    return float(np.linalg.norm(ma @ mb - mb @ ma))


def build_defected_toric(L, coeffs=-1.0, topology="plane", punctures=None):
    """Plaquette Hamiltonian: Z strings on white cells, X strings on black cells.

    ``coeffs`` is either a single float applied everywhere or a map from
    cell id to a nonzero coefficient.
    """
    lat = make_lattice(L, topology, punctures)
    coeff_of = (lambda tid: float(coeffs)) if np.isscalar(coeffs) else (lambda tid: float(coeffs[tid]))
    terms = []
    for p in lat.plaquettes:
        c = coeff_of(p.term_id)
        if c == 0:
            raise ModelError(f"plaquette {p.term_id}: zero coefficient not allowed")
        letter = "Z" if p.color == "white" else "X"
        ps = PauliString({v: letter for v in p.vertices})
        terms.append(LocalTerm(p.term_id, p.vertices, pauli=ps, coeff=c, color=p.color))
    dims = {v: 2 for v in range(lat.n_sites)}
    return CommutingHamiltonian(terms=terms, site_dims=dims, geometry=lat)


def build_ising_chain(n, J=1.0, field=0.0, ring=False):
    """Diagonal qubit chain: -J ZZ couplings plus optional -field Z terms."""
    terms = []
    bonds = n if ring else n - 1
    for i in range(bonds):
        j = (i + 1) % n
        terms.append(
            LocalTerm(("zz", i), (i, j), pauli=PauliString({i: "Z", j: "Z"}), coeff=-float(J))
        )
    if field:
        for i in range(n):
            terms.append(LocalTerm(("z", i), (i,), pauli=PauliString({i: "Z"}), coeff=-float(field)))
    return CommutingHamiltonian(terms=terms, site_dims={i: 2 for i in range(n)}, geometry=Chain1D(n=n, ring=ring))


def coarse_grain_1d(ham, r):
    """Group consecutive blocks of ``r`` chain sites into single qudits.

    Every input term lands in the output pair term for the group of its
    first site (terms inside the last group join the final pair). The
    global operator is unchanged, so the spectrum is preserved exactly.
    """
    geom = ham.geometry
    if not isinstance(geom, Chain1D):
        raise ModelError("coarse graining requires chain geometry")
    n = geom.n
    if n % r != 0:
        raise ModelError(f"chain length {n} not divisible by r={r}")
    k = n // r
    groups = [tuple(range(g * r, (g + 1) * r)) for g in range(k)]
    gdims = {g: int(np.prod([ham.site_dims[s] for s in groups[g]])) for g in range(k)}

    def group_of(site):
        return site // r

    buckets = {}
    for t in ham.terms:
        gs = sorted({group_of(s) for s in t.support})
        if len(gs) > 2:
            raise ModelError(f"term {t.term_id} spans more than two groups")
        if len(gs) == 2 and not (gs[1] - gs[0] == 1 or (geom.ring and gs == [0, k - 1])):
            raise ModelError(f"term {t.term_id} straddles non-adjacent groups")
        if len(gs) == 1:
            g = gs[0]
            if geom.ring:
                pair = (g, (g + 1) % k)
            else:
                pair = (g, g + 1) if g < k - 1 else (k - 2, k - 1)
        else:
            if geom.ring and gs == [0, k - 1]:
                pair = (k - 1, 0)
            else:
                pair = (gs[0], gs[1])
        if k == 1:
            pair = (0,)
        buckets.setdefault(pair, []).append(t)

    out_terms = []
    for pair, members in sorted(buckets.items(), key=lambda kv: kv[0]):
        sites = [q for g in pair for q in groups[g]]
        d = int(np.prod([ham.site_dims[s] for s in sites]))
        mat = np.zeros((d, d), dtype=complex)
        for t in members:
            mat += t.matrix_on(sites, ham.site_dims)
        out_terms.append(LocalTerm(("grouped",) + pair, pair, dense=mat))
    return CommutingHamiltonian(
        terms=out_terms, site_dims=gdims, geometry=Chain1D(n=k, r=2, ring=geom.ring)
    )


# ---------------------------------------------------------------------------
# JSON interchange


def hamiltonian_to_dict(ham):
    sites = [{"id": _key(s), "dim": int(d)} for s, d in ham.site_dims.items()]
    terms = []
    for t in ham.terms:
        entry = {
            "id": _key(t.term_id),
            "support": [_key(s) for s in t.support],
            "pauli": t.pauli.to_letter_string(t.support) if t.is_pauli() else None,
            "coeff": t.coeff,
            "dense": None,
            "color": t.color,
        }
        if t.dense is not None:
            mat = t.dense
            entry["dense"] = [[[float(z.real), float(z.imag)] for z in row] for row in mat]
        terms.append(entry)
    geo = None
    if isinstance(ham.geometry, Lattice2D):
        geo = {
            "kind": "lattice2d",
            "L": ham.geometry.L,
            "topology": ham.geometry.topology,
            "punctures": [_key(p) for p in ham.geometry.punctures],
        }
    elif isinstance(ham.geometry, Chain1D):
        geo = {"kind": "chain", "n": ham.geometry.n, "r": ham.geometry.r, "ring": ham.geometry.ring}
    return {"sites": sites, "geometry": geo, "terms": terms}


def hamiltonian_from_dict(data):
    dims = {_unkey(s["id"]): int(s["dim"]) for s in data["sites"]}
    terms = []
    for entry in data["terms"]:
        support = tuple(_unkey(s) for s in entry["support"])
        tid = _unkey(entry["id"])
        if entry.get("pauli") is not None:
            letters = entry["pauli"]
            for ch in letters:
                if ch not in "IXYZ":
                    raise ModelError(f"term {tid}: unknown Pauli letter {ch!r}")
            if entry.get("coeff") in (None, 0):
                raise ModelError(f"term {tid}: Pauli term needs nonzero coefficient")
            ps = PauliString.from_letters(support, letters)
            terms.append(
                LocalTerm(tid, support, pauli=ps, coeff=float(entry["coeff"]), color=entry.get("color"))
            )
        elif entry.get("dense") is not None:
            raw = np.array(entry["dense"], dtype=float)
            mat = raw[..., 0] + 1j * raw[..., 1]
            terms.append(LocalTerm(tid, support, dense=mat, color=entry.get("color")))
        else:
            raise ModelError(f"term {tid}: no payload")
    geometry = None
    geo = data.get("geometry")
    if geo and geo.get("kind") == "lattice2d":
        punct = tuple(_unkey(p) for p in geo.get("punctures", [])) or None
        geometry = make_lattice(geo["L"], geo["topology"], punct)
    elif geo and geo.get("kind") == "chain":
        geometry = Chain1D(n=geo["n"], r=geo.get("r", 2), ring=geo.get("ring", False))
    return CommutingHamiltonian(terms=terms, site_dims=dims, geometry=geometry)


def serialize_hamiltonian(ham, path):
    with open(path, "w") as fh:
        json.dump(hamiltonian_to_dict(ham), fh, indent=1)


def parse_hamiltonian(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(f"malformed JSON: {exc}") from exc
    return hamiltonian_from_dict(data)


def _key(x):
    """JSON-safe encoding of site/term ids (ints or tuples of ints/str)."""
    if isinstance(x, tuple):
        return "|".join(str(p) for p in x)
    return x


def _unkey(x):
    if isinstance(x, str) and "|" in x:
        return tuple(int(p) if p.lstrip("-").isdigit() else p for p in x.split("|"))
    return x


def structurally_equal(a, b):
    """Round-trip equality: same sites, ids, supports, payloads."""
    if a.site_dims != b.site_dims:
        return False
    if len(a.terms) != len(b.terms):
        return False
    for ta, tb in zip(a.terms, b.terms):
        if ta.term_id != tb.term_id or ta.support != tb.support or ta.color != tb.color:
            return False
        if ta.is_pauli() != tb.is_pauli():
            return False
        if ta.is_pauli():
            if ta.coeff != tb.coeff or ta.pauli != tb.pauli:
                return False
        elif np.max(np.abs(ta.dense - tb.dense)) > 1e-15 * max(1.0, np.max(np.abs(ta.dense))):
            return False
    return True


def check_beta(beta):
    """Inverse temperature: any finite nonnegative real."""
    b = float(beta)
    if not np.isfinite(b) or b < 0:
        raise ModelError(f"inverse temperature must be finite and nonnegative, got {beta}")
    return b
