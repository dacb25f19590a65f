"""Diagonal Hamiltonians over qudit configuration strings."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClassicalTerm:
    support: tuple  # one or two site ids
    table: np.ndarray  # shape (d_a,) or (d_a, d_b), real energies

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(self.support))
        tab = np.ascontiguousarray(np.real(self.table), dtype=float)
        tab.setflags(write=False)
        object.__setattr__(self, "table", tab)
        if len(self.support) not in (1, 2) or tab.ndim != len(self.support):
            raise ValueError("classical term must be 1- or 2-local with a matching table")


@dataclass(frozen=True)
class ClassicalHamiltonian:
    qudit_dims: dict
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "qudit_dims", dict(self.qudit_dims))
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            dims = tuple(self.qudit_dims[s] for s in t.support)
            if t.table.shape != dims:
                raise ValueError(f"table shape {t.table.shape} mismatches site dims {dims}")

    @property
    def sites(self):
        return tuple(self.qudit_dims)

    @property
    def dims(self):
        return tuple(self.qudit_dims[s] for s in self.sites)

    def n_configs(self):
        return int(np.prod(self.dims, dtype=object))

    def site_index(self, site):
        return self.sites.index(site)

    def energy(self, config):
        """Energy of one configuration (sequence of per-site values)."""
        idx = {s: i for i, s in enumerate(self.sites)}
        e = 0.0
        for t in self.terms:
            coords = tuple(config[idx[s]] for s in t.support)
            e += float(t.table[coords])
        return e

    def energies_all(self):
        """Vector of energies over all configs in lexicographic order."""
        dims = self.dims
        n = self.n_configs()
        if n > 2**22:
            raise ValueError("configuration space too large to enumerate")
        coords = _config_coordinates(dims, n)
        idx = {s: i for i, s in enumerate(self.sites)}
        e = np.zeros(n)
        for t in self.terms:
            cols = [coords[idx[s]] for s in t.support]
            e += t.table[tuple(cols)]
        return e


def _config_coordinates(dims, n):
    """Per-site coordinate arrays for lexicographic config enumeration."""
    out = []
    stride = n
    for d in dims:
        stride //= d
        out.append((np.arange(n) // stride) % d)
    return out


def config_to_index(config, dims):
    i = 0
    for c, d in zip(config, dims):
        i = i * d + int(c)
    return i


def index_to_config(i, dims):
    out = np.zeros(len(dims), dtype=np.int64)
    for k in range(len(dims) - 1, -1, -1):
        out[k] = i % dims[k]
        i //= dims[k]
    return out


def classical_to_dict(hc):
    return {
        "sites": [{"id": _key(s), "dim": int(d)} for s, d in hc.qudit_dims.items()],
        "terms": [
            {
                "support": [_key(s) for s in t.support],
                "table": {
                    ",".join(str(c) for c in idx): float(t.table[idx])
                    for idx in np.ndindex(t.table.shape)
                },
            }
            for t in hc.terms
        ],
    }


def classical_from_dict(data):
    dims = {_unkey(s["id"]): int(s["dim"]) for s in data["sites"]}
    terms = []
    for entry in data["terms"]:
        support = tuple(_unkey(s) for s in entry["support"])
        shape = tuple(dims[s] for s in support)
        tab = np.zeros(shape)
        for key, val in entry["table"].items():
            idx = tuple(int(c) for c in key.split(","))
            tab[idx] = val
        terms.append(ClassicalTerm(support, tab))
    return ClassicalHamiltonian(qudit_dims=dims, terms=terms)


def save_classical(hc, path):
    with open(path, "w") as fh:
        json.dump(classical_to_dict(hc), fh, indent=1)


def load_classical(path):
    with open(path) as fh:
        return classical_from_dict(json.load(fh))


def _key(x):
    if isinstance(x, tuple):
        return "|".join(str(p) for p in x)
    return x


def _unkey(x):
    if isinstance(x, str) and "|" in x:
        return tuple(int(p) if p.lstrip("-").isdigit() else p for p in x.split("|"))
    return x
