"""Classical Gibbs sampling over diagonal Hamiltonians.

Three samplers: exhaustive enumeration (the desk-scale oracle),
single-site Metropolis-Glauber dynamics, and Swendsen-Wang cluster
updates for ferromagnetic Ising instances with fields. All Boltzmann
arithmetic is done in log space, so energies as large as 1e6/beta do
not overflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .classical import ClassicalHamiltonian, _config_coordinates

MAX_ORACLE_CONFIGS = 2**20


class SamplerError(ValueError):
    pass


@dataclass(frozen=True)
class GibbsDistribution:
    """Exact Boltzmann distribution on an enumerated configuration space."""

    sites: tuple
    dims: tuple
    probs: np.ndarray  # lexicographic over configs
    log_partition: float

    def prob_of(self, config):
        i = 0
        for c, d in zip(config, self.dims):
            i = i * d + int(c)
        return float(self.probs[i])


@dataclass
class ChainState:
    config: np.ndarray
    step_count: int = 0
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))


def exact_distribution(hc, beta):
    """Enumerate every configuration and normalize with log-sum-exp."""
    n = hc.n_configs()
    if n > MAX_ORACLE_CONFIGS:
        raise SamplerError(f"state space of {n} configs exceeds the oracle cap {MAX_ORACLE_CONFIGS}")
    energies = hc.energies_all()
    logw = -beta * energies
    logz = float(logsumexp(logw))
    return GibbsDistribution(
        sites=hc.sites, dims=hc.dims, probs=np.exp(logw - logz), log_partition=logz
    )


class _Incidence:
    """Per-site lists of (term, position) pairs, built once per Hamiltonian."""

    def __init__(self, hc):
        self.by_site = {s: [] for s in hc.sites}
        for t in hc.terms:
            for pos, s in enumerate(t.support):
                self.by_site[s].append((t, pos))


_INCIDENCE_CACHE = {}


def _incidence(hc):
    key = id(hc)
    inc = _INCIDENCE_CACHE.get(key)
    if inc is None or inc[0] is not hc:
        inc = (hc, _Incidence(hc))
        _INCIDENCE_CACHE[key] = inc
    return inc[1]


def _local_energy(hc, inc, config, site, value):
    e = 0.0
    idx = {s: i for i, s in enumerate(hc.sites)}
    for t, pos in inc.by_site[site]:
        coords = [config[idx[s]] for s in t.support]
        coords[pos] = value
        e += float(t.table[tuple(coords)])
    return e


def glauber_step(state, hc, beta):
    """One single-site Metropolis update: uniform site, uniform proposal.

    Acceptance probability is min(1, exp(-beta * dE)) computed from the
    incident terms only.
    """
    inc = _incidence(hc)
    sites = hc.sites
    dims = hc.dims
    rng = state.rng
    k = int(rng.integers(len(sites)))
    site = sites[k]
    old = int(state.config[k])
    new = int(rng.integers(dims[k]))
    if new != old:
        de = _local_energy(hc, inc, state.config, site, new) - _local_energy(
            hc, inc, state.config, site, old
        )
        if de <= 0 or np.log(rng.random()) < -beta * de:
            state.config[k] = new
    state.step_count += 1
    return state


def run_glauber(hc, beta, sweeps, rng, config=None, record_every=None, record_into=None):
    """Run ``sweeps`` full sweeps (n proposals each) of Glauber dynamics.

    The inner loop is flattened to arrays for speed; semantics match
    repeated ``glauber_step``. Returns the final configuration; if
    ``record_every`` is given, appends config copies to ``record_into``
    after every that many sweeps.
    """
    sites = hc.sites
    nsite = len(sites)
    dims = np.array(hc.dims, dtype=np.int64)
    idx = {s: i for i, s in enumerate(sites)}
    # flatten term tables: per site a list of (other-site index or -1, table, axis)
    per_site = []
    for k, s in enumerate(sites):
        entries = []
        for t in _incidence(hc).by_site[s]:
            term, pos = t
            if len(term.support) == 1:
                entries.append((-1, term.table, 0))
            else:
                other = term.support[1 - pos]
                entries.append((idx[other], term.table, pos))
        per_site.append(entries)
    x = np.array(config if config is not None else [rng.integers(d) for d in dims], dtype=np.int64)
    total = sweeps * nsite
    block = 65536
    done = 0
    while done < total:
        m = min(block, total - done)
        picks = rng.integers(0, nsite, size=m)
        props = rng.random(size=m)
        us = rng.random(size=m)
        for t in range(m):
            k = picks[t]
            new = int(props[t] * dims[k])
            old = x[k]
            if new != old:
                de = 0.0
                for other, tab, pos in per_site[k]:
                    if other < 0:
                        de += tab[new] - tab[old]
                    elif pos == 0:
                        de += tab[new, x[other]] - tab[old, x[other]]
                    else:
                        de += tab[x[other], new] - tab[x[other], old]
                if de <= 0.0 or us[t] < np.exp(-beta * de):
                    x[k] = new
            done += 1
            if record_every is not None and done % (record_every * nsite) == 0:
                record_into.append(x.copy())
    return x


@dataclass(frozen=True)
class IsingForm:
    """Spin-1/2 decomposition: E = const - sum J_uv s_u s_v - sum h_u s_u."""

    couplings: dict  # (site_a, site_b) -> J
    fields: dict  # site -> h
    constant: float


def as_ferro_ising(hc):
    """Decompose a binary Hamiltonian into ferromagnetic Ising form.

    Spins use the 0 -> +1, 1 -> -1 convention. Raises if any site is not
    binary or any coupling is negative.
    """
    for s, d in hc.qudit_dims.items():
        if d != 2:
            raise SamplerError(f"site {s} is not binary; Swendsen-Wang needs spins")
    couplings = {}
    fields = {s: 0.0 for s in hc.sites}
    constant = 0.0
    for t in hc.terms:
        tab = t.table
        if len(t.support) == 1:
            constant += (tab[0] + tab[1]) / 2
            fields[t.support[0]] += -(tab[0] - tab[1]) / 2
        else:
            a, b = t.support
            c = tab.mean()
            j = -(tab[0, 0] + tab[1, 1] - tab[0, 1] - tab[1, 0]) / 4
            fa = -(tab[0, 0] + tab[0, 1] - tab[1, 0] - tab[1, 1]) / 4
            fb = -(tab[0, 0] - tab[0, 1] + tab[1, 0] - tab[1, 1]) / 4
            if j < -1e-12:
                raise SamplerError(f"coupling on {t.support} is antiferromagnetic (J={j:.3g})")
            constant += c
            couplings[(a, b)] = couplings.get((a, b), 0.0) + max(j, 0.0)
            fields[a] += fa
            fields[b] += fb
    return IsingForm(couplings=couplings, fields=fields, constant=constant)


def swendsen_wang_step(state, hc, beta, form=None):
    """One Swendsen-Wang update for a ferromagnetic Ising instance.

    Aligned edges open a bond with probability 1 - exp(-2 beta J); each
    percolation cluster is then reoriented by a heat-bath draw on its
    total field.
    """
    if form is None:
        form = as_ferro_ising(hc)
    sites = hc.sites
    idx = {s: i for i, s in enumerate(sites)}
    rng = state.rng
    spins = 1 - 2 * state.config  # 0/1 -> +1/-1
    parent = list(range(len(sites)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for (a, b), j in form.couplings.items():
        ia, ib = idx[a], idx[b]
        if spins[ia] == spins[ib] and j > 0:
            if rng.random() < -np.expm1(-2.0 * beta * j):
                ra, rb = find(ia), find(ib)
                if ra != rb:
                    parent[ra] = rb
    clusters = {}
    for i in range(len(sites)):
        clusters.setdefault(find(i), []).append(i)
    hvec = np.array([form.fields[s] for s in sites])
    for members in clusters.values():
        m = float(np.sum(hvec[members] * spins[members]))
        # heat bath over the two cluster orientations: flip energy cost 2m
        p_flip = 1.0 / (1.0 + np.exp(np.clip(2.0 * beta * m, -700, 700)))
        if rng.random() < p_flip:
            for i in members:
                spins[i] = -spins[i]
    state.config = ((1 - spins) // 2).astype(np.int64)
    state.step_count += 1
    return state


def sample(hc, beta, sampler="glauber", burn_in=None, n_samples=1000, thinning=None, seed=0):
    """Draw configurations; reproducible for a fixed seed.

    exact: i.i.d. draws from the enumerated distribution. glauber /
    swendsen_wang: one chain with the given burn-in (sweeps) and
    thinning (sweeps between samples). Defaults: burn-in 100 sweeps,
    thinning 1 sweep.
    """
    rng = np.random.default_rng(seed)
    nsite = len(hc.sites)
    if sampler == "exact":
        dist = exact_distribution(hc, beta)
        draws = rng.choice(len(dist.probs), size=n_samples, p=dist.probs)
        coords = _config_coordinates(hc.dims, len(dist.probs))
        return np.stack([coords[k][draws] for k in range(nsite)], axis=1)
    if burn_in is None:
        burn_in = 100
    if thinning is None:
        thinning = 1
    if sampler == "glauber":
        out = []
        x = run_glauber(hc, beta, burn_in, rng)
        run_glauber(hc, beta, n_samples * thinning, rng, config=x, record_every=thinning, record_into=out)
        return np.array(out[:n_samples], dtype=np.int64)
    if sampler == "swendsen_wang":
        form = as_ferro_ising(hc)
        state = ChainState(config=rng.integers(0, 2, size=nsite), rng=rng)
        for _ in range(burn_in):
            swendsen_wang_step(state, hc, beta, form)
        out = np.zeros((n_samples, nsite), dtype=np.int64)
        for i in range(n_samples):
            for _ in range(thinning):
                swendsen_wang_step(state, hc, beta, form)
            out[i] = state.config
        return out
    raise SamplerError(f"unknown sampler {sampler!r}")


def empirical_distribution(samples, dims):
    """Histogram of configuration samples over the full lexicographic space."""
    samples = np.asarray(samples)
    n = int(np.prod(dims))
    flat = np.zeros(len(samples), dtype=np.int64)
    for k, d in enumerate(dims):
        flat = flat * d + samples[:, k]
    counts = np.bincount(flat, minlength=n)
    return counts / counts.sum()


def tv_distance(p, q):
    """Total variation distance between two distributions on the same space."""
    p = np.asarray(p, dtype=float)
    q = q.probs if isinstance(q, GibbsDistribution) else np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise SamplerError("distributions live on different spaces")
    return 0.5 * float(np.abs(p - q).sum())


def glauber_transition_matrix(hc, beta):
    """Exact single-step kernel of the Glauber chain (small spaces only).

    Row x, column y: probability of moving x -> y in one proposal.
    """
    n = hc.n_configs()
    if n > 2**12:
        raise SamplerError("transition matrix restricted to <= 4096 configs")
    dims = hc.dims
    nsite = len(dims)
    energies = hc.energies_all()
    T = np.zeros((n, n))
    coords = _config_coordinates(dims, n)
    strides = []
    acc = n
    for d in dims:
        acc //= d
        strides.append(acc)
    for x in range(n):
        stay = 0.0
        for k in range(nsite):
            d = dims[k]
            cur = coords[k][x]
            for v in range(d):
                y = x + (v - cur) * strides[k]
                de = energies[y] - energies[x]
                acc_p = min(1.0, np.exp(np.clip(-beta * de, -700, 700)))
                p = (1.0 / nsite) * (1.0 / d) * acc_p
                if y == x:
                    stay += p
                else:
                    T[x, y] += p
                    stay += (1.0 / nsite) * (1.0 / d) * (1.0 - acc_p)
        T[x, x] += stay
    return T
