"""Abelian quotients and the transfer homomorphism.

For ``H <= G`` with left coset representatives ``r_1..r_n`` of ``H`` in
``G`` one writes ``g r_i = r_sigma(i) h_i`` and sets ``trf(g) = prod h_i`` in
``H/[H,H]`` (or ``H/Phi(H)``).  Coordinates on an abelian quotient come from
a Smith normal form of the relation lattice, so the quotient is written as
``Z/d_1 + ... + Z/d_m`` with ``d_1 | d_2 | ...``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .groups import Group, quotient
from .subgroups import (
    SubLike,
    Subgroup,
    _mask,
    as_group,
    derived,
    frattini,
    maximal_subgroups,
)

MODES = ("derived", "frattini")


# -- integer linear algebra -------------------------------------------------------

def _hermite_insert(basis: dict[int, list[int]], row: list[int]) -> None:
    """Add ``row`` to a row-echelon lattice basis keyed by pivot column."""
    row = list(row)
    r = len(row)
    for c in range(r):
        if row[c] == 0:
            continue
        b = basis.get(c)
        if b is None:
            if row[c] < 0:
                row = [-x for x in row]
            basis[c] = row
            return
        # gcd step on column c
        a, bb = b[c], row[c]
        while bb:
            q = a // bb
            b, row = row, [x - q * y for x, y in zip(b, row)]
            a, bb = bb, a - q * bb
        if b[c] < 0:
            b = [-x for x in b]
        basis[c] = b
        # ``row`` now has a zero in column c; continue with later columns
    return


def smith_normal_form(rows: Sequence[Sequence[int]], r: int) -> tuple[list[int], list[list[int]]]:
    """Diagonal ``d`` and unimodular ``V`` with ``U R V = diag(d)``.

    ``rows`` span a full-rank sublattice of ``Z^r``.  Zero diagonal entries
    would mean an infinite quotient and are rejected.
    """
    basis: dict[int, list[int]] = {}
    for row in rows:
        _hermite_insert(basis, row)
    A = [list(basis[c]) if c in basis else [0] * r for c in range(r)]
    V = [[int(i == j) for j in range(r)] for i in range(r)]

    def col_op(i: int, j: int, q: int) -> None:
        # column j -= q * column i
        for row in A:
            row[j] -= q * row[i]
        for row in V:
            row[j] -= q * row[i]

    def col_swap(i: int, j: int) -> None:
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    for t in range(r):
        while True:
            entries = [(abs(A[i][j]), i, j) for i in range(t, r) for j in range(t, r) if A[i][j]]
            if not entries:
                raise DomainError("relation lattice is not of full rank")
            _, i, j = min(entries)
            A[t], A[i] = A[i], A[t]
            col_swap(t, j)
            p = A[t][t]
            done = True
            for i in range(t + 1, r):
                q = A[i][t] // p
                A[i] = [x - q * y for x, y in zip(A[i], A[t])]
                if A[i][t]:
                    done = False
            for j in range(t + 1, r):
                q = A[t][j] // p
                col_op(t, j, q)
                if A[t][j]:
                    done = False
            if not done:
                continue
            bad = [(i, j) for i in range(t + 1, r) for j in range(t + 1, r) if A[i][j] % p]
            if bad:
                i, _ = bad[0]
                A[t] = [x + y for x, y in zip(A[t], A[i])]
                continue
            break
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
    return [A[t][t] for t in range(r)], V


# -- abelian quotients ----------------------------------------------------------

@dataclass
class AbelianQuotient:
    """``G/K`` with ``K = [G,G]`` or ``Phi(G)``, in invariant-factor coordinates.

    ``coords[x]`` is the coordinate vector of ``xK``; ``coords[x] + coords[y]``
    reduced modulo ``invariant_factors`` equals ``coords[x*y]``.
    """

    source: Group
    kernel: Subgroup
    invariant_factors: list[int]
    coords: np.ndarray
    mode: str

    @property
    def order(self) -> int:
        return int(np.prod(self.invariant_factors, dtype=object)) if self.invariant_factors else 1

    def reduce(self, v: np.ndarray) -> np.ndarray:
        return np.mod(v, np.asarray(self.invariant_factors, dtype=np.int64))

    def add(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.reduce(np.asarray(u) + np.asarray(v))

    def key(self, v) -> tuple[int, ...]:
        return tuple(int(x) for x in self.reduce(np.asarray(v)))

    def representatives(self) -> dict[tuple[int, ...], int]:
        """Least element id of every coset, keyed by coordinates."""
        out: dict[tuple[int, ...], int] = {}
        for x in range(self.source.order):
            out.setdefault(tuple(int(c) for c in self.coords[x]), x)
        return out

    def is_zero(self, v) -> bool:
        return not np.any(self.reduce(np.asarray(v)))


_AQ_CACHE: dict[tuple[str, str], AbelianQuotient] = {}


def abelian_quotient(G: Group, mode: str = "derived") -> AbelianQuotient:
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}")
    ck = (G.table_hash, mode)
    if ck in _AQ_CACHE:
        return _AQ_CACHE[ck]
    K = derived(G) if mode == "derived" else frattini(G)
    Q, proj = quotient(G, K.mask)
    if not Q.is_abelian:
        raise DomainError("quotient is not abelian")
    gens = [g for g in Q.generators if g]
    r = len(gens)
    if r == 0:
        aq = AbelianQuotient(G, K, [], np.zeros((G.order, 0), dtype=np.int64), mode)
        _AQ_CACHE[ck] = aq
        return aq
    # each quotient element gets the exponent vector of a first word reaching it
    m = Q.order
    vec = np.full((m, r), -1, dtype=np.int64)
    vec[0] = 0
    frontier = [0]
    seen = np.zeros(m, dtype=bool)
    seen[0] = True
    rels: list[list[int]] = []
    while frontier:
        nxt = []
        for e in frontier:
            for j, g in enumerate(gens):
                f = int(Q.mul[e, g])
                v = vec[e].copy()
                v[j] += 1
                if not seen[f]:
                    seen[f] = True
                    vec[f] = v
                    nxt.append(f)
                else:
                    rel = (v - vec[f]).tolist()
                    if any(rel):
                        rels.append(rel)
        frontier = nxt
    d, V = smith_normal_form(rels, r)
    Vm = np.array(V, dtype=np.int64)
    keep = [i for i, x in enumerate(d) if x != 1]
    order = sorted(keep, key=lambda i: d[i])
    facs = [int(d[i]) for i in order]
    qc = (vec @ Vm)[:, order]
    qc = np.mod(qc, np.asarray(facs, dtype=np.int64)) if facs else qc
    coords = qc[proj]
    aq = AbelianQuotient(G, K, facs, coords, mode)
    _AQ_CACHE[ck] = aq
    return aq


# -- transfer ------------------------------------------------------------------------

def left_transversal(G: Group, H: SubLike) -> np.ndarray:
    """Least element of every left coset ``xH``, in increasing order."""
    hm = _mask(H)
    hel = np.flatnonzero(hm)
    owner = np.full(G.order, -1, dtype=np.int64)
    reps = []
    for x in range(G.order):
        if owner[x] < 0:
            owner[G.mul[x, hel]] = len(reps)
            reps.append(x)
    return np.array(reps, dtype=np.int64)


@dataclass
class Transfer:
    """``trf^G_H`` as coordinates: ``images[g]`` is the coordinate vector of
    ``trf(g)`` in the abelian quotient ``target`` of ``H``."""

    G: Group
    H_mask: np.ndarray
    H: Group
    H_elems: np.ndarray
    target: AbelianQuotient
    images: np.ndarray

    def __call__(self, g: int) -> np.ndarray:
        return self.images[g]


def transfer_map(
    G: Group,
    H: SubLike,
    mode: str = "derived",
    transversal: Sequence[int] | None = None,
    H_group: tuple[Group, np.ndarray] | None = None,
) -> Transfer:
    """The transfer from ``G`` to ``H`` on all elements of ``G``.

    ``transversal`` overrides the default least-element left transversal;
    ``H_group`` supplies a stand-alone copy of ``H`` (as from ``as_group``).
    """
    hm = _mask(H)
    Hg, helems = H_group if H_group is not None else as_group(G, hm)
    target = abelian_quotient(Hg, mode)
    pos = np.full(G.order, -1, dtype=np.int64)
    pos[helems] = np.arange(len(helems))
    reps = left_transversal(G, hm) if transversal is None else np.asarray(transversal, dtype=np.int64)
    hel = np.flatnonzero(hm)
    owner = np.full(G.order, -1, dtype=np.int64)
    for i, r in enumerate(reps):
        owner[G.mul[r, hel]] = i
    if (owner < 0).any() or len(reps) * len(hel) != G.order:
        raise DomainError("not a left transversal")
    k = len(target.invariant_factors)
    acc = np.zeros((G.order, k), dtype=np.int64)
    allg = np.arange(G.order)
    inv = G.inv
    for r in reps:
        gr = G.mul[allg, r]
        sig = reps[owner[gr]]
        h = G.mul[inv[sig], gr]
        acc += target.coords[pos[h]]
    if k:
        acc = np.mod(acc, np.asarray(target.invariant_factors, dtype=np.int64))
    return Transfer(G, hm, Hg, helems, target, acc)


def kernel_mask(t: Transfer) -> np.ndarray:
    return ~t.images.any(axis=1) if t.images.shape[1] else np.ones(t.G.order, dtype=bool)


def fixed_mask(aq: AbelianQuotient, auts: Sequence[np.ndarray]) -> np.ndarray:
    """Elements whose coset is fixed by every automorphism in ``auts``."""
    m = np.ones(aq.source.order, dtype=bool)
    for a in auts:
        a = np.asarray(a)
        m &= (aq.coords[a] == aq.coords).all(axis=1)
    return m


def transfer_value_fixed(t: Transfer, auts: Sequence[np.ndarray]) -> np.ndarray:
    """Mask of ``g`` in ``G`` with ``trf(g)`` fixed by ``auts`` (acting on ``H``)."""
    tq = t.target
    reps = tq.representatives()
    lift = np.array([reps[tuple(int(c) for c in v)] for v in t.images], dtype=np.int64)
    m = np.ones(t.G.order, dtype=bool)
    for a in auts:
        a = np.asarray(a)
        m &= (tq.coords[a[lift]] == t.images).all(axis=1)
    return m


def maximal_transfer_kernels(S: Group, mode: str = "derived") -> Subgroup:
    """Intersection over maximal ``M < S`` of the kernels of ``S -> M/[M,M]``
    (or ``M/Phi(M)``), as a subgroup of ``S`` containing the source kernel."""
    m = np.ones(S.order, dtype=bool)
    for M in maximal_subgroups(S):
        m &= kernel_mask(transfer_map(S, M, mode))
    return Subgroup(S, m)


@dataclass
class CriticalData:
    """A critical (or potentially critical) class representative with the
    generators of ``O^2(Aut(P))`` acting on the stand-alone copy of ``P``."""

    mask: np.ndarray
    group: Group
    elems: np.ndarray
    odd_gens: list[np.ndarray]


def transfer_fixed_subgroup(
    S: Group,
    mode: str,
    s_odd_gens: Sequence[np.ndarray],
    critical: Sequence[CriticalData],
) -> Subgroup:
    """Preimage in ``S`` of the set of ``x`` in the abelian quotient that are
    fixed by ``O^2(Aut(S))`` and whose transfer to each critical ``P`` is fixed
    by ``O^2(Aut(P))``.  It is trivial in the quotient iff it equals the kernel."""
    aq = abelian_quotient(S, mode)
    m = fixed_mask(aq, s_odd_gens)
    for c in critical:
        t = transfer_map(S, c.mask, mode, H_group=(c.group, c.elems))
        m &= transfer_value_fixed(t, c.odd_gens)
    return Subgroup(S, m)
