"""Strongly 2-embedded subgroups, the exact criticality oracle, and the
structural checks on ``S_0 = N_S(P)/P``.

A proper subgroup ``H < G`` of even order is strongly 2-embedded when
``H`` meets every conjugate ``xHx^-1`` (``x`` outside ``H``) in a subgroup
of odd order.  The main decision procedure grows a candidate from a Sylow
2-subgroup ``T``: every strongly 2-embedded subgroup containing ``T``
contains ``N_G(T)`` and each ``C_G(t)`` for involutions ``t`` in ``T``, and it
contains every ``x`` for which ``H`` and ``xHx^-1`` share an involution.
Closing under these rules either reaches ``G`` (no such subgroup) or stops at
a subgroup that is then verified directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .automorphisms import (
    AutGroup,
    InnerCosetKey,
    automorphism_group,
    compose_inverse,
    conjugate_aut,
    conjugation_action,
    inner,
    outer_generators,
)
from .errors import ResourceError, SizeCapError
from .groups import Group, close_under, table_from_right_action
from .permgroups import PermGroup
from .subgroups import (
    SubLike,
    Subgroup,
    _mask,
    all_subgroups,
    as_group,
    center,
    closure_mask,
    generators_of,
    is_centric,
    normalizer,
    omega1,
)

DEFAULT_ORACLE_CAP = 10_000
DEFAULT_OUT_CAP = 1 << 16


@dataclass
class EmbeddingVerdict:
    status: str  # "yes", "no" or "not_decided"
    witness: dict | None = None
    reason: str = ""

    @property
    def yes(self) -> bool:
        return self.status == "yes"


# -- helpers on bare tables (no conjugation table needed) ---------------------------

def _conjugate_mask(G: Group, m: np.ndarray, y: int) -> np.ndarray:
    """Mask of ``y X y^-1``."""
    el = np.flatnonzero(m)
    out = np.zeros(G.order, dtype=bool)
    out[G.mul[G.mul[y, el], G.inv[y]]] = True
    return out


def _normalizer_mask(G: Group, m: np.ndarray) -> np.ndarray:
    gens = generators_of(G, m)
    allg = np.arange(G.order)
    res = np.ones(G.order, dtype=bool)
    for t in gens:
        res &= m[G.mul[G.mul[allg, t], G.inv]]
    return res


def _centralizer_mask(G: Group, x: int) -> np.ndarray:
    return G.mul[:, x] == G.mul[x, :]


def two_part(n: int) -> int:
    return n & -n


def sylow2(G: Group, start: np.ndarray | None = None) -> np.ndarray:
    """A Sylow 2-subgroup (containing the 2-subgroup ``start``), grown through normalisers."""
    target = two_part(G.order)
    T = np.zeros(G.order, dtype=bool) if start is None else np.array(start, dtype=bool)
    T[0] = True
    orders = G.element_orders
    twoel = np.flatnonzero((orders & (orders - 1)) == 0)
    while T.sum() < target:
        N = _normalizer_mask(G, T)
        grown = False
        for x in twoel:
            if N[x] and not T[x]:
                U = closure_mask(G, [int(x)], start=T)
                k = int(U.sum())
                if k & (k - 1) == 0:
                    T = U
                    grown = True
                    break
        if not grown:  # cannot happen for a genuine 2-subgroup below Sylow size
            raise AssertionError("failed to enlarge a non-Sylow 2-subgroup")
    return T


def is_strongly_embedded(G: Group, H: np.ndarray) -> bool:
    """Direct check of the definition for one subgroup ``H``."""
    h = int(H.sum())
    if h % 2 or h == G.order:
        return False
    covered = H.copy()
    hel = np.flatnonzero(H)
    for y in range(G.order):
        if covered[y]:
            continue
        covered[G.mul[y, hel]] = True
        if int((H & _conjugate_mask(G, H, y)).sum()) % 2 == 0:
            return False
    return True


def has_strongly_2_embedded(
    G: Group,
    cap: int = DEFAULT_ORACLE_CAP,
    sylow: np.ndarray | None = None,
) -> EmbeddingVerdict:
    """Whether ``G`` has a strongly 2-embedded subgroup; the witness contains
    the Sylow 2-subgroup ``sylow`` when supplied."""
    n = G.order
    if n > cap:
        return EmbeddingVerdict("not_decided", reason=f"|G| = {n} exceeds oracle cap {cap}")
    if n % 2:
        return EmbeddingVerdict("no", reason="odd order")
    T = sylow2(G) if sylow is None else np.asarray(sylow, dtype=bool)
    H = _normalizer_mask(G, T)
    invols = [int(t) for t in np.flatnonzero(T) if G.element_orders[t] == 2]
    for t in invols:
        H = closure_mask(G, np.flatnonzero(_centralizer_mask(G, t)), start=H)
    while True:
        if H.all():
            return EmbeddingVerdict("no", reason="forced subgroup is the whole group")
        hel = np.flatnonzero(H)
        covered = H.copy()
        grow = None
        for y in range(n):
            if covered[y]:
                continue
            covered[G.mul[y, hel]] = True
            if int((H & _conjugate_mask(G, H, y)).sum()) % 2 == 0:
                grow = y
                break
        if grow is None:
            return EmbeddingVerdict("yes", witness={"H": np.flatnonzero(H).tolist(), "order": int(H.sum())})
        H = closure_mask(G, [grow], start=H)


def brute_force_strongly_embedded(G: Group, cap: int = 20000) -> EmbeddingVerdict:
    """Test every subgroup of even order against the definition (tiny groups)."""
    for H in all_subgroups(G, cap):
        if H.order % 2 == 0 and H.order < G.order and is_strongly_embedded(G, H.mask):
            return EmbeddingVerdict("yes", witness={"H": H.elements.tolist(), "order": H.order})
    return EmbeddingVerdict("no", reason="no subgroup satisfies the definition")


# -- S_0 shape ---------------------------------------------------------------------------

@dataclass
class SylowShape:
    order: int
    k: int
    cyclic: bool
    z_equals_omega1: bool
    z_order: int
    z_cyclic: bool
    z_elementary: bool
    n: int
    m: int | None
    c_pass: bool
    d_pass: bool
    involutions: int
    centre_elements: list[int] = field(default_factory=list)


def sylow_shape_checks(S0: Group) -> SylowShape:
    """Conditions on ``S_0``: cyclic or ``Z(S_0) = Omega_1(S_0)``; and, when
    ``Z(S_0)`` is not cyclic, ``|S_0| = |Z(S_0)|^m`` with ``m`` in ``{1,2,3}``."""
    o = S0.order
    k = o.bit_length() - 1
    orders = S0.element_orders
    cyclic = bool((orders == o).any())
    Z = center(S0)
    om = omega1(S0)
    z_eq = Z == om
    zo = Z.order
    z_cyc = bool((orders[Z.elements] == zo).any())
    z_el = bool((orders[Z.elements] <= 2).all())
    n = (zo.bit_length() - 1) if z_el else 0
    m = None
    if zo > 1:
        p, e = zo, 1
        while p < o:
            p *= zo
            e += 1
        if p == o:
            m = e
    c_pass = cyclic or z_eq
    d_pass = z_cyc or (m is not None and m in (1, 2, 3))
    return SylowShape(
        order=o,
        k=k,
        cyclic=cyclic,
        z_equals_omega1=bool(z_eq),
        z_order=zo,
        z_cyclic=z_cyc,
        z_elementary=z_el,
        n=n,
        m=m,
        c_pass=bool(c_pass),
        d_pass=bool(d_pass),
        involutions=int((orders == 2).sum()),
        centre_elements=Z.elements.tolist(),
    )


# -- Out_S(P) inside Out(P) -----------------------------------------------------------

@dataclass
class LocalData:
    """``P`` as a stand-alone group with ``Aut(P)`` and the conjugation action of
    ``N_S(P)``."""

    S: Group
    mask: np.ndarray
    P: Group
    elems: np.ndarray
    N: Subgroup
    A: AutGroup
    coset_reps: list[int]  # representatives of N_S(P)/P, identity first
    actions: list[np.ndarray]  # conjugation by each coset representative on P

    @property
    def k(self) -> int:
        return (len(self.coset_reps)).bit_length() - 1


def local_data(S: Group, P: SubLike, node_budget: int | None = None) -> LocalData:
    pm = _mask(P)
    Pg, elems = as_group(S, pm, name=f"P{int(pm.sum())}")
    N = normalizer(S, pm)
    reps = []
    covered = np.zeros(S.order, dtype=bool)
    for g in N.elements:
        if not covered[g]:
            covered[S.mul[g, elems]] = True
            reps.append(int(g))
    kw = {} if node_budget is None else {"node_budget": node_budget}
    A = automorphism_group(Pg, **kw)
    acts = conjugation_action(S, pm, elems, reps)
    return LocalData(S, pm, Pg, elems, N, A, reps, acts)


NORMALIZER_SAMPLE = 32


class ConjugateOrbit:
    """The ``Out(P)``-conjugates of ``T = Out_S(P)``, found by breadth-first
    search over the generators of ``Aut(P)``.

    Each point is the list of conjugated elements of ``T`` (in the order of
    ``L.actions``) with a transversal element ``u`` such that the point is
    ``u T u^-1``.  Schreier generators of the point stabiliser generate
    ``N_Aut(P)(Aut_S(P))``; their permutation action on ``T`` is recorded.
    """

    def __init__(self, L: LocalData, cap: int = DEFAULT_OUT_CAP) -> None:
        A = L.A
        self.L = L
        self.key = InnerCosetKey(A)
        key = self.key
        self.t_keys = [key(a) for a in L.actions]
        self.t_index = {k: i for i, k in enumerate(self.t_keys)}
        gens = outer_generators(A, key)
        n = L.P.order
        dt = np.int16 if n < 2**15 else np.int32
        ident = np.arange(n, dtype=np.int64)
        start = frozenset(self.t_keys)
        self.points: list[frozenset] = [start]
        self.transversal: list[np.ndarray] = [ident.astype(dt)]
        index = {start: 0}
        perms: set[tuple[int, ...]] = set()
        self.normalizer: dict[tuple, np.ndarray] = {}
        i = 0
        while i < len(self.points):
            u = self.transversal[i].astype(np.int64)
            for g in gens:
                v = g[u]
                pt = frozenset(key(conjugate_aut(v, a)) for a in L.actions)
                j = index.get(pt)
                if j is None:
                    if len(self.points) >= cap:
                        raise ResourceError(f"more than {cap} conjugates of Out_S(P)")
                    index[pt] = len(self.points)
                    self.points.append(pt)
                    self.transversal.append(v.astype(dt))
                    continue
                # u_j^-1 g u_i normalises T
                sg = compose_inverse(self.transversal[j].astype(np.int64))[v]
                perms.add(tuple(self.t_index[key(conjugate_aut(sg, a))] for a in L.actions))
                if len(self.normalizer) < NORMALIZER_SAMPLE:
                    k = key(sg)
                    if k != key.identity_key:
                        self.normalizer.setdefault(k, sg.astype(dt))
            i += 1
        self.normalizer_perms = sorted(perms)
        self._index = index

    def normalizer_orbit_reps(self, points: list[int]) -> list[int]:
        """One representative of each orbit on ``points`` under the recorded
        elements of ``N_Aut(P)(Aut_S(P))`` (a subset of it, so orbits may split)."""
        L, key = self.L, self.key
        parent = {i: i for i in points}

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in points:
            u = self.transversal[i].astype(np.int64)
            for n in self.normalizer.values():
                v = n.astype(np.int64)[u]
                j = self._index[frozenset(key(conjugate_aut(v, a)) for a in L.actions)]
                a, b = find(i), find(j)
                if a != b:
                    parent[max(a, b)] = min(a, b)
        return sorted({find(i) for i in points})

    def __len__(self) -> int:
        return len(self.points)

    def conjugates(self, i: int) -> tuple[np.ndarray, list[np.ndarray]]:
        u = self.transversal[i].astype(np.int64)
        return u, [conjugate_aut(u, a) for a in self.L.actions]


def involutions_conjugate_in_normalizer(L: LocalData, orbit: ConjugateOrbit | None = None, cap: int = DEFAULT_OUT_CAP):
    """Whether all involutions of ``S_0`` are conjugate under ``N_Out(P)(S_0)``.

    Returns True/False, or None when there are too many conjugates of ``S_0``.
    """
    key = orbit.key if orbit is not None else InnerCosetKey(L.A)
    ident = key.identity_key
    keys = [key(a) for a in L.actions]
    invols = [i for i, a in enumerate(L.actions) if keys[i] != ident and key(a[a]) == ident]
    if len(invols) <= 1:
        return True
    if orbit is None:
        try:
            orbit = ConjugateOrbit(L, cap)
        except ResourceError:
            return None
    seen = {invols[0]}
    stack = [invols[0]]
    while stack:
        i = stack.pop()
        for p in orbit.normalizer_perms:
            j = p[i]
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return set(invols) <= seen


def _s0_generators(L: LocalData) -> list[np.ndarray]:
    """Conjugation actions of generators of ``N_S(P)`` lying outside ``P``."""
    S = L.S
    gens = [g for g in generators_of(S, L.N) if not L.mask[g]]
    return conjugation_action(S, L.mask, L.elems, gens)


# -- the exact criticality oracle -----------------------------------------------------------

def critical_oracle(
    S: Group,
    P: SubLike,
    out_cap: int = DEFAULT_OUT_CAP,
    oracle_cap: int = DEFAULT_ORACLE_CAP,
    L: LocalData | None = None,
) -> EmbeddingVerdict:
    """Decide the definition of a critical subgroup exactly.

    With ``T = Out_S(P)``: if some ``G`` and ``G_0`` exist, then for any ``x``
    in ``G`` outside ``G_0`` the subgroup ``<T, xTx^-1>`` still has ``T`` as a
    Sylow 2-subgroup and meets ``G_0`` in a strongly 2-embedded subgroup, and
    ``T`` meets ``xTx^-1`` trivially.  So it suffices to test the groups
    ``<T, U>`` for the conjugates ``U`` of ``T`` with ``T`` and ``U`` disjoint.
    """
    pm = _mask(P)
    if pm.all():
        return EmbeddingVerdict("no", reason="P = S")
    if not is_centric(S, pm):
        return EmbeddingVerdict("no", reason="not centric")
    L = L or local_data(S, pm)
    A = L.A
    if A.out_order & (A.out_order - 1) == 0:
        return EmbeddingVerdict("no", reason="Out(P) is a 2-group")
    try:
        orbit = ConjugateOrbit(L, out_cap)
    except ResourceError as exc:
        return EmbeddingVerdict("not_decided", reason=str(exc))
    key = orbit.key
    Tset = orbit.points[0]
    tgens = _s0_generators(L)
    inn = [inner(L.P, g) for g in L.P.generators]
    t_order = len(L.actions)
    undecided = []
    disjoint = [i for i in range(1, len(orbit)) if len(orbit.points[i] & Tset) == 1]
    for i in orbit.normalizer_orbit_reps(disjoint):
        u, _ = orbit.conjugates(i)
        ugens = [conjugate_aut(u, b) for b in tgens]
        Gt = PermGroup(L.P.order, inn + tgens + ugens, base=A.seq)
        q = Gt.order() // A.inner_index
        if q % t_order or (q // t_order) % 2 == 0:
            continue
        if q > oracle_cap:
            undecided.append(q)
            continue
        gamma, tmask = _coset_table(key, L.P.order, tgens + ugens, Tset, q)
        v = has_strongly_2_embedded(gamma, oracle_cap, sylow=tmask)
        if v.status == "yes":
            return EmbeddingVerdict(
                "yes",
                witness={
                    "G_order": gamma.order,
                    "G0_order": v.witness["order"],
                    "G": gamma,
                    "G0": v.witness["H"],
                    "T": np.flatnonzero(tmask).tolist(),
                },
            )
        if v.status == "not_decided":
            undecided.append(q)
    if undecided:
        return EmbeddingVerdict("not_decided", reason=f"subgroups of Out(P) of orders {sorted(set(undecided))} exceed oracle cap")
    return EmbeddingVerdict("no", reason="no subgroup of Out(P) has the required shape")


def _coset_table(key: InnerCosetKey, n: int, gens: list[np.ndarray], Tset, expected: int) -> tuple[Group, np.ndarray]:
    """The image of ``<gens>`` in ``Out(P)`` as a table, and the mask of ``T``."""
    ident = np.arange(n, dtype=np.int64)
    elems, right, parent, via = close_under(ident, gens, lambda a, b: a[b], key, cap=expected + 1)
    if len(elems) != expected:
        raise SizeCapError(f"coset enumeration found {len(elems)} elements, expected {expected}")
    mul = table_from_right_action(right, parent, via)
    G = Group(mul, generators=[int(right[0, k]) for k in range(len(gens))], provenance={"type": "outer-subgroup"})
    tmask = np.array([key(a) in Tset for a in elems], dtype=bool)
    return G, tmask


def validate_critical_witness(v: EmbeddingVerdict) -> bool:
    """Re-check a yes-witness of :func:`critical_oracle` against the definition."""
    if not v.yes:
        return False
    G: Group = v.witness["G"]
    H = np.zeros(G.order, dtype=bool)
    H[v.witness["G0"]] = True
    T = np.zeros(G.order, dtype=bool)
    T[v.witness["T"]] = True
    if (T & ~H).any():
        return False
    t = int(T.sum())
    if t != two_part(G.order):
        return False
    return is_strongly_embedded(G, H)


def o2_order(G: Group) -> int:
    """``|O_2(G)|``: the core of a Sylow 2-subgroup."""
    T = sylow2(G)
    core = T.copy()
    for y in range(G.order):
        core &= _conjugate_mask(G, T, y)
    return int(core.sum())
