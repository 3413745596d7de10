"""Subgroups as boolean masks, and the standard characteristic functors.

Every function accepts a :class:`Subgroup` or a plain boolean mask and
returns a :class:`Subgroup`.  Internally everything is numpy mask algebra.
"""

from __future__ import annotations

from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DomainError
from .groups import Group


class Subgroup:
    """A subgroup of ``group`` stored as a boolean membership mask."""

    __slots__ = ("group", "mask", "_key", "_elems")

    def __init__(self, group: Group, mask: np.ndarray) -> None:
        self.group = group
        self.mask = np.asarray(mask, dtype=bool)
        self._key: bytes | None = None
        self._elems: np.ndarray | None = None

    @property
    def order(self) -> int:
        return int(self.mask.sum())

    @property
    def elements(self) -> np.ndarray:
        if self._elems is None:
            self._elems = np.flatnonzero(self.mask)
        return self._elems

    @property
    def key(self) -> bytes:
        if self._key is None:
            self._key = np.packbits(self.mask).tobytes()
        return self._key

    def __array__(self, dtype=None, copy=None):
        return self.mask if dtype is None else self.mask.astype(dtype)

    def __contains__(self, x: int) -> bool:
        return bool(self.mask[x])

    def __len__(self) -> int:
        return self.order

    def __eq__(self, other) -> bool:
        return isinstance(other, Subgroup) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __le__(self, other) -> bool:
        return bool(not (self.mask & ~_mask(other)).any())

    def __and__(self, other) -> "Subgroup":
        return Subgroup(self.group, self.mask & _mask(other))

    def __repr__(self) -> str:
        return f"Subgroup(order={self.order} of {self.group.order})"


SubLike = Union[Subgroup, np.ndarray]


def _mask(x: SubLike) -> np.ndarray:
    return x.mask if isinstance(x, Subgroup) else np.asarray(x, dtype=bool)


def mask_of(G: Group, elems: Iterable[int]) -> np.ndarray:
    m = np.zeros(G.order, dtype=bool)
    m[np.asarray(list(elems), dtype=np.int64)] = True
    return m


def whole(G: Group) -> Subgroup:
    return Subgroup(G, np.ones(G.order, dtype=bool))


def trivial(G: Group) -> Subgroup:
    m = np.zeros(G.order, dtype=bool)
    m[0] = True
    return Subgroup(G, m)


# -- closure -------------------------------------------------------------------

def closure_mask(G: Group, gens: Iterable[int], start: np.ndarray | None = None) -> np.ndarray:
    """Mask of the subgroup generated by ``gens`` together with subgroup ``start``."""
    gens = np.unique(np.asarray(list(gens), dtype=np.int64))
    if start is None:
        mask = np.zeros(G.order, dtype=bool)
        mask[0] = True
        frontier = np.array([0])
        mult = gens
    else:
        mask = np.array(start, dtype=bool)
        if len(gens) == 0 or mask[gens].all():
            return mask
        frontier = np.flatnonzero(mask)
        mult = np.concatenate([frontier, gens])
    if len(mult) == 0:
        return mask
    mul = G.mul
    while len(frontier):
        prod = mul[np.ix_(frontier, mult)].ravel()
        new = np.unique(prod[~mask[prod]])
        mask[new] = True
        frontier = new
    return mask


def closure(G: Group, seed: Iterable[int] | SubLike = ()) -> Subgroup:
    """Smallest subgroup containing ``seed`` (element ids or a mask)."""
    if isinstance(seed, Subgroup) or (isinstance(seed, np.ndarray) and seed.dtype == bool):
        seed = np.flatnonzero(_mask(seed))
    return Subgroup(G, closure_mask(G, seed))


def join(G: Group, *parts: SubLike | Iterable[int]) -> Subgroup:
    """Subgroup generated by several subgroups and/or element lists."""
    elems: list[np.ndarray] = []
    for p in parts:
        if isinstance(p, Subgroup) or (isinstance(p, np.ndarray) and p.dtype == bool):
            elems.append(np.flatnonzero(_mask(p)))
        else:
            elems.append(np.asarray(list(p), dtype=np.int64))
    allel = np.concatenate(elems) if elems else np.empty(0, np.int64)
    return Subgroup(G, closure_mask(G, allel))


def generators_of(G: Group, X: SubLike) -> list[int]:
    """A small generating set of ``X``, largest element orders first."""
    m = _mask(X)
    elems = np.flatnonzero(m)
    if len(elems) == 1:
        return []
    orders = G.element_orders[elems]
    cand = elems[np.lexsort((elems, -orders))]
    gens: list[int] = []
    cur = np.zeros(G.order, dtype=bool)
    cur[0] = True
    total = len(elems)
    for x in cand:
        if not cur[x]:
            gens.append(int(x))
            cur = closure_mask(G, [x], start=cur)
            if cur.sum() == total:
                break
    return gens


def is_subgroup(G: Group, m: np.ndarray) -> bool:
    m = np.asarray(m, dtype=bool)
    if not m[0]:
        return False
    el = np.flatnonzero(m)
    return bool(m[G.mul[np.ix_(el, el)]].all())


def product_set(G: Group, X: SubLike, Y: SubLike) -> np.ndarray:
    """Mask of the set ``XY``."""
    xs, ys = np.flatnonzero(_mask(X)), np.flatnonzero(_mask(Y))
    m = np.zeros(G.order, dtype=bool)
    m[G.mul[np.ix_(xs, ys)].ravel()] = True
    return m


# -- conjugation ---------------------------------------------------------------

def conjugate(G: Group, X: SubLike, g: int) -> Subgroup:
    """``g X g^-1``."""
    el = np.flatnonzero(_mask(X))
    m = np.zeros(G.order, dtype=bool)
    m[G.conj[g, el]] = True
    return Subgroup(G, m)


def _all_conjugate_masks(G: Group, X: SubLike, by: np.ndarray | None = None) -> np.ndarray:
    el = np.flatnonzero(_mask(X))
    rows = np.arange(G.order) if by is None else np.asarray(by)
    out = np.zeros((len(rows), G.order), dtype=bool)
    out[np.arange(len(rows))[:, None], G.conj[np.ix_(rows, el)]] = True
    return out


def conjugacy_class_keys(G: Group, X: SubLike) -> list[bytes]:
    """Packed keys of all distinct conjugates, sorted descending (first = canonical)."""
    packed = np.packbits(_all_conjugate_masks(G, X), axis=1)
    uniq = np.unique(packed, axis=0)
    return sorted((r.tobytes() for r in uniq), reverse=True)


def subgroup_conjugacy_class(G: Group, P: SubLike) -> list[Subgroup]:
    """All distinct conjugates ``gPg^-1``, canonical representative first."""
    keys = conjugacy_class_keys(G, P)
    return [Subgroup(G, unpack_key(G, k)) for k in keys]


def unpack_key(G: Group, key: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(key, dtype=np.uint8), count=G.order).astype(bool)


def canonical_representative(G: Group, P: SubLike) -> Subgroup:
    """Class representative whose sorted member list is lexicographically least.

    For sets of equal size this is the lexicographically largest mask, which is
    what comparing packed keys computes.
    """
    return Subgroup(G, unpack_key(G, conjugacy_class_keys(G, P)[0]))


def are_conjugate(G: Group, X: SubLike, Y: SubLike) -> bool:
    ky = np.packbits(_mask(Y)).tobytes()
    return ky in set(conjugacy_class_keys(G, X))


# -- centralizers, normalizers, centres ---------------------------------------

def centralizer(G: Group, X: SubLike | int) -> Subgroup:
    if isinstance(X, (int, np.integer)):
        return Subgroup(G, G.commute[int(X)].copy())
    gens = generators_of(G, X)
    m = np.ones(G.order, dtype=bool)
    for g in gens:
        m &= G.commute[g]
    return Subgroup(G, m)


def normalizer(G: Group, P: SubLike) -> Subgroup:
    pm = _mask(P)
    gens = generators_of(G, pm)
    if not gens:
        return whole(G)
    # g normalises P iff g p g^-1 lies in P for every generator p
    m = pm[G.conj[:, gens]].all(axis=1)
    return Subgroup(G, m)


def is_normal(G: Group, P: SubLike, within: SubLike | None = None) -> bool:
    pm = _mask(P)
    gens = generators_of(G, pm)
    if not gens:
        return True
    ambient = G.generators if within is None else generators_of(G, within)
    return bool(pm[G.conj[np.ix_(list(ambient), gens)]].all()) if ambient else True


def center(G: Group, within: SubLike | None = None) -> Subgroup:
    """Centre of ``G`` (or of the subgroup ``within``)."""
    if within is None:
        gens = list(G.generators)
        m = np.ones(G.order, dtype=bool)
    else:
        m = _mask(within).copy()
        gens = generators_of(G, m)
    for g in gens:
        m &= G.commute[g]
    return Subgroup(G, m)


def commutator_subgroup(G: Group, X: SubLike, Y: SubLike) -> Subgroup:
    """``[X, Y]``, generated by all ``[x, y]``."""
    xs, ys = np.flatnonzero(_mask(X)), np.flatnonzero(_mask(Y))
    vals = np.unique(G.comm[np.ix_(xs, ys)])
    return Subgroup(G, closure_mask(G, vals))


def derived(G: Group, within: SubLike | None = None) -> Subgroup:
    if within is None:
        return Subgroup(G, closure_mask(G, np.unique(G.comm)))
    return commutator_subgroup(G, within, within)


def _require_2group(n: int) -> None:
    if n & (n - 1):
        raise DomainError(f"order {n} is not a power of 2")


def frattini(G: Group, within: SubLike | None = None) -> Subgroup:
    """Frattini subgroup of a 2-group: generated by the squares."""
    m = np.ones(G.order, dtype=bool) if within is None else _mask(within)
    el = np.flatnonzero(m)
    _require_2group(len(el))
    sq = np.unique(G.mul[el, el])
    return Subgroup(G, closure_mask(G, sq))


def omega1(G: Group, P: SubLike | None = None) -> Subgroup:
    """Subgroup generated by the elements of order at most 2."""
    m = np.ones(G.order, dtype=bool) if P is None else _mask(P)
    el = np.flatnonzero(m)
    _require_2group(len(el))
    inv = el[G.element_orders[el] <= 2]
    return Subgroup(G, closure_mask(G, inv))


def upper_central_2(G: Group, within: SubLike | None = None) -> Subgroup:
    """Second centre via the quotient definition ``Z2/Z = Z(G/Z)``."""
    from .groups import quotient

    if within is not None:
        H, elems = as_group(G, within)
        z2 = upper_central_2(H)
        return Subgroup(G, mask_of(G, elems[z2.elements]))
    Z = center(G)
    Q, proj = quotient(G, Z.mask)
    zq = center(Q).mask
    return Subgroup(G, zq[proj])


def second_centre_by_commutators(G: Group) -> Subgroup:
    """Independent route: ``x`` with ``[x, g]`` central for every generator ``g``."""
    z = center(G).mask
    gens = list(G.generators)
    if not gens:
        return whole(G)
    return Subgroup(G, z[G.comm[:, gens]].all(axis=1))


def core_in(G: Group, P: SubLike) -> Subgroup:
    """Largest normal subgroup of ``G`` inside ``P``."""
    pm = _mask(P).copy()
    for g in range(G.order):
        pm &= unconj_mask(G, pm, g)
    return Subgroup(G, pm)


def unconj_mask(G: Group, m: np.ndarray, g: int) -> np.ndarray:
    """Mask of ``g^-1 X g`` given the mask of ``X``; vectorised."""
    return m[G.conj[g]]


def normal_closure(G: Group, X: SubLike | Iterable[int], within: SubLike | None = None) -> Subgroup:
    """Smallest subgroup containing ``X`` and normalised by ``within`` (default ``G``)."""
    if isinstance(X, Subgroup) or (isinstance(X, np.ndarray) and X.dtype == bool):
        m = closure_mask(G, np.flatnonzero(_mask(X)))
    else:
        m = closure_mask(G, list(X))
    ambient = list(G.generators) if within is None else generators_of(G, within)
    if not ambient:
        return Subgroup(G, m)
    while True:
        el = np.flatnonzero(m)
        imgs = np.unique(G.conj[np.ix_(ambient, el)])
        if m[imgs].all():
            return Subgroup(G, m)
        m = closure_mask(G, imgs[~m[imgs]], start=m)


def invariant_closure(
    G: Group,
    X: SubLike | Iterable[int],
    maps: Sequence[np.ndarray],
    normal_in: SubLike | None = None,
) -> Subgroup:
    """Smallest subgroup containing ``X``, normalised by ``normal_in`` and mapped
    into itself by every element-image array in ``maps``."""
    if isinstance(X, Subgroup) or (isinstance(X, np.ndarray) and X.dtype == bool):
        m = closure_mask(G, np.flatnonzero(_mask(X)))
    else:
        m = closure_mask(G, list(X))
    ambient = list(G.generators) if normal_in is None else generators_of(G, normal_in)
    maps = [np.asarray(a) for a in maps]
    while True:
        el = np.flatnonzero(m)
        parts = [G.conj[np.ix_(ambient, el)].ravel()] if ambient else []
        parts += [a[el] for a in maps]
        if not parts:
            return Subgroup(G, m)
        imgs = np.unique(np.concatenate(parts))
        if m[imgs].all():
            return Subgroup(G, m)
        m = closure_mask(G, imgs[~m[imgs]], start=m)


def semicharacteristic_closure(S: Group, Q: SubLike, odd_aut_gens: Sequence) -> Subgroup:
    """Smallest normal subgroup of ``S`` containing ``Q`` and invariant under the
    supplied automorphisms (element-image arrays or objects with ``images``)."""
    maps = [getattr(a, "images", a) for a in odd_aut_gens]
    return invariant_closure(S, Q, maps)


def is_invariant(m: np.ndarray, images: np.ndarray) -> bool:
    el = np.flatnonzero(m)
    return bool(m[np.asarray(images)[el]].all())


# -- subgroups as groups ---------------------------------------------------------

def as_group(G: Group, X: SubLike, name: str | None = None) -> tuple[Group, np.ndarray]:
    """The subgroup as a stand-alone group; returns ``(H, elems)`` with ``elems[i]``
    the id in ``G`` of element ``i`` of ``H``."""
    elems = np.flatnonzero(_mask(X))
    pos = np.full(G.order, -1, dtype=np.int64)
    pos[elems] = np.arange(len(elems))
    table = pos[G.mul[np.ix_(elems, elems)]]
    gens = [int(pos[g]) for g in generators_of(G, X)]
    H = Group(table, generators=gens, provenance={"type": "subgroup", "order": len(elems)}, name=name)
    return H, elems


# -- Frattini coordinates and maximal subgroups -------------------------------

def frattini_coordinates(G: Group, P: SubLike | None = None) -> tuple[np.ndarray, list[int], np.ndarray]:
    """Coordinates of ``P/Phi(P)``.

    Returns ``(coords, basis, phi)``: ``coords[x]`` is an integer bit-vector
    for ``x`` in ``P`` (``-1`` outside), ``basis`` the lifted basis elements and
    ``phi`` the mask of ``Phi(P)``.
    """
    pm = np.ones(G.order, dtype=bool) if P is None else _mask(P)
    phi = frattini(G, pm).mask
    coords = np.full(G.order, -1, dtype=np.int64)
    coords[phi] = 0
    basis: list[int] = []
    for x in generators_of(G, pm):
        if coords[x] >= 0:
            continue
        cur = np.flatnonzero(coords >= 0)
        bit = 1 << len(basis)
        coords[G.mul[cur, x]] = coords[cur] | bit
        basis.append(int(x))
    return coords, basis, phi


def _parity(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    p = np.zeros_like(v)
    while v.any():
        p ^= v & 1
        v >>= 1
    return p


def maximal_subgroups(G: Group, P: SubLike | None = None) -> list[Subgroup]:
    """All maximal subgroups of a 2-group ``P``: kernels of nonzero functionals
    on ``P/Phi(P)``."""
    pm = np.ones(G.order, dtype=bool) if P is None else _mask(P)
    coords, basis, _ = frattini_coordinates(G, pm)
    inside = coords >= 0
    out = []
    for f in range(1, 1 << len(basis)):
        m = inside & (_parity(np.where(inside, coords & f, 0)) == 0)
        out.append(Subgroup(G, m))
    return out


def index2_subgroups_by_homomorphisms(G: Group) -> list[Subgroup]:
    """Independent route to the index-2 subgroups: enumerate homomorphisms to C2
    by assigning generator images and propagating through the Cayley graph."""
    gens = list(G.generators)
    out = []
    for bits in range(1, 1 << len(gens)):
        val = np.full(G.order, -1, dtype=np.int64)
        val[0] = 0
        frontier = [0]
        ok = True
        while frontier and ok:
            nxt = []
            for x in frontier:
                for k, g in enumerate(gens):
                    y = int(G.mul[x, g])
                    v = val[x] ^ ((bits >> k) & 1)
                    if val[y] < 0:
                        val[y] = v
                        nxt.append(y)
                    elif val[y] != v:
                        ok = False
                        break
                if not ok:
                    break
            frontier = nxt
        if ok:
            out.append(Subgroup(G, val == 0))
    return out


def frattini_by_maximals(G: Group) -> Subgroup:
    m = np.ones(G.order, dtype=bool)
    for M in index2_subgroups_by_homomorphisms(G):
        m &= M.mask
    return Subgroup(G, m)


def all_subgroups(G: Group, cap: int = 20000) -> list[Subgroup]:
    """Brute-force list of every subgroup (small groups only), by cyclic extension."""
    from .errors import SizeCapError

    seen = {trivial(G).key: trivial(G)}
    layer = [trivial(G)]
    while layer:
        nxt = []
        for H in layer:
            for x in range(G.order):
                if H.mask[x]:
                    continue
                K = Subgroup(G, closure_mask(G, [x], start=H.mask))
                if K.key not in seen:
                    seen[K.key] = K
                    nxt.append(K)
                    if len(seen) > cap:
                        raise SizeCapError("too many subgroups")
        layer = nxt
    return sorted(seen.values(), key=lambda H: (H.order, [-b for b in H.key]))


# -- candidate enumeration -------------------------------------------------------

def z_prime(S: Group) -> Subgroup:
    """Subgroup generated by ``x`` in ``Z2(S)`` with ``|[x, S]| <= 2``."""
    z2 = upper_central_2(S)
    good = [int(x) for x in z2.elements if len(np.unique(S.comm[x])) <= 2]
    return Subgroup(S, closure_mask(S, good))


def is_centric(S: Group, P: SubLike) -> bool:
    pm = _mask(P)
    c = centralizer(S, pm).mask
    return not (c & ~pm).any()


class _ClassRegistry:
    """Remembers every conjugate of every subgroup class met so far."""

    def __init__(self, S: Group) -> None:
        self.S = S
        self.index: dict[bytes, int] = {}
        self.reps: list[Subgroup] = []

    def add(self, m: np.ndarray) -> Subgroup | None:
        k = np.packbits(m).tobytes()
        if k in self.index:
            return None
        keys = conjugacy_class_keys(self.S, m)
        idx = len(self.reps)
        for kk in keys:
            self.index[kk] = idx
        rep = Subgroup(self.S, unpack_key(self.S, keys[0]))
        self.reps.append(rep)
        return rep


def centric_subgroups_containing(S: Group, core: SubLike) -> list[Subgroup]:
    """Class representatives of proper centric subgroups containing ``core``.

    The family is closed upwards, so every member is maximal in some larger
    member; a descent from ``S`` through maximal subgroups of class
    representatives reaches every class.
    """
    cm = _mask(core)
    reg = _ClassRegistry(S)
    top = whole(S)
    stack = [top]
    found: list[Subgroup] = []
    seen_top = {top.key}
    while stack:
        P = stack.pop()
        coords, basis, phi = frattini_coordinates(S, P)
        d = len(basis)
        if d == 0:
            continue
        phi_gens = generators_of(S, phi)
        inside = coords >= 0
        # a representative element for every coordinate vector
        rep = np.zeros(1 << d, dtype=np.int64)
        el = np.flatnonzero(inside)
        rep[coords[el][::-1]] = el[::-1]
        phi_comm = np.ones(S.order, dtype=bool)
        for g in phi_gens:
            phi_comm &= S.commute[g]
        for f in range(1, 1 << d):
            par = _parity(np.where(inside, coords & f, 0))
            m = inside & (par == 0)
            if (cm & ~m).any():
                continue
            kern_basis = _kernel_basis(f, d)
            c = phi_comm.copy()
            for v in kern_basis:
                c &= S.commute[rep[v]]
            if (c & ~m).any():
                continue
            if np.packbits(m).tobytes() in seen_top:
                continue
            r = reg.add(m)
            if r is not None:
                found.append(r)
                stack.append(r)
    return found


def _kernel_basis(f: int, d: int) -> list[int]:
    """Basis of ``{v : <v, f> = 0}`` in GF(2)^d, as integers."""
    pivot = (f & -f).bit_length() - 1
    out = []
    for i in range(d):
        if i == pivot:
            continue
        v = 1 << i
        if (f >> i) & 1:
            v |= 1 << pivot
        out.append(v)
    return out


def second_kind_candidates(S: Group) -> list[Subgroup]:
    """Centralisers ``C_S(h)`` of involutions meeting the alternative in the
    pruning condition: index 2 in their normaliser and ``[h, Z2(S)] != 1``."""
    z2 = upper_central_2(S).mask
    z2g = generators_of(S, z2)
    reg = _ClassRegistry(S)
    out = []
    done = np.zeros(S.order, dtype=bool)
    for h in np.flatnonzero(S.element_orders == 2):
        if done[h]:
            continue
        done[S.conj[:, h]] = True
        if all(S.commute[h, z] for z in z2g):
            continue
        P = centralizer(S, int(h))
        if P.order == S.order or not is_centric(S, P):
            continue
        if normalizer(S, P).order != 2 * P.order:
            continue
        r = reg.add(P.mask)
        if r is not None:
            out.append(r)
    return out


def enumerate_centric_candidates(
    S: Group, required_core: SubLike | None = None, prune_a: bool = True
) -> list[Subgroup]:
    """Class representatives of proper centric subgroups passing the pruning
    condition: they contain ``required_core`` (default ``Z'``), or are
    ``C_S(h)`` for a suitable involution ``h``.

    With ``prune_a=False`` every proper centric subgroup is returned.
    """
    if S.is_abelian:
        return []
    if not prune_a:
        return sort_classes(centric_subgroups_containing(S, trivial(S)))
    core = z_prime(S) if required_core is None else Subgroup(S, _mask(required_core))
    first = centric_subgroups_containing(S, core)
    keys = set()
    for P in first:
        keys.update(conjugacy_class_keys(S, P))
    extra = [P for P in second_kind_candidates(S) if P.key not in keys]
    return sort_classes(first + extra)


def sort_classes(reps: Sequence[Subgroup]) -> list[Subgroup]:
    """Deterministic order: decreasing order, then lexicographically least member list."""
    return sorted(reps, key=lambda P: (-P.order, tuple(P.elements.tolist())))
