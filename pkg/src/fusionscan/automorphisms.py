"""Automorphism groups of small groups given by multiplication tables.

An automorphism is stored as the array of images of all elements.  The
search fixes a generating sequence ``g_1, ..., g_d`` (independent modulo the
Frattini subgroup for 2-groups) and backtracks over candidate images,
pruned by element fingerprints and an incremental homomorphism check.  The
stabiliser chain ``Aut > Aut_(g_1) > Aut_(g_1, g_2) > ...`` is built from the
bottom up, so the result is a base and strong generating set and ``|Aut|``
is the product of the basic orbit lengths.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import gf2
from .errors import DomainError, ResourceError
from .groups import Group
from .permgroups import PermGroup
from .subgroups import (
    SubLike,
    Subgroup,
    _mask,
    center,
    closure_mask,
    derived,
    frattini,
    frattini_coordinates,
    generators_of,
    upper_central_2,
)

DEFAULT_NODE_BUDGET = 2_000_000


@dataclass(frozen=True)
class Automorphism:
    parent: Group
    images: np.ndarray

    def __call__(self, x: int) -> int:
        return int(self.images[x])


def is_automorphism(G: Group, images: np.ndarray) -> bool:
    a = np.asarray(images)
    n = G.order
    if a.shape != (n,) or a[0] != 0 or len(np.unique(a)) != n:
        return False
    return bool((a[G.mul] == G.mul[np.ix_(a, a)]).all())


def inner(G: Group, g: int) -> np.ndarray:
    """``x -> g x g^-1``."""
    return np.asarray(G.conj[g], dtype=np.int64)


# -- fingerprints ------------------------------------------------------------------

def element_colours(G: Group, rounds: int = 6) -> np.ndarray:
    """Automorphism-invariant colouring of elements by iterated refinement."""
    n = G.order
    orders = G.element_orders
    classes = G.conj.T  # classes[x] = all conjugates of x
    csize = np.array([len(np.unique(classes[x])) for x in range(n)])
    sq = G.mul[np.arange(n), np.arange(n)]
    roots = np.bincount(sq, minlength=n)
    feats = [orders, csize, roots]
    for sub in _char_masks(G):
        feats.append(sub.astype(np.int64))
    col = _relabel(np.stack(feats, axis=1))
    for _ in range(rounds):
        k = col.max() + 1
        hist = np.zeros((n, k), dtype=np.int64)
        np.add.at(hist, (np.repeat(np.arange(n), n), col[G.comm].ravel()), 1)
        new = _relabel(np.concatenate([col[:, None], col[sq][:, None], hist], axis=1))
        if new.max() == col.max():
            col = new
            break
        col = new
    return col


def _char_masks(G: Group) -> list[np.ndarray]:
    out = [center(G).mask, derived(G).mask]
    if G.is_2group:
        out.append(frattini(G).mask)
        out.append(upper_central_2(G).mask)
    return out


def _relabel(rows: np.ndarray) -> np.ndarray:
    _, inv = np.unique(rows, axis=0, return_inverse=True)
    return inv.ravel().astype(np.int64)


# -- words along a generating sequence --------------------------------------------

class _Words:
    """Breadth-first layers of ``<g_1..g_j>`` used to extend generator images."""

    def __init__(self, G: Group, seq: Sequence[int]) -> None:
        self.G = G
        self.seq = list(seq)
        self.layers: list[list[tuple[np.ndarray, np.ndarray, np.ndarray]]] = []
        self.members: list[np.ndarray] = []
        for j in range(1, len(seq) + 1):
            self.layers.append(self._bfs(seq[:j]))
            self.members.append(np.concatenate([[0]] + [c for c, _, _ in self.layers[-1]]))

    def _bfs(self, gens: Sequence[int]):
        G = self.G
        seen = np.zeros(G.order, dtype=bool)
        seen[0] = True
        frontier = np.array([0])
        layers = []
        g = np.asarray(gens)
        while len(frontier):
            prod = G.mul[np.ix_(frontier, g)]
            par = np.repeat(frontier, len(g))
            via = np.tile(np.arange(len(g)), len(frontier))
            flat = prod.ravel()
            fresh = ~seen[flat]
            flat, par, via = flat[fresh], par[fresh], via[fresh]
            flat, first = np.unique(flat, return_index=True)
            par, via = par[first], via[first]
            seen[flat] = True
            if len(flat):
                layers.append((flat, par, via))
            frontier = flat
        return layers

    def extend(self, j: int, images: np.ndarray) -> np.ndarray:
        """Map on ``<g_1..g_j>`` induced by ``images`` (length ``j``); ``-1`` elsewhere."""
        phi = np.full(self.G.order, -1, dtype=np.int64)
        phi[0] = 0
        mul = self.G.mul
        for child, par, via in self.layers[j - 1]:
            phi[child] = mul[phi[par], images[via]]
        return phi

    def check(self, j: int, images: np.ndarray) -> np.ndarray | None:
        """The induced map if it is an injective homomorphism on ``<g_1..g_j>``."""
        phi = self.extend(j, images)
        H = self.members[j - 1]
        img = phi[H]
        if len(np.unique(img)) != len(H):
            return None
        mul = self.G.mul
        gens = np.asarray(self.seq[:j])
        lhs = phi[mul[np.ix_(H, gens)]]
        rhs = mul[img[:, None], images[None, :j]]
        if (lhs != rhs).any():
            return None
        return phi


# -- the automorphism group -------------------------------------------------------

class AutGroup:
    """Aut(G) with a base (the generating sequence) and strong generators."""

    def __init__(self, G: Group, seq: Sequence[int], gens: Sequence[np.ndarray], order: int) -> None:
        self.parent = G
        self.seq = [int(x) for x in seq]
        self.gens = [np.asarray(g, dtype=np.int64) for g in gens]
        self.order = int(order)
        self.inner_index = G.order // center(G).order

    @property
    def generators(self) -> list[Automorphism]:
        return [Automorphism(self.parent, g) for g in self.gens]

    @cached_property
    def perm(self) -> PermGroup:
        return PermGroup(self.parent.order, self.gens, base=self.seq, known_order=self.order)

    @cached_property
    def words(self) -> _Words:
        return _Words(self.parent, self.seq)

    @property
    def out_order(self) -> int:
        return self.order // self.inner_index

    def is_2group(self) -> bool:
        return self.order & (self.order - 1) == 0

    def contains(self, images: np.ndarray) -> bool:
        return self.perm.contains(np.asarray(images))

    def from_images(self, tup: Sequence[int]) -> np.ndarray:
        """Full image array of the automorphism with ``g_i -> tup[i]``."""
        return self.words.extend(len(self.seq), np.asarray(tup, dtype=np.int64))

    def inner_generators(self) -> list[np.ndarray]:
        return [inner(self.parent, g) for g in self.parent.generators]


def _gen_sequence(G: Group, col: np.ndarray) -> list[int]:
    """Generating sequence drawn from small fingerprint classes."""
    n = G.order
    sizes = np.bincount(col)
    order = sorted(range(1, n), key=lambda x: (sizes[col[x]], -int(G.element_orders[x]), x))
    seq: list[int] = []
    if G.is_2group:
        coords, basis, _ = frattini_coordinates(G)
        span: dict[int, int] = {}
        for x in order:
            if len(span) == len(basis):
                break
            r = gf2.reduce(int(coords[x]), span)
            if r:
                span[r.bit_length() - 1] = r
                seq.append(int(x))
        return seq
    mask = np.zeros(n, dtype=bool)
    mask[0] = True
    for x in order:
        if mask.all():
            break
        if not mask[x]:
            seq.append(int(x))
            mask = closure_mask(G, [x], start=mask)
    # drop redundant members (keeps the sequence minimal by inclusion)
    i = 0
    while i < len(seq):
        rest = seq[:i] + seq[i + 1:]
        if closure_mask(G, rest).all():
            seq = rest
        else:
            i += 1
    return seq


class _Search:
    def __init__(self, G: Group, budget: int) -> None:
        self.G = G
        self.col = element_colours(G)
        self.seq = _gen_sequence(G, self.col)
        self.d = len(self.seq)
        self.words = _Words(G, self.seq)
        self.budget = budget
        self.nodes = 0
        g = self.seq
        mul, comm, col = G.mul, G.comm, self.col
        self.want_col = [col[x] for x in g]
        self.want_prod = {(i, j): col[mul[g[i], g[j]]] for j in range(self.d) for i in range(j)}
        self.want_comm = {(i, j): col[comm[g[i], g[j]]] for j in range(self.d) for i in range(j)}
        self.by_col = {c: np.flatnonzero(col == c) for c in set(self.want_col)}
        self.is2 = G.is_2group
        if self.is2:
            self.coords = frattini_coordinates(G)[0]

    def candidates(self, prefix: Sequence[int], j: int) -> np.ndarray:
        G, col = self.G, self.col
        c = self.by_col[self.want_col[j]]
        for i, x in enumerate(prefix):
            c = c[col[G.mul[x, c]] == self.want_prod[(i, j)]]
            if not len(c):
                return c
            c = c[col[G.comm[x, c]] == self.want_comm[(i, j)]]
            if not len(c):
                return c
        if self.is2 and prefix:
            span = gf2.echelon(int(self.coords[x]) for x in prefix)
            keep = [gf2.reduce(int(self.coords[y]), span) != 0 for y in c]
            c = c[np.asarray(keep, dtype=bool)]
        return c

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise ResourceError(f"automorphism search for {self.G.name} exceeded {self.budget} nodes")

    def extend(self, prefix: list[int]) -> np.ndarray | None:
        """Some automorphism extending ``g_i -> prefix[i]``, or None."""
        j = len(prefix)
        if j == self.d:
            return self.words.extend(self.d, np.asarray(prefix, dtype=np.int64))
        for c in self.candidates(prefix, j):
            self.tick()
            tup = np.asarray(prefix + [int(c)], dtype=np.int64)
            if self.words.check(j + 1, tup) is None:
                continue
            r = self.extend(prefix + [int(c)])
            if r is not None:
                return r
        return None

    def run(self) -> tuple[list[np.ndarray], list[int]]:
        G = self.G
        gens: list[np.ndarray] = []
        orbit_sizes = [1] * self.d
        for j in range(self.d - 1, -1, -1):
            prefix = self.seq[:j]
            # inner automorphisms fixing the prefix come for free
            cm = np.ones(G.order, dtype=bool)
            for x in prefix:
                cm &= G.commute[x]
            level = list(gens)
            for z in generators_of(G, cm):
                a = inner(G, z)
                if a[self.seq[j]] != self.seq[j]:
                    level.append(a)
            orbit = _orbit(self.seq[j], level, G.order)
            failed = np.zeros(G.order, dtype=bool)
            for c in self.candidates(prefix, j):
                c = int(c)
                if orbit[c] or failed[c]:
                    continue
                self.tick()
                tup = np.asarray(prefix + [c], dtype=np.int64)
                alpha = None
                if self.words.check(j + 1, tup) is not None:
                    alpha = self.extend(prefix + [c])
                if alpha is None:
                    failed |= _orbit(c, level, G.order)
                else:
                    level.append(alpha)
                    orbit = _orbit(self.seq[j], level, G.order)
            orbit_sizes[j] = int(orbit.sum())
            gens = [g for g in level]
        return gens, orbit_sizes


def _orbit(x: int, gens: Sequence[np.ndarray], n: int) -> np.ndarray:
    m = np.zeros(n, dtype=bool)
    m[x] = True
    frontier = np.array([x])
    while len(frontier) and gens:
        nxt = np.unique(np.concatenate([g[frontier] for g in gens]))
        nxt = nxt[~m[nxt]]
        m[nxt] = True
        frontier = nxt
    return m


_MEMORY_CACHE: dict[str, AutGroup] = {}


def automorphism_group(
    G: Group,
    node_budget: int = DEFAULT_NODE_BUDGET,
    use_cache: bool = True,
) -> AutGroup:
    """Generators and exact order of ``Aut(G)``."""
    from . import cache

    if use_cache:
        hit = _MEMORY_CACHE.get(G.table_hash) or cache.load(G)
        if hit is not None:
            _MEMORY_CACHE[G.table_hash] = hit
            return hit
    if G.order == 1:
        A = AutGroup(G, [], [], 1)
    else:
        s = _Search(G, node_budget)
        gens, sizes = s.run()
        order = int(np.prod(sizes, dtype=object))
        gens = _dedupe(gens)
        A = AutGroup(G, s.seq, gens, order)
    if use_cache:
        _MEMORY_CACHE[G.table_hash] = A
        cache.store(G, A)
    return A


def _dedupe(gens: Iterable[np.ndarray]) -> list[np.ndarray]:
    seen: dict[bytes, np.ndarray] = {}
    for g in gens:
        g = np.asarray(g, dtype=np.int64)
        if (g == np.arange(len(g))).all():
            continue
        seen.setdefault(g.tobytes(), g)
    return list(seen.values())


def brute_force_aut_order(G: Group) -> int:
    """Independent count of automorphisms by trying every bijection (tiny groups)."""
    import itertools

    n = G.order
    count = 0
    for perm in itertools.permutations(range(1, n)):
        a = np.array((0,) + perm)
        if (a[G.mul] == G.mul[np.ix_(a, a)]).all():
            count += 1
    return count


def generator_image_aut_order(G: Group) -> int:
    """Independent count: try every image tuple of a fixed generating set."""
    import itertools

    gens = list(G.generators)
    n = G.order
    count = 0
    for tup in itertools.product(range(1, n), repeat=len(gens)):
        try:
            from .groups import extend_generator_map

            phi = extend_generator_map(G, G, list(tup))
        except Exception:
            continue
        if len(np.unique(phi)) == n:
            count += 1
    return count


# -- 2-local structure of Aut -------------------------------------------------------

def out_is_2group(A: AutGroup) -> bool:
    o = A.out_order
    return o & (o - 1) == 0


def odd_residual_generators(A: AutGroup) -> list[np.ndarray]:
    """Generators of ``O^2(Aut)``; empty when Aut is a 2-group."""
    if A.is_2group():
        return []
    R = A.perm.odd_residual()
    return [np.asarray(g, dtype=np.int64) for g in R.gens]


def odd_residual(A: AutGroup) -> PermGroup:
    return A.perm.odd_residual()


def section_coordinates(G: Group, upper: SubLike, lower: SubLike) -> tuple[np.ndarray, list[int]]:
    """Coordinates on the elementary abelian section ``upper/lower``."""
    um, lm = _mask(upper), _mask(lower)
    if (lm & ~um).any():
        raise DomainError("lower term is not inside the upper term")
    el = np.flatnonzero(um)
    if not lm[G.mul[el, el]].all():
        raise DomainError("section is not elementary abelian")
    if not lm[G.comm[np.ix_(el, el)]].all():
        raise DomainError("section is not abelian")
    coords = np.full(G.order, -1, dtype=np.int64)
    coords[lm] = 0
    basis: list[int] = []
    for x in generators_of(G, um):
        if coords[x] >= 0:
            continue
        cur = np.flatnonzero(coords >= 0)
        coords[G.mul[cur, x]] = coords[cur] | (1 << len(basis))
        basis.append(int(x))
    if (coords[um] < 0).any():
        raise DomainError("section coordinates incomplete")
    return coords, basis


def induced_action(
    G: Group,
    auts: Sequence[np.ndarray],
    upper: SubLike | None = None,
    lower: SubLike | None = None,
    labels: Sequence[str] | None = None,
) -> gf2.F2Module:
    """Module ``upper/lower`` (default ``G/Phi(G)``) with the induced action."""
    if upper is None:
        upper = np.ones(G.order, dtype=bool)
    if lower is None:
        lower = frattini(G, upper).mask
    um, lm = _mask(upper), _mask(lower)
    coords, basis = section_coordinates(G, um, lm)
    mats = []
    for a in auts:
        a = np.asarray(a)
        if not (um[a[um]].all() and lm[a[lm]].all()):
            raise DomainError("automorphism does not preserve the section")
        mats.append(tuple(int(coords[a[b]]) for b in basis))
    return gf2.F2Module(len(basis), mats, list(labels or []))


@dataclass
class FrattiniModule:
    """``G/Phi(G)`` under Aut(G) with a composition series."""

    module: gf2.F2Module
    coords: np.ndarray
    basis: list[int]
    series: list[dict[int, int]]

    def matrix(self, a: np.ndarray) -> gf2.Matrix:
        return tuple(int(self.coords[a[b]]) for b in self.basis)

    def trivial_on_factors(self, a: np.ndarray) -> bool:
        return gf2.acts_trivially_on_factors(self.series, self.matrix(a))


def frattini_module(A: AutGroup) -> FrattiniModule:
    G = A.parent
    coords, basis, _ = frattini_coordinates(G)
    M = gf2.F2Module(len(basis), [tuple(int(coords[a[b]]) for b in basis) for a in A.gens])
    series = gf2.composition_series(M)
    return FrattiniModule(M, coords, basis, series)


def in_o2(A: AutGroup, a: np.ndarray, fm: FrattiniModule | None = None) -> bool:
    """Membership in ``O_2(Aut(G))`` for a 2-group ``G``: the kernel of the action
    on the composition factors of ``G/Phi(G)``."""
    fm = fm or frattini_module(A)
    return fm.trivial_on_factors(np.asarray(a))


def o2_of_aut(A: AutGroup) -> PermGroup:
    """``O_2(Aut(G))`` as a permutation group on the elements of ``G``.

    The group acts on the elements of ``G`` and on the vectors of every
    composition factor; the kernel on the factors is read off a stabiliser
    chain whose base starts with the factor basis vectors.
    """
    G = A.parent
    if not G.is_2group:
        raise DomainError("O_2 via Frattini factors needs a 2-group")
    fm = frattini_module(A)
    factors = []
    for lo, hi in zip(fm.series, fm.series[1:]):
        lifts = []
        acc = dict(lo)
        for v in hi.values():
            r = gf2.reduce(v, acc)
            if r:
                acc[r.bit_length() - 1] = r
                lifts.append(v)
        factors.append(gf2.Factor(fm.module, lo, lifts))
    n = G.order
    offsets = []
    deg = n
    for f in factors:
        offsets.append(deg)
        deg += 1 << f.dim
    big = []
    for a in A.gens:
        M = fm.matrix(a)
        p = np.empty(deg, dtype=np.int64)
        p[:n] = a
        for f, off in zip(factors, offsets):
            Mi = f.induced(M)
            p[off:off + (1 << f.dim)] = off + np.array([gf2.apply(Mi, v) for v in range(1 << f.dim)])
        big.append(p)
    points = [off + (1 << i) for f, off in zip(factors, offsets) for i in range(f.dim)]
    P = PermGroup(deg, big, base=points + A.seq)
    k = len(points)
    order = 1
    for lv in P.levels[k:]:
        order *= len(lv.orbit)
    kern = [g[:n] for g in P.strong_generators() if all(g[q] == q for q in points)]
    return PermGroup(n, kern, base=A.seq, known_order=order)


def brute_force_o2(A: AutGroup, cap: int = 50000) -> int:
    """Order of the largest normal 2-subgroup by enumerating Aut (small cases)."""
    elems = A.perm.elements(cap)
    best = PermGroup(A.parent.order, [], base=A.seq)
    for e in elems:
        if best.contains(e):
            continue
        N = A.perm.normal_closure([e])
        if N.is_2group():
            best = PermGroup(A.parent.order, best.strong_generators() + N.strong_generators(), base=A.seq)
            if not best.is_2group():  # cannot happen: a product of normal 2-subgroups
                raise AssertionError("join of normal 2-subgroups is not a 2-group")
    return best.order()


def layer_trivial_automorphisms(
    A: AutGroup, chain: Sequence[SubLike], cap: int = 1 << 16
) -> list[np.ndarray]:
    """Elements of Aut acting trivially on every layer ``P_i/P_(i-1)`` of a chain
    ``P_0 < P_1 < ... < P_k = G`` of characteristic subgroups."""
    G = A.parent
    masks = [_mask(c) for c in chain]
    out = []
    for a in A.perm.elements(cap):
        a = np.asarray(a, dtype=np.int64)
        ok = True
        for lo, hi in zip(masks, masks[1:]):
            el = np.flatnonzero(hi)
            # a(x) x^-1 must lie in the lower term
            if not lo[G.mul[a[el], G.inv[el]]].all():
                ok = False
                break
        if ok:
            out.append(a)
    return out


def aut_of_subgroup_restricted(S: Group, P: Subgroup, g: int, elems: np.ndarray) -> np.ndarray:
    """Conjugation by ``g`` (normalising ``P``) as an automorphism of ``P`` viewed
    as a stand-alone group with element list ``elems``."""
    pos = np.full(S.order, -1, dtype=np.int64)
    pos[elems] = np.arange(len(elems))
    img = pos[S.conj[g, elems]]
    if (img < 0).any():
        raise DomainError("element does not normalise the subgroup")
    return img



# -- outer automorphisms ------------------------------------------------------------

class InnerCosetKey:
    """Canonical key of a coset ``a Inn(G)``: the least row of the matrix
    ``a(z g_i z^-1)`` over ``z`` in ``G`` (``g_i`` the base sequence)."""

    def __init__(self, A: AutGroup) -> None:
        self.G = A.parent
        # conjugates by z and zc agree for central c, so keep distinct rows only
        self._cs = np.unique(np.asarray(A.parent.conj[:, A.seq], dtype=np.int64), axis=0)
        n, c = A.parent.order, self._cs.shape[1]
        # rows as base-n integers when they fit, so the lexicographic minimum is one min
        self._w = None
        if c * max(n - 1, 1).bit_length() <= 62:
            self._w = np.array([n ** (c - 1 - j) for j in range(c)], dtype=np.int64)
        self.identity_key = self(np.arange(A.parent.order, dtype=np.int64))

    def __call__(self, a: np.ndarray):
        a = np.asarray(a, dtype=np.int64)
        if self._w is not None:
            return int((a[self._cs] @ self._w).min())
        M = a[self._cs]
        if len(M) == 1:
            return M[0].tobytes()
        rows = np.arange(len(M))
        for c in range(M.shape[1]):
            col = M[rows, c]
            rows = rows[col == col.min()]
            if len(rows) == 1:
                break
        return M[rows[0]].tobytes()


def compose_inverse(x: np.ndarray) -> np.ndarray:
    xi = np.empty_like(x)
    xi[x] = np.arange(len(x), dtype=x.dtype)
    return xi


def conjugate_aut(x: np.ndarray, a: np.ndarray) -> np.ndarray:
    """``x a x^-1`` as an element-image array."""
    return x[a[compose_inverse(x)]]


def outer_generators(A: AutGroup, key: InnerCosetKey) -> list[np.ndarray]:
    """Generators of Aut(G) that are not inner, one per distinct outer class."""
    seen = {key.identity_key}
    out = []
    for g in A.gens:
        k = key(g)
        if k not in seen:
            seen.add(k)
            out.append(g)
    return out


class OuterEnumeration:
    """All coset representatives of ``Inn(G)`` in ``Aut(G)`` (small ``Out`` only)."""

    def __init__(self, A: AutGroup, cap: int = 1 << 16) -> None:
        from .errors import InconsistencyError
        from .groups import close_under

        G = A.parent
        self.A = A
        self.G = G
        if A.out_order > cap:
            raise ResourceError(f"|Out| = {A.out_order} exceeds the enumeration cap {cap}")
        self.key = InnerCosetKey(A)
        self.identity_key = self.key.identity_key
        self.gens = outer_generators(A, self.key)
        ident = np.arange(G.order, dtype=np.int64)
        elems, right, parent, via = close_under(ident, self.gens, lambda a, b: a[b], self.key, cap=cap + 1)
        if len(elems) != A.out_order:
            raise InconsistencyError(f"enumerated {len(elems)} outer classes, expected {A.out_order}")
        self.reps = elems
        self.right = right
        self.parent = parent
        self.via = via
        self.index = {self.key(a): i for i, a in enumerate(elems)}

    @property
    def order(self) -> int:
        return len(self.reps)

    def position(self, a: np.ndarray) -> int:
        return self.index[self.key(a)]

    def as_group(self, name: str | None = None) -> Group:
        """``Out(G)`` as a group given by its table."""
        from .groups import table_from_right_action

        mul = table_from_right_action(self.right, self.parent, self.via)
        gens = [int(self.right[0, k]) for k in range(len(self.gens))]
        return Group(mul, generators=gens, provenance={"type": "outer", "of": self.G.name}, name=name)


def conjugation_action(S: Group, P: SubLike, elems: np.ndarray, gs: Iterable[int]) -> list[np.ndarray]:
    """Automorphisms of the stand-alone ``P`` induced by conjugation with ``gs``."""
    return [aut_of_subgroup_restricted(S, Subgroup(S, _mask(P)), int(g), elems) for g in gs]
