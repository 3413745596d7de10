"""Finite groups stored as dense multiplication tables.

Elements are the integers ``0..order-1`` and ``0`` is always the identity.
Groups are immutable once built; derived tables (inverses, conjugation,
commutators, element orders) are computed lazily and cached.
"""

from __future__ import annotations

import hashlib
from functools import cached_property
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .errors import MalformedInputError, SizeCapError

DEFAULT_ORDER_CAP = 2**20


def _dtype_for(n: int):
    return np.int16 if n < 2**15 else np.int32


class Group:
    """A finite group given by its full multiplication table.

    ``mul[a, b]`` is the id of the product ``a*b``.  ``generators`` is a list
    of element ids generating the group and ``provenance`` records how the
    group was built (a JSON-friendly dict).
    """

    def __init__(
        self,
        mul: np.ndarray,
        generators: Sequence[int] | None = None,
        provenance: dict | None = None,
        name: str | None = None,
        check: bool = False,
    ) -> None:
        mul = np.asarray(mul)
        n = mul.shape[0]
        if mul.ndim != 2 or mul.shape != (n, n) or n == 0:
            raise MalformedInputError("multiplication table must be a nonempty square array")
        self.mul = np.ascontiguousarray(mul, dtype=_dtype_for(n))
        self.mul.setflags(write=False)
        self.order = n
        self.provenance = provenance or {"type": "cayley"}
        self.name = name or self.provenance.get("family") or f"G{n}"
        if check:
            _check_table(self.mul)
        if generators is None:
            generators = greedy_generators(self)
        self.generators = tuple(int(g) for g in generators)
        self.perms: np.ndarray | None = None  # permutation images, when known

    def __repr__(self) -> str:
        return f"Group({self.name!r}, order={self.order})"

    def __len__(self) -> int:
        return self.order

    # -- derived tables ---------------------------------------------------
    @cached_property
    def inv(self) -> np.ndarray:
        inv = np.argmax(self.mul == 0, axis=1).astype(self.mul.dtype)
        inv.setflags(write=False)
        return inv

    @cached_property
    def conj(self) -> np.ndarray:
        """``conj[g, x] = g x g^-1``."""
        c = self.mul[self.mul, self.inv[:, None]]
        c.setflags(write=False)
        return c

    @cached_property
    def comm(self) -> np.ndarray:
        """``comm[x, y] = x y x^-1 y^-1``."""
        n = self.order
        xy = self.mul
        iv = self.inv
        ixiy = self.mul[np.ix_(iv, iv)]
        c = self.mul[xy, ixiy]
        c.setflags(write=False)
        return c

    @cached_property
    def commute(self) -> np.ndarray:
        """Boolean matrix: ``commute[x, y]`` iff ``xy = yx``."""
        c = self.mul == self.mul.T
        c.setflags(write=False)
        return c

    @cached_property
    def element_orders(self) -> np.ndarray:
        n = self.order
        idx = np.arange(n)
        cur = idx.copy()
        orders = np.zeros(n, dtype=np.int64)
        orders[0] = 1
        k = 1
        while (orders == 0).any():
            cur = self.mul[cur, idx]
            k += 1
            hit = (cur == 0) & (orders == 0)
            orders[hit] = k
            if k > n:
                raise MalformedInputError("element order exceeds group order")
        orders.setflags(write=False)
        return orders

    @cached_property
    def is_abelian(self) -> bool:
        return bool((self.mul == self.mul.T).all())

    @cached_property
    def is_2group(self) -> bool:
        n = self.order
        return n & (n - 1) == 0

    @cached_property
    def table_hash(self) -> str:
        """Hash of the exact multiplication table (identity of the labelled group)."""
        h = hashlib.sha256()
        h.update(str(self.order).encode())
        h.update(np.ascontiguousarray(self.mul, dtype=np.int32).tobytes())
        return h.hexdigest()

    # -- element helpers ---------------------------------------------------
    def multiply(self, *xs: int) -> int:
        r = 0
        for x in xs:
            r = int(self.mul[r, x])
        return r

    def power(self, x: int, k: int) -> int:
        if k < 0:
            x, k = int(self.inv[x]), -k
        r, b = 0, int(x)
        while k:
            if k & 1:
                r = int(self.mul[r, b])
            b = int(self.mul[b, b])
            k >>= 1
        return r

    def commutator(self, x: int, y: int) -> int:
        return int(self.comm[x, y])


def element_order(G: Group, x: int) -> int:
    """Least ``n >= 1`` with ``x**n`` the identity."""
    return int(G.element_orders[x])


def _check_table(mul: np.ndarray) -> None:
    n = mul.shape[0]
    if mul.min() < 0 or mul.max() >= n:
        raise MalformedInputError("table entries out of range")
    ar = np.arange(n)
    if not (mul[0] == ar).all() or not (mul[:, 0] == ar).all():
        raise MalformedInputError("row and column 0 must be the identity")
    srt = np.sort(mul, axis=1)
    if not (srt == ar).all():
        raise MalformedInputError("table is not a Latin square (rows)")
    srt = np.sort(mul, axis=0)
    if not (srt == ar[:, None]).all():
        raise MalformedInputError("table is not a Latin square (columns)")
    bad = find_nonassociative_triple(mul)
    if bad is not None:
        raise MalformedInputError(f"table is not associative at {bad}")


def find_nonassociative_triple(mul: np.ndarray) -> tuple[int, int, int] | None:
    """Return some ``(a, b, c)`` with ``(ab)c != a(bc)``, or None."""
    n = mul.shape[0]
    for a in range(n):
        left = mul[mul[a]]  # left[b, c] = (ab)c
        right = mul[a][mul]  # right[b, c] = a(bc)
        diff = left != right
        if diff.any():
            b, c = np.argwhere(diff)[0]
            return a, int(b), int(c)
    return None


def greedy_generators(G: Group) -> list[int]:
    """A small generating set: add elements of large order not yet covered."""
    from .subgroups import closure_mask

    if G.order == 1:
        return []
    orders = G.element_orders
    candidates = sorted(range(1, G.order), key=lambda x: (-int(orders[x]), x))
    gens: list[int] = []
    mask = np.zeros(G.order, dtype=bool)
    mask[0] = True
    for x in candidates:
        if not mask[x]:
            gens.append(x)
            mask = closure_mask(G, gens, start=mask)
            if mask.all():
                break
    return gens


# -- closure based construction ------------------------------------------------

def close_under(
    identity,
    gens: Sequence,
    compose: Callable,
    key: Callable[[object], Hashable],
    cap: int = DEFAULT_ORDER_CAP,
) -> tuple[list, np.ndarray, np.ndarray, np.ndarray]:
    """Breadth-first closure of ``gens`` under ``compose``.

    Returns ``(elements, right, parent, via)`` where ``right[i, k]`` is the
    index of ``elements[i] * gens[k]`` and element ``j > 0`` was discovered
    as ``elements[parent[j]] * gens[via[j]]``.
    """
    elems = [identity]
    index = {key(identity): 0}
    right_rows: list[list[int]] = []
    parent = [-1]
    via = [-1]
    i = 0
    while i < len(elems):
        row = []
        x = elems[i]
        for k, g in enumerate(gens):
            y = compose(x, g)
            ky = key(y)
            j = index.get(ky)
            if j is None:
                j = len(elems)
                if j >= cap:
                    raise SizeCapError(f"closure exceeds order cap {cap}")
                index[ky] = j
                elems.append(y)
                parent.append(i)
                via.append(k)
            row.append(j)
        right_rows.append(row)
        i += 1
    n = len(elems)
    right = np.array(right_rows, dtype=np.int64).reshape(n, len(gens))
    return elems, right, np.array(parent), np.array(via)


def table_from_right_action(right: np.ndarray, parent: np.ndarray, via: np.ndarray) -> np.ndarray:
    """Rebuild the full table from right multiplication by generators."""
    n = right.shape[0]
    mul = np.empty((n, n), dtype=_dtype_for(n))
    mul[:, 0] = np.arange(n)
    for j in range(1, n):
        mul[:, j] = right[mul[:, parent[j]], via[j]]
    return mul


def from_cayley_table(table, name: str | None = None) -> Group:
    """Build a group from an explicit table; validates Latin square and associativity."""
    try:
        arr = np.asarray(table, dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise MalformedInputError(f"bad Cayley table: {exc}") from exc
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise MalformedInputError("Cayley table must be a nonempty square array")
    return Group(arr, provenance={"type": "cayley"}, name=name, check=True)


def from_permutation_generators(
    degree: int,
    gens: Iterable[Sequence[int]],
    name: str | None = None,
    cap: int = DEFAULT_ORDER_CAP,
) -> Group:
    """Group generated by permutations of ``{1..degree}`` given as image arrays.

    Products compose as functions: ``(a*b)(x) = a(b(x))``.  The permutation of
    every element is kept in ``G.perms`` (0-based images).
    """
    if degree < 1:
        raise MalformedInputError("degree must be positive")
    arrs = []
    for g in gens:
        a = np.asarray(list(g), dtype=np.int64)
        if a.shape != (degree,) or sorted(a.tolist()) != list(range(1, degree + 1)):
            raise MalformedInputError(f"not a permutation of 1..{degree}: {list(g)}")
        arrs.append((a - 1).astype(np.int16 if degree < 2**15 else np.int32))
    ident = np.arange(degree, dtype=arrs[0].dtype if arrs else np.int16)
    elems, right, parent, via = close_under(
        ident, arrs, lambda a, b: a[b], lambda a: a.tobytes(), cap=cap
    )
    mul = table_from_right_action(right, parent, via)
    gen_ids = [int(right[0, k]) for k in range(len(arrs))]
    G = Group(
        mul,
        generators=gen_ids,
        provenance={
            "type": "permutation",
            "degree": degree,
            "generators": [(a + 1).tolist() for a in arrs],
        },
        name=name,
    )
    G.perms = np.array(elems)
    return G


def perm_element(G: Group, images: Sequence[int]) -> int:
    """Element id of a permutation (1-based images) in a permutation group."""
    if G.perms is None:
        raise MalformedInputError("group has no permutation provenance")
    target = np.asarray(images) - 1
    hits = np.flatnonzero((G.perms == target).all(axis=1))
    if len(hits) == 0:
        raise MalformedInputError("permutation is not an element of the group")
    return int(hits[0])


def regular_representation(G: Group) -> list[list[int]]:
    """Left-regular permutation images (1-based) of the generators."""
    return [(G.mul[g].astype(np.int64) + 1).tolist() for g in G.generators]


# -- standard constructions ----------------------------------------------------

def direct_product_table(A: Group, B: Group) -> np.ndarray:
    na, nb = A.order, B.order
    ia = np.repeat(np.arange(na), nb)
    ib = np.tile(np.arange(nb), na)
    pa = A.mul[np.ix_(ia, ia)].astype(np.int64)
    pb = B.mul[np.ix_(ib, ib)].astype(np.int64)
    return pa * nb + pb


def direct_product(groups: Sequence[Group]) -> Group:
    if not groups:
        raise MalformedInputError("direct product of an empty list")
    G = groups[0]
    mul = G.mul
    cur = G
    for H in groups[1:]:
        mul = direct_product_table(cur, H)
        cur = Group(mul, provenance={"type": "product"})
    gens = []
    sizes = [H.order for H in groups]
    for pos, H in enumerate(groups):
        stride = int(np.prod(sizes[pos + 1:])) if pos + 1 < len(sizes) else 1
        gens.extend(int(g) * stride for g in H.generators)
    return Group(
        cur.mul,
        generators=gens,
        provenance={"type": "product", "parts": [H.provenance for H in groups]},
        name=" x ".join(H.name for H in groups),
    )


def quotient(G: Group, normal_mask: np.ndarray, name: str | None = None) -> tuple[Group, np.ndarray]:
    """``G/N`` for a normal subgroup given as a mask; returns (group, projection)."""
    n = G.order
    members = np.flatnonzero(normal_mask)
    coset = np.full(n, -1, dtype=np.int64)
    reps = []
    for x in range(n):
        if coset[x] < 0:
            coset[G.mul[x, members]] = len(reps)
            reps.append(x)
    reps = np.array(reps)
    qmul = coset[G.mul[np.ix_(reps, reps)]]
    gens = sorted({int(coset[g]) for g in G.generators} - {0})
    Q = Group(qmul, generators=gens, provenance={"type": "quotient", "of": G.provenance}, name=name)
    return Q, coset


def from_table_bfs(
    mul: np.ndarray,
    gens: Sequence[int],
    provenance: dict | None = None,
    name: str | None = None,
) -> Group:
    """Renumber a table in breadth-first order from ``gens`` (identity 0)."""
    mul = np.asarray(mul)
    e = int(np.flatnonzero((mul == np.arange(len(mul))).all(axis=1))[0])
    elems, right, parent, via = close_under(
        e, [int(g) for g in gens], lambda a, b: int(mul[a, b]), lambda a: a
    )
    if len(elems) != len(mul):
        raise MalformedInputError("generators do not generate the group")
    new = table_from_right_action(right, parent, via)
    gen_ids = [int(right[0, k]) for k in range(len(gens))]
    return Group(new, generators=gen_ids, provenance=provenance, name=name)


def extend_generator_map(G: Group, H: Group, images: Sequence[int], check: bool = True) -> np.ndarray:
    """Homomorphism ``G -> H`` sending ``G.generators[k]`` to ``images[k]``.

    Built along a spanning tree of the Cayley graph; with ``check`` every
    edge is verified, so an inconsistent assignment raises.
    """
    gens = list(G.generators)
    if len(images) != len(gens):
        raise MalformedInputError("need one image per generator")
    out = np.full(G.order, -1, dtype=np.int64)
    out[0] = 0
    frontier = np.array([0])
    while len(frontier):
        nxt = []
        for k, g in enumerate(gens):
            ys = G.mul[frontier, g]
            vals = H.mul[out[frontier], images[k]]
            fresh = out[ys] < 0
            # within one batch the same target may be hit twice
            if fresh.any():
                yf, vf = ys[fresh], vals[fresh]
                uy, first = np.unique(yf, return_index=True)
                out[uy] = vf[first]
                nxt.append(uy)
        frontier = np.unique(np.concatenate(nxt)) if nxt else np.empty(0, np.int64)
    if check:
        for k, g in enumerate(gens):
            if not (out[G.mul[:, g]] == H.mul[out, images[k]]).all():
                raise MalformedInputError("generator images do not define a homomorphism")
    return out
