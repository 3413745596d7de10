"""Permutation groups on ``0..degree-1`` via a deterministic Schreier-Sims.

Permutations are numpy integer arrays; ``(a * b)[x] = a[b[x]]`` (apply ``b``
first).  A base may be supplied; it is extended when needed.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import ResourceError


def compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[b]


def inverse(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    out[a] = np.arange(len(a), dtype=a.dtype)
    return out


def perm_order(a: np.ndarray) -> int:
    seen = np.zeros(len(a), dtype=bool)
    from math import lcm

    o = 1
    for i in range(len(a)):
        if seen[i]:
            continue
        j, c = i, 0
        while not seen[j]:
            seen[j] = True
            j = a[j]
            c += 1
        o = lcm(o, c)
    return o


def perm_power(a: np.ndarray, k: int) -> np.ndarray:
    r = np.arange(len(a), dtype=a.dtype)
    b = a
    if k < 0:
        b, k = inverse(a), -k
    while k:
        if k & 1:
            r = b[r]
        b = b[b]
        k >>= 1
    return r


def is_identity(a: np.ndarray) -> bool:
    return bool((a == np.arange(len(a))).all())


class _Level:
    __slots__ = ("point", "gens", "orbit", "trans", "trans_inv")

    def __init__(self, point: int) -> None:
        self.point = point
        self.gens: list[np.ndarray] = []
        self.orbit: list[int] = []
        self.trans: dict[int, np.ndarray] = {}
        self.trans_inv: dict[int, np.ndarray] = {}

    def rebuild(self, degree: int, dtype) -> None:
        ident = np.arange(degree, dtype=dtype)
        self.trans = {self.point: ident}
        self.orbit = [self.point]
        i = 0
        while i < len(self.orbit):
            p = self.orbit[i]
            up = self.trans[p]
            for g in self.gens:
                q = int(g[p])
                if q not in self.trans:
                    self.trans[q] = g[up]
                    self.orbit.append(q)
            i += 1
        self.trans_inv = {}


class PermGroup:
    """A permutation group with a base and strong generating set."""

    def __init__(
        self,
        degree: int,
        gens: Iterable[np.ndarray],
        base: Sequence[int] = (),
        known_order: int | None = None,
        max_sifts: int = 2_000_000,
    ) -> None:
        self.degree = int(degree)
        self.dtype = np.int16 if degree < 2**15 else np.int32
        self.gens = [np.asarray(g, dtype=self.dtype) for g in gens]
        self.gens = [g for g in self.gens if not is_identity(g)]
        self._max_sifts = max_sifts
        self._sifts = 0
        self.levels: list[_Level] = []
        self._build(list(base), known_order)

    # -- construction ----------------------------------------------------------
    def _moved_point(self, g: np.ndarray) -> int:
        return int(np.flatnonzero(g != np.arange(self.degree))[0])

    def _build(self, base: list[int], known_order: int | None) -> None:
        base = list(dict.fromkeys(int(b) for b in base))
        for g in self.gens:
            if all(g[b] == b for b in base):
                base.append(self._moved_point(g))
        self.levels = [_Level(b) for b in base]
        for g in self.gens:
            self._distribute(g)
        for lv in self.levels:
            lv.rebuild(self.degree, self.dtype)
        if known_order is not None and self.order() == known_order:
            return
        i = len(self.levels) - 1
        while i >= 0:
            j = self._check_level(i)
            if j is None:
                i -= 1
            else:
                i = j

    def _distribute(self, g: np.ndarray, upto: int | None = None) -> None:
        """Put ``g`` into the generator lists of every level whose prefix it fixes."""
        top = len(self.levels) if upto is None else upto
        for lv in self.levels[:top]:
            lv.gens.append(g)
            if g[lv.point] != lv.point:
                break

    def _check_level(self, i: int) -> int | None:
        """Sift all Schreier generators of level ``i``; on failure add the residue
        and return the level to resume from."""
        lv = self.levels[i]
        for p in list(lv.orbit):
            up = lv.trans[p]
            for s in list(lv.gens):
                q = int(s[p])
                uq_inv = self._tinv(lv, q)
                h = uq_inv[s[up]]
                res, j = self._sift(h, i + 1)
                if j < len(self.levels) or not is_identity(res):
                    if j == len(self.levels):
                        self.levels.append(_Level(self._moved_point(res)))
                    for k in range(i + 1, j + 1):
                        self.levels[k].gens.append(res)
                        self.levels[k].rebuild(self.degree, self.dtype)
                    return j
        return None

    def _tinv(self, lv: _Level, p: int) -> np.ndarray:
        t = lv.trans_inv.get(p)
        if t is None:
            t = inverse(lv.trans[p])
            lv.trans_inv[p] = t
        return t

    def _sift(self, g: np.ndarray, start: int = 0) -> tuple[np.ndarray, int]:
        self._sifts += 1
        if self._sifts > self._max_sifts:
            raise ResourceError("Schreier-Sims sift budget exhausted")
        for k in range(start, len(self.levels)):
            lv = self.levels[k]
            p = int(g[lv.point])
            if p not in lv.trans:
                return g, k
            g = self._tinv(lv, p)[g]
        return g, len(self.levels)

    # -- queries -------------------------------------------------------------------
    @property
    def base(self) -> list[int]:
        return [lv.point for lv in self.levels]

    def order(self) -> int:
        o = 1
        for lv in self.levels:
            o *= len(lv.orbit)
        return o

    def contains(self, g: np.ndarray) -> bool:
        g = np.asarray(g, dtype=self.dtype)
        res, j = self._sift(g)
        return j == len(self.levels) and is_identity(res)

    def identity(self) -> np.ndarray:
        return np.arange(self.degree, dtype=self.dtype)

    def strong_generators(self) -> list[np.ndarray]:
        seen = {}
        for lv in self.levels:
            for g in lv.gens:
                seen.setdefault(g.tobytes(), g)
        return list(seen.values())

    def random_element(self, rng: np.random.Generator) -> np.ndarray:
        """Uniformly random element from the stabiliser chain."""
        g = self.identity()
        for lv in reversed(self.levels):
            p = lv.orbit[int(rng.integers(len(lv.orbit)))]
            g = lv.trans[p][g]
        return g

    def elements(self, cap: int = 1 << 20) -> list[np.ndarray]:
        if self.order() > cap:
            raise ResourceError(f"group of order {self.order()} exceeds enumeration cap {cap}")
        out = [self.identity()]
        for lv in reversed(self.levels):
            out = [lv.trans[p][g] for p in lv.orbit for g in out]
        return out

    def orbit(self, point: int) -> list[int]:
        orb = [int(point)]
        seen = {int(point)}
        i = 0
        while i < len(orb):
            for g in self.gens:
                q = int(g[orb[i]])
                if q not in seen:
                    seen.add(q)
                    orb.append(q)
            i += 1
        return orb

    def is_2group(self) -> bool:
        n = self.order()
        return n & (n - 1) == 0

    def with_generators(self, extra: Iterable[np.ndarray]) -> "PermGroup":
        return PermGroup(self.degree, self.strong_generators() + list(extra), base=self.base)

    def is_subgroup_of(self, other: "PermGroup") -> bool:
        return all(other.contains(g) for g in self.gens)

    def normal_closure(self, xs: Iterable[np.ndarray]) -> "PermGroup":
        """Normal closure in ``self`` of the subgroup generated by ``xs``."""
        N = PermGroup(self.degree, list(xs), base=self.base, max_sifts=self._max_sifts)
        work = list(N.gens)
        ginv = [inverse(g) for g in self.gens]
        while work:
            new = []
            for x in work:
                for g, gi in zip(self.gens, ginv):
                    c = g[x[gi]]
                    if not N.contains(c):
                        new.append(c)
                        N = N.with_generators([c])
            work = new
        return N

    def derived_and_squares(self) -> "PermGroup":
        """``[H, H] <h^2>``: normal closure of generator squares and commutators."""
        gens = self.gens
        xs = [g[g] for g in gens]
        for a in range(len(gens)):
            ia = inverse(gens[a])
            for b in range(a + 1, len(gens)):
                ib = inverse(gens[b])
                xs.append(gens[a][gens[b][ia[ib]]])
        xs = [x for x in xs if not is_identity(x)]
        return self.normal_closure(xs)

    def odd_residual(self, seed: int = 0, max_tries: int = 400) -> "PermGroup":
        """``O^2``: the normal closure of odd-order parts of (seeded) random
        elements, grown until the index is a power of 2.

        Odd-order elements all lie in ``O^2``, and any normal subgroup of
        2-power index contains it, so the stopping test makes the result
        exact.  Falls back to :meth:`odd_residual_by_series` if the random
        elements do not suffice.
        """
        n = self.order()
        if n & (n - 1) == 0:
            return PermGroup(self.degree, [], base=self.base)
        rng = np.random.default_rng(seed)
        K = PermGroup(self.degree, [], base=self.base, max_sifts=self._max_sifts)
        for _ in range(max_tries):
            g = self.random_element(rng)
            o = perm_order(g)
            odd = o
            while odd % 2 == 0:
                odd //= 2
            if odd == 1:
                continue
            h = perm_power(g, o // odd)
            if K.contains(h):
                continue
            K = self.normal_closure(K.gens + [h])
            idx = n // K.order()
            if idx & (idx - 1) == 0:
                return K
        return self.odd_residual_by_series()

    def odd_residual_by_series(self) -> "PermGroup":
        """``O^2``: iterate ``H -> [H, H]<h^2>`` until the order is stable."""
        H = self
        while True:
            if H.order() == 1:
                return H
            K = H.derived_and_squares()
            if K.order() == H.order():
                return H
            H = K

    def pointwise_stabilizer_generators(self, points: Sequence[int]) -> list[np.ndarray]:
        """Generators of the pointwise stabiliser of ``points`` (rebuilt with those
        points leading the base)."""
        G = PermGroup(self.degree, self.strong_generators(), base=list(points) + self.base)
        return [g for g in G.strong_generators() if all(g[p] == p for p in points)]
