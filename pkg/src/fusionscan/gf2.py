"""GF(2) linear algebra on bit-packed vectors and small modules.

A vector of ``GF(2)^d`` is a Python int (bit ``i`` = coordinate ``i``).  A
matrix is a tuple of ``d`` ints: entry ``i`` is the image of basis vector
``e_i``, so matrices act on the left and ``apply(A, v)`` is a XOR of columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

Matrix = tuple[int, ...]
MAX_DIM = 16


def apply(A: Matrix, v: int) -> int:
    out = 0
    i = 0
    while v:
        if v & 1:
            out ^= A[i]
        v >>= 1
        i += 1
    return out


def identity(d: int) -> Matrix:
    return tuple(1 << i for i in range(d))


def matmul(A: Matrix, B: Matrix) -> Matrix:
    """``A B``: apply ``B`` first."""
    return tuple(apply(A, b) for b in B)


def add(A: Matrix, B: Matrix) -> Matrix:
    return tuple(a ^ b for a, b in zip(A, B))


def from_array(a) -> Matrix:
    """From a 0/1 array with ``a[r, c]`` the entry in row ``r``, column ``c``."""
    a = np.asarray(a, dtype=np.int64) & 1
    d = a.shape[0]
    if a.shape != (d, d):
        raise DomainError("matrix must be square")
    return tuple(int(sum(int(a[r, c]) << r for r in range(d))) for c in range(d))


def to_array(A: Matrix) -> np.ndarray:
    d = len(A)
    out = np.zeros((d, d), dtype=np.int64)
    for c, col in enumerate(A):
        for r in range(d):
            out[r, c] = (col >> r) & 1
    return out


def rank(vectors: Iterable[int] | Matrix) -> int:
    """Rank of a set of bit-vectors (for a matrix: rank of its columns)."""
    return len(echelon(vectors))


def echelon(vectors: Iterable[int]) -> dict[int, int]:
    """Reduced basis keyed by leading bit."""
    basis: dict[int, int] = {}
    for v in vectors:
        v = reduce(v, basis)
        if v:
            basis[v.bit_length() - 1] = v
    return basis


def reduce(v: int, basis: dict[int, int]) -> int:
    out = 0
    while v:
        top = v.bit_length() - 1
        b = basis.get(top)
        if b is None:
            out |= 1 << top
            v ^= 1 << top
        else:
            v ^= b
    return out


def nullity(A: Matrix) -> int:
    return len(A) - rank(A)


def mat_order(A: Matrix, cap: int = 1 << 20) -> int:
    d = len(A)
    I = identity(d)
    B = A
    k = 1
    while B != I:
        B = matmul(A, B)
        k += 1
        if k > cap:
            raise DomainError("matrix is not invertible")
    return k


def inverse(A: Matrix) -> Matrix:
    d = len(A)
    # solve A x_i = e_i by elimination on augmented columns
    rows = []
    for r in range(d):
        row = 0
        for c in range(d):
            row |= ((A[c] >> r) & 1) << c
        rows.append(row | (1 << (d + r)))
    for c in range(d):
        piv = next((i for i in range(c, d) if (rows[i] >> c) & 1), None)
        if piv is None:
            raise DomainError("matrix is singular")
        rows[c], rows[piv] = rows[piv], rows[c]
        for i in range(d):
            if i != c and (rows[i] >> c) & 1:
                rows[i] ^= rows[c]
    inv_rows = [rows[r] >> d for r in range(d)]
    return tuple(int(sum(((inv_rows[r] >> c) & 1) << r for r in range(d))) for c in range(d))


def commutator_space(A: Matrix) -> dict[int, int]:
    """Echelon basis of ``[A, V] = (A - 1)V``."""
    return echelon(a ^ (1 << i) for i, a in enumerate(A))


def span_all(basis: dict[int, int]) -> list[int]:
    vecs = [0]
    for b in basis.values():
        vecs += [v ^ b for v in vecs]
    return vecs


# -- modules --------------------------------------------------------------------

@dataclass
class F2Module:
    """``GF(2)^dim`` with one action matrix per acting generator."""

    dim: int
    action: list[Matrix]
    labels: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.dim > MAX_DIM:
            raise DomainError(f"module dimension {self.dim} exceeds {MAX_DIM}")
        self.action = [tuple(int(c) for c in A) for A in self.action]
        for A in self.action:
            if len(A) != self.dim:
                raise DomainError("action matrix has wrong size")
            if rank(A) != self.dim:
                raise DomainError("action matrices must be invertible")

    def word(self, w: Sequence[int] | Matrix) -> Matrix:
        """Matrix of a word (a list; letter ``i >= 0`` is generator ``i`` and
        ``-1-i`` its inverse).  A tuple is taken to be a matrix already."""
        if isinstance(w, tuple):
            return w
        M = identity(self.dim)
        for letter in w:
            g = self.action[letter] if letter >= 0 else inverse(self.action[-1 - letter])
            M = matmul(M, g)
        return M

    def spin(self, vectors: Iterable[int], start: dict[int, int] | None = None) -> dict[int, int]:
        """Echelon basis of the submodule generated by ``vectors`` (plus ``start``)."""
        basis = dict(start or {})
        queue = []
        for v in vectors:
            r = reduce(v, basis)
            if r:
                basis[r.bit_length() - 1] = r
                queue.append(v)
        while queue:
            v = queue.pop()
            for A in self.action:
                w = apply(A, v)
                r = reduce(w, basis)
                if r:
                    basis[r.bit_length() - 1] = r
                    queue.append(w)
        return basis

    def is_invariant(self, basis: dict[int, int]) -> bool:
        return all(reduce(apply(A, b), basis) == 0 for A in self.action for b in basis.values())


def commutator_rank(M: F2Module, s) -> int:
    """``dim [s, M]`` for a word or matrix ``s``."""
    A = M.word(s)
    return len(commutator_space(A))


def fixed_rank(M: F2Module, s) -> int:
    """``dim C_M(s)``."""
    return M.dim - commutator_rank(M, s)


@dataclass
class Factor:
    """A composition factor ``U_hi / U_lo`` with a chosen basis of lifts."""

    module: F2Module
    lower: dict[int, int]
    lifts: list[int]
    _lb: list | None = field(default=None, init=False, repr=False)

    @property
    def dim(self) -> int:
        return len(self.lifts)

    def coordinates(self, v: int) -> int:
        """Coordinates of ``v`` (assumed in ``U_hi``) modulo ``U_lo`` in the lift basis."""
        v = reduce(v, self.lower)
        return _solve(self._lift_basis(), v)

    def _lift_basis(self):
        if self._lb is None:
            self._lb = [(reduce(b, self.lower), 1 << i) for i, b in enumerate(self.lifts)]
        return self._lb

    def induced(self, A: Matrix) -> Matrix:
        return tuple(self.coordinates(apply(A, b)) for b in self.lifts)


def _solve(rows: list[tuple[int, int]], v: int) -> int:
    """Express ``v`` as a combination of the reduced vectors in ``rows`` (tracked tags)."""
    basis: dict[int, tuple[int, int]] = {}
    for vec, tag in rows:
        while vec:
            top = vec.bit_length() - 1
            if top in basis:
                bv, bt = basis[top]
                vec ^= bv
                tag ^= bt
            else:
                basis[top] = (vec, tag)
                break
    tag = 0
    while v:
        top = v.bit_length() - 1
        if top not in basis:
            raise DomainError("vector not in the factor span")
        bv, bt = basis[top]
        v ^= bv
        tag ^= bt
    return tag


def _quotient_reps(dim: int, sub: dict[int, int]) -> list[int]:
    """Free coordinates (non-pivot unit vectors) spanning a complement of ``sub``."""
    return [1 << i for i in range(dim) if i not in sub]


def composition_series(M: F2Module, order: Sequence[int] | None = None) -> list[dict[int, int]]:
    """Flag ``0 = U_0 < U_1 < ... < U_r = M`` with irreducible layers.

    Each step spins every vector of the current quotient and keeps a
    submodule of least dimension, which is necessarily irreducible.
    ``order`` optionally permutes the enumeration of coefficient vectors.
    """
    series = [dict()]
    cur: dict[int, int] = {}
    while len(cur) < M.dim:
        comp = _quotient_reps(M.dim, cur)
        q = len(comp)
        best = None
        idx = range(1, 1 << q) if order is None else [c for c in order if 0 < c < (1 << q)]
        for c in idx:
            v = 0
            for j in range(q):
                if (c >> j) & 1:
                    v ^= comp[j]
            W = M.spin([v], start=cur)
            if best is None or len(W) < len(best):
                best = W
                if len(W) == len(cur) + 1:
                    break
        if best is None:  # ``order`` skipped everything; fall back to the full sweep
            return composition_series(M)
        cur = best
        series.append(cur)
    return series


def composition_factors(M: F2Module, order: Sequence[int] | None = None) -> list[tuple[int, F2Module]]:
    """Composition factors as ``(dim, module)``; dims sum to ``M.dim``."""
    return [(f.dim, factor_module(f)) for f in composition_factor_data(M, order)]


def composition_factor_data(M: F2Module, order: Sequence[int] | None = None) -> list[Factor]:
    series = composition_series(M, order)
    out = []
    for lo, hi in zip(series, series[1:]):
        lifts = []
        acc = dict(lo)
        for v in hi.values():
            r = reduce(v, acc)
            if r:
                acc[r.bit_length() - 1] = r
                lifts.append(v)
        out.append(Factor(M, lo, lifts))
    return out


def factor_module(f: Factor) -> F2Module:
    return F2Module(f.dim, [f.induced(A) for A in f.module.action], list(f.module.labels))


def acts_trivially_on_factors(series: Sequence[dict[int, int]], A: Matrix) -> bool:
    """Whether ``(A - 1)U_i <= U_(i-1)`` along the flag."""
    for lo, hi in zip(series, series[1:]):
        for b in hi.values():
            if reduce(apply(A, b) ^ b, lo):
                return False
    return True


def is_irreducible(M: F2Module) -> bool:
    return len(composition_series(M)) == 2 or M.dim == 0


def criterion_i_check(M: F2Module, s0: Sequence, k: int) -> tuple[bool, Factor | None]:
    """Some composition factor has dimension >= 2k and, when ``k >= 2``,
    ``dim [s, factor] >= 2`` for every ``s`` in ``s0`` (the nontrivial
    elements of the Sylow image, as words or matrices of ``M``)."""
    mats = [M.word(s) for s in s0]
    for f in composition_factor_data(M):
        if f.dim < 2 * k:
            continue
        if k >= 2 and any(len(commutator_space(f.induced(A))) < 2 for A in mats):
            continue
        return True, f
    return False, None


def permutation_module(perms: Sequence[Sequence[int]]) -> F2Module:
    """``GF(2)^n`` permuted by 0-based image arrays."""
    n = len(perms[0]) if perms else 0
    return F2Module(n, [tuple(1 << int(p[i]) for i in range(n)) for p in perms])
