"""Extensions of a base group by a polycyclic chain of quotient generators.

Elements are normal forms ``a * q_1^e_1 * ... * q_r^e_r`` with ``a`` in the
base and ``0 <= e_j < m_j``.  The subgroups ``A<q_j, ..., q_r>`` must form a
normal series, so a power ``q_j^m_j`` and a conjugate ``q_l^(q_j)`` with
``l > j`` are normal forms involving only ``q_(j+1), ..., q_r``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InconsistencyError, MalformedInputError
from .groups import (
    Group,
    close_under,
    find_nonassociative_triple,
    table_from_right_action,
)

NormalForm = tuple[int, tuple[int, ...]]


@dataclass
class ExtensionSpec:
    """Data of an extension.

    ``action[j]`` is the element-image array of ``x -> x^(q_j) = q_j^-1 x q_j``
    on the base.  ``power_tails[j]`` is ``q_j^m_j`` and ``conjugate_tails[(l, j)]``
    is ``q_l^(q_j)`` (default ``q_l``), both as ``(base element, exponents)``.
    """

    base: Group
    relative_orders: list[int]
    action: list[np.ndarray]
    power_tails: list[NormalForm]
    conjugate_tails: dict[tuple[int, int], NormalForm] = field(default_factory=dict)
    names: list[str] | None = None


class _Collector:
    def __init__(self, spec: ExtensionSpec) -> None:
        A = spec.base
        self.A = A
        self.m = [int(x) for x in spec.relative_orders]
        self.r = len(self.m)
        self.act = [np.asarray(a, dtype=np.int64) for a in spec.action]
        if len(self.act) != self.r or len(spec.power_tails) != self.r:
            raise MalformedInputError("need one action and one power tail per quotient generator")
        for j, a in enumerate(self.act):
            _check_automorphism(A, a, j)
        inv = []
        for a in self.act:
            b = np.empty_like(a)
            b[a] = np.arange(len(a))
            inv.append(b)
        self.act_inv = inv
        self.power = [self._norm(t) for t in spec.power_tails]
        self.conjt = {}
        for l in range(self.r):
            for j in range(l):
                e = [0] * self.r
                e[l] = 1
                t = spec.conjugate_tails.get((l, j), (0, tuple(e)))
                self.conjt[(l, j)] = self._norm(t)
        for j in range(self.r):
            if any(self.power[j][1][: j + 1]):
                raise MalformedInputError(f"power tail of q_{j} must lie in A<q_{j + 1},...>")
        for (l, j), (_, e) in self.conjt.items():
            if any(e[: j + 1]):
                raise MalformedInputError(f"conjugate tail q_{l}^q_{j} must lie in A<q_{j + 1},...>")
        self.depth = 0

    def _norm(self, t) -> NormalForm:
        a, e = t
        e = tuple(int(x) for x in e)
        if len(e) != self.r:
            raise MalformedInputError("tail exponent vector has wrong length")
        if any(not 0 <= x < m for x, m in zip(e, self.m)):
            raise MalformedInputError("tail exponents must be reduced")
        return int(a), e

    # right multiplication ------------------------------------------------------
    def mul_base(self, x: NormalForm, b: int) -> NormalForm:
        a, e = x
        # move b leftward past q_r^e_r ... q_1^e_1; q b q^-1 = b^(q^-1)
        for j in range(self.r - 1, -1, -1):
            for _ in range(e[j]):
                b = int(self.act_inv[j][b])
        return int(self.A.mul[a, b]), e

    def mul_gen(self, x: NormalForm, j: int) -> NormalForm:
        self.depth += 1
        if self.depth > 10000:
            raise InconsistencyError("collection does not terminate; check the normal series")
        a, e = x
        prefix = (a, e[: j + 1] + (0,) * (self.r - j - 1))
        suffix = e[j + 1:]
        ej = e[j] + 1
        if ej < self.m[j]:
            pe = list(prefix[1])
            pe[j] = ej
            y = (a, tuple(pe))
        else:
            pe = list(prefix[1])
            pe[j] = 0
            y = self.mul_nf((a, tuple(pe)), self.power[j])
        # the suffix q_l^e_l (l > j) becomes (q_l^(q_j))^e_l after moving q_j left
        for off, el in enumerate(suffix):
            l = j + 1 + off
            for _ in range(el):
                y = self.mul_nf(y, self.conjt[(l, j)])
        self.depth -= 1
        return y

    def mul_nf(self, x: NormalForm, y: NormalForm) -> NormalForm:
        b, f = y
        if b:
            x = self.mul_base(x, b)
        for j, fj in enumerate(f):
            for _ in range(fj):
                x = self.mul_gen(x, j)
        return x


def _check_automorphism(A: Group, a: np.ndarray, j: int) -> None:
    n = A.order
    if a.shape != (n,) or sorted(a.tolist()) != list(range(n)):
        raise MalformedInputError(f"action of q_{j} is not a bijection of the base")
    if not (a[A.mul] == A.mul[np.ix_(a, a)]).all():
        raise MalformedInputError(f"action of q_{j} is not an automorphism of the base")


def build_extension(spec: ExtensionSpec, name: str | None = None, provenance: dict | None = None) -> Group:
    """Group of all normal forms; associativity is verified exhaustively."""
    col = _Collector(spec)
    A = spec.base
    letters: list[tuple[str, int]] = [("a", int(g)) for g in A.generators]
    letters += [("q", j) for j in range(col.r)]

    def compose(x, letter):
        kind, v = letter
        return col.mul_base(x, v) if kind == "a" else col.mul_gen(x, v)

    ident: NormalForm = (0, (0,) * col.r)
    expected = A.order * int(np.prod(col.m)) if col.m else A.order
    elems, right, parent, via = close_under(ident, letters, compose, lambda x: x, cap=expected + 1)
    if len(elems) != expected:
        raise InconsistencyError(f"extension has {len(elems)} normal forms reachable, expected {expected}")
    mul = table_from_right_action(right, parent, via)
    bad = find_nonassociative_triple(mul)
    if bad is not None:
        nf = [elems[i] for i in bad]
        raise InconsistencyError(f"normal-form multiplication is not associative at {nf}")
    # the table was defined through words; check it also agrees with the collector
    rng = np.random.default_rng(0)
    for _ in range(64):
        i, k = (int(v) for v in rng.integers(0, expected, size=2))
        if elems[int(mul[i, k])] != col.mul_nf(elems[i], elems[k]):
            raise InconsistencyError(f"collector disagrees with table at {elems[i]} * {elems[k]}")
    base_gens = [int(right[0, k]) for k in range(len(A.generators))]
    q_gens = [int(right[0, len(A.generators) + j]) for j in range(col.r)]
    G = Group(
        mul,
        generators=base_gens + q_gens,
        provenance=provenance or {"type": "extension"},
        name=name,
    )
    G.normal_forms = elems  # type: ignore[attr-defined]
    index = {nf: i for i, nf in enumerate(elems)}
    G.nf_index = index  # type: ignore[attr-defined]
    return G


def element_of(G: Group, a: int, exps: Sequence[int]) -> int:
    """Id of the normal form ``(a, exps)`` in a group built by :func:`build_extension`."""
    return G.nf_index[(int(a), tuple(int(e) for e in exps))]  # type: ignore[attr-defined]
