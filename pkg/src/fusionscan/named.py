"""Constructors for the named families of groups used as fixtures."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import UsageError
from .groups import (
    Group,
    close_under,
    direct_product_table,
    from_permutation_generators,
    from_table_bfs,
    quotient,
    table_from_right_action,
)


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def _abelian_table(orders: Sequence[int]) -> np.ndarray:
    """Mixed-radix table of a product of cyclic groups."""
    orders = [int(m) for m in orders]
    n = int(np.prod(orders)) if orders else 1
    idx = np.arange(n)
    digits = []
    rest = idx
    for m in reversed(orders):
        digits.append(rest % m)
        rest = rest // m
    digits = digits[::-1]
    table = np.zeros((n, n), dtype=np.int64)
    stride = 1
    for pos in reversed(range(len(orders))):
        m = orders[pos]
        d = digits[pos]
        table += ((d[:, None] + d[None, :]) % m) * stride
        stride *= m
    return table


def abelian(invariants: Sequence[int], name: str | None = None) -> Group:
    """Product of cyclic groups; generator ``k`` is the standard generator of factor ``k``."""
    inv = [int(m) for m in invariants if int(m) != 1]
    if any(m < 1 for m in invariants):
        raise UsageError("cyclic factor orders must be positive")
    table = _abelian_table(inv)
    strides = [int(np.prod(inv[k + 1:])) for k in range(len(inv))]
    gens = [s for s in strides]
    prov = {"type": "named", "family": "abelian", "params": {"invariants": inv}}
    return from_table_bfs(table, gens, provenance=prov, name=name or "x".join(f"C{m}" for m in inv) or "C1")


def cyclic(n: int) -> Group:
    if n < 1:
        raise UsageError("cyclic order must be positive")
    G = abelian([n], name=f"C{n}")
    G.provenance = {"type": "named", "family": "cyclic", "params": {"n": n}}
    return G


def elementary_abelian(rank: int) -> Group:
    if rank < 0:
        raise UsageError("rank must be nonnegative")
    G = abelian([2] * rank, name=f"C2^{rank}")
    G.provenance = {"type": "named", "family": "elementary_abelian", "params": {"rank": rank}}
    return G


def metacyclic(m: int, u: int, w: int, name: str, family: str, params: dict) -> Group:
    """Group ``<r, s | r^m, s r s^-1 = r^u, s^2 = r^w>`` on elements ``r^i s^j``."""
    n = 2 * m
    i = np.arange(n) % m
    j = np.arange(n) // m
    upow = np.where(j == 1, u % m, 1)
    I, J = i[:, None], j[:, None]
    K, L = i[None, :], j[None, :]
    exp = I + upow[:, None] * K
    carry = (J + L) >= 2
    exp = (exp + np.where(carry, w, 0)) % m
    table = exp + m * ((J + L) % 2)
    prov = {"type": "named", "family": family, "params": params}
    return from_table_bfs(table, [1, m], provenance=prov, name=name)


def dihedral(order: int) -> Group:
    if order < 4 or order % 2:
        raise UsageError("dihedral order must be even and at least 4")
    m = order // 2
    return metacyclic(m, -1, 0, f"D{order}", "dihedral", {"order": order})


def semidihedral(order: int) -> Group:
    if not _is_pow2(order) or order < 16:
        raise UsageError("semidihedral order must be a power of 2, at least 16")
    m = order // 2
    return metacyclic(m, m // 2 - 1, 0, f"SD{order}", "semidihedral", {"order": order})


def quaternion(order: int) -> Group:
    if not _is_pow2(order) or order < 8:
        raise UsageError("quaternion order must be a power of 2, at least 8")
    m = order // 2
    return metacyclic(m, -1, m // 2, f"Q{order}", "quaternion", {"order": order})


def modular(order: int) -> Group:
    if not _is_pow2(order) or order < 16:
        raise UsageError("modular group order must be a power of 2, at least 16")
    m = order // 2
    return metacyclic(m, m // 2 + 1, 0, f"M{order}", "modular", {"order": order})


# -- unitriangular groups -------------------------------------------------------

_GF_POLY = {2: 0b11, 4: 0b111, 8: 0b1011}


def _gf_mul_table(q: int) -> np.ndarray:
    poly = _GF_POLY[q]
    deg = q.bit_length() - 1
    t = np.zeros((q, q), dtype=np.int64)
    for a in range(q):
        for b in range(q):
            r = 0
            x, y = a, b
            while y:
                if y & 1:
                    r ^= x
                y >>= 1
                x <<= 1
                if x >> deg & 1:
                    x ^= poly
            t[a, b] = r
    return t


def unitriangular(n: int, q: int) -> Group:
    """Upper unitriangular ``n x n`` matrices over GF(q), ``q`` in {2, 4, 8}."""
    if q not in _GF_POLY or n < 1:
        raise UsageError("UT(n, q) needs n >= 1 and q in {2, 4, 8}")
    gf = _gf_mul_table(q)
    deg = q.bit_length() - 1
    ident = np.eye(n, dtype=np.int64)

    def matmul(a, b):
        out = np.zeros((n, n), dtype=np.int64)
        for k in range(n):
            out ^= gf[a[:, k][:, None], b[k, :][None, :]]
        return out

    gens = []
    for i in range(n - 1):
        for bit in range(deg):
            e = ident.copy()
            e[i, i + 1] = 1 << bit
            gens.append(e)
    if not gens:
        return abelian([], name=f"UT{n}({q})")
    elems, right, parent, via = close_under(ident, gens, matmul, lambda a: a.tobytes())
    mul = table_from_right_action(right, parent, via)
    gen_ids = [int(right[0, k]) for k in range(len(gens))]
    prov = {"type": "named", "family": "UT", "params": {"n": n, "q": q}}
    return Group(mul, generators=gen_ids, provenance=prov, name=f"UT{n}({q})")


# -- products -------------------------------------------------------------------

def direct_product(groups: Sequence[Group]) -> Group:
    groups = list(groups)
    if not groups:
        raise UsageError("direct product needs at least one factor")
    table = groups[0].mul.astype(np.int64)
    gens = list(groups[0].generators)
    cur = groups[0]
    for H in groups[1:]:
        table = direct_product_table(cur, H)
        nb = H.order
        gens = [g * nb for g in gens] + list(H.generators)
        cur = Group(table, generators=gens)
    prov = {"type": "product", "parts": [H.provenance for H in groups]}
    return from_table_bfs(table, gens, provenance=prov, name=" x ".join(H.name for H in groups))


def wreath_c2(B: Group) -> Group:
    """``B wr C2 = (B x B) : <t>`` with ``t`` swapping the factors."""
    nb = B.order
    n = 2 * nb * nb
    idx = np.arange(n)
    e = idx // (nb * nb)
    b1 = (idx // nb) % nb
    b2 = idx % nb
    E = e[:, None]
    # (x1, x2, e) * (y1, y2, f): if e swaps, y's components are exchanged
    y1 = np.where(E == 0, b1[None, :], b2[None, :])
    y2 = np.where(E == 0, b2[None, :], b1[None, :])
    c1 = B.mul[b1[:, None], y1].astype(np.int64)
    c2 = B.mul[b2[:, None], y2].astype(np.int64)
    ce = (E + e[None, :]) % 2
    table = ce * nb * nb + c1 * nb + c2
    gens = [int(g) * nb for g in B.generators] + [nb * nb]
    prov = {"type": "named", "family": "wreath_C2", "params": {"base": B.provenance}}
    return from_table_bfs(table, gens, provenance=prov, name=f"{B.name} wr C2")


def _unique_central_involution(G: Group) -> int:
    from .subgroups import center

    z = center(G).elements
    inv = [int(x) for x in z if G.element_orders[x] == 2]
    if len(inv) != 1:
        raise UsageError(f"{G.name}: centre has {len(inv)} involutions; give them explicitly")
    return inv[0]


def central_product(G1: Group, G2: Group, z1: int | None = None, z2: int | None = None) -> Group:
    """``G1 x G2`` modulo the diagonal of central involutions ``z1``, ``z2``."""
    from .subgroups import center

    z1 = _unique_central_involution(G1) if z1 is None else int(z1)
    z2 = _unique_central_involution(G2) if z2 is None else int(z2)
    for G, z in ((G1, z1), (G2, z2)):
        if G.element_orders[z] != 2 or not center(G).mask[z]:
            raise UsageError(f"{G.name}: element {z} is not a central involution")
    table = direct_product_table(G1, G2)
    P = Group(table, generators=[g * G2.order for g in G1.generators] + list(G2.generators))
    N = np.zeros(P.order, dtype=bool)
    N[0] = True
    N[z1 * G2.order + z2] = True
    Q, _ = quotient(P, N)
    prov = {
        "type": "named",
        "family": "central_product",
        "params": {"parts": [G1.provenance, G2.provenance], "z": [z1, z2]},
    }
    return from_table_bfs(Q.mul, Q.generators, provenance=prov, name=f"{G1.name} o {G2.name}")


def extraspecial(n: int, sign: str) -> Group:
    if n < 1:
        raise UsageError("extraspecial groups need n >= 1")
    parts = [dihedral(8)] * (n - 1) + [dihedral(8) if sign == "+" else quaternion(8)]
    G = parts[0]
    for H in parts[1:]:
        G = central_product(G, H)
    G.provenance = {"type": "named", "family": f"extraspecial_{'plus' if sign == '+' else 'minus'}", "params": {"n": n}}
    G.name = f"2^(1+{2 * n}){sign}"
    return G


def extraspecial_plus(n: int) -> Group:
    return extraspecial(n, "+")


def extraspecial_minus(n: int) -> Group:
    return extraspecial(n, "-")


# -- permutation groups -----------------------------------------------------------

def symmetric(n: int) -> Group:
    if n < 1:
        raise UsageError("degree must be positive")
    if n == 1:
        return from_permutation_generators(1, [], name="S1")
    cyc = list(range(2, n + 1)) + [1]
    tr = [2, 1] + list(range(3, n + 1))
    return from_permutation_generators(n, [tr, cyc], name=f"S{n}")


def alternating(n: int) -> Group:
    if n < 3:
        return from_permutation_generators(max(n, 1), [], name=f"A{n}")
    gens = []
    for k in range(3, n + 1):
        p = list(range(1, n + 1))
        p[0], p[1], p[k - 1] = 2, k, 1  # 3-cycle (1 2 k)
        gens.append(p)
    return from_permutation_generators(n, gens, name=f"A{n}")


# -- dispatch ----------------------------------------------------------------------

FAMILIES = (
    "cyclic",
    "elementary_abelian",
    "abelian",
    "dihedral",
    "semidihedral",
    "quaternion",
    "modular",
    "UT",
    "wreath_C2",
    "direct_product",
    "central_product",
    "extraspecial_plus",
    "extraspecial_minus",
    "symmetric",
    "alternating",
)


def construct_named(family: str, params: dict | None = None) -> Group:
    """Build a group from a family name and a parameter dict.

    Nested groups (for products and wreath products) are given either as
    Group objects or as ``{"family": ..., "params": ...}`` dicts.
    """
    p = dict(params or {})
    try:
        if family == "cyclic":
            return cyclic(int(p["n"]))
        if family == "elementary_abelian":
            return elementary_abelian(int(p["rank"]))
        if family == "abelian":
            return abelian(p["invariants"])
        if family == "dihedral":
            return dihedral(int(p["order"]))
        if family == "semidihedral":
            return semidihedral(int(p["order"]))
        if family == "quaternion":
            return quaternion(int(p["order"]))
        if family == "modular":
            return modular(int(p["order"]))
        if family == "UT":
            return unitriangular(int(p["n"]), int(p["q"]))
        if family == "wreath_C2":
            return wreath_c2(_sub(p["base"]))
        if family == "direct_product":
            return direct_product([_sub(x) for x in p["parts"]])
        if family == "central_product":
            a, b = (_sub(x) for x in p["parts"])
            z = p.get("z") or (None, None)
            return central_product(a, b, z[0], z[1])
        if family == "extraspecial_plus":
            return extraspecial_plus(int(p["n"]))
        if family == "extraspecial_minus":
            return extraspecial_minus(int(p["n"]))
        if family == "symmetric":
            return symmetric(int(p["n"]))
        if family == "alternating":
            return alternating(int(p["n"]))
    except KeyError as exc:
        raise UsageError(f"family {family!r} is missing parameter {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"bad parameters for {family!r}: {exc}") from exc
    raise UsageError(f"unknown family {family!r}; known: {', '.join(FAMILIES)}")


def _sub(x) -> Group:
    if isinstance(x, Group):
        return x
    if isinstance(x, dict) and "family" in x:
        return construct_named(x["family"], x.get("params"))
    raise UsageError(f"cannot interpret {x!r} as a group")

