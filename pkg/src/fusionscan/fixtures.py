"""Named fixture groups: Sylow 2-subgroups of A12, O'N, HS, PSp6(3) and friends."""

from __future__ import annotations

from typing import Callable, Sequence

from . import named
from .errors import UsageError
from .extension import ExtensionSpec, build_extension, element_of
from .groups import Group, extend_generator_map, from_permutation_generators, perm_element
from .subgroups import Subgroup, closure_mask


def perm_from_cycles(degree: int, cycles: Sequence[Sequence[int]]) -> list[int]:
    img = list(range(1, degree + 1))
    for c in cycles:
        for i, x in enumerate(c):
            img[x - 1] = c[(i + 1) % len(c)]
    return img


A12_GENERATORS = {
    "a1": [(1, 2), (3, 4)],
    "a2": [(5, 6), (7, 8)],
    "a3": [(9, 10), (11, 12)],
    "b1": [(1, 3), (2, 4)],
    "b2": [(5, 7), (6, 8)],
    "b3": [(9, 11), (10, 12)],
    "mu12": [(1, 2), (5, 6)],
    "mu23": [(5, 6), (9, 10)],
    "tau": [(1, 5), (2, 6), (3, 7), (4, 8)],
}


def a12_sylow() -> Group:
    gens = [perm_from_cycles(12, c) for c in A12_GENERATORS.values()]
    G = from_permutation_generators(12, gens, name="Syl2(A12)")
    G.provenance["fixture"] = "a12-sylow"
    return G


def a12_elements(S: Group) -> dict[str, int]:
    return {k: perm_element(S, perm_from_cycles(12, c)) for k, c in A12_GENERATORS.items()}


def a12_named_subgroups(S: Group) -> dict[str, Subgroup]:
    """The subgroups ``A, Q, N1, N2, N3, H1, H2`` of the A12-type Sylow."""
    e = a12_elements(S)
    m = S.multiply
    A = [e["a1"], e["a2"], e["a3"], e["b1"], e["b2"], e["b3"]]
    Q = [e["a1"], e["a2"], m(e["b1"], e["b2"]), e["mu12"], e["tau"]]
    spec = {
        "A": A,
        "Q": Q,
        "N1": A + [e["mu12"], e["tau"]],
        "N2": A + [e["mu12"], e["mu23"]],
        "N3": Q + [e["a3"], e["b3"], e["mu23"]],
        "H1": A + [e["tau"]],
        "H2": A + [e["mu23"]],
    }
    return {k: Subgroup(S, closure_mask(S, v)) for k, v in spec.items()}


# -- O'N and HS type ------------------------------------------------------------

def _on_hs_spec(kind: str) -> tuple[ExtensionSpec, dict[str, int]]:
    A = named.abelian([4, 4, 4], name="C4^3")
    v1, v2, v3 = A.generators
    inv = A.inv
    m = A.multiply
    # x -> x^t and x -> x^s on the generators of A
    act_t = extend_generator_map(A, A, [int(inv[v3]), int(inv[v2]), int(inv[v1])])
    act_s = extend_generator_map(A, A, [v2, v3, m(v1, int(inv[v2]), v3)])
    w = m(v1, v3)
    s4 = w if kind == "on" else 0
    # normal forms a * t^e * s^i; A<s> is normal of index 2
    spec = ExtensionSpec(
        base=A,
        relative_orders=[2, 4],
        action=[act_t, act_s],
        power_tails=[(0, (0, 0)), (s4, (0, 0))],
        # s^t = s^-1 = s^3 * (s^4)^-1, and s^4 is central in <A, s>
        conjugate_tails={(1, 0): (int(inv[s4]), (0, 3))},
        names=["t", "s"],
    )
    return spec, {"v1": v1, "v2": v2, "v3": v3}


def on_sylow() -> Group:
    spec, _ = _on_hs_spec("on")
    return build_extension(spec, name="Syl2(O'N)", provenance={"type": "extension", "fixture": "on-sylow"})


def hs_sylow() -> Group:
    spec, _ = _on_hs_spec("hs")
    return build_extension(spec, name="Syl2(HS)", provenance={"type": "extension", "fixture": "hs-sylow"})


def on_hs_spec(kind: str) -> ExtensionSpec:
    if kind not in ("on", "hs"):
        raise UsageError("kind must be 'on' or 'hs'")
    return _on_hs_spec(kind)[0]


def on_hs_elements(S: Group) -> dict[str, int]:
    """Ids of ``v1, v2, v3, s, t`` in an O'N/HS type group built here."""
    A = named.abelian([4, 4, 4])
    v1, v2, v3 = A.generators
    return {
        "v1": element_of(S, v1, (0, 0)),
        "v2": element_of(S, v2, (0, 0)),
        "v3": element_of(S, v3, (0, 0)),
        "t": element_of(S, 0, (1, 0)),
        "s": element_of(S, 0, (0, 1)),
    }


def on_hs_named_subgroups(S: Group, kind: str) -> dict[str, Subgroup]:
    e = on_hs_elements(S)
    m = S.multiply
    v1, v2, v3, s, t = e["v1"], e["v2"], e["v3"], e["s"], e["t"]
    A = [v1, v2, v3]
    s2 = m(s, s)
    if kind == "on":
        p2 = [m(s2, v1), t, m(v1, v3), m(v1, v1), m(v2, v2)]
    else:
        p2 = [m(s, v1, v2), t, m(v1, v3), m(v1, v1), m(v2, v2)]
    spec = {
        "A": A,
        "P1": A + [s2, t],
        "P2": p2,
        "P3": A + [m(s, t), s2],
    }
    return {k: Subgroup(S, closure_mask(S, v)) for k, v in spec.items()}


def psp63_sylow() -> Group:
    """``(Q8 wr C2) o Q8``, centres identified."""
    Q8 = named.quaternion(8)
    G = named.central_product(named.wreath_c2(Q8), Q8)
    G.name = "(Q8 wr C2) o Q8"
    G.provenance["fixture"] = "psp63-sylow"
    return G


# -- catalogue ----------------------------------------------------------------------

def _n(family: str, **params) -> Callable[[], Group]:
    return lambda: named.construct_named(family, params)


def _wr(base: Callable[[], Group]) -> Callable[[], Group]:
    return lambda: named.wreath_c2(base())


def _dp(*parts: Callable[[], Group]) -> Callable[[], Group]:
    return lambda: named.direct_product([p() for p in parts])


CATALOGUE: dict[str, Callable[[], Group]] = {
    "a12-sylow": a12_sylow,
    "on-sylow": on_sylow,
    "hs-sylow": hs_sylow,
    "psp63-sylow": psp63_sylow,
    "d8-wr-c2": _wr(_n("dihedral", order=8)),
    "d16-wr-c2": _wr(_n("dihedral", order=16)),
    "sd16-wr-c2": _wr(_n("semidihedral", order=16)),
    "q8-wr-c2": _wr(_n("quaternion", order=8)),
    "c4-wr-c2": _wr(_n("cyclic", n=4)),
    "c8-wr-c2": _wr(_n("cyclic", n=8)),
    "d8xd16": _dp(_n("dihedral", order=8), _n("dihedral", order=16)),
    "d8xsd16": _dp(_n("dihedral", order=8), _n("semidihedral", order=16)),
    "d128": _n("dihedral", order=128),
    "sd128": _n("semidihedral", order=128),
    "ut3-2": _n("UT", n=3, q=2),
    "ut4-2": _n("UT", n=4, q=2),
    "ut3-4": _n("UT", n=3, q=4),
    "ut3-8": _n("UT", n=3, q=8),
}

# groups of order at most 64 used by the oracle comparison
SMALL_CATALOGUE: dict[str, Callable[[], Group]] = {
    "c16": _n("cyclic", n=16),
    "c2^3": _n("elementary_abelian", rank=3),
    "d8": _n("dihedral", order=8),
    "q8": _n("quaternion", order=8),
    "d16": _n("dihedral", order=16),
    "sd16": _n("semidihedral", order=16),
    "q16": _n("quaternion", order=16),
    "m16": _n("modular", order=16),
    "d32": _n("dihedral", order=32),
    "sd32": _n("semidihedral", order=32),
    "q32": _n("quaternion", order=32),
    "d64": _n("dihedral", order=64),
    "c2xd8": _dp(_n("cyclic", n=2), _n("dihedral", order=8)),
    "c4xd8": _dp(_n("cyclic", n=4), _n("dihedral", order=8)),
    "c2xq8": _dp(_n("cyclic", n=2), _n("quaternion", order=8)),
    "d8xd8": _dp(_n("dihedral", order=8), _n("dihedral", order=8)),
    "d8xq8": _dp(_n("dihedral", order=8), _n("quaternion", order=8)),
    "c2^2xd8": _dp(_n("elementary_abelian", rank=2), _n("dihedral", order=8)),
    "c2xd16": _dp(_n("cyclic", n=2), _n("dihedral", order=16)),
    "c2^2-wr-c2": _wr(_n("elementary_abelian", rank=2)),
    "c4-wr-c2": _wr(_n("cyclic", n=4)),
    "2^(1+4)+": _n("extraspecial_plus", n=2),
    "2^(1+4)-": _n("extraspecial_minus", n=2),
    "ut3-2": _n("UT", n=3, q=2),
    "ut4-2": _n("UT", n=4, q=2),
    "ut3-4": _n("UT", n=3, q=4),
    "sd16xc2": _dp(_n("semidihedral", order=16), _n("cyclic", n=2)),
    "q8oc4xc2": _dp(lambda: named.central_product(named.quaternion(8), named.cyclic(4), None, 2), _n("cyclic", n=2)),
}


def fixture(name: str) -> Group:
    table = {**SMALL_CATALOGUE, **CATALOGUE}
    if name not in table:
        raise UsageError(f"unknown fixture {name!r}")
    G = table[name]()
    G.provenance = dict(G.provenance)
    G.provenance.setdefault("fixture", name)
    G.name = name
    return G


def all_fixture_names() -> list[str]:
    return sorted({**SMALL_CATALOGUE, **CATALOGUE})


def d8_wr_c2() -> Group:
    return fixture("d8-wr-c2")

