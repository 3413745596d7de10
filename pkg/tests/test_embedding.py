from __future__ import annotations

import numpy as np
import pytest

from fusionscan.automorphisms import OuterEnumeration
from fusionscan.criteria import screen_candidate
from fusionscan.embedding import (
    brute_force_strongly_embedded,
    critical_oracle,
    has_strongly_2_embedded,
    involutions_conjugate_in_normalizer,
    is_strongly_embedded,
    local_data,
    o2_order,
    sylow2,
    sylow_shape_checks,
    validate_critical_witness,
)
from fusionscan.groups import from_permutation_generators
from fusionscan.named import abelian, alternating, cyclic, dihedral, elementary_abelian, symmetric
from fusionscan.subgroups import closure, enumerate_centric_candidates, maximal_subgroups

from conftest import cached_fixture


SMALL_GROUPS = {
    "S3": lambda: symmetric(3),
    "S4": lambda: symmetric(4),
    "A4": lambda: alternating(4),
    "A5": lambda: alternating(5),
    "S5": lambda: symmetric(5),
    "D10": lambda: dihedral(10),
    "D12": lambda: dihedral(12),
    "D20": lambda: dihedral(20),
    "C2^2": lambda: elementary_abelian(2),
    "C6": lambda: cyclic(6),
    "C3xS3": lambda: from_permutation_generators(6, [[2, 3, 1, 4, 5, 6], [1, 2, 3, 5, 4, 6], [1, 2, 3, 5, 6, 4]]),
    "C7:C3": lambda: from_permutation_generators(7, [[2, 3, 4, 5, 6, 7, 1], [1, 3, 5, 7, 2, 4, 6]]),
}


def test_s3_has_strongly_embedded_subgroup_of_order_2():
    v = has_strongly_2_embedded(symmetric(3))
    assert v.yes and v.witness["order"] == 2


def test_klein_four_and_s4_have_none():
    assert has_strongly_2_embedded(elementary_abelian(2)).status == "no"
    assert has_strongly_2_embedded(symmetric(4)).status == "no"


def test_a5_has_one():
    v = has_strongly_2_embedded(alternating(5))
    assert v.yes and v.witness["order"] == 12


def test_cap_gives_not_decided():
    assert has_strongly_2_embedded(symmetric(4), cap=10).status == "not_decided"


@pytest.mark.parametrize("name", sorted(SMALL_GROUPS))
def test_closure_route_matches_brute_force(name):
    G = SMALL_GROUPS[name]()
    fast = has_strongly_2_embedded(G)
    slow = brute_force_strongly_embedded(G)
    assert fast.status == slow.status
    if fast.yes:
        H = np.zeros(G.order, dtype=bool)
        H[fast.witness["H"]] = True
        assert is_strongly_embedded(G, H)
        assert o2_order(G) == 1


@pytest.mark.parametrize("name", sorted(SMALL_GROUPS))
def test_sylow_subgroup_has_full_2_part(name):
    G = SMALL_GROUPS[name]()
    T = sylow2(G)
    k = int(T.sum())
    assert k & (k - 1) == 0 and (G.order // k) % 2 == 1


# -- the criticality oracle -----------------------------------------------------------------

def test_d8_klein_fours_are_critical_and_c4_is_not():
    G = dihedral(8)
    maxes = maximal_subgroups(G)
    for M in maxes:
        cyclic_max = int(G.element_orders[M.elements].max()) == 4
        v = critical_oracle(G, M)
        assert v.status == ("no" if cyclic_max else "yes")
        if v.yes:
            assert validate_critical_witness(v)
            assert v.witness["G_order"] == 6


def test_cyclic_maximal_of_d16_is_not_critical():
    G = dihedral(16)
    r = G.generators[0]
    C8 = closure(G, [r])
    assert C8.order == 8
    v = critical_oracle(G, C8)
    assert v.status == "no" and "2-group" in v.reason


def test_whole_group_and_non_centric_are_not_critical():
    G = dihedral(8)
    assert critical_oracle(G, np.ones(8, dtype=bool)).status == "no"
    assert critical_oracle(G, closure(G, [G.generators[1]])).reason == "not centric"


@pytest.mark.parametrize("name", ["d8", "q8", "d16", "sd16", "c2xd8", "c4xd8", "ut3-2", "ut4-2", "2^(1+4)+", "2^(1+4)-", "c2^2-wr-c2", "c4-wr-c2", "d8xd8"])
def test_yes_witnesses_validate_and_conditions_hold(name):
    S = cached_fixture(name)
    for P in enumerate_centric_candidates(S, prune_a=False):
        L = local_data(S, P)
        v = critical_oracle(S, P, L=L)
        assert v.status in ("yes", "no")
        if v.yes:
            assert validate_critical_witness(v)
            c = screen_candidate(S, P, short_circuit=False)
            assert c.status == "pass", (name, P.order, c.first_failure)
            assert all(c.conditions[k]["status"] == "pass" for k in "abcdefghij")


# -- shape of S_0 ------------------------------------------------------------------------------

def test_sylow_shape_examples():
    c4 = sylow_shape_checks(cyclic(4))
    assert c4.cyclic and c4.c_pass and c4.d_pass
    d8 = sylow_shape_checks(dihedral(8))
    assert not d8.c_pass
    v4 = sylow_shape_checks(elementary_abelian(2))
    assert v4.z_equals_omega1 and v4.m == 1 and v4.c_pass and v4.d_pass and v4.n == 2


def test_sylow_shape_of_quaternion_and_abelian():
    q = sylow_shape_checks(cached_fixture("q8"))
    assert q.c_pass and q.z_cyclic and q.d_pass
    a = sylow_shape_checks(abelian([2, 4]))
    # centre C2 x C4 is not elementary and differs from Omega_1
    assert not a.c_pass


# -- involution fusion in the normaliser -----------------------------------------------------------

def _brute_j(L):
    E = OuterEnumeration(L.A)
    Out = E.as_group()
    T = sorted({E.position(a) for a in L.actions})
    Tm = np.zeros(Out.order, dtype=bool)
    Tm[T] = True
    N = [g for g in range(Out.order) if Tm[Out.conj[g, T]].all()]
    invs = [t for t in T if Out.element_orders[t] == 2]
    if len(invs) <= 1:
        return True
    orbit = {int(Out.conj[g, invs[0]]) for g in N}
    return set(invs) <= orbit


def test_single_involution_is_vacuous():
    S = dihedral(8)
    for M in maximal_subgroups(S):
        assert involutions_conjugate_in_normalizer(local_data(S, M)) is True


@pytest.mark.parametrize("name", ["ut3-4", "ut4-2", "c4xd8", "d8xd8", "2^(1+4)+"])
def test_involution_fusion_matches_enumeration_of_out(name):
    S = cached_fixture(name)
    seen = set()
    for P in enumerate_centric_candidates(S, prune_a=False):
        L = local_data(S, P)
        if L.A.out_order > 2000:
            continue
        got = involutions_conjugate_in_normalizer(L)
        assert got == _brute_j(L)
        seen.add(got)
    if name == "ut3-4":
        assert seen == {True, False}
