from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fusionscan.errors import DomainError
from fusionscan.named import cyclic, dihedral, elementary_abelian, symmetric
from fusionscan.subgroups import (
    Subgroup,
    all_subgroups,
    center,
    centralizer,
    closure,
    derived,
    enumerate_centric_candidates,
    frattini,
    frattini_by_maximals,
    is_centric,
    is_normal,
    join,
    maximal_subgroups,
    normal_closure,
    normalizer,
    omega1,
    second_centre_by_commutators,
    semicharacteristic_closure,
    subgroup_conjugacy_class,
    trivial,
    upper_central_2,
    whole,
    z_prime,
)

from conftest import cached_fixture

SMALL = ["d8", "q8", "d16", "sd16", "q16", "m16", "c2xd8", "c4xd8", "d8xd8", "ut4-2", "ut3-4", "2^(1+4)-"]


def d8_parts():
    G = dihedral(8)
    r, s = G.generators
    return G, r, s


# -- closure ---------------------------------------------------------------------

def test_closure_of_empty_seed_and_whole_group():
    G, r, s = d8_parts()
    assert closure(G, []).order == 1
    assert closure(G, range(8)).order == 8


def test_reflections_in_different_klein_fours_generate_d8():
    G, r, s = d8_parts()
    rs = G.multiply(r, s)
    assert closure(G, [s, rs]).order == 8


def test_join_of_two_commuting_reflections_is_klein_four():
    G, r, s = d8_parts()
    r2 = G.multiply(r, r)
    assert join(G, [s], [r2]).order == 4


# -- standard functors --------------------------------------------------------------

@pytest.mark.parametrize("rank", [1, 3, 5])
def test_functors_on_elementary_abelian(rank):
    G = elementary_abelian(rank)
    assert center(G).order == G.order
    assert derived(G).order == 1
    assert frattini(G).order == 1


def test_frattini_of_d8_is_centre():
    G = dihedral(8)
    assert frattini(G) == center(G)
    assert frattini(G).order == 2


def test_a12_type_derived_subgroup_is_not_cyclic():
    S = cached_fixture("a12-sylow")
    D = derived(S)
    assert int(S.element_orders[D.elements].max()) < D.order


def test_frattini_and_omega_need_a_2group():
    G = symmetric(3)
    with pytest.raises(DomainError):
        frattini(G)
    with pytest.raises(DomainError):
        omega1(G)


@pytest.mark.parametrize("name", SMALL + ["d8-wr-c2", "d8xd16", "a12-sylow", "on-sylow"])
def test_frattini_formula_matches_intersection_of_maximals(name):
    G = cached_fixture(name)
    assert frattini(G) == frattini_by_maximals(G)


@pytest.mark.parametrize("name", SMALL + ["d8-wr-c2", "on-sylow"])
def test_second_centre_two_ways(name):
    G = cached_fixture(name)
    assert upper_central_2(G) == second_centre_by_commutators(G)


def test_omega1_of_quaternion_is_centre():
    G = cached_fixture("q16")
    assert omega1(G) == center(G)


# -- centralisers, normalisers, classes -------------------------------------------------

def test_centralizer_of_identity_and_normalizer_of_normal():
    G, r, s = d8_parts()
    assert centralizer(G, 0).order == 8
    N = closure(G, [r])
    assert normalizer(G, N).order == 8


def test_centralizer_of_reflection_is_its_klein_four():
    G, r, s = d8_parts()
    C = centralizer(G, s)
    assert C.order == 4
    assert C == closure(G, [s, G.multiply(r, r)])


def test_class_sizes_in_d8():
    G, r, s = d8_parts()
    V = closure(G, [s, G.multiply(r, r)])
    assert len(subgroup_conjugacy_class(G, V)) == 1
    assert len(subgroup_conjugacy_class(G, closure(G, [s]))) == 2


@pytest.mark.parametrize("name", ["d8", "q8", "d16", "c2xd8", "ut3-2"])
def test_subgroup_invariants_over_all_subgroups(name):
    S = cached_fixture(name)
    Z = center(S)
    for P in all_subgroups(S):
        N = normalizer(S, P)
        C = centralizer(S, P)
        assert P <= N
        assert (C & P) == Subgroup(S, P.mask & center(S, within=P).mask)
        assert len(subgroup_conjugacy_class(S, P)) * N.order == S.order
        if is_centric(S, P):
            assert Z <= P


# -- candidate enumeration ---------------------------------------------------------------

def test_abelian_group_has_no_candidates():
    assert enumerate_centric_candidates(cyclic(16)) == []
    assert enumerate_centric_candidates(elementary_abelian(4)) == []


def test_d8_centric_subgroups_are_the_three_maximal_subgroups():
    G = dihedral(8)
    got = {P.key for P in enumerate_centric_candidates(G, prune_a=False)}
    assert got == {M.key for M in maximal_subgroups(G)}
    assert len(got) == 3


def test_d8_pruning_keeps_only_the_klein_fours():
    # Z' is all of D8 and the cyclic C4 is not the centraliser of an involution
    G = dihedral(8)
    assert z_prime(G).order == 8
    got = enumerate_centric_candidates(G)
    assert sorted(P.order for P in got) == [4, 4]
    assert all(int(G.element_orders[P.elements].max()) == 2 for P in got)


def test_a12_candidates_contain_named_subgroups():
    from fusionscan.fixtures import a12_named_subgroups
    from fusionscan.subgroups import are_conjugate

    S = cached_fixture("a12-sylow")
    cands = enumerate_centric_candidates(S)
    named = a12_named_subgroups(S)
    for k in ("N1", "N2", "N3", "H1", "H2"):
        assert any(are_conjugate(S, P, named[k]) for P in cands), k


@pytest.mark.parametrize("name", ["d8", "q8", "d16", "sd16", "c2xd8", "c4xd8", "ut3-2", "ut4-2", "2^(1+4)+"])
def test_unpruned_enumeration_matches_brute_force(name):
    from fusionscan.subgroups import conjugacy_class_keys

    S = cached_fixture(name)
    brute = set()
    for P in all_subgroups(S):
        if P.order < S.order and is_centric(S, P):
            brute.add(min(conjugacy_class_keys(S, P)))
    got = {min(conjugacy_class_keys(S, P)) for P in enumerate_centric_candidates(S, prune_a=False)}
    assert got == brute


@pytest.mark.parametrize("name", ["d16", "c4xd8", "ut4-2", "d8xd8"])
def test_pruned_candidates_meet_the_pruning_condition(name):
    S = cached_fixture(name)
    zp = z_prime(S)
    z2 = upper_central_2(S)
    for P in enumerate_centric_candidates(S):
        assert is_centric(S, P) and P.order < S.order
        if zp <= P:
            continue
        hs = [h for h in center(S, within=P).elements if S.element_orders[h] == 2 and centralizer(S, int(h)) == P]
        assert hs and normalizer(S, P).order == 2 * P.order
        assert any(not S.commute[h, z2.elements].all() for h in hs)


# -- semicharacteristic closure -------------------------------------------------------------

def test_semicharacteristic_closure_examples():
    G, r, s = d8_parts()
    assert semicharacteristic_closure(G, whole(G), []).order == 8
    Q = closure(G, [s])
    assert semicharacteristic_closure(G, Q, []) == normal_closure(G, Q)
    assert semicharacteristic_closure(G, center(G), []) == center(G)


def test_semicharacteristic_closure_under_odd_automorphism():
    from fusionscan.automorphisms import automorphism_group, odd_residual_generators

    G = cached_fixture("q8")
    A = automorphism_group(G)
    gens = odd_residual_generators(A)
    x = int(np.flatnonzero(G.element_orders == 4)[0])
    assert semicharacteristic_closure(G, closure(G, [x]), gens).order == 8
    assert semicharacteristic_closure(G, center(G), gens) == center(G)


@given(st.sampled_from(SMALL), st.lists(st.integers(0, 63), max_size=3))
def test_closure_is_a_normal_subgroup_when_normal_closed(name, seed):
    S = cached_fixture(name)
    seed = [x % S.order for x in seed]
    H = closure(S, seed)
    assert H.mask[0] and S.order % H.order == 0
    el = H.elements
    assert H.mask[S.mul[np.ix_(el, el)]].all()
    N = normal_closure(S, H)
    assert H <= N and is_normal(S, N)
    assert trivial(S) <= H <= whole(S)
