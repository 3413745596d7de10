from __future__ import annotations

import numpy as np
import pytest

from fusionscan import automorphisms as au
from fusionscan import gf2
from fusionscan.errors import DomainError, ResourceError
from fusionscan.named import cyclic, dihedral, elementary_abelian, quaternion
from fusionscan.subgroups import center, frattini, upper_central_2, whole, derived, omega1

from conftest import cached_fixture

TINY = ["d8", "q8", "c2^3"]
SIXTEEN = ["d16", "sd16", "q16", "m16", "c2xd8", "c2xq8"]


def aut(name):
    return au.automorphism_group(cached_fixture(name))


def test_klein_four_has_aut_of_order_6():
    G = elementary_abelian(2)
    A = au.automorphism_group(G)
    assert A.order == 6 == au.brute_force_aut_order(G)


def test_q8_and_d8_automorphism_orders():
    A = au.automorphism_group(quaternion(8))
    assert A.order == 24
    B = au.automorphism_group(dihedral(8))
    assert B.order == 8 and B.out_order == 2


@pytest.mark.parametrize("name", TINY)
def test_order_matches_all_bijections(name):
    G = cached_fixture(name)
    assert au.automorphism_group(G).order == au.brute_force_aut_order(G)


@pytest.mark.parametrize("name", SIXTEEN)
def test_order_matches_generator_image_count(name):
    G = cached_fixture(name)
    assert au.automorphism_group(G).order == au.generator_image_aut_order(G)


@pytest.mark.parametrize("name", TINY + SIXTEEN + ["ut4-2", "d8xd8", "d8-wr-c2", "a12-sylow"])
def test_generators_are_automorphisms_and_inner_index(name):
    G = cached_fixture(name)
    A = au.automorphism_group(G)
    assert all(au.is_automorphism(G, g) for g in A.gens)
    assert A.inner_index == G.order // center(G).order
    assert A.order % A.inner_index == 0
    for g in G.generators:
        assert A.contains(au.inner(G, g))


def test_node_budget_is_reported_with_group_name():
    G = cached_fixture("c2^2xd8")
    with pytest.raises(ResourceError, match="c2\\^2xd8"):
        au.automorphism_group(G, node_budget=3, use_cache=False)


def test_from_images_reproduces_generators():
    A = aut("ut3-4")
    for g in A.gens:
        assert (A.from_images([g[x] for x in A.seq]) == g).all()


# -- 2-local structure --------------------------------------------------------------

def test_2group_aut_has_empty_odd_residual():
    A = aut("d8")
    assert au.out_is_2group(A)
    assert au.odd_residual_generators(A) == []


def test_odd_residual_of_aut_q8_has_order_12():
    A = aut("q8")
    assert au.odd_residual(A).order() == 12


def test_aut_of_klein_four():
    A = au.automorphism_group(elementary_abelian(2))
    assert au.odd_residual(A).order() == 3
    assert au.o2_of_aut(A).order() == 1
    assert au.brute_force_o2(A) == 1


@pytest.mark.parametrize("name", ["q8", "c2^3", "ut3-4", "2^(1+4)+", "2^(1+4)-", "c2^2-wr-c2", "d8xd8", "psp63-sylow", "on-sylow"])
def test_odd_residual_two_routes_agree(name):
    A = aut(name)
    fast = A.perm.odd_residual()
    slow = A.perm.odd_residual_by_series()
    assert fast.order() == slow.order()
    assert all(slow.contains(g) for g in fast.gens)
    idx = A.order // fast.order()
    assert idx & (idx - 1) == 0


@pytest.mark.parametrize("name", ["d8", "q8", "c2^3", "d16", "c2xd8", "c2xq8", "ut3-2", "2^(1+4)+"])
def test_o2_two_routes_agree(name):
    A = aut(name)
    assert au.o2_of_aut(A).order() == au.brute_force_o2(A)


@pytest.mark.parametrize("name", ["q8", "c2^3", "ut3-4", "d8xd8"])
def test_o2_is_normal_2subgroup(name):
    A = aut(name)
    O = au.o2_of_aut(A)
    assert O.is_2group()
    for a in A.gens:
        for x in O.gens:
            assert O.contains(au.conjugate_aut(a, x))
    fm = au.frattini_module(A)
    assert all(au.in_o2(A, x, fm) for x in O.gens)


# -- induced actions -----------------------------------------------------------------

def test_identity_acts_as_identity_matrix():
    G = cached_fixture("d16")
    M = au.induced_action(G, [np.arange(G.order)])
    assert M.action[0] == gf2.identity(M.dim)


@pytest.mark.parametrize("name", ["d8", "q8", "ut4-2", "d8-wr-c2"])
def test_inner_automorphisms_are_trivial_mod_frattini(name):
    G = cached_fixture(name)
    M = au.induced_action(G, [au.inner(G, g) for g in range(G.order)])
    assert all(m == gf2.identity(M.dim) for m in M.action)


def test_order_three_automorphism_of_q8_on_frattini_quotient():
    A = aut("q8")
    R = au.odd_residual(A)
    from fusionscan.permgroups import perm_order

    three = [np.asarray(g, dtype=np.int64) for g in R.elements() if perm_order(g) == 3]
    assert three
    M = au.induced_action(A.parent, three[:1])
    assert M.dim == 2
    assert gf2.mat_order(M.action[0]) == 3


def test_non_invariant_section_is_rejected():
    G = dihedral(8)
    r, s = G.generators
    from fusionscan.subgroups import closure

    upper = closure(G, [s, G.multiply(r, r)])
    sw = au.inner(G, r)  # conjugation by r moves s out of <s>
    with pytest.raises(DomainError):
        au.induced_action(G, [sw], upper=upper, lower=closure(G, [s]))


# -- outer automorphisms -------------------------------------------------------------

def test_inner_coset_key_is_constant_on_cosets():
    A = aut("ut4-2")
    key = au.InnerCosetKey(A)
    G = A.parent
    for a in A.gens[:4]:
        for g in (1, 5, 17, 40):
            assert key(a[au.inner(G, g)]) == key(a)
            assert key(au.inner(G, g)[a]) == key(a)
    assert key(au.inner(G, 3)) == key.identity_key


@pytest.mark.parametrize("name", ["d8", "q8", "ut3-4", "d8xd8"])
def test_outer_enumeration_has_out_order(name):
    A = aut(name)
    E = au.OuterEnumeration(A)
    assert E.order == A.out_order
    Out = E.as_group()
    assert Out.order == A.out_order


# -- layer-trivial automorphisms -----------------------------------------------------------

@pytest.mark.parametrize("name", ["d8", "q8", "c2^3", "d16", "ut3-4", "2^(1+4)+", "c2^2-wr-c2"])
def test_layer_trivial_automorphisms_form_a_2group_in_o2(name):
    A = aut(name)
    G = A.parent
    O = au.o2_of_aut(A)
    for chain in ([center(G) & frattini(G), whole(G)], [frattini(G), whole(G)], [derived(G), frattini(G), whole(G)]):
        chain = [c for c in chain]
        els = au.layer_trivial_automorphisms(A, chain)
        k = len(els)
        assert k & (k - 1) == 0
        assert all(O.contains(a) for a in els)


# -- cache -----------------------------------------------------------------------------

def test_cache_round_trip(tmp_path, monkeypatch):
    from fusionscan import cache

    monkeypatch.setenv(cache.ENV_VAR, str(tmp_path))
    G = cached_fixture("ut3-4")
    au._MEMORY_CACHE.pop(G.table_hash, None)
    A = au.automorphism_group(G)
    assert (tmp_path / "aut-cache.jsonl").exists()
    B = cache.load(G)
    assert B is not None and B.order == A.order
    # a relabelled copy must not hit the same record
    from fusionscan.groups import Group

    p = np.concatenate([[0], np.random.default_rng(1).permutation(np.arange(1, G.order))])
    q = np.argsort(p)
    H = Group(p[G.mul[np.ix_(q, q)]])
    assert H.table_hash != G.table_hash and cache.load(H) is None


def test_cache_rejects_tampered_record(tmp_path, monkeypatch):
    import json

    from fusionscan import cache

    monkeypatch.setenv(cache.ENV_VAR, str(tmp_path))
    G = cached_fixture("q8")
    au._MEMORY_CACHE.pop(G.table_hash, None)
    au.automorphism_group(G)
    p = tmp_path / "aut-cache.jsonl"
    rec = json.loads(p.read_text().splitlines()[-1])
    rec["gens"][0] = list(range(G.order))[::-1]
    p.write_text(json.dumps(rec) + "\n")
    assert cache.load(G) is None
