from __future__ import annotations

import json

import numpy as np
import pytest

from fusionscan.automorphisms import automorphism_group
from fusionscan.criteria import (
    CRITICAL_CONDITIONS,
    SCHEMA_VERSION,
    Caps,
    condition_a,
    condition_f_generation,
    condition_g_common_normal,
    excluded_family,
    potentially_critical,
    screen_candidate,
    search_verdict,
)
from fusionscan.embedding import critical_oracle
from fusionscan.errors import DomainError
from fusionscan.named import cyclic, dihedral, elementary_abelian, symmetric
from fusionscan.subgroups import (
    Subgroup,
    are_conjugate,
    center,
    enumerate_centric_candidates,
    maximal_subgroups,
    z_prime,
)

from conftest import cached_fixture


def klein_fours(S):
    return [M for M in maximal_subgroups(S) if int(S.element_orders[M.elements].max()) == 2]


# -- potentially critical subgroups ------------------------------------------------------

@pytest.mark.parametrize("name", ["d8", "d16", "c4xd8", "ut4-2", "d8xd8", "ut3-4", "c4-wr-c2"])
def test_report_invariants(name):
    S = cached_fixture(name)
    rep = potentially_critical(S)
    assert rep.decided
    for c in rep.classes:
        assert set(c.conditions) == set(CRITICAL_CONDITIONS)
        assert all(v["status"] == "pass" for v in c.conditions.values())
        assert c.class_size * c.local.N.order == S.order
    for i, a in enumerate(rep.classes):
        for b in rep.classes[i + 1:]:
            assert not are_conjugate(S, a.rep, b.rep)
    assert sum(rep.rejected.values()) + len(rep.classes) == rep.candidates


@pytest.mark.parametrize("name", ["d16", "ut4-2", "d8xd8", "c4-wr-c2"])
def test_class_list_is_permuted_by_automorphisms(name):
    S = cached_fixture(name)
    classes = [c.rep for c in potentially_critical(S).classes]
    A = automorphism_group(S)
    for a in A.gens:
        for P in classes:
            img = np.zeros(S.order, dtype=bool)
            img[a[P.elements]] = True
            assert sum(are_conjugate(S, img, Q) for Q in classes) == 1


@pytest.mark.parametrize("name", ["d8", "d16", "sd16", "c2xd8", "ut4-2", "2^(1+4)+", "d8xd8"])
def test_oracle_critical_subgroups_are_listed(name):
    S = cached_fixture(name)
    classes = [c.rep for c in potentially_critical(S).classes]
    for P in enumerate_centric_candidates(S, prune_a=False):
        if critical_oracle(S, P).yes:
            assert any(are_conjugate(S, P, Q) for Q in classes)


def test_d8_potentially_critical_are_the_klein_fours():
    S = dihedral(8)
    rep = potentially_critical(S)
    assert sorted(c.rep.key for c in rep.classes) == sorted(M.key for M in klein_fours(S))
    assert all(c.k == 1 and c.n == 1 for c in rep.classes)


def test_non_2group_is_rejected():
    with pytest.raises(DomainError):
        potentially_critical(symmetric(3))


def test_unpruned_run_finds_the_same_classes():
    S = cached_fixture("ut4-2")
    a = {c.rep.key for c in potentially_critical(S).classes}
    b = {c.rep.key for c in potentially_critical(S, prune_a=False).classes}
    assert a == b


def test_aut_budget_gives_not_decided():
    from fusionscan.groups import from_table_bfs

    # a relabelled copy so no cached Aut is reused
    G = cached_fixture("d8xd8")
    S = from_table_bfs(G.mul, list(reversed(G.generators)) + [G.generators[0]])
    assert S.table_hash != G.table_hash
    rep = potentially_critical(S, Caps(aut_nodes=2))
    assert rep.undecided and not rep.decided
    c = rep.undecided[0]
    assert c.conditions["h"]["status"] == "not_decided"


# -- single conditions ----------------------------------------------------------------------

def test_condition_a_clauses():
    S = dihedral(16)
    for M in maximal_subgroups(S):
        v = condition_a(S, M.mask)
        assert v["status"] == "pass"
    V = klein_fours(dihedral(16))
    # a Klein four of D16 is not maximal, so its normaliser is twice as large
    for P in enumerate_centric_candidates(S, prune_a=False):
        if P.order == 4:
            v = condition_a(S, P.mask)
            clause = v.get("witness", {}).get("clause")
            assert v["status"] == "fail" or clause == "P = C_S(h)"


def test_screen_reports_every_condition_without_short_circuit():
    S = cached_fixture("c4xd8")
    for P in enumerate_centric_candidates(S, prune_a=False):
        c = screen_candidate(S, P, short_circuit=False)
        assert set(c.conditions) == set(CRITICAL_CONDITIONS)
        assert all(v["status"] != "not_evaluated" for v in c.conditions.values())


def test_whole_group_fails_b():
    S = dihedral(8)
    c = screen_candidate(S, np.ones(8, dtype=bool))
    assert c.first_failure == "b"


def test_condition_f_without_critical_subgroups():
    S = cached_fixture("ut4-2")
    ok, H = condition_f_generation(S, [], [])
    assert not ok and H.order == 1


def test_condition_f_with_one_normal_class_and_no_odd_automorphisms():
    S = dihedral(8)
    V = klein_fours(S)[0]
    c = screen_candidate(S, V)
    c.odd_gens = []
    ok, H = condition_f_generation(S, [c], [])
    assert not ok and H <= V


def test_condition_g_intersection_trivial_and_centre_obstruction():
    S = dihedral(8)
    cs = [screen_candidate(S, V) for V in klein_fours(S)]
    for c in cs:
        c.odd_gens = []
    ok, Q = condition_g_common_normal(S, cs, [])
    assert not ok and Q == center(S)
    # with the Klein fours' odd automorphisms the centre is moved and the intersection collapses
    rep = potentially_critical(S)
    ok, Q = condition_g_common_normal(S, rep.classes, [])
    assert ok and Q.order == 1


# -- excluded families ------------------------------------------------------------------------

@pytest.mark.parametrize("name,family", [
    ("d8", "D8"), ("d16", "D16"), ("d64", "D64"), ("sd16", "SD16"), ("sd32", "SD32"),
    ("c4-wr-c2", "C4wrC2"), ("q16", None), ("m16", None), ("d8xd8", None), ("c2^2-wr-c2", None), ("ut4-2", None),
])
def test_excluded_family_detection(name, family):
    assert excluded_family(cached_fixture(name)) == family


# -- the search filter ------------------------------------------------------------------------

def test_dihedral_128_fails_a_with_family_marker():
    rep = search_verdict(cached_fixture("d128"))
    assert rep.conditions["a"]["status"] == "fail"
    assert rep.family_exclusion == "D128"
    assert rep.overall == {"status": "fail", "condition": "a"}


def test_elementary_abelian_fails_b_and_is_rejected():
    rep = search_verdict(elementary_abelian(7))
    assert rep.conditions["b"]["status"] == "fail"
    assert rep.overall["status"] == "rejected"


def test_trivial_group_is_rejected_as_abelian():
    rep = search_verdict(cyclic(1))
    assert rep.overall == {"status": "rejected", "reason": "abelian input"}


def test_d8_wreath_c2_passes():
    rep = search_verdict(cached_fixture("d8-wr-c2"))
    assert rep.overall == {"status": "pass"}
    assert all(rep.conditions[c]["status"] == "pass" for c in "abcdefgh")


def test_q8_fails_without_family_marker():
    rep = search_verdict(cached_fixture("q8"))
    assert rep.overall["status"] == "fail"
    assert rep.family_exclusion is None


def test_report_json_schema():
    rep = search_verdict(cached_fixture("d8xd8"))
    doc = json.loads(json.dumps(rep.to_json()))
    assert doc["schema_version"] == SCHEMA_VERSION
    assert set(doc) >= {"schema_version", "group", "order", "critical", "search", "oracle"}
    assert set(doc["search"]) == set("abcdefgh") | {"overall"}
    assert "timings" not in doc
    assert "timings" in rep.to_json(timings=True)
    for cls in doc["critical"]["classes"]:
        assert set(cls) >= {"order", "index", "class_size", "elements", "generators", "k", "n", "status", "conditions"}
    assert all(o["oracle"] in ("yes", "no", "not_decided") for o in doc["oracle"])


def test_report_is_deterministic():
    S = cached_fixture("ut4-2")
    a = json.dumps(search_verdict(S).to_json(), sort_keys=True)
    b = json.dumps(search_verdict(cached_fixture("ut4-2")).to_json(), sort_keys=True)
    assert a == b
