"""Acceptance suite: one test per criterion, each printing a pass/fail line."""

from __future__ import annotations

import os
import time
from pathlib import Path

import numpy as np
import pytest

from fusionscan import gf2
from fusionscan.automorphisms import automorphism_group, layer_trivial_automorphisms, o2_of_aut
from fusionscan.criteria import PASS, potentially_critical, search_verdict
from fusionscan.embedding import critical_oracle
from fusionscan.fixtures import (
    CATALOGUE,
    SMALL_CATALOGUE,
    a12_named_subgroups,
    all_fixture_names,
    on_hs_named_subgroups,
)
from fusionscan.io import read_groups
from fusionscan.permgroups import PermGroup
from fusionscan.subgroups import (
    are_conjugate,
    center,
    derived,
    enumerate_centric_candidates,
    frattini,
    is_normal,
    normalizer,
    trivial,
    whole,
)

from conftest import CRITERION_LINES, cached_fixture
from modules_data import a5_permutation_module, involutions, matrix_group, w2_module
from transfer_checks import check_group

SMALL_GROUPS_ENV = "FUSIONSCAN_SMALLGROUPS_DIR"


def report(criterion: int, ok: bool | None, detail: str) -> None:
    status = "SKIPPED" if ok is None else "PASS" if ok else "FAIL"
    line = f"CRITERION {criterion}: {status} ({detail})"
    CRITERION_LINES.append(line)
    print("\n" + line)


# -- 1: survivors and excluded families -----------------------------------------------------

SURVIVORS = ["d8-wr-c2", "d8xd16", "d8xsd16"]
EXCLUDED = {"d128": "D128", "sd128": "SD128", "c8-wr-c2": "C8wrC2"}


def test_criterion_1_fixture_survivors():
    problems, slowest = [], 0.0
    for name in SURVIVORS + list(EXCLUDED):
        S = cached_fixture(name)
        t = time.perf_counter()
        rep = search_verdict(S)
        dt = time.perf_counter() - t
        slowest = max(slowest, dt)
        if dt >= 60:
            problems.append(f"{name} took {dt:.0f} s")
        if name in EXCLUDED:
            failing = [c for c in "ab" if rep.conditions[c]["status"] == "fail"]
            if not failing or rep.family_exclusion != EXCLUDED[name]:
                problems.append(f"{name}: fails {failing}, family {rep.family_exclusion}")
        else:
            st = {c: rep.conditions.get(c, {}).get("status") for c in "abcdefgh"}
            if any(v != PASS for v in st.values()) or rep.family_exclusion:
                problems.append(f"{name}: {st}")
    report(1, not problems, "; ".join(problems) or f"6 groups, slowest {slowest:.1f} s")
    assert not problems


# -- 2: potentially critical classes of the order-512 fixtures ---------------------------

def _match(S, classes, named):
    """Bijection class -> name with equal order, equal index and conjugate subgroups."""
    out = {}
    for c in classes:
        hits = [k for k, P in named.items() if P.order == c.rep.order and are_conjugate(S, P, c.rep)]
        if len(hits) != 1:
            return None
        out[hits[0]] = c
    return out if len(out) == len(classes) else None


def test_criterion_2_critical_class_lists():
    problems, times = [], {}

    S = cached_fixture("a12-sylow")
    t = time.perf_counter()
    rep = potentially_critical(S)
    times["a12"] = time.perf_counter() - t
    named = {k: v for k, v in a12_named_subgroups(S).items() if k in ("N1", "N2", "N3", "H1", "H2")}
    m = _match(S, rep.classes, named) if not rep.undecided else None
    if m is None or sorted(m) != sorted(named):
        problems.append(f"a12: {[c.rep.order for c in rep.classes]}, undecided {len(rep.undecided)}")
    else:
        for k, c in m.items():
            if S.order // c.rep.order != S.order // named[k].order:
                problems.append(f"a12 {k}: index")

    for kind in ("on", "hs"):
        S = cached_fixture(f"{kind}-sylow")
        t = time.perf_counter()
        rep = potentially_critical(S)
        times[kind] = time.perf_counter() - t
        named = {k: v for k, v in on_hs_named_subgroups(S, kind).items() if k != "A"}
        m = _match(S, rep.classes, named) if not rep.undecided else None
        if m is None or sorted(m) != ["P1", "P2", "P3"]:
            problems.append(f"{kind}: {[c.rep.order for c in rep.classes]}, undecided {len(rep.undecided)}")
            continue
        for k in ("P1", "P3"):
            if not (is_normal(S, named[k]) and S.order // named[k].order == 2):
                problems.append(f"{kind} {k}: not normal of index 2")
        N = normalizer(S, m["P2"].rep)
        if kind == "on" and N != named["P1"]:
            problems.append("on: N_S(P2) != P1")
        if kind == "hs" and N.order != 256:
            problems.append(f"hs: |N_S(P2)| = {N.order}")

    S = cached_fixture("psp63-sylow")
    t = time.perf_counter()
    rep = potentially_critical(S)
    times["psp63"] = time.perf_counter() - t
    orders = sorted(c.rep.order for c in rep.classes)
    if orders != [128, 256] or rep.undecided:
        problems.append(f"psp63: {orders}, undecided {len(rep.undecided)}")

    problems += [f"{k} took {v:.0f} s" for k, v in times.items() if v >= 600]
    detail = ", ".join(f"{k} {v:.1f} s" for k, v in times.items())
    report(2, not problems, "; ".join(problems) or detail)
    assert not problems


# -- 3: the screen misses no critical subgroup --------------------------------------------

def test_criterion_3_oracle_equivalence():
    t = time.perf_counter()
    misses, undecided, yes, groups = [], [], 0, 0
    for name in SMALL_CATALOGUE:
        S = cached_fixture(name)
        assert S.order <= 64
        groups += 1
        if S.is_abelian:
            continue
        rep = potentially_critical(S)
        for P in enumerate_centric_candidates(S, prune_a=False):
            v = critical_oracle(S, P)
            if v.status == "not_decided":
                undecided.append(name)
            elif v.status == "yes":
                yes += 1
                if not any(are_conjugate(S, P, c.rep) for c in rep.classes):
                    misses.append((name, P.order))
    dt = time.perf_counter() - t
    ok = not misses and not undecided and dt < 300 and groups >= 20
    report(3, ok, f"{groups} groups, {yes} oracle-critical classes, misses {misses}, "
                  f"undecided {undecided}, {dt:.0f} s")
    assert ok


# -- 4: composition factors and commutator ranks -------------------------------------------

def test_criterion_4_meataxe_vectors():
    problems = []
    perm = a5_permutation_module()
    dims = sorted(f.dim for f in gf2.composition_factor_data(perm))
    if dims != [1, 4]:
        problems.append(f"permutation module factors {dims}")
    W = w2_module()
    if not gf2.is_irreducible(W) or W.dim != 4:
        problems.append("W2 not irreducible of dimension 4")
    for label, M in (("perm", perm), ("W2", W)):
        for f in gf2.composition_factor_data(M):
            if f.dim != 4:
                continue
            F = gf2.factor_module(f)
            invs = involutions(matrix_group(list(F.action)))
            ranks = {gf2.commutator_rank(F, s) for s in invs}
            if len(invs) != 15 or ranks != {2}:
                problems.append(f"{label}: {len(invs)} involutions, ranks {ranks}")
    report(4, not problems, "; ".join(problems) or "dims {1,4}, W2 irreducible, all ranks 2")
    assert not problems


# -- 5: transfer properties ------------------------------------------------------------------

TRANSFER_FIXTURES = sorted(CATALOGUE)


def test_criterion_5_transfer_properties():
    t = time.perf_counter()
    totals: dict[str, int] = {}
    names = list(SMALL_CATALOGUE) + TRANSFER_FIXTURES
    for name in names:
        for k, v in check_group(cached_fixture(name), max_index=8).items():
            totals[k] = totals.get(k, 0) + v
    bad = {k: v for k, v in totals.items() if k not in ("pairs", "chains") and v}
    dt = time.perf_counter() - t
    report(5, not bad, f"{len(names)} groups, {totals['pairs']} pairs, {totals['chains']} chains, "
                       f"violations {bad or 0}, {dt:.0f} s")
    assert not bad


# -- 6: layer-trivial automorphisms ---------------------------------------------------------

def _phi_series(G):
    """``G > Phi(G) > Phi(Phi(G)) > ... > 1``."""
    chain = [whole(G)]
    while chain[-1].order > 1:
        chain.append(frattini(G, within=chain[-1]))
    return chain


def _chains(G):
    Phi = frattini(G)
    series = _phi_series(G)[::-1]
    out = [[Phi, whole(G)], [center(G) & Phi, Phi, whole(G)], [derived(G), Phi, whole(G)],
           [trivial(G), Phi, whole(G)], series]
    # every tail of the series starting at or below Phi
    out += [series[i:] for i in range(1, len(series) - 1)]
    return out


def test_criterion_6_layer_trivial_automorphisms():
    violations, checked = [], 0
    names = [n for n in all_fixture_names() if cached_fixture(n).order <= 128]
    for name in names:
        G = cached_fixture(name)
        A = automorphism_group(G)
        O = o2_of_aut(A)
        for chain in _chains(G):
            assert chain[0].order <= frattini(G).order and (chain[0].mask & ~frattini(G).mask).sum() == 0
            els = layer_trivial_automorphisms(A, chain, cap=A.order + 1)
            checked += 1
            k = len(els)
            gen = PermGroup(G.order, els) if k > 1 else None
            closed = gen is None or gen.order() == k
            if k & (k - 1) or not closed or not all(O.contains(a) for a in els):
                violations.append((name, [c.order for c in chain], k))
    report(6, not violations, f"{len(names)} groups, {checked} chains, violations {violations or 0}")
    assert not violations


# -- 7: optional full scans of a small-groups export ----------------------------------------

EXPECTED_SCANS = {128: (2328, 6, 3), 256: (None, 18, 2)}


@pytest.mark.parametrize("order", sorted(EXPECTED_SCANS))
def test_criterion_7_full_scan(order):
    from fusionscan.cli import ScanJob, run_scan, scan_inputs

    if not os.environ.get(SMALL_GROUPS_ENV):
        report(7, None, f"order {order}: set {SMALL_GROUPS_ENV} to a small-groups export")
        pytest.skip(f"set {SMALL_GROUPS_ENV} to a small-groups export")
    root = Path(os.environ[SMALL_GROUPS_ENV]) / str(order)
    if not root.is_dir():
        report(7, None, f"order {order}: no export under {root}")
        pytest.skip(f"no export for order {order} under {root}")
    records, summary = run_scan(ScanJob(scan_inputs(root), jobs=os.cpu_count() or 1))
    passes, excluded = summary["pass"], summary["excluded_family"]
    total, want_pass, want_excl = EXPECTED_SCANS[order]
    ok = passes == want_pass and excluded == want_excl and (total is None or len(records) == total)
    report(7, ok, f"order {order}: {len(records)} inputs, {passes} pass, {excluded} excluded")
    assert ok
