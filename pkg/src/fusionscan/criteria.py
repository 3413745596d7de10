"""Potentially critical subgroups and the search filter for reduced fusion
systems over a 2-group ``S``.

Both procedures produce reports whose per-condition verdicts are dicts
``{"status": ..., "witness": ...}`` with status one of ``pass``, ``fail``,
``not_decided`` or ``not_evaluated``.  Subgroups are reported by sorted
element ids of ``S``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import gf2
from .automorphisms import (
    AutGroup,
    automorphism_group,
    frattini_module,
    odd_residual_generators,
)
from .embedding import (
    DEFAULT_ORACLE_CAP,
    DEFAULT_OUT_CAP,
    LocalData,
    critical_oracle,
    involutions_conjugate_in_normalizer,
    local_data,
    sylow_shape_checks,
)
from .errors import DomainError, ResourceError
from .groups import Group, quotient
from .subgroups import (
    SubLike,
    Subgroup,
    _mask,
    as_group,
    center,
    centralizer,
    closure_mask,
    conjugacy_class_keys,
    derived,
    enumerate_centric_candidates,
    frattini,
    frattini_coordinates,
    generators_of,
    invariant_closure,
    is_centric,
    maximal_subgroups,
    normal_closure,
    normalizer,
    omega1,
    unpack_key,
    upper_central_2,
    z_prime,
)
from .transfer import CriticalData, maximal_transfer_kernels, transfer_fixed_subgroup

SCHEMA_VERSION = 1
CRITICAL_CONDITIONS = tuple("abcdefghij")
SEARCH_CONDITIONS = tuple("abcdefgh")


def verdict(status: str, **witness) -> dict:
    out = {"status": status}
    if witness:
        out["witness"] = witness
    return out


PASS = "pass"
FAIL = "fail"
UNDECIDED = "not_decided"
SKIPPED = "not_evaluated"


@dataclass
class Caps:
    """Resource budgets shared by the two procedures."""

    aut_nodes: int = 2_000_000
    out_cap: int = DEFAULT_OUT_CAP
    oracle_cap: int = DEFAULT_ORACLE_CAP


# -- potentially critical subgroups --------------------------------------------------------

@dataclass
class CriticalClass:
    rep: Subgroup
    class_size: int
    k: int
    n: int
    conditions: dict[str, dict]
    local: LocalData | None = field(default=None, repr=False)
    odd_gens: list[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def status(self) -> str:
        st = [c["status"] for c in self.conditions.values()]
        if FAIL in st:
            return FAIL
        if UNDECIDED in st or SKIPPED in st:
            return UNDECIDED
        return PASS

    @property
    def first_failure(self) -> str | None:
        for c in CRITICAL_CONDITIONS:
            if self.conditions.get(c, {}).get("status") == FAIL:
                return c
        return None

    def to_json(self) -> dict:
        P = self.rep
        return {
            "order": P.order,
            "index": P.group.order // P.order,
            "class_size": self.class_size,
            "elements": P.elements.tolist(),
            "generators": generators_of(P.group, P),
            "k": self.k,
            "n": self.n,
            "status": self.status,
            "conditions": {c: _jsonable(self.conditions[c]) for c in CRITICAL_CONDITIONS if c in self.conditions},
        }


@dataclass
class CriticalReport:
    group: str
    order: int
    candidates: int
    classes: list[CriticalClass]  # passing all of (a)-(j)
    undecided: list[CriticalClass]
    rejected: dict[str, int]  # first failing condition -> number of classes

    @property
    def decided(self) -> bool:
        return not self.undecided

    def to_json(self) -> dict:
        return {
            "classes": [c.to_json() for c in self.classes],
            "undecided": [c.to_json() for c in self.undecided],
            "candidates": self.candidates,
            "rejected": dict(sorted(self.rejected.items())),
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _commutes_into(S: Group, g: int, X: np.ndarray, target: np.ndarray) -> bool:
    """Whether ``[g, x]`` lies in ``target`` for all ``x`` in the mask ``X``."""
    return bool(target[S.comm[g, np.flatnonzero(X)]].all())


def condition_a(S: Group, P: np.ndarray, zp: Subgroup | None = None) -> dict:
    zp = z_prime(S) if zp is None else zp
    if not (zp.mask & ~P).any():
        return verdict(PASS, clause="Z' <= P")
    z2 = upper_central_2(S)
    z2g = generators_of(S, z2)
    zP = center(S, P)
    N = normalizer(S, P)
    if N.order != 2 * int(P.sum()):
        return verdict(FAIL, reason="Z' not in P and [N_S(P):P] != 2")
    for h in zP.elements:
        if S.element_orders[h] != 2:
            continue
        if all(S.commute[h, z] for z in z2g):
            continue
        if centralizer(S, int(h)) == Subgroup(S, P):
            return verdict(PASS, clause="P = C_S(h)", h=int(h))
    return verdict(FAIL, reason="Z' not in P and P is not C_S(h) for a suitable involution h")


@dataclass
class _Quot:
    """``S_0 = N_S(P)/P`` with a lift in ``S`` of every element."""

    group: Group
    lifts: list[int]


def _s0(S: Group, P: np.ndarray, N: Subgroup) -> _Quot:
    Ng, nel = as_group(S, N)
    Q, proj = quotient(Ng, P[nel])
    lifts = [-1] * Q.order
    for i, q in enumerate(proj):
        if lifts[q] < 0:
            lifts[q] = int(nel[i])
    return _Quot(Q, lifts)


def _frattini_matrix(S: Group, coords: np.ndarray, basis: list[int], g: int) -> gf2.Matrix:
    return tuple(int(coords[S.conj[g, b]]) for b in basis)


def screen_candidate(
    S: Group,
    P: SubLike,
    caps: Caps | None = None,
    zp: Subgroup | None = None,
    short_circuit: bool = True,
) -> CriticalClass:
    """Evaluate (a)-(j) on one subgroup, cheap conditions first."""
    caps = caps or Caps()
    pm = _mask(P)
    rep = Subgroup(S, pm)
    N = normalizer(S, pm)
    cond: dict[str, dict] = {}
    size = S.order // N.order
    out = CriticalClass(rep, size, 0, 0, cond)

    def stop() -> bool:
        if short_circuit and any(c["status"] == FAIL for c in cond.values()):
            for c in CRITICAL_CONDITIONS:
                cond.setdefault(c, verdict(SKIPPED))
            return True
        return False

    # (b) first: everything below assumes a proper centric subgroup
    if pm.all():
        cond["b"] = verdict(FAIL, reason="P = S")
    elif not is_centric(S, pm):
        cond["b"] = verdict(FAIL, reason="C_S(P) not in P")
    else:
        cond["b"] = verdict(PASS)
    if cond["b"]["status"] == FAIL:
        for c in CRITICAL_CONDITIONS:
            cond.setdefault(c, verdict(SKIPPED))
        return out
    cond["a"] = condition_a(S, pm, zp)
    if stop():
        return out

    q = _s0(S, pm, N)
    shape = sylow_shape_checks(q.group)
    k = shape.k
    zpts = center(q.group)
    n = omega1(q.group, zpts).order.bit_length() - 1
    out.k, out.n = k, n
    cond["c"] = verdict(PASS if shape.c_pass else FAIL, s0_order=shape.order, cyclic=shape.cyclic,
                        centre_is_omega1=shape.z_equals_omega1)
    cond["d"] = verdict(PASS if shape.d_pass else FAIL, centre_order=shape.z_order, m=shape.m)
    if stop():
        return out

    coords, basis, phi = frattini_coordinates(S, pm)
    r = len(basis)
    nontriv = [g for g in q.lifts[1:]]
    mats = {g: _frattini_matrix(S, coords, basis, g) for g in q.lifts}
    if r < 2 * k:
        cond["e"] = verdict(FAIL, rank=r, k=k)
    else:
        bad = [g for g in nontriv if k >= 2 and len(gf2.commutator_space(mats[g])) < 2]
        cond["e"] = verdict(FAIL, rank=r, k=k, element=bad[0]) if bad else verdict(PASS, rank=r, k=k)
    if stop():
        return out

    if shape.z_elementary and shape.n >= 2:
        bad = []
        for zq in zpts.elements[1:]:
            g = q.lifts[int(zq)]
            if len(gf2.commutator_space(mats[g])) < shape.n:
                bad.append(g)
        cond["f"] = verdict(FAIL, n=shape.n, element=bad[0]) if bad else verdict(PASS, n=shape.n)
    else:
        cond["f"] = verdict(PASS, vacuous=True)
    if stop():
        return out

    cond["g"] = _condition_g(S, pm, phi, nontriv)
    if stop():
        return out

    # Aut(P)-dependent conditions
    try:
        L = local_data(S, pm, node_budget=caps.aut_nodes)
    except ResourceError as exc:
        for c in "hij":
            cond[c] = verdict(UNDECIDED, reason=str(exc))
        return out
    out.local = L
    A = L.A
    fm = frattini_module(A)
    if A.is_2group():
        cond["h"] = verdict(FAIL, reason="Aut(P) is a 2-group")
    else:
        hit = [g for g, a in zip(L.coset_reps[1:], L.actions[1:]) if fm.trivial_on_factors(a)]
        cond["h"] = verdict(FAIL, element=hit[0], reason="c_g in O_2(Aut(P))") if hit else verdict(PASS, aut_order=A.order)
    if stop():
        return out

    s0m = [fm.matrix(a) for a in L.actions[1:]]
    ok, factor = gf2.criterion_i_check(fm.module, s0m, k)
    if ok:
        cond["i"] = verdict(PASS, factor_dim=factor.dim, factor_lifts=[int(v) for v in factor.lifts],
                            factor_dims=[len(hi) - len(lo) for lo, hi in zip(fm.series, fm.series[1:])])
    else:
        cond["i"] = verdict(FAIL, factor_dims=[len(hi) - len(lo) for lo, hi in zip(fm.series, fm.series[1:])])
    if stop():
        return out

    res = involutions_conjugate_in_normalizer(L, cap=caps.out_cap)
    if res is None:
        cond["j"] = verdict(UNDECIDED, reason=f"more than {caps.out_cap} conjugates of Out_S(P)")
    else:
        cond["j"] = verdict(PASS if res else FAIL, involutions=shape.involutions)
    if out.status == PASS:
        out.odd_gens = odd_residual_generators(A)
    return out


def _condition_g(S: Group, pm: np.ndarray, phi: np.ndarray, lifts: Sequence[int]) -> dict:
    """No ``g`` in ``N_S(P) - P`` with ``[g,P] <= Theta Phi(P)`` and ``[g,Theta] <= Phi(P)``
    for ``Theta`` one of ``1, Z(P), Z2(P)``.  Both conditions depend only on the
    coset ``gP``, so one element per nontrivial coset is tested."""
    thetas = {
        "1": np.eye(1, S.order, 0, dtype=bool)[0],
        "Z(P)": center(S, pm).mask,
        "Z2(P)": upper_central_2(S, pm).mask,
    }
    for name, th in thetas.items():
        tphi = closure_mask(S, np.flatnonzero(th), start=phi)
        for g in lifts:
            if _commutes_into(S, g, pm, tphi) and _commutes_into(S, g, th, phi):
                return verdict(FAIL, element=int(g), theta=name)
    return verdict(PASS)


def potentially_critical(
    S: Group,
    caps: Caps | None = None,
    prune_a: bool = True,
) -> CriticalReport:
    """Class representatives of the subgroups satisfying (a)-(j)."""
    if not S.is_2group:
        raise DomainError("S must be a 2-group")
    caps = caps or Caps()
    cands = enumerate_centric_candidates(S, prune_a=prune_a)
    zp = z_prime(S)
    passed, undecided = [], []
    rejected: dict[str, int] = {}
    for P in cands:
        c = screen_candidate(S, P, caps, zp)
        st = c.status
        if st == PASS:
            passed.append(c)
        elif st == UNDECIDED:
            undecided.append(c)
        else:
            f = c.first_failure or "?"
            rejected[f] = rejected.get(f, 0) + 1
    return CriticalReport(S.name or "", S.order, len(cands), passed, undecided, rejected)


# -- excluded families --------------------------------------------------------------------

def _generated_by(S: Group, a: int, t: int) -> bool:
    return int(closure_mask(S, [a, t]).sum()) == S.order


def excluded_family(S: Group) -> str | None:
    """Name of the family ``D_{2^n}`` (n >= 3), ``SD_{2^n}`` (n >= 4) or
    ``C_{2^n} wr C_2`` (n >= 2) containing ``S``, if any.

    Each test checks the defining relations on a generating pair, which
    with the matching order is an isomorphism test.
    """
    n = S.order
    e = n.bit_length() - 1
    if n & (n - 1) or S.is_abelian:
        return None
    orders = S.element_orders
    invols = np.flatnonzero(orders == 2)
    half = n // 2
    if e >= 3:
        for a in np.flatnonzero(orders == half):
            ainv = int(S.inv[a])
            for t in invols:
                img = int(S.conj[t, a])
                if img == ainv and _generated_by(S, int(a), int(t)):
                    return f"D{n}"
                if e >= 4 and img == S.power(int(a), half // 2 - 1) and _generated_by(S, int(a), int(t)):
                    return f"SD{n}"
            break  # any element of order n/2 generates the same cyclic subgroup up to Aut
    if e % 2 == 1 and e >= 5:
        m = 1 << ((e - 1) // 2)
        for a in np.flatnonzero(orders == m):
            for t in invols:
                b = int(S.conj[t, a])
                if S.commute[a, b] and _generated_by(S, int(a), int(t)):
                    return f"C{m}wrC2"
    return None


# -- the search filter ------------------------------------------------------------------------

@dataclass
class SearchReport:
    group: str
    order: int
    conditions: dict[str, dict]
    family_exclusion: str | None = None
    critical: CriticalReport | None = None
    rejected_input: str | None = None
    oracle: list[dict] | None = None
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def overall(self) -> dict:
        if self.rejected_input:
            return {"status": "rejected", "reason": self.rejected_input}
        for c in SEARCH_CONDITIONS:
            st = self.conditions.get(c, {}).get("status")
            if st == FAIL:
                return {"status": FAIL, "condition": c}
        for c in SEARCH_CONDITIONS:
            st = self.conditions.get(c, {}).get("status")
            if st != PASS:
                return {"status": UNDECIDED, "condition": c,
                        "reason": self.conditions.get(c, {}).get("witness", {}).get("reason", st)}
        return {"status": PASS}

    def to_json(self, timings: bool = False) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "group": self.group,
            "order": self.order,
        }
        if self.family_exclusion:
            out["family_exclusion"] = {"family": self.family_exclusion, "note": "excluded family, restored by convention"}
        out["critical"] = self.critical.to_json() if self.critical is not None else None
        out["search"] = {c: _jsonable(self.conditions.get(c, verdict(SKIPPED))) for c in SEARCH_CONDITIONS}
        out["search"]["overall"] = self.overall
        if self.oracle is not None:
            out["oracle"] = self.oracle
        if timings:
            out["timings"] = {k: round(v, 3) for k, v in self.timings.items()}
        return out


def _has_abelian_maximal(S: Group) -> Subgroup | None:
    for M in maximal_subgroups(S):
        el = M.elements
        if S.commute[np.ix_(el, el)].all():
            return M
    return None


def _is_cyclic(S: Group, X: Subgroup) -> bool:
    return bool((S.element_orders[X.elements] == X.order).any())


def _aut_maps_on_subgroup(elems: np.ndarray, gens: Sequence[np.ndarray], n: int) -> list[np.ndarray]:
    """Automorphisms of a stand-alone subgroup as arrays on the ambient ids
    (identity outside the subgroup)."""
    out = []
    for a in gens:
        m = np.arange(n, dtype=np.int64)
        m[elems] = elems[np.asarray(a)]
        out.append(m)
    return out


def q_closure(S: Group, c: CriticalClass) -> Subgroup:
    """``Q_P``: smallest subgroup of ``P`` containing ``[N_S(P), P]``, normal in
    ``P`` and invariant under ``O^2(Aut(P))`` and conjugation by ``N_S(P)``."""
    L = c.local
    P = c.rep
    N = normalizer(S, P)
    vals = np.unique(S.comm[np.ix_(N.elements, P.elements)])
    ngens = generators_of(S, N)
    maps = _aut_maps_on_subgroup(L.elems, c.odd_gens, S.order)
    maps += [S.conj[g].astype(np.int64) for g in ngens]
    return invariant_closure(S, vals, maps, normal_in=P)


def condition_f_generation(
    S: Group, classes: Sequence[CriticalClass], odd_aut_gens: Sequence[np.ndarray]
) -> tuple[bool, Subgroup]:
    """``<[O^2(Aut(S)), S], Q_P | P critical>`` and whether it equals ``S``.

    Conjugates of each representative contribute the conjugates of its ``Q_P``,
    so every ``Q_P`` enters through its normal closure.
    """
    elems = np.arange(S.order)
    vals = set()
    for a in odd_aut_gens:
        a = np.asarray(a)
        vals.update(np.unique(S.mul[a, S.inv[elems]]).tolist())
    m = closure_mask(S, sorted(vals))
    for c in classes:
        m |= normal_closure(S, q_closure(S, c)).mask
        m = closure_mask(S, np.flatnonzero(m))
    H = Subgroup(S, m)
    return H.order == S.order, H


def condition_g_common_normal(
    S: Group, classes: Sequence[CriticalClass], odd_aut_gens: Sequence[np.ndarray]
) -> tuple[bool, Subgroup]:
    """Largest ``Q`` normal in ``S``, ``O^2(Aut(S))``-invariant, inside every
    critical subgroup and invariant under each ``O^2(Aut(P))``; whether ``Q = 1``.

    Starts from the intersection of all conjugates of the representatives and
    replaces ``Q`` by ``Q`` meet ``gamma(Q)`` until stable.
    """
    m = np.ones(S.order, dtype=bool)
    for c in classes:
        for key in conjugacy_class_keys(S, c.rep):
            m &= unpack_key(S, key)
    maps = [S.conj[g].astype(np.int64) for g in S.generators]
    maps += [np.asarray(a, dtype=np.int64) for a in odd_aut_gens]
    pmaps = []
    for c in classes:
        pmaps.append((c.rep.mask, _aut_maps_on_subgroup(c.local.elems, c.odd_gens, S.order)))
    while True:
        before = int(m.sum())
        if before == 1:
            break
        for a in maps:
            img = np.zeros_like(m)
            img[a[m]] = True
            m &= img
        for pmask, ams in pmaps:
            for a in ams:
                img = np.zeros_like(m)
                img[a[m]] = True
                m &= img
        if int(m.sum()) == before:
            break
    Q = Subgroup(S, m)
    return Q.order == 1, Q


def _critical_data(c: CriticalClass) -> CriticalData:
    return CriticalData(c.rep.mask, c.local.P, c.local.elems, c.odd_gens)


def oracle_comparison(S: Group, report: CriticalReport, caps: Caps | None = None) -> list[dict]:
    """For each potentially critical class, whether the exact oracle agrees."""
    caps = caps or Caps()
    out = []
    for c in report.classes:
        v = critical_oracle(S, c.rep, caps.out_cap, caps.oracle_cap, L=c.local)
        out.append({"order": c.rep.order, "elements": c.rep.elements.tolist(), "oracle": v.status})
    return out


def search_verdict(
    S: Group,
    caps: Caps | None = None,
    short_circuit: bool = True,
    oracle_max_order: int = 64,
    critical: CriticalReport | None = None,
) -> SearchReport:
    """Evaluate the search filter (a)-(h), cheapest conditions first."""
    caps = caps or Caps()
    rep = SearchReport(S.name or "", S.order, {})
    cond = rep.conditions
    t0 = time.perf_counter()
    if not S.is_2group:
        raise DomainError("S must be a 2-group")
    def failed() -> bool:
        return short_circuit and any(v["status"] == FAIL for v in cond.values())

    M = _has_abelian_maximal(S)
    cond["a"] = verdict(FAIL, abelian_maximal=M.elements.tolist()) if M is not None else verdict(PASS)
    D = derived(S)
    cond["b"] = verdict(FAIL, derived_order=D.order) if _is_cyclic(S, D) else verdict(PASS, derived_order=D.order)
    if S.is_abelian:
        # (a) and (b) are still reported; nothing past them applies
        rep.rejected_input = "abelian input"
        return rep
    if cond["a"]["status"] == FAIL or cond["b"]["status"] == FAIL:
        rep.family_exclusion = excluded_family(S)
    rep.timings["ab"] = time.perf_counter() - t0
    if failed():
        return rep

    try:
        A = automorphism_group(S, node_budget=caps.aut_nodes)
    except ResourceError as exc:
        for c in "cdefgh":
            cond[c] = verdict(UNDECIDED, reason=f"Aut(S): {exc}")
        return rep
    rep.timings["aut"] = time.perf_counter() - t0
    aut2 = A.is_2group()
    odd = odd_residual_generators(A)

    om = omega1(S, center(S)).mask
    a_order = int(closure_mask(S, np.flatnonzero(om), start=D.mask).sum()) // D.order
    ok_c = a_order == 1 or (a_order > 2 and not aut2)
    cond["c"] = verdict(PASS if ok_c else FAIL, image_order=a_order, aut_is_2group=aut2)
    if failed():
        return rep

    if aut2:
        kd = maximal_transfer_kernels(S, "derived")
        kf = maximal_transfer_kernels(S, "frattini")
        Phi = frattini(S)
        ok_d = kd == D and kf == Phi
        cond["d"] = verdict(PASS if ok_d else FAIL, derived_kernel_index=kd.order // D.order,
                            frattini_kernel_index=kf.order // Phi.order)
    else:
        cond["d"] = verdict(PASS, vacuous=True)
    rep.timings["cd"] = time.perf_counter() - t0
    if failed():
        return rep

    crit = critical if critical is not None else potentially_critical(S, caps)
    rep.critical = crit
    rep.timings["critical"] = time.perf_counter() - t0
    if S.order <= oracle_max_order:
        rep.oracle = oracle_comparison(S, crit, caps)
    classes = crit.classes
    if crit.undecided:
        reason = f"{len(crit.undecided)} candidate classes not decided"
        for c in "efgh":
            cond[c] = verdict(UNDECIDED, reason=reason)
        return rep

    total = sum(c.class_size for c in classes)
    ok_e = total > 1 and (not aut2 or len(classes) > 1)
    cond["e"] = verdict(PASS if ok_e else FAIL, subgroups=total, classes=len(classes))
    if failed():
        return rep

    ok_f, H = condition_f_generation(S, classes, odd)
    cond["f"] = verdict(PASS if ok_f else FAIL, generated_order=H.order)
    if failed():
        return rep

    ok_g, Q = condition_g_common_normal(S, classes, odd)
    cond["g"] = verdict(PASS if ok_g else FAIL, q_order=Q.order, q=Q.elements.tolist())
    if failed():
        return rep

    data = [_critical_data(c) for c in classes]
    Kd = transfer_fixed_subgroup(S, "derived", odd, data)
    Kf = transfer_fixed_subgroup(S, "frattini", odd, data)
    Phi = frattini(S)
    ok_h = Kd == D and Kf == Phi
    cond["h"] = verdict(PASS if ok_h else FAIL, derived_k_order=Kd.order // D.order,
                        frattini_k_order=Kf.order // Phi.order)
    rep.timings["total"] = time.perf_counter() - t0
    return rep
