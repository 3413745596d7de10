"""Property checks of the transfer shared by the unit and acceptance tests."""

from __future__ import annotations

import numpy as np

from fusionscan.automorphisms import automorphism_group
from fusionscan.subgroups import derived, frattini, maximal_subgroups, whole
from fusionscan.transfer import transfer_map


def _codes(f: np.ndarray, vals: np.ndarray) -> np.ndarray:
    strides = np.cumprod(np.concatenate([[1], f[:-1]])).astype(np.int64)
    return np.asarray(vals, dtype=np.int64).reshape(len(vals), -1) @ strides if len(f) else np.zeros(len(vals), np.int64)


def _lift(t, vals: np.ndarray) -> np.ndarray:
    """Ids in ``G`` of elements of ``H`` with the given target coordinates."""
    q = t.target
    f = np.asarray(q.invariant_factors, dtype=np.int64)
    table = getattr(q, "_lift_table", None)
    if table is None:
        codes = _codes(f, q.coords)
        table = np.full(int(np.prod(f)) if len(f) else 1, -1, dtype=np.int64)
        # least element id of every coset
        table[codes[::-1]] = np.arange(len(codes))[::-1]
        q._lift_table = table
    return t.H_elems[table[_codes(f, vals)]]


def _kernel_in_g(G, H_mask, mode):
    return (derived(G, within=H_mask) if mode == "derived" else frattini(G, within=H_mask)).mask


def _same_class(G, x, y, kern):
    return kern[G.mul[x, G.inv[y]]]


def homomorphism_violations(t) -> int:
    """Pairs ``(g, y)`` with ``g`` a generator and ``trf(gy) != trf(g) + trf(y)``.

    Additivity against every generator gives additivity for every pair by
    induction on word length, so this is the full homomorphism check.
    """
    G = t.G
    f = np.asarray(t.target.invariant_factors, dtype=np.int64)
    if not len(f):
        return 0
    gens = np.asarray(G.generators, dtype=np.int64)
    lhs = t.images[G.mul[gens]]
    rhs = np.mod(t.images[gens][:, None, :] + t.images[None, :, :], f)
    bad = int((lhs != rhs).any(axis=2).sum())
    return bad + int(t.images[0].any())


def transversal_violations(t, rng, mode) -> int:
    G, hm = t.G, t.H_mask
    hel = np.flatnonzero(hm)
    owner = np.full(G.order, -1)
    reps = []
    for x in range(G.order):
        if owner[x] < 0:
            coset = G.mul[x, hel]
            owner[coset] = len(reps)
            reps.append(int(rng.choice(coset)))
    u = transfer_map(G, hm, mode, transversal=reps)
    return int((u.images != t.images).any(axis=1).sum())


def naturality_violations(t, auts, mode) -> int:
    G, hm = t.G, t.H_mask
    kern = _kernel_in_g(G, hm, mode)
    base = _lift(t, t.images)
    bad = 0
    for a in auts:
        if not hm[a[hm]].all():
            continue
        moved = _lift(t, t.images[a])  # trf(a(g))
        bad += int((~_same_class(G, moved, a[base], kern)).sum())
    return bad


def transitivity_violations(G, H_mask, K_mask, mode, maps: dict | None = None) -> int:
    maps = {} if maps is None else maps

    def from_g(m):
        key = (mode, m.tobytes())
        if key not in maps:
            maps[key] = transfer_map(G, m, mode)
        return maps[key]

    t1 = from_g(H_mask)
    Hg, helems = t1.H, t1.H_elems
    pos = np.full(G.order, -1, dtype=np.int64)
    pos[helems] = np.arange(len(helems))
    t2 = transfer_map(Hg, K_mask[helems], mode)
    t3 = from_g(K_mask)
    via = helems[_lift(t2, t2.images[pos[_lift(t1, t1.images)]])]
    direct = _lift(t3, t3.images)
    kern = _kernel_in_g(G, K_mask, mode)
    return int((~_same_class(G, via, direct, kern)).sum())


def subgroups_of_small_index(G, max_index: int):
    """Every subgroup of index at most ``max_index`` in a 2-group: each one ends a
    chain of maximal subgroups starting at ``G``."""
    found = {whole(G).key: whole(G)}
    layer = [whole(G)]
    index = 1
    while layer and 2 * index <= max_index:
        nxt = []
        for H in layer:
            for M in maximal_subgroups(G, H):
                if M.key not in found:
                    found[M.key] = M
                    nxt.append(M)
        layer = nxt
        index *= 2
    return list(found.values())


def check_group(G, max_index: int = 8, modes=("derived", "frattini"), seed: int = 0, aut_sample: int = 6) -> dict:
    """Run every property over all subgroups of index at most ``max_index``."""
    rng = np.random.default_rng(seed)
    A = automorphism_group(G)
    auts = list(A.gens)
    for _ in range(aut_sample):
        auts.append(np.asarray(A.perm.random_element(rng), dtype=np.int64))
    subs = subgroups_of_small_index(G, max_index)
    out = {"pairs": 0, "chains": 0, "homomorphism": 0, "transversal": 0, "naturality": 0, "transitivity": 0}
    for mode in modes:
        maps: dict = {}
        for H in subs:
            t = transfer_map(G, H.mask, mode)
            maps[(mode, H.mask.tobytes())] = t
            out["pairs"] += 1
            out["homomorphism"] += homomorphism_violations(t)
            out["transversal"] += transversal_violations(t, rng, mode)
            out["naturality"] += naturality_violations(t, auts, mode)
        for H in subs:
            for K in subs:
                if K.order < H.order and (K.mask & ~H.mask).sum() == 0:
                    out["chains"] += 1
                    out["transitivity"] += transitivity_violations(G, H.mask, K.mask, mode, maps)
    return out
