"""Persistent JSON-lines cache of automorphism group generators.

Records are keyed by an isomorphism-invariant fingerprint together with the
hash of the exact multiplication table, so a hit always refers to the same
labelled group.  Every loaded record is re-verified before use.  The cache
directory comes from ``FUSIONSCAN_CACHE_DIR``; without it nothing is written.
"""

from __future__ import annotations

import fcntl
import json
import os
from pathlib import Path

import numpy as np

from .groups import Group

SCHEMA = 1
ENV_VAR = "FUSIONSCAN_CACHE_DIR"
_index: dict[str, dict] = {}
_loaded_from: tuple[str, float, int] | None = None


def cache_path() -> Path | None:
    d = os.environ.get(ENV_VAR)
    if not d:
        return None
    return Path(d) / "aut-cache.jsonl"


def group_fingerprint(G: Group) -> str:
    """Multiset of (element order, class size) pairs plus derived series orders."""
    from .subgroups import derived

    orders = G.element_orders
    classes = [len(np.unique(G.conj[:, x])) for x in range(G.order)]
    pairs = sorted(zip(orders.tolist(), classes))
    series = []
    H = np.ones(G.order, dtype=bool)
    while True:
        D = derived(G, H).mask
        series.append(int(D.sum()))
        if D.sum() == H.sum():
            break
        H = D
    return json.dumps([G.order, pairs, series], separators=(",", ":"))


def record_key(G: Group) -> str:
    import hashlib

    fp = hashlib.sha256(group_fingerprint(G).encode()).hexdigest()[:16]
    return f"{fp}:{G.table_hash}"


def _refresh() -> None:
    global _loaded_from
    p = cache_path()
    if p is None or not p.exists():
        return
    st = p.stat()
    sig = (str(p), st.st_mtime, st.st_size)
    if _loaded_from == sig:
        return
    _index.clear()
    with open(p, encoding="utf-8") as fh:
        for line in fh:
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                continue
            if rec.get("schema") == SCHEMA and "key" in rec:
                _index[rec["key"]] = rec
    _loaded_from = sig


def load(G: Group):
    """Verified AutGroup for ``G`` from the cache, or None."""
    from .automorphisms import AutGroup, is_automorphism
    from .permgroups import PermGroup
    from .subgroups import closure_mask

    if cache_path() is None:
        return None
    _refresh()
    rec = _index.get(record_key(G))
    if rec is None:
        return None
    gens = [np.asarray(g, dtype=np.int64) for g in rec["gens"]]
    seq = [int(x) for x in rec["seq"]]
    if not all(is_automorphism(G, g) for g in gens):
        return None
    if not closure_mask(G, seq).all():
        return None
    order = int(rec["order"])
    if gens and PermGroup(G.order, gens, base=seq, known_order=order).order() != order:
        return None
    return AutGroup(G, seq, gens, order)


def store(G: Group, A) -> None:
    p = cache_path()
    if p is None:
        return
    p.parent.mkdir(parents=True, exist_ok=True)
    rec = {
        "schema": SCHEMA,
        "key": record_key(G),
        "name": G.name,
        "order": A.order,
        "seq": A.seq,
        "gens": [g.tolist() for g in A.gens],
    }
    line = json.dumps(rec, separators=(",", ":")) + "\n"
    with open(p, "a", encoding="utf-8") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        fh.write(line)
        fh.flush()
        fcntl.flock(fh, fcntl.LOCK_UN)
