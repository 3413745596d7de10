"""Group files: JSON documents with a ``format`` field.

Formats
-------
``perm``       ``{"degree": n, "generators": [[images 1..n], ...]}``; a generator may
               also be a cycle string such as ``"(1,2)(3,4)"``.
``cayley``     ``{"table": [[...], ...]}``, entries ``0..n-1``, any identity row.
``extension``  ``{"base": <group doc>, "relative_orders": [...], "action": [[...]],
               "power_tails": [[a, [e...]], ...], "conjugate_tails": [[l, j, a, [e...]], ...]}``
               with base elements as 0-based ids of the base group.
``named``      ``{"family": ..., "params": {...}}`` or ``{"fixture": name}``.

A file may hold one document, or one document per line (JSON lines).
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .errors import FusionScanError, MalformedInputError
from .extension import ExtensionSpec, build_extension
from .fixtures import fixture, on_hs_spec, perm_from_cycles
from .groups import Group, from_cayley_table, from_permutation_generators
from .named import construct_named

# the parameter a bare number stands for, per family
BARE_PARAMETER = {"cyclic": "n", "elementary_abelian": "rank", "symmetric": "n", "alternating": "n"}
FORMATS = ("perm", "cayley", "extension", "named")
_CYCLE = re.compile(r"\(([^()]*)\)")


def _parse_cycles(degree: int, text: str) -> list[int]:
    text = text.strip()
    if text in ("", "()"):
        return list(range(1, degree + 1))
    if _CYCLE.sub("", text).strip():
        raise MalformedInputError(f"bad cycle notation {text!r}")
    cycles = []
    for body in _CYCLE.findall(text):
        pts = [int(x) for x in body.replace(" ", "").split(",") if x]
        cycles.append(pts)
    for c in cycles:
        if any(not 1 <= p <= degree for p in c):
            raise MalformedInputError(f"cycle point out of range 1..{degree}: {text!r}")
    return perm_from_cycles(degree, cycles)


def group_from_doc(doc: dict, name: str | None = None) -> Group:
    if not isinstance(doc, dict):
        raise MalformedInputError("group document must be a JSON object")
    fmt = doc.get("format")
    name = doc.get("name", name)
    if fmt == "perm":
        try:
            degree = int(doc["degree"])
            gens = [
                _parse_cycles(degree, g) if isinstance(g, str) else [int(x) for x in g]
                for g in doc["generators"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInputError(f"perm document: {exc}") from exc
        G = from_permutation_generators(degree, gens, name=name)
    elif fmt == "cayley":
        if "table" not in doc:
            raise MalformedInputError("cayley document needs a 'table'")
        G = from_cayley_table(doc["table"], name=name)
    elif fmt == "extension":
        G = build_extension(spec_from_doc(doc), name=name)
    elif fmt == "named":
        if "fixture" in doc:
            G = fixture(doc["fixture"])
        elif "family" in doc:
            G = construct_named(doc["family"], doc.get("params"))
        else:
            raise MalformedInputError("named document needs 'family' or 'fixture'")
        if name:
            G.name = name
    else:
        raise MalformedInputError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")
    return G


def spec_from_doc(doc: dict) -> ExtensionSpec:
    try:
        base = group_from_doc(doc["base"])
        orders = [int(m) for m in doc["relative_orders"]]
        action = [np.asarray(a, dtype=np.int64) for a in doc["action"]]
        tails = [(int(a), tuple(int(e) for e in es)) for a, es in doc["power_tails"]]
        conj = {(int(l), int(j)): (int(a), tuple(int(e) for e in es)) for l, j, a, es in doc.get("conjugate_tails", [])}
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInputError(f"extension document: {exc}") from exc
    return ExtensionSpec(base, orders, action, tails, conj, doc.get("names"))


def spec_to_doc(spec: ExtensionSpec, name: str | None = None) -> dict:
    doc = {
        "format": "extension",
        "base": cayley_doc(spec.base),
        "relative_orders": list(spec.relative_orders),
        "action": [np.asarray(a).tolist() for a in spec.action],
        "power_tails": [[int(a), list(es)] for a, es in spec.power_tails],
        "conjugate_tails": [[l, j, int(a), list(es)] for (l, j), (a, es) in sorted(spec.conjugate_tails.items())],
    }
    if spec.names:
        doc["names"] = list(spec.names)
    if name:
        doc["name"] = name
    return doc


def cayley_doc(G: Group) -> dict:
    doc = {"format": "cayley", "table": G.mul.astype(np.int64).tolist()}
    if G.name:
        doc["name"] = G.name
    return doc


def group_to_doc(G: Group) -> dict:
    """Most compact faithful document: permutations when known, else the table."""
    prov = G.provenance or {}
    if prov.get("type") == "permutation":
        return {"format": "perm", "name": G.name, "degree": prov["degree"], "generators": prov["generators"]}
    return cayley_doc(G)


def read_groups(path: str | Path) -> list[Group]:
    """All groups in a file; errors carry the file name and line number."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MalformedInputError(f"{path}: cannot read: {exc.strerror}") from exc
    stem = path.stem
    try:
        docs = [(1, json.loads(text))]
    except json.JSONDecodeError as whole:
        docs = []
        for i, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                docs.append((i, json.loads(line)))
            except json.JSONDecodeError as exc:
                # a failure on the first document means the file is not JSON lines either
                lineno, msg = (whole.lineno, whole.msg) if not docs else (i, exc.msg)
                raise MalformedInputError(f"{path}:{lineno}: invalid JSON: {msg}") from exc
    if not docs:
        raise MalformedInputError(f"{path}:1: no group document")
    out = []
    for i, doc in docs:
        try:
            G = group_from_doc(doc, name=stem if len(docs) == 1 else f"{stem}:{i}")
        except FusionScanError as exc:
            raise MalformedInputError(f"{path}:{i}: {exc}") from exc
        if not G.name:
            G.name = stem
        out.append(G)
    return out


def write_group(G: Group, path: str | Path, doc: dict | None = None) -> None:
    Path(path).write_text(json.dumps(doc or group_to_doc(G)) + "\n")


def construct_doc(name: str, params: dict | None = None) -> dict:
    """Document for a family or named fixture, as written by ``construct``."""
    p = dict(params or {})
    if name in ("on-sylow", "hs-sylow"):
        return spec_to_doc(on_hs_spec(name.split("-")[0]), name=name)
    from .fixtures import all_fixture_names

    if name in all_fixture_names():
        G = fixture(name)
        doc = group_to_doc(G)
        doc["name"] = name
        return doc
    if "value" in p:
        v = p.pop("value")
        p[BARE_PARAMETER.get(name, "order")] = v
    G = construct_named(name, p)
    return {"format": "named", "name": G.name or name, "family": name, "params": p}
