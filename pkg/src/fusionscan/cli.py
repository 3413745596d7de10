"""Command line interface.

    fusionscan construct NAME [PARAM ...] [-o FILE]
    fusionscan analyze FILE [--mode search|critical|oracle-compare]
    fusionscan scan DIR [--mode ...] [--jobs N] [-o FILE]
    fusionscan oracle-compare [--max-order 64]
    fusionscan fixtures [-o DIR]

Exit codes: 0 analysed (whatever the verdicts), 2 usage error, 3 unreadable
or malformed input, 4 some verdict not decided under ``--strict``,
5 the oracle comparison found a critical subgroup missing from the screen.
Set ``FUSIONSCAN_CACHE_DIR`` to keep automorphism groups between runs.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .criteria import (
    FAIL,
    PASS,
    SCHEMA_VERSION,
    UNDECIDED,
    Caps,
    potentially_critical,
    search_verdict,
)
from .embedding import critical_oracle
from .errors import FusionScanError, MalformedInputError, UsageError
from .fixtures import SMALL_CATALOGUE, all_fixture_names, fixture
from .groups import Group
from .io import construct_doc, group_from_doc, read_groups
from .subgroups import are_conjugate, enumerate_centric_candidates

log = logging.getLogger("fusionscan")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_UNDECIDED = 4
EXIT_ORACLE_MISS = 5
MODES = ("search", "critical", "oracle-compare")


# -- per-group analyses ------------------------------------------------------------

def oracle_compare_group(S: Group, caps: Caps) -> dict:
    """Oracle-critical subgroups missing from the screen (expected none), and
    screened subgroups the oracle rejects (allowed)."""
    rec = {"schema_version": SCHEMA_VERSION, "group": S.name or "", "order": S.order, "mode": "oracle-compare"}
    if S.is_abelian:
        rec.update(oracle_critical=0, potentially_critical=0, missing=[], extra=0, undecided=0)
        return rec
    report = potentially_critical(S, caps)
    screened = report.classes + report.undecided
    yes, undecided = [], 0
    for P in enumerate_centric_candidates(S, prune_a=False):
        v = critical_oracle(S, P, caps.out_cap, caps.oracle_cap)
        if v.status == "yes":
            yes.append(P)
        elif v.status == UNDECIDED:
            undecided += 1
    missing = [P for P in yes if not any(are_conjugate(S, P, c.rep) for c in screened)]
    extra = [c for c in report.classes if not any(are_conjugate(S, c.rep, P) for P in yes)]
    rec.update(
        oracle_critical=len(yes),
        potentially_critical=len(report.classes),
        missing=[P.elements.tolist() for P in missing],
        extra=len(extra),
        undecided=undecided,
    )
    return rec


def analyze_group(S: Group, mode: str, caps: Caps, timings: bool = False) -> dict:
    t0 = time.perf_counter()
    if mode == "search":
        rec = search_verdict(S, caps).to_json(timings=timings)
    elif mode == "critical":
        rec = {"schema_version": SCHEMA_VERSION, "group": S.name or "", "order": S.order}
        if S.is_abelian:
            rec["rejected"] = "abelian input"
            rec["critical"] = None
        else:
            rec["critical"] = potentially_critical(S, caps).to_json()
        if timings:
            rec["timings"] = {"total": round(time.perf_counter() - t0, 3)}
    elif mode == "oracle-compare":
        rec = oracle_compare_group(S, caps)
    else:
        raise UsageError(f"unknown mode {mode!r}")
    return rec


def record_status(rec: dict) -> str:
    """``pass``, ``fail:<condition>``, ``excluded``, ``rejected``, ``not_decided`` or ``error``."""
    if "error" in rec:
        return "error"
    if rec.get("mode") == "oracle-compare":
        return FAIL if rec["missing"] else PASS
    if rec.get("rejected"):
        return "rejected"
    if "search" in rec:
        ov = rec["search"]["overall"]
        if ov["status"] == "rejected":
            return "rejected"
        if rec.get("family_exclusion"):
            return "excluded"
        if ov["status"] == FAIL:
            return f"fail:{ov['condition']}"
        return ov["status"]
    crit = rec.get("critical") or {}
    return UNDECIDED if crit.get("undecided") else PASS


# -- scans ----------------------------------------------------------------------------

@dataclass
class ScanJob:
    inputs: list[str]
    mode: str = "search"
    caps: Caps = field(default_factory=Caps)
    out: str | None = None
    jobs: int = 1
    timings: bool = False


def _load_input(item: str) -> list[Group]:
    p = Path(item)
    if p.exists():
        return read_groups(p)
    if item in all_fixture_names():
        return [fixture(item)]
    raise MalformedInputError(f"{item}: no such file or fixture")


def _run_one(args: tuple[str, str, Caps, bool]) -> list[dict]:
    item, mode, caps, timings = args
    try:
        groups = _load_input(item)
    except FusionScanError as exc:
        return [{"input": item, "error": str(exc)}]
    out = []
    for G in groups:
        try:
            rec = analyze_group(G, mode, caps, timings)
        except FusionScanError as exc:
            rec = {"group": G.name or "", "order": G.order, "error": f"{type(exc).__name__}: {exc}"}
        rec["input"] = item
        out.append(rec)
    return out


def run_scan(job: ScanJob) -> tuple[list[dict], dict]:
    """One record per group, in input order, and the summary counts."""
    tasks = [(item, job.mode, job.caps, job.timings) for item in job.inputs]
    if job.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=job.jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]
    records = [r for rs in results for r in rs]
    return records, summarize(records)


def summarize(records: list[dict]) -> dict:
    s: dict = {"total": len(records), "pass": 0, "fail": {}, "excluded_family": 0,
               "rejected": 0, "not_decided": 0, "errors": 0}
    for rec in records:
        st = record_status(rec)
        if st == PASS:
            s["pass"] += 1
        elif st.startswith("fail"):
            c = st.split(":", 1)[1] if ":" in st else "?"
            s["fail"][c] = s["fail"].get(c, 0) + 1
        elif st == "excluded":
            s["excluded_family"] += 1
        elif st == "rejected":
            s["rejected"] += 1
        elif st == UNDECIDED:
            s["not_decided"] += 1
        else:
            s["errors"] += 1
    s["fail"] = dict(sorted(s["fail"].items()))
    return s


def scan_inputs(directory: Path) -> list[str]:
    if not directory.is_dir():
        raise MalformedInputError(f"{directory}: not a directory")
    files = [p for p in directory.iterdir() if p.is_file() and p.suffix in (".json", ".jsonl")]
    return [str(p) for p in sorted(files)]


# -- argument handling ------------------------------------------------------------

def _caps(ns: argparse.Namespace) -> Caps:
    return Caps(aut_nodes=ns.aut_cap, out_cap=ns.out_cap, oracle_cap=ns.oracle_cap)


def _parse_params(items: list[str]) -> dict:
    params: dict = {}
    for it in items:
        if "=" in it:
            k, v = it.split("=", 1)
            params[k] = json.loads(v) if v[:1] in "[{" or v.lstrip("-").isdigit() else v
        elif it.isdigit():
            params["value"] = int(it)
        else:
            raise UsageError(f"bad parameter {it!r}; use key=value or a number")
    return params


def _emit(lines: list[dict], out: str | None) -> None:
    text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in lines)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_construct(ns) -> int:
    doc = construct_doc(ns.name, _parse_params(ns.params))
    G = group_from_doc(doc)  # validates the document
    text = json.dumps(doc) + "\n"
    if ns.output:
        Path(ns.output).write_text(text)
        log.info("wrote %s (order %d)", ns.output, G.order)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _undecided(records: list[dict]) -> bool:
    return any(record_status(r) in (UNDECIDED, "error") for r in records)


def cmd_analyze(ns) -> int:
    groups = _load_input(ns.input)
    recs = [analyze_group(G, ns.mode, _caps(ns), ns.timings) for G in groups]
    _emit(recs, ns.output)
    if any(r.get("mode") == "oracle-compare" and r["missing"] for r in recs):
        return EXIT_ORACLE_MISS
    return EXIT_UNDECIDED if ns.strict and _undecided(recs) else EXIT_OK


def cmd_scan(ns) -> int:
    job = ScanJob(scan_inputs(Path(ns.directory)), ns.mode, _caps(ns), ns.output, ns.jobs, ns.timings)
    records, summary = run_scan(job)
    if ns.output:
        _emit(records, ns.output)
        sys.stdout.write(json.dumps({"summary": summary}, sort_keys=True) + "\n")
    else:
        _emit(records + [{"summary": summary}], None)
    return EXIT_UNDECIDED if ns.strict and _undecided(records) else EXIT_OK


def oracle_compare_fixtures(max_order: int, caps: Caps) -> list[dict]:
    names = [n for n in all_fixture_names() if n in SMALL_CATALOGUE or fixture(n).order <= max_order]
    out = []
    for n in names:
        G = fixture(n)
        if G.order <= max_order:
            out.append(oracle_compare_group(G, caps))
    return out


def cmd_oracle_compare(ns) -> int:
    recs = oracle_compare_fixtures(ns.max_order, _caps(ns))
    summary = {
        "groups": len(recs),
        "missing": sum(len(r["missing"]) for r in recs),
        "extra": sum(r["extra"] for r in recs),
        "undecided": sum(r["undecided"] for r in recs),
    }
    _emit(recs + [{"summary": summary}], ns.output)
    return EXIT_ORACLE_MISS if summary["missing"] else EXIT_OK


def cmd_fixtures(ns) -> int:
    names = all_fixture_names()
    if not ns.output:
        _emit([{"name": n} for n in names], None)
        return EXIT_OK
    d = Path(ns.output)
    d.mkdir(parents=True, exist_ok=True)
    for n in names:
        (d / f"{n}.json").write_text(json.dumps(construct_doc(n)) + "\n")
    log.info("wrote %d fixtures to %s", len(names), d)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fusionscan", description="Search filters for reduced fusion systems over 2-groups.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def caps(p):
        p.add_argument("--aut-cap", type=int, default=Caps.aut_nodes, help="node budget of the automorphism search")
        p.add_argument("--out-cap", type=int, default=Caps.out_cap, help="cap on conjugates of Out_S(P)")
        p.add_argument("--oracle-cap", type=int, default=Caps.oracle_cap, help="largest subgroup of Out(P) tested exactly")
        p.add_argument("--strict", action="store_true", help="exit 4 when anything is not decided")
        p.add_argument("--timings", action="store_true", help="include wall-clock timings (not reproducible)")

    p = sub.add_parser("construct", help="write a group file for a family or fixture")
    p.add_argument("name")
    p.add_argument("params", nargs="*", help="key=value pairs, or one number")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("analyze", help="analyse one group file or fixture")
    p.add_argument("input")
    p.add_argument("--mode", choices=MODES, default="search")
    p.add_argument("-o", "--output")
    caps(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("scan", help="analyse every .json/.jsonl file of a directory")
    p.add_argument("directory")
    p.add_argument("--mode", choices=MODES, default="search")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output")
    caps(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("oracle-compare", help="compare the screen with the exact oracle on small fixtures")
    p.add_argument("--max-order", type=int, default=64)
    p.add_argument("-o", "--output")
    caps(p)
    p.set_defaults(func=cmd_oracle_compare)

    p = sub.add_parser("fixtures", help="list the named fixtures, or write them all to a directory")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fixtures)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return ns.func(ns)
    except UsageError as exc:
        print(f"fusionscan: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MalformedInputError as exc:
        print(f"fusionscan: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FusionScanError as exc:
        print(f"fusionscan: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED if getattr(ns, "strict", False) else EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
