"""``abzeta`` command line.

Exit codes: 0 success, 1 mismatch, 2 usage error, 3 work limit exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from collections.abc import Sequence
from itertools import product

from . import __version__
from .catalog import (
    CatalogError,
    default_params,
    dump_catalog,
    errata_report,
    fe_prime_is_valid,
    functional_equation_check,
    get_family,
    global_coeffs,
    load_catalog,
    local_table,
    printed_global_coeffs,
)
from .config import ConfigError, RunConfig
from .formula import FormulaError
from .groupalg import FamilySpec
from .oracle import BudgetExceeded, invariance_audit, oracle_count, witness_stream
from .series import AssemblyError, partial_sum_dump, primes_upto, table_compare

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ output


def _emit(cfg: RunConfig, doc: dict, rows: list[dict], text: str) -> None:
    if cfg.format == "json":
        out = json.dumps(doc, indent=1, default=str) + "\n"
    elif cfg.format == "csv":
        buf = io.StringIO()
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        out = buf.getvalue()
    else:
        out = text if text.endswith("\n") or not text else text + "\n"
    if cfg.output in ("-", ""):
        sys.stdout.write(out)
    else:
        with open(cfg.output, "w") as fh:
            fh.write(out)


def _table(rows: list[dict]) -> str:
    if not rows:
        return "(no rows)\n"
    cols = list(rows[0])
    width = {c: max(len(c), *(len(str(r[c])) for r in rows)) for c in cols}
    lines = ["  ".join(c.ljust(width[c]) for c in cols)]
    lines += ["  ".join(str(r[c]).ljust(width[c]) for c in cols) for r in rows]
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- helpers


def _parse_params(items: Sequence[str] | None) -> dict[str, int]:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"parameters look like name=value, got {item!r}")
        try:
            out[key.strip()] = int(val)
        except ValueError:
            raise UsageError(f"parameter {key} needs an integer, got {val!r}") from None
    return out


def _families(names: Sequence[str] | None) -> list[FamilySpec]:
    cat = load_catalog()
    if not names:
        return list(cat.values())
    try:
        return [get_family(n) for n in names]
    except CatalogError as exc:
        raise UsageError(str(exc)) from None


def _grid(fam: FamilySpec, cfg: RunConfig, fixed: dict[str, int]) -> list[dict[str, int]]:
    if fixed:
        try:
            return [fam.check_params(fixed)]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    names = list(fam.params)
    choices = [getattr(cfg, n, None) or fam.params[n] for n in names]
    out = []
    for vals in product(*choices):
        params = dict(zip(names, vals))
        try:
            out.append(fam.check_params(params))
        except ValueError:
            continue  # e.g. r divisible by 3
    return out


def _single_params(fam: FamilySpec, items) -> dict[str, int]:
    """Parameters given on the command line, else the first grid point."""
    fixed = _parse_params(items) or default_params(fam)
    try:
        return fam.check_params(fixed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _fe_rule(fam: FamilySpec) -> str:
    fe = fam.funceq or {}
    chi = fe.get("character", "none")
    chi = "" if chi == "none" else f"{chi}(p)*"
    return f"{'-' if fe.get('sign', -1) < 0 else ''}{chi}u^{fe.get('c')}X^{fe.get('x_exp', 3)}"


def _fmt_params(params: dict[str, int]) -> str:
    return ",".join(f"{k}={v}" for k, v in params.items()) or "-"


# ---------------------------------------------------------------- commands


def cmd_list(args, cfg: RunConfig) -> int:
    rows = []
    for fam in load_catalog().values():
        if args.filter and args.filter.lower() not in f"{fam.name} {fam.title}".lower():
            continue
        sw = ", ".join(f"{k}={v}" for k, v in fam.switches.items())
        rows.append(
            {
                "name": fam.name,
                "title": fam.title,
                "holonomy": fam.holonomy,
                "k": fam.k,
                "switches": sw or "-",
                "abscissa": fam.abscissa,
                "funceq": _fe_rule(fam),
            }
        )
    _emit(cfg, {"families": rows}, rows, _table(rows))
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    fixed = _parse_params(args.param)
    primes = args.primes or cfg.primes
    modes = ["full", "fast"] if args.mode == "both" else [args.mode]
    rows, mismatch = [], False
    for fam in _families(args.family):
        for params in _grid(fam, cfg, fixed):
            for p in primes:
                for mode in modes:
                    m = args.m if args.m is not None else cfg.budget(p)
                    if mode == "fast" and args.m is None:
                        m = max(m, cfg.fast_budgets.get(p, m))
                    row = {"family": fam.name, "params": _fmt_params(params), "p": p,
                           "m": m, "mode": mode}
                    start = time.perf_counter()
                    try:
                        got = oracle_count(fam, params, p, m, mode, work_limit=cfg.work_limit,
                                           jobs=cfg.jobs)
                        want = local_table(fam, params, p, m)
                        rep = table_compare(got, want)
                        row["result"] = "equal" if rep else "MISMATCH"
                        row["detail"] = str(rep)
                        mismatch |= not rep
                    except BudgetExceeded as exc:
                        row["result"] = "skipped"
                        row["detail"] = f"work limit reached after p^{exc.reached}"
                    row["ms"] = round((time.perf_counter() - start) * 1000)
                    rows.append(row)
    summary = f"{sum(r['result'] == 'equal' for r in rows)} equal, " \
              f"{sum(r['result'] == 'MISMATCH' for r in rows)} mismatched, " \
              f"{sum(r['result'] == 'skipped' for r in rows)} skipped"
    _emit(cfg, {"cells": rows, "summary": summary}, rows, _table(rows) + summary)
    return EXIT_MISMATCH if mismatch else EXIT_OK


def cmd_funceq(args, cfg: RunConfig) -> int:
    fixed = _parse_params(args.param)
    rows, failed = [], False
    for fam in _families(args.family):
        for params in _grid(fam, cfg, fixed):
            good = [p for p in primes_upto(args.p_max) if fe_prime_is_valid(fam, params, p)]
            bad = [p for p in good if not functional_equation_check(fam, params, p)]
            failed |= bool(bad)
            rows.append(
                {
                    "family": fam.name,
                    "params": _fmt_params(params),
                    "rule": _fe_rule(fam),
                    "checked": len(good),
                    "failed_primes": " ".join(map(str, bad)) or "-",
                }
            )
    _emit(cfg, {"checks": rows}, rows, _table(rows))
    return EXIT_MISMATCH if failed else EXIT_OK


def cmd_coeffs(args, cfg: RunConfig) -> int:
    fam = _families([args.family])[0]
    params = _single_params(fam, args.param)
    if (args.N is None) == (args.p is None):
        raise UsageError("give either --N for global coefficients or --p and --m for a local table")
    if args.N is not None:
        if args.source == "printed":
            g = printed_global_coeffs(fam, params, args.N)
        elif args.source == "closed-form":
            g = global_coeffs(fam, params, args.N)
        else:
            raise UsageError("global coefficients come from 'closed-form' or 'printed'")
        if args.partial_sums:
            text = partial_sum_dump(g)
            rows = [{"N": n, "sum": s} for n, s in enumerate(g.partial_sums(), 1)]
        else:
            text = " ".join(map(str, g.a))
            rows = [{"n": n, "a_n": x} for n, x in enumerate(g.a, 1)]
        doc = {"family": fam.name, "params": params, "provenance": args.source, **g.to_dict()}
        _emit(cfg, doc, rows, text)
        return EXIT_OK
    if args.m is None:
        raise UsageError("--p needs --m")
    if args.source == "closed-form":
        tab = local_table(fam, params, args.p, args.m)
    elif args.source.startswith("oracle-"):
        tab = oracle_count(fam, params, args.p, args.m, args.source.removeprefix("oracle-"),
                           work_limit=cfg.work_limit, jobs=cfg.jobs)
    else:
        raise UsageError("local tables come from closed-form, oracle-full, oracle-fast or oracle-measure")
    rows = [{"n": n, "a_p^n": c} for n, c in enumerate(tab.counts)]
    _emit(cfg, tab.to_dict(), rows, " ".join(map(str, tab.counts)))
    return EXIT_OK


def cmd_dump_catalog(args, cfg: RunConfig) -> int:
    if args.errata:
        rows = errata_report()
        text = "".join(
            f"{r['family']}: {r.get('display', '')}: {r.get('reason', '')}\n" for r in rows
        )
        _emit(cfg, {"errata": rows}, rows, text)
    else:
        doc = dump_catalog()
        rows = [{"name": f["name"], "title": f["title"], "holonomy": f["holonomy"], "k": f["k"]}
                for f in doc["families"]]
        _emit(cfg, doc, rows, json.dumps(doc, indent=1, ensure_ascii=False))
    return EXIT_OK


def cmd_audit(args, cfg: RunConfig) -> int:
    fam = _families([args.family])[0]
    params = _single_params(fam, args.param)
    if args.witnesses is not None:
        rows = []
        for w in witness_stream(fam, params, args.p, args.witnesses, work_limit=cfg.work_limit):
            cols = ["a", "b", "c", "t12", "t13", "t23"] + [
                f"v{j + 1}{i}" for j in range(fam.t) for i in (1, 2, 3)
            ]
            rows.append(dict(zip(cols, w.as_row())))
        _emit(cfg, {"family": fam.name, "params": params, "p": args.p, "witnesses": rows},
              rows, _table(rows))
        return EXIT_OK
    rep = invariance_audit(fam, params, args.p, args.trials, seed=args.seed, broken=args.broken)
    doc = {"family": rep.family, "p": rep.p, "trials": rep.trials, "checked": rep.checked,
           "violations": rep.violations}
    text = f"{rep.family} p={rep.p}: {rep.checked} re-representations, " \
           f"{len(rep.violations)} violations\n" + "".join(v + "\n" for v in rep.violations[:20])
    _emit(cfg, doc, [{k: v for k, v in doc.items() if k != "violations"}], text)
    if args.broken:
        return EXIT_OK
    return EXIT_MISMATCH if rep.violations else EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--format", choices=("text", "json", "csv"))
    common.add_argument("--output", "-o", help="output path (default stdout)")
    common.add_argument("--jobs", type=int, help="worker processes for oracle cells")
    common.add_argument("--work-limit", type=int, dest="work_limit")

    ap = argparse.ArgumentParser(prog="abzeta", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list", parents=[common], help="list families")
    p.add_argument("filter", nargs="?", help="substring of the family name or title")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("verify", parents=[common], help="oracle against closed forms")
    p.add_argument("--family", "-f", action="append")
    p.add_argument("--param", action="append", help="name=value, fixes a parameter")
    p.add_argument("--primes", type=lambda s: [int(x) for x in s.split(",")])
    p.add_argument("--m", type=int, help="exponent for every prime")
    p.add_argument("--mode", choices=("full", "fast", "both", "measure"), default="both")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("funceq", parents=[common], help="check functional equations")
    p.add_argument("--family", "-f", action="append")
    p.add_argument("--param", action="append")
    p.add_argument("--p-max", type=int, default=50, dest="p_max")
    p.set_defaults(func=cmd_funceq)

    p = sub.add_parser("coeffs", parents=[common], help="local or global coefficient tables")
    p.add_argument("family")
    p.add_argument("--param", action="append")
    p.add_argument("--N", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--source", default="closed-form",
                   choices=("closed-form", "printed", "oracle-full", "oracle-fast",
                            "oracle-measure"))
    p.add_argument("--partial-sums", action="store_true", dest="partial_sums")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("dump-catalog", parents=[common], help="print the catalog")
    p.add_argument("--errata", action="store_true", help="only the errata report")
    p.set_defaults(func=cmd_dump_catalog)

    p = sub.add_parser("audit", parents=[common], help="representative invariance audit")
    p.add_argument("family")
    p.add_argument("--param", action="append")
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--broken", action="store_true", help="negative control")
    p.add_argument("--witnesses", type=int, metavar="M",
                   help="dump every witness up to index p^M instead")
    p.set_defaults(func=cmd_audit)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
        cfg.update({k: getattr(args, k) for k in ("format", "output", "jobs", "work_limit")})
        cfg.validate()
        return args.func(args, cfg)
    except (UsageError, ConfigError, CatalogError, FormulaError, ValueError) as exc:
        print(f"abzeta: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"abzeta: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except AssemblyError as exc:
        print(f"abzeta: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
