"""Command-line front end.

    vishik PROBLEM.json --task classify|normal-form|half-map|verify
    vishik --selftest [--seed S] [--cases C]

JSON reports go to stdout (or ``--out``), a short text summary to stderr.
Exit codes: 0 success, 1 input error, 2 mathematical precondition failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .contact import contact_order
from .errors import InputError, VishikError
from .halfmap import pullback_half_map
from .normal_form import verify, vishik_normal_form
from .problem import ProblemSpec, load_problem, parse_problem
from .randomized import SUITE_SHAPES, conjugation_case
from .series import EXACT, FLOAT

log = logging.getLogger("vishik")

TASKS = ("classify", "normal-form", "half-map", "verify")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="vishik",
        description="Normal forms of vector fields at simple contacts with a hypersurface.",
    )
    p.add_argument("problem", nargs="?", help="problem JSON file ('-' reads stdin)")
    p.add_argument("--task", choices=TASKS, default="classify")
    p.add_argument("--order", type=int, default=None, help="jet order N (default: file value or 6)")
    p.add_argument("--mode", choices=(EXACT, FLOAT), default=None, help="scalar mode (default: file value or exact)")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--seed", type=int, default=0, help="seed of the randomized self-test (default 0)")
    p.add_argument("--kmax", type=int, default=None, help="largest contact order examined (default m-1)")
    p.add_argument("--selftest", action="store_true", help="run the randomized conjugation suite")
    p.add_argument("--cases", type=int, default=20, help="self-test cases per (k, m) shape (default 20)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for the self-test (default 1)")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _read(args) -> ProblemSpec:
    if args.problem is None:
        raise InputError("a problem file is required (or use --selftest)")
    if args.problem == "-":
        return parse_problem(sys.stdin.read(), args.order, args.mode)
    return load_problem(args.problem, args.order, args.mode)


def run_task(task: str, spec: ProblemSpec, k_max: int | None = None) -> tuple[dict, str]:
    """Run one task; returns ``(json_report, text_summary)``."""
    X, h = spec.X, spec.h
    if task == "classify":
        rep = contact_order(X, h, k_max)
        kind = {0: "transversal", 1: "fold", 2: "cusp"}.get(rep.k, f"{rep.k}-contact")
        simple = "simple" if rep.simple else "not simple"
        return rep.to_json(), f"contact order k = {rep.k} ({kind}), {simple}, gradient rank {rep.rank}"
    nf = vishik_normal_form(X, h, k_max=k_max)
    if task == "normal-form":
        res = nf.residual_max_by_degree()
        worst = max(res["field"] + res["surface"], default=0)
        return nf.to_json(), f"normal form: k = {nf.k}, m = {nf.m}, N = {nf.order}, max residual {worst}"
    if task == "half-map":
        hm = pullback_half_map(nf, h)
        return hm.to_json(), f"half map: Q o Q - id max {hm.involution_residual_max}"
    rep = verify(nf, X, h)
    out = {"k": nf.k, "m": nf.m, "order": nf.order, "residuals": rep.to_json()}
    return out, f"verify: {'ok' if rep.ok else 'FAILED'} (max residual {rep.max()})"


def _selftest_case(job):
    k, m, seed, index, mode = job
    case = conjugation_case(k, m, seed, index, 6, mode)
    try:
        nf = vishik_normal_form(case.X, case.h)
        rep = verify(nf, case.X, case.h)
        ok = rep.ok and (nf.is_exact_conjugation() if mode == EXACT else True)
        return {"k": k, "m": m, "index": index, "pass": bool(ok), "max_residual": str(rep.max())}
    except VishikError as exc:
        return {"k": k, "m": m, "index": index, "pass": False, "error": str(exc)}


def selftest(seed: int = 0, cases: int = 20, mode: str = EXACT, jobs: int = 1) -> dict:
    """Randomized conjugation suite: every ``(k, m)`` shape, ``cases`` each."""
    work = [(k, m, seed, i, mode) for k, m in SUITE_SHAPES for i in range(cases)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_selftest_case, work))  # map keeps case order
    else:
        results = [_selftest_case(w) for w in work]
    passed = sum(r["pass"] for r in results)
    return {"seed": seed, "mode": mode, "passed": passed, "failed": len(results) - passed, "cases": results}


def _emit(obj, args):
    text = json.dumps(obj, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.selftest:
            t0 = time.perf_counter()
            rep = selftest(args.seed, args.cases, args.mode or EXACT, max(1, args.jobs))
            _emit(rep, args)
            print(f"self-test: {rep['passed']} passed, {rep['failed']} failed "
                  f"({time.perf_counter() - t0:.1f} s)", file=sys.stderr)
            return 0 if rep["failed"] == 0 else 2
        spec = _read(args)
        out, summary = run_task(args.task, spec, args.kmax)
        _emit(out, args)
        print(summary, file=sys.stderr)
        if args.task == "verify" and not out["residuals"]["ok"]:
            return 2
        return 0
    except VishikError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
