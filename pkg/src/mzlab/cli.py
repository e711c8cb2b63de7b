"""Command-line front end: ``mzlab <command> [options]``.

Reports are canonical JSON (sorted keys, ``"inf"`` for infinity) carrying
``schema_version``.  Anything that varies between runs (timestamps, timing,
cache hits) goes to a ``<report>.meta.json`` sidecar so that identical
configurations give byte-identical reports.

Exit codes: 0 success, 1 a verification check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .classify import linear_k, multilinear_k
from .estimate import estimate_kn
from .multiop import MultilinearOperator
from .normsolver import EnumerationTooLarge, NoExactMode, operator_norm
from .schemas import SchemaError, validate
from .stablelaw import MomentDivergence, QuadratureError, StableLaw, stable_moment
from .tensorspace import ExponentError, as_exponent
from .verify import SUITES, run_suite
from .witnesses import convolution_operator, divergence_probe, ksz_witness, littlewood_probe, littlewood_witness

SCHEMA_VERSION = 1
CACHE_ENV = "MZLAB_CACHE_DIR"
CSV_COLUMNS = ("n", "lower_bound", "norm_upper", "lhs", "rhs_product", "seed")
USAGE_ERRORS = (ExponentError, SchemaError, NoExactMode, EnumerationTooLarge, MomentDivergence, ValueError)


class UsageError(Exception):
    pass


def jsonable(obj: Any) -> Any:
    """Plain JSON types with infinities as "inf"; NaN is rejected."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            raise ValueError("NaN in report")
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def canonical_json(obj: Any) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def config_key(command: str, config: dict) -> str:
    payload = {"command": command, "config": config, "schema_version": SCHEMA_VERSION, "version": __version__}
    text = json.dumps(jsonable(payload), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sidecar_path(report_path: Path) -> Path:
    stem = report_path.name[: -len(".json")] if report_path.name.endswith(".json") else report_path.name
    return report_path.with_name(stem + ".meta.json")


def cache_dir(args) -> Path | None:
    if getattr(args, "no_cache", False):
        return None
    d = args.cache_dir or os.environ.get(CACHE_ENV)
    return Path(d) if d else None


def parse_exponents(text: str, allow_low: bool = False) -> list[float]:
    try:
        return [as_exponent(t, allow_low=allow_low) for t in text.split(",") if t.strip()]
    except (ExponentError, ValueError) as exc:
        raise ExponentError(f"invalid exponent list {text!r}: {exc}") from exc


def load_json(path: str, schema: str) -> Any:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc
    validate(data, schema)
    return data


def csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(float(v)) if isinstance(v, float) else v for k, v in jsonable(row).items()})
    return buf.getvalue()


# --- commands: each returns (config, compute) where compute() -> (result, rows, ok)


def _classify(args):
    qs = parse_exponents(args.q)
    p, r = as_exponent(args.p), as_exponent(args.r)
    config = {"q": qs, "p": p, "r": r, "seed": args.seed}  # unused, recorded so every report names its seed

    def compute():
        c = linear_k(qs[0], p, r) if len(qs) == 1 else multilinear_k(qs, p, r)
        return c.to_dict(), None, True

    return config, compute


def _moment(args):
    r, s = float(args.r), float(args.s)
    config = {"r": r, "s": s, "method": args.method, "tol": args.tol, "seed": args.seed, "samples": args.samples}

    def compute():
        mv = stable_moment(StableLaw(r), s, method=args.method, tol=args.tol, seed=args.seed, samples=args.samples)
        res = {"value": mv.value, "error_estimate": mv.error_estimate, "method": mv.method}
        if mv.std_error is not None:
            res["std_error"] = mv.std_error
        return res, None, True

    return config, compute


def _load_operator(path: str) -> tuple[MultilinearOperator, dict]:
    data = json.loads(Path(path).read_text(encoding="utf-8")) if Path(path).exists() else None
    if data is None:
        raise UsageError(f"cannot read {path}")
    if isinstance(data, dict) and data.get("command") == "witness":
        data = data.get("result", {})  # report written by `mzlab witness --out`
    if isinstance(data, dict) and "operator" in data:
        validate(data, "witness_bundle")
        data = data["operator"]
    else:
        validate(data, "operator")
    return MultilinearOperator.from_dict(data), data


def _norm(args):
    T, op_doc = _load_operator(args.operator)
    qs = parse_exponents(args.q)
    p = as_exponent(args.p)
    if len(qs) != T.arity:
        raise UsageError(f"--q lists {len(qs)} exponents, the operator has arity {T.arity}")
    config = {"operator": op_doc, "q": qs, "p": p, "mode": args.mode, "budget": args.budget, "seed": args.seed}

    def compute():
        b = operator_norm(T, qs, p, mode=args.mode, budget=args.budget, seed=args.seed)
        return b.to_dict(), None, True

    return config, compute


def _estimate(args):
    if args.config:
        doc = load_json(args.config, "estimate_config")
        qs = [as_exponent(q) for q in doc["q"]]
        p, r, n = as_exponent(doc["p"]), as_exponent(doc["r"]), doc["n"]
        dims = doc.get("dims")
        budget, seed, restarts = doc.get("budget", args.budget), doc.get("seed", args.seed), doc.get("restarts", 2)
    else:
        if not (args.q and args.p and args.r and args.n):
            raise UsageError("estimate needs --config or all of --q, --p, --r, --n")
        qs, p, r, n = parse_exponents(args.q), as_exponent(args.p), as_exponent(args.r), args.n
        dims, budget, seed, restarts = None, args.budget, args.seed, 2
    config = {"q": qs, "p": p, "r": r, "n": n, "dims": dims, "budget": budget, "seed": seed, "restarts": restarts}

    def compute():
        est = estimate_kn(qs, p, r, n, dims=dims, budget=budget, seed=seed, restarts=restarts)
        res = est.to_dict()
        res["witness_operator"] = est.witness.operator.to_dict()
        res["closed_form"] = (linear_k(qs[0], p, r) if len(qs) == 1 else multilinear_k(qs, p, r)).to_dict()
        w = est.witness
        row = {"n": n, "lower_bound": est.lower, "norm_upper": w.bracket.upper, "lhs": w.lhs, "rhs_product": w.rhs}
        return res, [{**row, "seed": seed}], True

    return config, compute


def _witness(args):
    kind, n, seed = args.kind, args.n, args.seed
    config = {"kind": kind, "n": n, "seed": seed}
    if kind == "littlewood":

        def compute():
            T = littlewood_witness(n)
            b = operator_norm(T, [math.inf, math.inf], math.inf, mode="exact")
            meta = {"kind": kind, "n": n, "seed": seed, "bracket": b.to_dict()}
            return {"operator": T.to_dict(), "metadata": meta}, None, True

    elif kind == "ksz":
        qs, p = parse_exponents(args.q or "2,2"), as_exponent(args.p or "inf")
        config.update(q=qs, p=p, m=len(qs), attempts=args.attempts)

        def compute():
            T, b, sign = ksz_witness(len(qs), n, qs, p, seed, args.attempts)
            meta = {"kind": kind, "n": n, "seed": seed, "attempt": sign.attempt, "bracket": b.to_dict()}
            return {"operator": T.to_dict(), "metadata": meta}, None, True

    elif kind == "convolution":

        def compute():
            T = convolution_operator(n)
            b = operator_norm(T, [1, 2], 2, mode="exact")
            meta = {"kind": kind, "n": n, "seed": seed, "bracket": b.to_dict()}
            return {"operator": T.to_dict(), "metadata": meta}, None, True

    elif kind in ("littlewood_probe", "ksz_probe"):
        ns = [int(x) for x in (args.ns or "2,4,8,16").split(",")]
        r = as_exponent(args.r or "1")
        config.update(ns=ns, r=r)
        if kind == "ksz_probe":
            qs, p = parse_exponents(args.q or "2,2"), as_exponent(args.p or "inf")
            config.update(q=qs, p=p, attempts=args.attempts)

        def compute():
            if kind == "littlewood_probe":
                rep = littlewood_probe(ns, r)
            else:
                rep = divergence_probe(len(qs), ns, qs, r, seeds=seed, p=p, attempts=args.attempts)
            rows = [pt.to_row() for pt in rep.points]
            res = {"kind": rep.kind, "rows": rows, "growth_exponent": rep.growth_exponent}
            return res, rows, True

    else:
        raise UsageError(f"unknown witness kind {kind!r}")
    return config, compute


def _verify(args):
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    config = {"suite": args.suite, "trials": args.trials, "seed": args.seed}

    def compute():
        rep = run_suite(args.suite, trials=args.trials, seed=args.seed)
        res = rep.to_dict()
        asserted = [c["margin"] for c in rep.checks if c["asserted"]]
        res["min_margin"] = min(asserted) if asserted else None
        return res, None, rep.passed

    return config, compute


COMMANDS: dict[str, Callable] = {
    "classify": _classify,
    "moment": _moment,
    "norm": _norm,
    "estimate": _estimate,
    "witness": _witness,
    "verify": _verify,
}


def run_command(args) -> tuple[dict, list | None, bool, dict]:
    """Build the report, consulting the cache; returns (report, csv rows, ok, meta)."""
    config, compute = COMMANDS[args.command](args)
    key = config_key(args.command, config)
    cdir = cache_dir(args)
    entry = cdir / f"{key}.json" if cdir else None
    start = time.perf_counter()
    if entry is not None and entry.exists():
        cached = json.loads(entry.read_text(encoding="utf-8"))
        report, rows, ok, hit = cached["report"], cached["rows"], cached["ok"], True
    else:
        result, rows, ok = compute()
        report = jsonable({"schema_version": SCHEMA_VERSION, "command": args.command, "config": config, "result": result})
        rows = None if rows is None else jsonable(rows)
        hit = False
        if entry is not None:
            atomic_write(entry, canonical_json({"report": report, "rows": rows, "ok": ok}))
    meta = {
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "elapsed_seconds": time.perf_counter() - start,
        "cache_hit": hit,
        "cache_key": key,
        "report_sha256": hashlib.sha256(canonical_json(report).encode()).hexdigest(),
        "version": __version__,
    }
    return report, rows, ok, meta


def _summary(report: dict) -> str:
    res = report["result"]
    cmd = report["command"]
    if cmd == "classify":
        line = f"{res['status']}"
        if "value" in res:
            line += f" {res['value']}"
            if "value_error" in res:
                line += f" +/- {res['value_error']:.1e}"
        elif "formula" in res:
            line += f" ({res['formula']})"
        return f"{line}\nprovenance: {res['provenance']}"
    if cmd == "moment":
        return f"c = {res['value']!r} +/- {res['error_estimate']:.2e} ({res['method']})"
    if cmd == "norm":
        return f"norm in [{res['lower']!r}, {res['upper']!r}] ({res['method']}, upper by {res['upper_method']})"
    if cmd == "estimate":
        return f"certified lower bound {res['lower']!r} (witness {res['witness']})"
    if cmd == "witness":
        if "rows" in res:
            return "\n".join(f"n={row['n']} lower_bound={row['lower_bound']!r}" for row in res["rows"])
        return f"{res['metadata']['kind']} n={res['metadata']['n']}: norm {res['metadata']['bracket']['upper']!r}"
    if cmd == "verify":
        return f"suite {res['name']}: {'PASS' if res['pass'] else 'FAIL'} (min margin {res['min_margin']})"
    return ""


def cmd_report(args) -> int:
    """Collect every report in a directory into summary.json."""
    d = Path(args.dir)
    if not d.is_dir():
        raise UsageError(f"{d} is not a directory")
    entries = []
    for path in sorted(d.glob("*.json")):
        if path.name.endswith(".meta.json") or path.name == "summary.json":
            continue
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            continue
        if not isinstance(doc, dict) or "schema_version" not in doc:
            continue
        res = doc.get("result", {})
        entries.append(
            {
                "file": path.name,
                "command": doc.get("command"),
                "pass": res.get("pass", True) if isinstance(res, dict) else True,
                "sha256": hashlib.sha256(path.read_bytes()).hexdigest(),
            }
        )
    summary = {"schema_version": SCHEMA_VERSION, "reports": entries, "all_pass": all(e["pass"] for e in entries)}
    out = Path(args.out) if args.out else d / "summary.json"
    atomic_write(out, canonical_json(summary))
    for e in entries:
        print(f"{e['file']}: {e['command']} {'PASS' if e['pass'] else 'FAIL'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mzlab", description="Marcinkiewicz-Zygmund constant laboratory")
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here (plus a .meta.json sidecar)")
    common.add_argument("--csv", help="write a CSV table here (estimate and probe commands)")
    common.add_argument("--json", action="store_true", help="print the JSON report instead of a summary")
    common.add_argument("--cache-dir", help=f"result cache directory (default: ${CACHE_ENV}, unset disables)")
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="status and value of k_{q,p}(r)")
    p.add_argument("--q", required=True, help="comma-separated input exponents")
    p.add_argument("--p", required=True)
    p.add_argument("--r", required=True)

    p = sub.add_parser("moment", parents=[common], help="stable moment constant c_{r,s}")
    p.add_argument("--r", required=True, type=float)
    p.add_argument("--s", required=True, type=float)
    p.add_argument("--method", choices=("quadrature", "monte_carlo"), default="quadrature")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--samples", type=int, default=1_000_000)

    p = sub.add_parser("norm", parents=[common], help="norm bracket of an operator file")
    p.add_argument("--operator", required=True, help="operator JSON or witness bundle")
    p.add_argument("--q", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--mode", choices=("auto", "exact", "bracket"), default="auto")
    p.add_argument("--budget", type=int, default=200)

    p = sub.add_parser("estimate", parents=[common], help="certified lower bound on k^(n)")
    p.add_argument("--config", help="estimate config JSON")
    p.add_argument("--q")
    p.add_argument("--p")
    p.add_argument("--r")
    p.add_argument("--n", type=int)
    p.add_argument("--budget", type=int, default=20)

    p = sub.add_parser("witness", parents=[common], help="explicit witness operators and growth probes")
    p.add_argument(
        "--kind", required=True, choices=("littlewood", "ksz", "convolution", "littlewood_probe", "ksz_probe")
    )
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--ns", help="comma-separated sizes for probes")
    p.add_argument("--q")
    p.add_argument("--p")
    p.add_argument("--r")
    p.add_argument("--attempts", type=int, default=20)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("--suite", required=True, help=", ".join(SUITES))
    p.add_argument("--trials", type=int, default=1000)

    p = sub.add_parser("report", help="summarize the reports in a directory")
    p.add_argument("--dir", required=True)
    p.add_argument("--out")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "report":
            return cmd_report(args)
        report, rows, ok, meta = run_command(args)
        text = canonical_json(report)
        if args.out:
            out = Path(args.out)
            atomic_write(out, text)
            atomic_write(sidecar_path(out), canonical_json(meta))
        if args.csv and rows is not None:
            atomic_write(Path(args.csv), csv_text(rows))
        print(text if args.json else _summary(report), end="" if args.json else "\n")
        return 0 if ok else 1
    except (UsageError, *USAGE_ERRORS) as exc:
        print(f"mzlab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except QuadratureError as exc:
        print(f"mzlab {args.command}: quadrature did not reach tolerance: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
