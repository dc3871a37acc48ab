"""Command-line front end.

    modarc basis    --level 2 -k 0 -n 1 -f f
    modarc zeros    --level 2 -k 0 -n 8 --format json
    modarc faber    --level 2 -k 16 -n -3
    modarc certify  s4-tail --N 50
    modarc duality  -k 0 --max-index 6
    modarc gfcheck  -k 0

Exit codes: 0 ok, 2 bad arguments, 3 precision too low, 4 inconclusive
sample at the precision cap, 5 certification failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional

from . import __version__
from .errors import (
    CertificationFailed,
    InconclusiveSample,
    ModarcError,
    PrecisionTooLow,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PRECISION = 3
EXIT_INCONCLUSIVE = 4
EXIT_CERTIFICATION = 5

SCHEMA_VERSION = 1
CACHE_ENV = "MODARC_CACHE_DIR"


# cache ---------------------------------------------------------------------


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "modarc"


def _canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


class BasisCache:
    """Basis elements on disk, one JSON file per (level, k, n, family, precision).

    Each file stores the payload together with its sha256; a file whose
    checksum does not match is ignored and rewritten.
    """

    def __init__(self, root: Optional[Path] = None):
        self.root = Path(root) if root is not None else default_cache_dir()

    @staticmethod
    def key(level: int, k: int, n: int, family: str, precision: int) -> dict:
        return {"level": level, "k": k, "n": n, "family": family, "precision": precision}

    def path(self, key: dict) -> Path:
        digest = hashlib.sha256(_canonical(key)).hexdigest()[:32]
        return self.root / f"basis-{digest}.json"

    def load(self, key: dict):
        from .forms import BasisElement

        p = self.path(key)
        try:
            entry = json.loads(p.read_text())
        except (OSError, ValueError):
            return None
        if entry.get("schemaVersion") != SCHEMA_VERSION or entry.get("key") != key:
            return None
        payload = entry.get("payload")
        if hashlib.sha256(_canonical(payload)).hexdigest() != entry.get("checksum"):
            print(f"modarc: ignoring corrupt cache entry {p}", file=sys.stderr)
            return None
        return BasisElement.from_json(payload)

    def store(self, key: dict, elem) -> Path:
        payload = elem.to_json()
        entry = {
            "schemaVersion": SCHEMA_VERSION,
            "key": key,
            "payload": payload,
            "checksum": hashlib.sha256(_canonical(payload)).hexdigest(),
        }
        self.root.mkdir(parents=True, exist_ok=True)
        target = self.path(key)
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(json.dumps(entry, sort_keys=True))
            os.replace(tmp, target)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise
        return target

    def get_or_build(self, level: int, k: int, n: int, family: str, precision: int):
        from .forms import BasisSpec, build

        key = self.key(level, k, n, family, precision)
        elem = self.load(key)
        if elem is None:
            elem = build(BasisSpec(level, k, n, family), precision)
            try:
                self.store(key, elem)
            except OSError as exc:
                print(f"modarc: cache not written ({exc})", file=sys.stderr)
        return elem


# helpers -------------------------------------------------------------------


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _element(args):
    if args.no_cache:
        from .forms import BasisSpec, build

        return build(BasisSpec(args.level, args.k, args.n, args.family), args.precision)
    return BasisCache(args.cache_dir).get_or_build(args.level, args.k, args.n, args.family, args.precision)


def _series_rows(series, terms: Optional[int]) -> list:
    rows = list(series.items())
    return rows if terms is None else rows[:terms]


# subcommands ---------------------------------------------------------------


def cmd_basis(args) -> int:
    elem = _element(args)
    if args.format == "json":
        out = elem.to_json()
        out["faberString"] = str(elem.faber)
        out["schemaVersion"] = SCHEMA_VERSION
        _emit(out)
    elif args.format == "csv":
        print("exponent,coefficient")
        for e, c in _series_rows(elem.series, args.terms):
            print(f"{e},{c}")
    else:
        print(f"{args.family}_{{{args.k},{args.n}}} (level {args.level}):")
        print(f"  {elem.series}")
        print(f"  Faber polynomial: F(x) = {elem.faber}")
        if args.terms:
            for e, c in _series_rows(elem.series, args.terms):
                print(f"  q^{e}: {c}")
    return EXIT_OK


def cmd_zeros(args) -> int:
    from .arczeros import count_arc_zeros

    elem = _element(args)
    theta_range = None
    if args.theta_min is not None or args.theta_max is not None:
        if args.theta_min is None or args.theta_max is None:
            raise argparse.ArgumentTypeError("--theta-min and --theta-max go together")
        theta_range = (args.theta_min, args.theta_max)
    profile = count_arc_zeros(
        elem,
        theta_range=theta_range,
        grid_size=args.grid,
        prec=args.bits,
        height=args.height,
    )
    if args.format == "csv":
        sys.stdout.write(profile.to_csv())
    elif args.format == "json":
        print(profile.to_json())
    else:
        s = profile.summary()
        print(f"sign changes: {s['signChanges']}")
        print(f"guaranteed floor: {s['guaranteedFloor']}")
        print(f"valence count: {s['valenceCount']}")
        print(f"max |normalized - predictor|: {s['maxPredictorGap']:.6g}")
    return EXIT_OK


def cmd_faber(args) -> int:
    from .faber import root_report

    elem = _element(args)
    report = root_report(elem.faber)
    if args.format == "json":
        out = {"schemaVersion": SCHEMA_VERSION, "faber": elem.faber.to_json(), "string": str(elem.faber)}
        out["roots"] = report.to_json()
        _emit(out)
    else:
        print(f"F(x) = {elem.faber}")
        print(f"degree {report.degree}; roots in the arc image {report.real_roots_in_arc_image}; off the arc {report.off_arc_count}")
        for r in report.off_arc_roots:
            print(f"  off-arc root: {r.to_json()}")
    return EXIT_OK


def _certificate_output(args, payload: dict, checks: list) -> int:
    """Emit the audit trail; checks are (label, passed) pairs against requested targets."""
    payload = dict(payload)
    payload["schemaVersion"] = SCHEMA_VERSION
    if checks:
        payload["checks"] = [{"check": label, "passed": bool(ok)} for label, ok in checks]
    if args.format == "json":
        _emit(payload)
    else:
        for key in ("quantity", "bound", "value", "threshold"):
            if key in payload:
                print(f"{key}: {payload[key]}")
        for label, ok in checks:
            print(f"{'PASS' if ok else 'FAIL'} {label}")
    return EXIT_OK if all(ok for _, ok in checks) else EXIT_CERTIFICATION


def cmd_certify(args) -> int:
    from .rigor import (
        certify_extremum,
        certify_majorant,
        d_integral_bound,
        tail_bound,
        threshold_report,
        verify_published_partition,
    )

    target = args.target
    checks = []
    if target.endswith("-tail"):
        series = {"s4-tail": "S4", "f2-tail": "F2", "e4-tail": "E4_2z", "phi-tail": "phi_level2"}[target]
        N = args.N if args.N is not None else (30 if series == "phi_level2" else 50)
        cert = tail_bound(series, N, args.regime, exact_terms=args.exact_terms)
        if args.max is not None:
            checks.append((f"bound <= {args.max}", cert.bound <= args.max * (1 + args.rel)))
        return _certificate_output(args, cert.to_json(), checks)
    if target in ("min", "max"):
        cert = certify_extremum(args.series, args.regime, target, grid_size=args.grid)
        if args.bound is not None:
            checks.append((f"{cert.kind} bound vs {args.bound}", cert.holds(args.bound, args.rel)))
        return _certificate_output(args, cert.to_json(), checks)
    if target == "majorant":
        cert = certify_majorant(args.series, args.regime)
        if args.bound is not None:
            checks.append((f"upper bound vs {args.bound}", cert.holds(args.bound, args.rel)))
        return _certificate_output(args, cert.to_json(), checks)
    if target == "d-integral":
        res = d_integral_bound(leaves=args.leaves)
        checks = [
            ("sup |D| < 1.75344", res.sup_d.value < 1.75344),
            ("int |D| <= 1.20992", res.integral_d.holds(1.20992, args.rel)),
            ("int |1 + D| < 1.74520", res.integral_one_plus_d.value < 1.74520),
        ]
        return _certificate_output(args, res.to_json(), checks)
    if target == "partition":
        rows = verify_published_partition()
        checks = [(f"{r.claim} on {list(r.interval)}", r.holds) for r in rows]
        return _certificate_output(args, {"checks_detail": [r.to_json() for r in rows]}, checks)
    if target == "threshold":
        rep = threshold_report(args.ell)
        return _certificate_output(args, rep.to_json(), [])
    raise argparse.ArgumentTypeError(f"unknown certification target {target!r}")


def cmd_duality(args) -> int:
    from .forms import duality_check

    failures = []
    total = 0
    ks = [args.k] if args.k is not None else list(range(-8, 11, 2))
    for k in ks:
        for n in range(1, args.max_index + 1):
            for m in range(1, args.max_index + 1):
                total += 1
                if not duality_check(k, n, m):
                    failures.append({"k": k, "n": n, "m": m})
    out = {"schemaVersion": SCHEMA_VERSION, "checked": total, "failures": failures}
    if args.format == "json":
        _emit(out)
    else:
        print(f"checked {total} triples; {len(failures)} failures")
    return EXIT_OK if not failures else EXIT_CERTIFICATION


def cmd_gfcheck(args) -> int:
    from .forms import generating_function_check

    rep = generating_function_check(args.k, r_powers=args.r_powers, precision=args.precision)
    out = rep.to_json()
    out["schemaVersion"] = SCHEMA_VERSION
    if args.format == "json":
        _emit(out)
    else:
        print(json.dumps(out, sort_keys=True))
    return EXIT_OK if rep.ok else EXIT_CERTIFICATION


# parser --------------------------------------------------------------------


def _add_element_args(p, precision_default: int = 40) -> None:
    p.add_argument("--level", type=int, choices=(2, 3), default=2)
    p.add_argument("-k", type=int, required=True, help="weight (even)")
    p.add_argument("-n", type=int, required=True, help="order of the pole at infinity")
    p.add_argument("-f", "--family", choices=("f", "g"), default="f")
    p.add_argument(
        "--precision", type=int, default=precision_default, help="q-expansion truncation exponent"
    )
    p.add_argument("--cache-dir", type=Path, default=None, help=f"cache directory (default ${CACHE_ENV} or ~/.cache/modarc)")
    p.add_argument("--no-cache", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modarc", description="Canonical bases of level 2 and 3 and their zeros on the lower arc.")
    parser.add_argument("--version", action="version", version=f"modarc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("basis", help="q-expansion and Faber polynomial of a basis element")
    _add_element_args(p)
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")
    p.add_argument("--terms", type=int, default=None, help="number of coefficients to list")
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("zeros", help="certified sign changes on the lower boundary arc")
    _add_element_args(p)
    p.add_argument("--grid", type=int, default=4096)
    p.add_argument("--bits", type=int, default=200, help="working precision in bits")
    p.add_argument("--height", type=float, default=None, help="contour height (level 3)")
    p.add_argument("--theta-min", type=float, default=None)
    p.add_argument("--theta-max", type=float, default=None)
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.set_defaults(func=cmd_zeros)

    p = sub.add_parser("faber", help="Faber polynomial and root classification")
    _add_element_args(p)
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_faber)

    p = sub.add_parser("certify", help="certified bounds with a JSON audit trail")
    p.add_argument(
        "target",
        choices=("s4-tail", "f2-tail", "e4-tail", "phi-tail", "min", "max", "majorant", "d-integral", "partition", "threshold"),
    )
    p.add_argument("--N", type=int, default=None, help="truncation order")
    p.add_argument("--regime", choices=("arc", "segment"), default="arc")
    p.add_argument("--series", choices=("S4", "F2", "E4_2z"), default="S4")
    p.add_argument("--exact-terms", type=int, default=10)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--leaves", type=int, default=2000)
    p.add_argument("--ell", type=int, default=0)
    p.add_argument("--max", type=float, default=None, help="fail unless the tail bound is at most this")
    p.add_argument("--bound", type=float, default=None, help="fail unless the extremum bound is at least as strong")
    p.add_argument("--rel", type=float, default=1e-5, help="relative slack for --max and --bound")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("duality", help="coeff_m(f_{k,n}) = -coeff_n(g_{2-k,m})")
    p.add_argument("-k", type=int, default=None, help="single weight (default: -8..10)")
    p.add_argument("--max-index", type=int, default=6)
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_duality)

    p = sub.add_parser("gfcheck", help="generating function of the f family, coefficient by coefficient")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--r-powers", type=int, default=3)
    p.add_argument("--precision", type=int, default=20)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_gfcheck)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except BrokenPipeError:
        # output piped into a pager or head that closed early
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except PrecisionTooLow as exc:
        print(f"modarc: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except InconclusiveSample as exc:
        print(f"modarc: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except CertificationFailed as exc:
        print(f"modarc: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    except (ModarcError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"modarc: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
