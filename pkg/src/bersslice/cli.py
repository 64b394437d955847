"""Command-line frontend: ``bersslice raster | centers | verify | trace-at | version``.

Settings come from, in increasing priority: built-in defaults, the
BERSSLICE_WORKERS environment variable (worker count only), a ``key = value``
config file given by --config, and explicit flags.

Exit codes: 0 ok, 1 I/O failure, 2 usage error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from importlib import metadata

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3
WORKERS_ENV = "BERSSLICE_WORKERS"

# config key -> (flag, parser); flags and config keys share these names
WINDOW_KEYS = {
    "center": ("--center", "complex"),
    "size": ("--size", "size"),
    "res": ("--res", int),
    "max_depth": ("--max-depth", int),
    "growth_bound": ("--growth-bound", float),
    "node_budget": ("--node-budget", int),
    "tol": ("--tol", float),
    "seed_threshold": ("--seed-threshold", float),
    "workers": ("--workers", int),
}
DEFAULTS = {"center": "0,0", "size": "100x100", "res": "400", "max_depth": "40", "growth_bound": "4.0",
            "node_budget": "4096", "tol": "1e-12", "seed_threshold": "0.05", "workers": "1"}


class UsageError(ValueError):
    pass


def parse_complex(text: str) -> complex:
    """Accepts "re,im", "a+bj" and "a+bi"."""
    s = text.strip().replace(" ", "")
    try:
        if "," in s:
            re_, im_ = s.split(",")
            return complex(float(re_), float(im_))
        return complex(s.replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot parse {text!r} as a complex number") from None


def parse_size(text: str) -> tuple[float, float]:
    s = text.strip().lower()
    w, sep, h = s.partition("x")
    try:
        return (float(w), float(h)) if sep else (float(w), float(w))
    except ValueError:
        raise UsageError(f"cannot parse {text!r} as WIDTHxHEIGHT") from None


def read_config(path: str) -> dict:
    """``key = value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in WINDOW_KEYS:
                raise UsageError(f"{path}:{lineno}: expected one of {', '.join(WINDOW_KEYS)} as 'key = value'")
            out[key] = value.strip()
    return out


def resolve_settings(args) -> dict:
    raw = dict(DEFAULTS)
    env = os.environ.get(WORKERS_ENV)
    if env:
        raw["workers"] = env
    if getattr(args, "config", None):
        raw.update(read_config(args.config))
    for key in WINDOW_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    out = {}
    for key, (flag, kind) in WINDOW_KEYS.items():
        text = raw[key]
        try:
            if kind == "complex":
                out[key] = parse_complex(text)
            elif kind == "size":
                out[key] = parse_size(text)
            else:
                out[key] = kind(text)
        except (UsageError, ValueError):
            raise UsageError(f"{flag}: cannot parse {text!r}") from None
    w, h = out["size"]
    checks = [("--size", w > 0 and h > 0, "width and height must be positive"),
              ("--res", out["res"] >= 2, "must be >= 2"),
              ("--max-depth", out["max_depth"] >= 1, "must be >= 1"),
              ("--growth-bound", out["growth_bound"] > 0, "must be positive"),
              ("--node-budget", out["node_budget"] >= 1, "must be >= 1"),
              ("--tol", 0 < out["tol"] < 1, "must lie in (0, 1)"),
              ("--seed-threshold", out["seed_threshold"] > 0, "must be positive"),
              ("--workers", out["workers"] >= 1, "must be >= 1")]
    for flag, ok, msg in checks:
        if not ok:
            raise UsageError(f"{flag} {msg}")
    return out


def make_config(s: dict):
    from .scan import RasterConfig

    w, h = s["size"]
    return RasterConfig(center=s["center"], width=w, height=h, resolution=s["res"], max_depth=s["max_depth"],
                        growth_bound=s["growth_bound"], node_budget=s["node_budget"], tol=s["tol"],
                        seed_threshold=s["seed_threshold"], workers=s["workers"])


def _write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
        fh.write("\n")


def cmd_raster(args) -> int:
    from .scan import centers_json, dumps17, raster, write_image

    cfg = make_config(resolve_settings(args))
    result = raster(cfg)
    stats_path = args.stats or os.path.splitext(args.out)[0] + ".stats.json"
    write_image(args.out, result.image())
    _write_text(stats_path, dumps17(result.stats, indent=1))
    if args.centers_out:
        _write_text(args.centers_out, centers_json(result.centers))
    counts = result.stats["counts"]
    print(" ".join(f"{k}={v}" for k, v in counts.items()) + f" centers={len(result.centers)}")
    return EXIT_OK


def cmd_centers(args) -> int:
    from .scan import centers_json, find_centers

    cfg = make_config(resolve_settings(args))
    centers = find_centers(cfg)
    if args.out:
        _write_text(args.out, centers_json(centers))
    else:
        print(centers_json(centers))
    print(f"count {len(centers)}", file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import SUITES, run_suites

    names = args.suite or None
    if names and any(n not in SUITES for n in names):
        raise UsageError(f"--suite must be one of {', '.join(SUITES)}")
    results = run_suites(names, theta=0.5 + args.theta_perturb)
    width = max(len(f"{r.suite}: {r.name}") for r in results)
    for r in results:
        label = f"{r.suite}: {r.name}"
        print(f"{'PASS' if r.ok else 'FAIL'}  {label:<{width}}  {r.detail}")
    failed = [r for r in results if not r.ok]
    if failed:
        print("failing invariants: " + "; ".join(f"{r.suite}: {r.name}" for r in failed))
        return EXIT_VERIFY
    return EXIT_OK


def cmd_trace_at(args) -> int:
    from .discreteness import NotRelative, bq_test
    from .elliptic import BasisDifferential, LatticeSpec, SlicePoint
    from .holonomy import holonomy
    from .scan import dumps17

    c = parse_complex(args.c)
    s = resolve_settings(args)
    h = holonomy(SlicePoint(c, BasisDifferential(), LatticeSpec()), tol=s["tol"])
    t = h.character
    try:
        v = bq_test(t, s["max_depth"], s["growth_bound"], s["node_budget"])
        verdict, witness = v.tag, (str(v.witness) if v.witness is not None else None)
    except NotRelative:
        verdict, witness = "not-relative", None
    k = t.kappa
    out = {"c": [c.real, c.imag],
           "traces": [[v.real, v.imag] for v in t.as_tuple()],
           "kappa": [k.real, k.imag],
           "verdict": verdict,
           "witness": witness,
           "error": h.error}
    print(dumps17(out))
    return EXIT_OK


def cmd_version(args) -> int:
    try:
        print(metadata.version("bersslice"))
    except metadata.PackageNotFoundError:
        from . import __version__

        print(__version__)
    return EXIT_OK


def _add_window_flags(p):
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--center", help="window center as re,im (default 0,0)")
    p.add_argument("--size", help="window size WIDTHxHEIGHT (default 100x100)")
    p.add_argument("--res", help="pixels per side (default 400)")
    p.add_argument("--max-depth", dest="max_depth", help="Farey search depth (default 40)")
    p.add_argument("--growth-bound", dest="growth_bound", help="escape threshold (default 4)")
    p.add_argument("--node-budget", dest="node_budget", help="search nodes per pixel (default 4096)")
    p.add_argument("--tol", help="local ODE tolerance (default 1e-12)")
    p.add_argument("--seed-threshold", dest="seed_threshold", help="center seed residual (default 0.05)")
    p.add_argument("--workers", help=f"worker threads (default ${WORKERS_ENV} or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bersslice", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("raster", help="classify a window of the slice plane and write an image")
    _add_window_flags(p)
    p.add_argument("--out", required=True, help="image path (.ppm, or .png)")
    p.add_argument("--stats", help="stats JSON path (default: next to the image)")
    p.add_argument("--centers-out", dest="centers_out", help="also write the centers JSON here")
    p.set_defaults(func=cmd_raster)

    p = sub.add_parser("centers", help="locate Fuchsian centers in a window")
    _add_window_flags(p)
    p.add_argument("--out", help="centers JSON path (default: standard output)")
    p.set_defaults(func=cmd_centers)

    p = sub.add_parser("verify", help="run the invariant suites")
    p.add_argument("--suite", action="append", help="run only this suite (repeatable)")
    p.add_argument("--theta-perturb", dest="theta_perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("trace-at", help="character and verdict at one slice point")
    p.add_argument("c", help="slice coordinate, e.g. 1.5,-2 or 1.5-2j")
    for key in ("max_depth", "growth_bound", "node_budget", "tol"):
        p.add_argument(WINDOW_KEYS[key][0], dest=key)
    p.add_argument("--config", help="key = value file; flags override it")
    p.set_defaults(func=cmd_trace_at)

    p = sub.add_parser("version", help="print the package version")
    p.set_defaults(func=cmd_version)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"bersslice {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"bersslice {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
