"""Command-line entry point.

One binary, twelve subcommands, one seed.  Every report is JSON written to
``--out`` or stdout, with a ``meta`` block recording the tool version, the
full configuration, and the seed, so any figure can be regenerated from its
own file.  Timing goes to stderr only: output bytes depend on nothing but
the configuration.

Exit status: 0 when the requested checks pass, 1 when a check fails
(fulfil ratio bound, fig1 postconditions, chain fuzzing, words count),
2 for bad input or configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from fractions import Fraction

from . import __version__
from .cayley import (
    DEFAULT_RADIUS_CAP,
    DEFAULT_VERTEX_BUDGET,
    ball_from_json_dict,
    ball_to_json_dict,
    build_ball,
    fig1_demo,
    slim_delta_estimate,
)
from .complexes import (
    all_edges_in_faces,
    cancel,
    chain_report,
    complex_from_json,
    complex_to_json,
    edge_degree,
    random_abstract_complex,
    red,
    red_contributions,
)
from .enumeration import DEFAULT_FACE_CAP, DiagramBudget, isoperimetric_report
from .fulfillment import (
    EXACT_M_CAP,
    exact_probabilities,
    montecarlo_fulfillment,
    ratio_checks,
)
from .presentation import TriangularPresentation, sample_presentation
from .seeding import make_rng
from .thresholds import SLIMNESS_SCALE, constants_pipeline, constants_sweep
from .words import enumerate_triangle_words, triangle_word_count, word_to_json

SEED_ENV = "TRIGROUP_SEED"
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


class CliError(Exception):
    """Bad input or configuration; the message names the offending field."""


# ---------------------------------------------------------------------------
# parsing helpers


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational like 7/20, got {text!r}")


def _fraction_grid(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(part) for part in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(
            f"expected comma-separated rationals like 3/10,1/3,7/20, got {text!r}"
        )


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"environment variable {SEED_ENV}={raw!r} is not an integer")


def _load_json(path: str, kind: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise CliError(f"{kind} file {path!r}: {exc.strerror or exc}")
    except json.JSONDecodeError as exc:
        raise CliError(f"{kind} file {path!r}: invalid JSON ({exc})")
    if not isinstance(data, dict):
        raise CliError(f"{kind} file {path!r}: expected a JSON object")
    return data


def _require_fields(data: dict, fields, kind: str, path: str) -> None:
    for field in fields:
        if field not in data:
            raise CliError(f"{kind} file {path!r}: missing field {field!r}")


def load_presentation(path: str) -> TriangularPresentation:
    data = _load_json(path, "presentation")
    _require_fields(data, ("m", "d", "seed", "relators"), "presentation", path)
    try:
        return TriangularPresentation.from_json(data)
    except (ValueError, TypeError) as exc:
        raise CliError(f"presentation file {path!r}: {exc}")


def load_complex(path: str):
    data = _load_json(path, "complex")
    _require_fields(data, ("vertices", "edges", "faces"), "complex", path)
    for i, fc in enumerate(data["faces"]):
        if not isinstance(fc, dict) or "index" not in fc or "boundary" not in fc:
            raise CliError(
                f"complex file {path!r}: face {i} needs fields 'index' and 'boundary'"
            )
    try:
        return complex_from_json(data)
    except (ValueError, TypeError) as exc:
        raise CliError(f"complex file {path!r}: {exc}")


# ---------------------------------------------------------------------------
# emission


def _json_safe(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _emit(payload: dict, args: argparse.Namespace) -> None:
    config = {
        key: _json_safe(value)
        for key, value in vars(args).items()
        if key not in ("func", "out", "csv")
    }
    doc = dict(payload)
    doc["meta"] = {
        "tool": "trigroup",
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "config": config,
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_sample(args) -> tuple[dict, int]:
    if args.m < 1:
        raise CliError("--m must be at least 1")
    p = sample_presentation(args.m, args.d, args.seed)
    return p.to_json(), EXIT_OK


def cmd_words(args) -> tuple[dict, int]:
    if args.m < 1:
        raise CliError("--m must be at least 1")
    if args.m > args.max_m:
        raise CliError(
            f"m={args.m} above the enumeration cap {args.max_m};"
            f" pass --max-m {args.m} to override"
        )
    words = enumerate_triangle_words(args.m, rank_cap=max(args.m, 6))
    expected = triangle_word_count(args.m)
    payload = {
        "m": args.m,
        "count": len(words),
        "expected": expected,
        "matches": len(words) == expected,
    }
    if args.list:
        payload["words"] = [word_to_json(w, args.m) for w in words]
    return payload, EXIT_OK if payload["matches"] else EXIT_CHECK_FAILED


def cmd_cancel(args) -> tuple[dict, int]:
    Y = load_complex(args.complex)
    degrees = [edge_degree(Y, e) for e in range(Y.edge_count)]
    payload = {
        "vertices": Y.vertex_count,
        "edge_count": Y.edge_count,
        "face_count": Y.face_count,
        "degrees": degrees,
        "contributions": [max(deg - 1, 0) for deg in degrees],
        "cancel": cancel(Y),
    }
    return payload, EXIT_OK


def cmd_red(args) -> tuple[dict, int]:
    Y = load_complex(args.complex)
    payload = {
        "red": red(Y),
        "contributions": red_contributions(Y),
        "chain": chain_report(Y) if all_edges_in_faces(Y) else None,
    }
    return payload, EXIT_OK


def cmd_enum_diagrams(args) -> tuple[dict, int]:
    p = load_presentation(args.presentation)
    if args.max_faces > args.face_cap:
        raise CliError(
            f"max faces {args.max_faces} above the cap {args.face_cap};"
            f" pass --face-cap {args.max_faces} to override"
        )
    budget = DiagramBudget(max_faces=args.max_faces, presentation=p, epsilon=args.epsilon)
    payload = isoperimetric_report(budget, cap=args.face_cap)
    ok = payload["identity_holds"] and payload["equivalence_holds"]
    return payload, EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_fulfil(args) -> tuple[dict, int]:
    Y = load_complex(args.complex)
    if args.m < 1:
        raise CliError("--m must be at least 1")
    if not args.exact:
        trials = args.trials if args.trials is not None else 10_000
        payload = {"mode": "montecarlo", **montecarlo_fulfillment(Y, args.m, trials, args.seed)}
        return payload, EXIT_OK
    if args.m > args.max_m:
        raise CliError(
            f"m={args.m} above the exact-oracle cap {args.max_m};"
            f" pass --max-m {args.m} to override"
        )
    try:
        probe = exact_probabilities(Y, args.m, allow_large=args.max_m > EXACT_M_CAP)
    except ValueError as exc:
        raise CliError(
            str(exc).replace(
                "pass allow_large to override",
                f"raise --max-m above {EXACT_M_CAP} to override",
            )
        )
    checks = ratio_checks(probe)
    levels = [
        {
            "level": row["level"],
            "delta": row["delta"],
            "count": row["count"],
            "probability": str(probe.probabilities[row["level"]]),
            "bound": str(row["bound"]),
            "holds": row["holds"],
            "holds_guaranteed": row["holds_guaranteed"],
        }
        for row in checks
    ]
    all_hold = all(row["holds"] for row in checks)
    payload = {
        "mode": "exact",
        "m": args.m,
        "support": triangle_word_count(args.m),
        "levels": levels,
        "all_hold": all_hold,
        "all_hold_guaranteed": all(row["holds_guaranteed"] for row in checks),
    }
    return payload, EXIT_OK if all_hold else EXIT_CHECK_FAILED


def cmd_pipeline(args) -> tuple[dict, int]:
    report = constants_pipeline(
        args.d0,
        args.A1,
        args.A2,
        long_constant=args.long_constant,
        digits=args.precision,
    )
    return report.to_json_dict(), EXIT_OK


def cmd_sweep(args) -> tuple[dict, int]:
    rows = constants_sweep(args.d0_grid, args.A1, args.A2, long_constant=args.long_constant)
    csv_text = "d0,k,L,N\n" + "".join(
        f"{row['d0']},{row['k']},{row['L']},{row['N']}\n" for row in rows
    )
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_text)
    payload = {"rows": rows, "csv": csv_text}
    return payload, EXIT_OK


def cmd_ball(args) -> tuple[dict, int]:
    p = load_presentation(args.presentation)
    if args.radius > args.radius_cap:
        raise CliError(
            f"radius {args.radius} above the cap {args.radius_cap};"
            f" pass --radius-cap {args.radius} to override"
        )
    try:
        g = build_ball(
            p, args.radius, radius_cap=args.radius_cap, max_vertices=args.max_vertices
        )
    except ValueError as exc:
        if "vertex budget" in str(exc):
            raise CliError(f"{exc}; pass --max-vertices to raise it")
        raise
    return ball_to_json_dict(g), EXIT_OK


def cmd_delta_est(args) -> tuple[dict, int]:
    data = _load_json(args.graph, "graph")
    try:
        g = ball_from_json_dict(data)
    except (ValueError, TypeError, KeyError) as exc:
        raise CliError(f"graph file {args.graph!r}: {exc}")
    estimate = slim_delta_estimate(g, args.samples, args.seed)
    closed = len(g.closed_vertices())
    payload = {
        "estimate": estimate,
        "samples": args.samples,
        "radius": g.radius,
        "closed_vertices": closed,
        "exhaustive": math.comb(closed, 3) <= args.samples,
    }
    return payload, EXIT_OK


def cmd_fig1_demo(args) -> tuple[dict, int]:
    report = fig1_demo()
    return report, EXIT_OK if report["all_checks_pass"] else EXIT_CHECK_FAILED


def cmd_chain_check(args) -> tuple[dict, int]:
    if args.count < 1:
        raise CliError("--count must be positive")
    if args.max_faces < 1:
        raise CliError("--max-faces must be positive")
    rng = make_rng(args.seed, "chain")
    violations = 0
    first = None
    for draw in range(args.count):
        Y = random_abstract_complex(rng, max_faces=args.max_faces)
        report = chain_report(Y)
        if not report["holds"]:
            violations += 1
            if first is None:
                first = {"draw": draw, **report, "complex": complex_to_json(Y)}
    payload = {
        "checked": args.count,
        "max_faces": args.max_faces,
        "violations": violations,
        "first_violation": first,
    }
    return payload, EXIT_OK if violations == 0 else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trigroup",
        description="Laboratory for random triangular group presentations.",
    )
    parser.add_argument(
        "--version", action="version", version=f"trigroup {__version__}"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed",
        type=int,
        default=_default_seed(),
        help=f"master seed; defaults to ${SEED_ENV} or 0",
    )
    common.add_argument("--out", metavar="FILE", help="write the JSON report to FILE")
    common.add_argument(
        "--workers",
        type=int,
        default=1,
        help="accepted for interface stability; execution is sequential",
    )

    s = sub.add_parser("sample", parents=[common], help="sample a presentation")
    s.add_argument("--m", type=int, required=True, help="number of generators")
    s.add_argument("--d", type=_fraction, required=True, help="density, e.g. 1/3")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser(
        "words", parents=[common], help="enumerate cyclically reduced triangle words"
    )
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--list", action="store_true", help="include the words themselves")
    s.add_argument("--max-m", type=int, default=10, help="enumeration size cap")
    s.set_defaults(func=cmd_words)

    s = sub.add_parser("cancel", parents=[common], help="edge degrees and cancel value")
    s.add_argument("--complex", required=True, metavar="FILE")
    s.set_defaults(func=cmd_cancel)

    s = sub.add_parser(
        "red", parents=[common], help="reducedness defect and chain inequality"
    )
    s.add_argument("--complex", required=True, metavar="FILE")
    s.set_defaults(func=cmd_red)

    s = sub.add_parser(
        "enum-diagrams",
        parents=[common],
        help="enumerate reduced disc diagrams and check isoperimetry",
    )
    s.add_argument("--presentation", required=True, metavar="FILE")
    s.add_argument("--max-faces", type=int, default=3)
    s.add_argument("--epsilon", type=_fraction, default=Fraction(1, 100))
    s.add_argument("--face-cap", type=int, default=DEFAULT_FACE_CAP)
    s.set_defaults(func=cmd_enum_diagrams)

    s = sub.add_parser(
        "fulfil", parents=[common], help="fulfillment probabilities per label level"
    )
    s.add_argument("--complex", required=True, metavar="FILE")
    s.add_argument("--m", type=int, required=True)
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exhaustive support scan")
    mode.add_argument("--trials", type=int, help="Monte Carlo sample count")
    s.add_argument("--max-m", type=int, default=EXACT_M_CAP, help="exact-oracle cap")
    s.set_defaults(func=cmd_fulfil)

    s = sub.add_parser(
        "pipeline", parents=[common], help="derive the acylindricity constants"
    )
    s.add_argument("--d0", type=_fraction, required=True)
    s.add_argument("--A1", type=_fraction, default=Fraction(0))
    s.add_argument("--A2", type=_fraction, default=Fraction(0))
    s.add_argument("--long-constant", type=int, default=SLIMNESS_SCALE)
    s.add_argument("--precision", type=int, default=50, help="digits in exact fields")
    s.set_defaults(func=cmd_pipeline)

    s = sub.add_parser(
        "sweep", parents=[common], help="constants over a density grid (JSON + CSV)"
    )
    s.add_argument("--d0-grid", type=_fraction_grid, required=True)
    s.add_argument("--A1", type=_fraction, default=Fraction(0))
    s.add_argument("--A2", type=_fraction, default=Fraction(0))
    s.add_argument("--long-constant", type=int, default=SLIMNESS_SCALE)
    s.add_argument("--csv", metavar="FILE", help="also write the CSV table to FILE")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("ball", parents=[common], help="build a folded Cayley ball")
    s.add_argument("--presentation", required=True, metavar="FILE")
    s.add_argument("--radius", type=int, required=True)
    s.add_argument("--radius-cap", type=int, default=DEFAULT_RADIUS_CAP)
    s.add_argument("--max-vertices", type=int, default=DEFAULT_VERTEX_BUDGET)
    s.set_defaults(func=cmd_ball)

    s = sub.add_parser(
        "delta-est", parents=[common], help="slimness estimate on a saved ball"
    )
    s.add_argument("--graph", required=True, metavar="FILE")
    s.add_argument("--samples", type=int, default=1000)
    s.set_defaults(func=cmd_delta_est)

    s = sub.add_parser(
        "fig1-demo", parents=[common], help="parallel geodesics and strip diagrams"
    )
    s.set_defaults(func=cmd_fig1_demo)

    s = sub.add_parser(
        "chain-check", parents=[common], help="fuzz the chain inequality"
    )
    s.add_argument("--count", type=int, default=1000)
    s.add_argument("--max-faces", type=int, default=6)
    s.set_defaults(func=cmd_chain_check)

    return parser


def main(argv=None) -> int:
    start = time.perf_counter()
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        if args.workers < 1:
            raise CliError("--workers must be at least 1")
        payload, status = args.func(args)
        _emit(payload, args)
        print(f"elapsed {time.perf_counter() - start:.3f}s", file=sys.stderr)
        return status
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
