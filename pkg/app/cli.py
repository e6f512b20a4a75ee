"""
Command-line front end.

Every verb runs one service operation and prints a human-readable report,
or compact JSON with ``--json``. Exit status: 0 success, 1 domain error,
2 usage error, 3 numerical failure. Logs go to stderr.
"""
import argparse
import json
import logging
import sys
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict
from pydantic import ValidationError as PydanticValidationError
from pydantic_core import to_jsonable_python

from app.config import settings
from app.exceptions import EXIT_USAGE, BaseAppException, ValidationError
from app.services import ClassificationService

logger = logging.getLogger(__name__)

PROG = "stablemaps"


class Output(BaseModel):
    """What a verb emits: a JSON payload, a text rendering and optionally CSV rows."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    data: Any
    text: str
    csv: Optional[str] = None


def _flag(value: bool) -> str:
    return "true" if value else "false"


def _number(value: float) -> str:
    return f"{float(value):.17g}"


def _degree(value) -> Any:
    return value.numerator if value.denominator == 1 else str(value)


# Handlers

def _canon(service: ClassificationService, args) -> Output:
    result = service.canonical(args.tuple)
    return Output(data={"tuple": args.tuple, "canonical": result}, text=result.word)


def _equiv(service: ClassificationService, args) -> Output:
    result = service.equivalent(args.first, args.second)
    return Output(data={"first": args.first, "second": args.second, "equivalent": result}, text=_flag(result))


def _apply(service: ClassificationService, args) -> Output:
    result = service.apply(args.tuple, args.shift, args.reversed)
    return Output(
        data={"tuple": args.tuple, "shift": args.shift, "reversed": args.reversed, "result": result},
        text=result.word,
    )


def _orbit(service: ClassificationService, args) -> Output:
    images = service.orbit(args.tuple)
    return Output(
        data={"tuple": args.tuple, "size": len(images), "orbit": images},
        text="\n".join(image.word for image in images),
    )


def _hash(service: ClassificationService, args) -> Output:
    result = service.hash(args.tuple)
    return Output(data={"tuple": args.tuple, "hash": result}, text=result.text)


def _unhash(service: ClassificationService, args) -> Output:
    result = service.unhash(args.hash)
    return Output(data={"hash": args.hash, "tuple": result}, text=result.word)


def _star(service: ClassificationService, args) -> Output:
    result = service.star(args.tuple)
    return Output(data={"tuple": args.tuple, "starred": result}, text=result.text)


def _feasible(service: ClassificationService, args) -> Output:
    report = service.feasibility(args.hash, args.m)
    failed = [name for name, ok in (
        ("n-even", report.n_even),
        ("sum", report.cond_sum_ok),
        ("altsum", report.cond_altsum_ok),
        ("crs", report.cond_crs_ok),
    ) if not ok]
    text = "feasible" if report.feasible else "infeasible: " + ", ".join(failed)
    return Output(data=report, text=text)


def _type(service: ClassificationService, args) -> Output:
    n, m = service.type_of(args.hash)
    return Output(data={"hash": args.hash, "n": n, "m": m}, text=f"({n},{m})")


def _degree_verb(service: ClassificationService, args) -> Output:
    degree = service.degree(args.hash)
    return Output(data={"hash": args.hash, "abs_deg": _degree(degree)}, text=str(degree))


def _cusp_parity(service: ClassificationService, args) -> Output:
    parity = service.cusp_parity(args.hash)
    return Output(data={"hash": args.hash, "cusp_parity": parity}, text=str(parity))


def _exists(service: ClassificationService, args) -> Output:
    verdict = service.exists(args.n, args.m)
    answer = "unknown" if verdict.exists is None else _flag(verdict.exists)
    return Output(data=verdict, text=f"{answer} ({verdict.reason})")


def _count2(service: ClassificationService, args) -> Output:
    count = service.count_type2(args.m)
    return Output(data={"n": 2, "m": args.m, "count": count}, text=str(count))


def _enumerate(service: ClassificationService, args) -> Output:
    listing = service.enumerate(args.n, args.m, force=args.force, workers=args.workers)
    rows = "\n".join(h.text for h in listing.classes)
    return Output(data=listing, text=rows, csv=rows)


def _count(service: ClassificationService, args) -> Output:
    listing = service.enumerate(args.n, args.m, force=args.force, workers=args.workers)
    return Output(data={"n": listing.n, "m": listing.m, "count": listing.count}, text=str(listing.count))


def _table(service: ClassificationService, args) -> Output:
    rows = service.table(args.n_max, args.m_max, force=args.force, workers=args.workers)
    text = "\n".join(f"({row.n},{row.m}) {row.count}" for row in rows)
    csv = "\n".join(["n,m,count"] + [f"{row.n},{row.m},{row.count}" for row in rows])
    return Output(data=rows, text=text, csv=csv)


def _realize(service: ClassificationService, args) -> Output:
    report = service.realize(args.hash, args.samples)
    text = (f"verified {report.extracted.word} (hash {report.hash.text}, winding {report.winding}, "
            f"{report.samples} samples)")
    csv = None
    if args.csv:
        sampled = service.sample(args.hash, report.samples)
        csv = "\n".join(["t,fA(t)"] + [f"{_number(t)},{_number(v)}" for t, v in zip(sampled.t, sampled.values)])
    return Output(data=report, text=text, csv=csv)


def _recognize(service: ClassificationService, args) -> Output:
    report = service.recognize(args.f1, args.f2, args.eps0, args.precision, args.seed)
    return Output(data=report, text=report.ast.word)


def _germ_star(service: ClassificationService, args) -> Output:
    starred = service.starred(args.f1, args.f2, args.eps0, args.precision, args.seed)
    return Output(data={"f1": args.f1, "f2": args.f2, "starred": starred}, text=starred.text)


def _germ_equiv(service: ClassificationService, args) -> Output:
    result = service.germ_equiv((args.f1, args.f2), (args.g1, args.g2), args.eps0, args.precision, args.seed)
    text = _flag(result.equivalent)
    if not result.within_hypothesis:
        text += " (outside the classification hypothesis)"
    return Output(data=result, text=text)


def _jacobian(service: ClassificationService, args) -> Output:
    result = service.jacobian(args.f1, args.f2)
    return Output(data={"f1": args.f1, "f2": args.f2, "jacobian": result}, text=result)


def _fold_check(service: ClassificationService, args) -> Output:
    fold = service.fold_check(args.f1, args.f2, args.x, args.y)
    return Output(data={"f1": args.f1, "f2": args.f2, "point": [args.x, args.y], "fold": fold}, text=_flag(fold))


def _trace(service: ClassificationService, args) -> Output:
    curve, angles = service.trace(args.f1, args.f2, args.eps, args.precision)
    points = np.asarray(curve.points, dtype=object).astype(np.float64)
    csv = "\n".join(["x,y,angle"] + [f"{_number(x)},{_number(y)},{_number(a)}"
                                      for (x, y), a in zip(points, angles)])
    data = {"epsilon": curve.epsilon, "closed": curve.closed, "length": curve.length, "points": points.tolist()}
    text = f"closed level curve at eps={curve.epsilon:g}: {len(curve)} vertices, length {curve.length:.6g}"
    return Output(data=data, text=text, csv=csv)


def _catalog(service: ClassificationService, args) -> Output:
    if args.name and args.check:
        result = service.catalog_check(args.name, args.eps0, args.precision, args.seed)
        text = f"{result.form.name.value}: expected {result.expected.word}, recognized {result.report.ast.word}"
        return Output(data=result, text=text + ("" if result.matches else " MISMATCH"))
    forms = service.catalog()
    if args.name:
        if args.name not in forms:
            raise ValidationError(f"Unknown normal form: {args.name}", details={"available": list(forms)})
        forms = {args.name: forms[args.name]}
    rows = [f"{name}\t({form.f1}, {form.f2})\t{form.expected.word}{' *' if form.stretch else ''}"
            for name, form in forms.items()]
    return Output(data=list(forms.values()), text="\n".join(rows))


# Parser

def _add_output_flags(parser: argparse.ArgumentParser, csv: bool = False) -> None:
    parser.add_argument("--json", action="store_true", help="Emit compact JSON")
    if csv:
        parser.add_argument("--csv", action="store_true", help="Emit CSV rows")


def _add_recognition_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--eps0", type=float, default=None, help="First epsilon of the schedule")
    parser.add_argument("--precision", type=int, default=None, help="Working precision in bits (53, 64 or more)")
    parser.add_argument("--seed", type=int, default=None, help="Seed for reference-angle re-picks")


def _add_enumeration_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--force", action="store_true", help="Ignore the enumeration capacity limit")
    parser.add_argument("--workers", type=int, default=None, help="Worker processes (default from settings)")


VERBS: Dict[str, Callable[[ClassificationService, argparse.Namespace], Output]] = {}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description=settings.APP_DESCRIPTION)
    subparsers = parser.add_subparsers(dest="verb", required=True, metavar="verb")

    def verb(name: str, handler, help_text: str, csv: bool = False) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text)
        _add_output_flags(sub, csv)
        sub.set_defaults(csv=False)
        VERBS[name] = handler
        return sub

    sub = verb("canon", _canon, "Canonical representative of a tuple's class")
    sub.add_argument("tuple")

    sub = verb("equiv", _equiv, "Whether two tuples are equivalent")
    sub.add_argument("first")
    sub.add_argument("second")

    sub = verb("apply", _apply, "Apply a legal permutation to a tuple")
    sub.add_argument("tuple")
    sub.add_argument("--shift", type=int, default=0)
    sub.add_argument("--reversed", action="store_true")

    sub = verb("orbit", _orbit, "All images of a tuple under legal permutations")
    sub.add_argument("tuple")

    sub = verb("hash", _hash, "Canonical hash tuple of a tuple")
    sub.add_argument("tuple")

    sub = verb("unhash", _unhash, "Tuple word of a hash tuple")
    sub.add_argument("hash")

    sub = verb("star", _star, "Indexed form of a tuple")
    sub.add_argument("tuple")

    sub = verb("feasible", _feasible, "Check the feasibility conditions of a hash tuple")
    sub.add_argument("hash")
    sub.add_argument("--m", type=int, default=None, help="Declared number of regular points")

    sub = verb("type", _type, "Type (n,m) of a hash tuple")
    sub.add_argument("hash")

    sub = verb("degree", _degree_verb, "Absolute degree of a hash tuple")
    sub.add_argument("hash")

    sub = verb("cusp-parity", _cusp_parity, "Parity of the cusp count of a stable perturbation")
    sub.add_argument("hash")

    sub = verb("exists", _exists, "Existence shortcut for a type")
    sub.add_argument("n", type=int)
    sub.add_argument("m", type=int)

    sub = verb("count2", _count2, "Number of classes of type (2,m), closed form")
    sub.add_argument("m", type=int)

    sub = verb("enumerate", _enumerate, "All classes of a type", csv=True)
    sub.add_argument("n", type=int)
    sub.add_argument("m", type=int)
    _add_enumeration_flags(sub)

    sub = verb("count", _count, "Number of classes of a type")
    sub.add_argument("n", type=int)
    sub.add_argument("m", type=int)
    _add_enumeration_flags(sub)

    sub = verb("table", _table, "Class counts for every type up to a bound", csv=True)
    sub.add_argument("n_max", type=int)
    sub.add_argument("m_max", type=int)
    _add_enumeration_flags(sub)

    sub = verb("realize", _realize, "Build and verify the circle map of a class", csv=True)
    sub.add_argument("hash")
    sub.add_argument("--samples", type=int, default=None)

    sub = verb("recognize", _recognize, "Associated tuple class of a germ")
    sub.add_argument("f1")
    sub.add_argument("f2")
    _add_recognition_flags(sub)

    sub = verb("germ-star", _germ_star, "Indexed associated tuple of a germ")
    sub.add_argument("f1")
    sub.add_argument("f2")
    _add_recognition_flags(sub)

    sub = verb("germ-equiv", _germ_equiv, "Whether two germs are topologically equivalent")
    for name in ("f1", "f2", "g1", "g2"):
        sub.add_argument(name)
    _add_recognition_flags(sub)

    sub = verb("jacobian", _jacobian, "Jacobian determinant of a germ")
    sub.add_argument("f1")
    sub.add_argument("f2")

    sub = verb("fold-check", _fold_check, "Whether a point is a fold point of a germ")
    sub.add_argument("f1")
    sub.add_argument("f2")
    sub.add_argument("x", type=float)
    sub.add_argument("y", type=float)

    sub = verb("trace", _trace, "Trace the level curve |g| = eps", csv=True)
    sub.add_argument("f1")
    sub.add_argument("f2")
    sub.add_argument("eps", type=float)
    sub.add_argument("--precision", type=int, default=None)

    sub = verb("catalog", _catalog, "List the normal forms, or check one")
    sub.add_argument("name", nargs="?")
    sub.add_argument("--check", action="store_true", help="Recognize the form and compare")
    _add_recognition_flags(sub)

    return parser


def _emit(output: Output, args: argparse.Namespace) -> None:
    if args.json:
        print(json.dumps(to_jsonable_python(output.data), separators=(",", ":")))
    elif args.csv and output.csv is not None:
        print(output.csv)
    elif output.text:
        print(output.text)


def _emit_error(args: Optional[argparse.Namespace], error: BaseAppException) -> None:
    print(f"{PROG}: error: {error.message}", file=sys.stderr)
    if args is not None and getattr(args, "json", False):
        body = {"error": error.message, "exit_code": error.exit_code, "details": error.details}
        print(json.dumps(to_jsonable_python(body), separators=(",", ":")))


def run(args: argparse.Namespace, service: Optional[ClassificationService] = None) -> int:
    """Execute one parsed command and return its exit status."""
    service = service or ClassificationService()
    try:
        output = VERBS[args.verb](service, args)
    except BaseAppException as e:
        logger.debug(f"{args.verb} failed with {type(e).__name__}: {e.details}")
        _emit_error(args, e)
        return e.exit_code
    except PydanticValidationError as e:
        errors = e.errors()
        message = errors[0]["msg"] if errors else str(e)
        print(f"{PROG}: error: {message}", file=sys.stderr)
        return EXIT_USAGE
    _emit(output, args)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, settings.CLI_LOG_LEVEL),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return int(e.code or 0)
    if args.json and args.csv:
        print(f"{PROG}: error: --json and --csv are mutually exclusive", file=sys.stderr)
        return EXIT_USAGE
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
