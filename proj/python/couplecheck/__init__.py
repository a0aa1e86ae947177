"""Exact coupling checks for a finite probabilistic while-language.

Rationals come back as fractions.Fraction; reports keep the field order of
the command-line tool's JSON output.
"""

import json
import os
from fractions import Fraction
from pathlib import Path

from . import _core
from ._core import (
    PreconditionError,
    Program,
    ProgramSyntaxError,
    ScriptSyntaxError,
    UsageError,
    load_program,
    load_program_file,
)

__all__ = [
    "PreconditionError",
    "Program",
    "ProgramSyntaxError",
    "ScriptSyntaxError",
    "UsageError",
    "load_program",
    "load_program_file",
    "run",
    "lossless",
    "check_property",
    "prove",
    "run_corpus",
    "format_report",
    "default_corpus",
]

_RATIONAL_KEYS = {"mass", "residual", "error", "deficit", "slack", "max_deviation", "max_slack", "lhs", "rhs"}


def _fractions(obj):
    if isinstance(obj, dict):
        return {k: Fraction(v) if k in _RATIONAL_KEYS and isinstance(v, str) else _fractions(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_fractions(v) for v in obj]
    return obj


def _program(program, bindings=None):
    if isinstance(program, Program):
        return program
    return load_program_file(str(program), {k: str(v) for k, v in (bindings or {}).items()})


def _tol(tol):
    return str(Fraction(tol))


def run(program, fuel=64, bindings=None):
    """Exact output distribution: outcomes with their masses, residual and error mass."""
    return _fractions(json.loads(_core.run(_program(program, bindings), fuel)))


def lossless(program, fuel=64, tol=Fraction(1, 2**30), bindings=None, seed_enum=False):
    return _fractions(json.loads(_core.lossless(_program(program, bindings), fuel, _tol(tol), seed_enum)))


def check_property(program, vars, kind="uniform", event="", route="oracle", proof=None, fuel=64,
                   tol=Fraction(1, 2**30), sample=None, seed=0, jobs=1, bindings=None, seed_enum=False):
    """kind is uniform, indep, indep-via-uniform or cond-indep; route is proof, semantic or oracle."""
    if isinstance(vars, str):
        vars = [vars]
    text = _core.check_property(_program(program, bindings), list(vars), kind, event, route,
                                str(proof) if proof else "", fuel, _tol(tol), sample, seed, jobs, seed_enum)
    report = _fractions(json.loads(text))
    report["ok"] = report["status"] == "CERTIFIED"
    return report


def prove(program, proof, fuel=64, tol=Fraction(1, 2**30), conclude=False, bindings=None, seed_enum=False):
    bindings = {k: str(v) for k, v in (bindings or {}).items()}
    text = _core.prove(_program(program, bindings), str(proof), bindings, fuel, _tol(tol), conclude, seed_enum)
    return _fractions(json.loads(text))


def default_corpus():
    if os.environ.get("COUPLECHECK_CORPUS"):
        return Path(os.environ["COUPLECHECK_CORPUS"]) / "corpus.json"
    shipped = Path(__file__).resolve().parent / "corpus" / "corpus.json"
    if shipped.exists():
        return shipped
    return Path(__file__).resolve().parents[2] / "corpus" / "corpus.json"


def run_corpus(filter="*", path=None, routes=None, fuel=None, jobs=1):
    text = _core.run_corpus(str(path or default_corpus()), filter, list(routes or []), fuel, jobs)
    return _fractions(json.loads(text))


def format_report(report, as_json=False):
    raw = {k: str(v) if isinstance(v, Fraction) else v for k, v in report.items() if k != "ok"}
    return _core.format_report(json.dumps(raw), as_json)
