"""riccati-reduce: diagnose, reduce, solve and verify constrained Riccati equations.

Exit codes: 0 ok, 1 verification rejected, 2 invalid input, 3 unreadable
file, 4 no solution or solver failure.
"""
from typing import Optional, Sequence
import argparse
import logging
import sys

import numpy as np

from app.config import Settings
from app.exceptions import VALIDATION_ERRORS, DocumentError, RiccatiError
from app.models.riccati import ReductionChain, StepKind, TerminalKind
from app.services.riccati_service import RiccatiService
from app.utils import documents
from app.utils.logger import setup_logger

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_SOLVER = 4

logger = logging.getLogger(__name__)


def format_number(x: float) -> str:
    # adding 0.0 turns -0.0 into 0.0
    return f"{float(np.round(x, 10)) + 0.0:g}"


def format_matrix(M: np.ndarray) -> str:
    M = np.asarray(M)
    if M.shape == (1, 1):
        return format_number(M[0, 0])
    if M.size == 0:
        return f"[] ({M.shape[0]}x{M.shape[1]})"
    return "[" + ", ".join("[" + ", ".join(format_number(x) for x in row) + "]" for row in M) + "]"


def format_terminal(chain: ReductionChain) -> str:
    terminal = chain.terminal
    if terminal.kind == TerminalKind.STEIN:
        return f"Stein(A0={format_matrix(terminal.stein.a0)}, Q0={format_matrix(terminal.stein.q0)})"
    if terminal.kind == TerminalKind.REGULAR_DARE:
        return f"RegularDARE(n={terminal.triple.n}, m={terminal.triple.m})"
    return "Empty"


def _print_triple(label: str, sigma, out):
    print(f"  {label}:", file=out)
    for name in ("A", "B", "Q", "R", "S"):
        print(f"    {name} = {format_matrix(getattr(sigma, name))}", file=out)


def print_chain(chain: ReductionChain, trace: bool, out=sys.stdout):
    for index, step in enumerate(chain.steps, start=1):
        line = f"step {index}: {step.kind.value}"
        if step.kind == StepKind.KERNEL_A0:
            line += f" nu={step.deficiency} (order {step.order} -> {step.reduced_order})"
        elif step.kind == StepKind.KERNEL_R:
            line += f" eta={step.deficiency} (order {step.order} -> {step.reduced_order})"
        elif step.kind == StepKind.INPUT_SPLIT:
            line += f" (dropped inputs {step.deficiency})"
        else:
            line += f" (order {step.order})"
        print(line, file=out)
        if not trace:
            continue
        if step.reduces_state:
            print(f"  transform = {format_matrix(step.state_transform)}", file=out)
            print(f"  Q12 = {format_matrix(step.q12)}", file=out)
            print(f"  Q22 = {format_matrix(step.q22)}", file=out)
            _print_triple("reduced triple", step.result, out)
        elif step.kind == StepKind.INPUT_SPLIT:
            print(f"  input transform = {format_matrix(step.input_transform)}", file=out)
        else:
            print(f"  A0 = {format_matrix(step.result.A)}", file=out)
            print(f"  Q0 = {format_matrix(step.result.Q)}", file=out)
    print(f"terminal: {format_terminal(chain)}", file=out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riccati-reduce",
        description="Order reduction and solution of constrained generalized discrete-time Riccati equations",
    )
    parser.add_argument("command", choices=["diagnose", "reduce", "solve", "verify"])
    parser.add_argument("triple", help="JSON triple document")
    parser.add_argument("--x", dest="x_path", help="JSON matrix document (verify)")
    parser.add_argument("--trace", action="store_true", help="print transforms and reduced triples")
    parser.add_argument("--format", choices=["human", "machine"], default="human")
    parser.add_argument("--tol", type=float, help="absolute residual threshold")
    return parser


def _run(args, service: RiccatiService, out) -> int:
    document = documents.load_triple(args.triple)
    tol = documents.document_tolerance(document, service.tol)
    if args.tol is not None:
        if args.tol <= 0:
            raise DocumentError("must be positive", "--tol")
        tol = service.tolerance(rel=tol.rel, abs_residual=args.tol)
    sigma = documents.to_triple(document, tol)
    machine = args.format == "machine"

    if args.command == "diagnose":
        diagnosis = service.diagnose(sigma, tol)
        if machine:
            print(documents.dumps(documents.diagnosis_response(diagnosis)), file=out)
        else:
            for name, value in diagnosis.model_dump().items():
                print(f"{name}: {'n/a' if value is None else value}", file=out)
        return EXIT_OK

    if args.command == "reduce":
        chain = service.reduce(sigma, tol)
        if machine:
            print(documents.dumps(documents.reduce_response(chain)), file=out)
        else:
            print_chain(chain, args.trace, out)
        return EXIT_OK

    if args.command == "solve":
        chain, solutions = service.solve(sigma, tol)
        residuals = [service.member_residuals(sigma, family, tol) for family in solutions.families]
        if machine:
            print(documents.dumps(documents.solve_response(solutions, residuals)), file=out)
            return EXIT_OK
        if args.trace:
            print_chain(chain, True, out)
        for index, (family, family_residuals) in enumerate(zip(solutions.families, residuals), start=1):
            print(f"family {index}: {family.dimension} parameter(s)", file=out)
            print(f"  base = {format_matrix(family.base)}", file=out)
            for j, H in enumerate(family.basis, start=1):
                print(f"  basis {j} = {format_matrix(H)}", file=out)
            if family.stabilizing is not None:
                print(f"  stabilizing: {family.stabilizing}", file=out)
            print(f"  member residuals: {', '.join(f'{r:.3g}' for r in family_residuals)}", file=out)
        if not solutions.complete:
            print("warning: the solution set is incomplete", file=out)
        return EXIT_OK

    if args.x_path is None:
        raise DocumentError("verify needs a candidate solution", "--x")
    X = documents.load_matrix(args.x_path)
    check = service.verify(sigma, X, tol)
    if machine:
        print(documents.dumps(documents.verify_response(check)), file=out)
    else:
        print(f"residual: {check.residual:.6g}", file=out)
        print(f"kernel condition: {'ok' if check.kernel_ok else 'violated'}", file=out)
        print(f"verdict: {'accepted' if check.accepted else 'rejected'}", file=out)
    return EXIT_OK if check.accepted else EXIT_REJECTED


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    # read the environment on every call so RICCATI_SEED applies
    config = Settings()
    setup_logger("app", config)
    service = RiccatiService(config)

    try:
        return _run(args, service, out)
    except OSError as e:
        logger.error(f"cannot read input: {str(e)}")
        return EXIT_IO
    except VALIDATION_ERRORS as e:
        logger.error(f"invalid input: {str(e)}")
        return EXIT_INVALID
    except RiccatiError as e:
        logger.error(f"solver failure: {str(e)}")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
