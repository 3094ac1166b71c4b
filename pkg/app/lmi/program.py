"""LMI programs: build, solve, and report.

A program is a linear objective over :class:`DecisionVar` s subject to
constraints ``E(x) >= 0`` (PSD) or ``E(x) > 0``. Strict constraints are
solved as ``E(x) - mu I >= 0`` with ``mu = margin * (1 + ||E(0)||_F)``.
"""

from __future__ import annotations

import contextlib
import contextvars
import itertools
import logging
import time
from collections.abc import Iterator
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__
from pathlib import Path
from typing import Any

import cvxpy as cp
import numpy as np
from django.conf import settings

from .exceptions import DuplicateVariableError
from .exceptions import MalformedProgramError
from .exceptions import UnknownSolverError
from .variables import DecisionVar
from .variables import Expr
from .variables import VariableKind
from .variables import as_expr
from .variables import shape_of
from .variables import sym_part

logger = logging.getLogger(__name__)

# OPTIMAL_INACCURATE is accepted only below this constraint violation.
INACCURATE_VIOLATION_TOL = 1e-6

_dump_counter = itertools.count(1)


class SolveStatus(StrEnum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITER = "MaxIter"
    NUMERICAL_ERROR = "NumericalError"


@dataclass(frozen=True)
class SolverOptions:
    solver: str
    max_iter: int
    tol: float
    strict_margin: float

    @classmethod
    def from_settings(cls) -> SolverOptions:
        options = cls(
            solver=settings.LMI_SOLVER,
            max_iter=settings.LMI_SOLVER_MAX_ITER,
            tol=settings.LMI_SOLVER_TOL,
            strict_margin=settings.LMI_STRICT_MARGIN,
        )
        overrides = _overrides.get()
        return replace(options, **overrides) if overrides else options

    def solve_kwargs(self) -> dict[str, Any]:
        name = self.solver.upper()
        if name not in cp.installed_solvers():
            msg = f"solver {self.solver!r} is not installed (have {cp.installed_solvers()})"
            raise UnknownSolverError(msg)
        kwargs: dict[str, Any] = {"solver": name}
        if name == "CLARABEL":
            kwargs.update(
                max_iter=self.max_iter,
                tol_gap_abs=self.tol,
                tol_gap_rel=self.tol,
                tol_feas=self.tol,
            )
        elif name == "CVXOPT":
            kwargs.update(
                max_iters=self.max_iter,
                abstol=self.tol,
                reltol=self.tol,
                feastol=self.tol,
            )
        elif name == "SCS":
            kwargs.update(max_iters=self.max_iter * 100, eps_abs=self.tol, eps_rel=self.tol)
        return kwargs


_overrides: contextvars.ContextVar[dict[str, Any]] = contextvars.ContextVar(
    "lmi_solver_overrides",
    default={},  # noqa: B039
)


@contextlib.contextmanager
def override_solver_options(**overrides: Any) -> Iterator[None]:
    """Temporarily replace solver settings (``solver``, ``max_iter``, ``tol``, ``strict_margin``)."""
    current = dict(_overrides.get())
    current.update({key: value for key, value in overrides.items() if value is not None})
    token = _overrides.set(current)
    try:
        yield
    finally:
        _overrides.reset(token)


@dataclass(eq=False)
class LMIConstraint:
    name: str
    expr: Expr
    strict: bool = False

    @property
    def size(self) -> int:
        return shape_of(self.expr)[0]


@dataclass
class SDPSolution:
    status: SolveStatus
    values: dict[str, Any]
    objective: float
    gap: float = float("nan")
    violation: float = float("nan")
    iterations: int | None = None
    solver: str = ""
    solve_time: float = 0.0
    message: str = ""
    margins: dict[str, float] = field(default_factory=dict)

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    def __getitem__(self, name: str) -> Any:
        return self.values[name]

    def diagnostics(self) -> dict[str, Any]:
        return {
            "status": str(self.status),
            "objective": self.objective,
            "gap": self.gap,
            "violation": self.violation,
            "iterations": self.iterations,
            "solver": self.solver,
            "solve_time": self.solve_time,
            "message": self.message,
        }


class LMIProgram:
    def __init__(self, name: str) -> None:
        self.name = name
        self.variables: dict[str, DecisionVar] = {}
        self.constraints: list[LMIConstraint] = []
        self.objective: cp.Expression | float = 0.0

    def __repr__(self) -> str:
        return (
            f"LMIProgram({self.name!r}, variables={len(self.variables)}, "
            f"constraints={len(self.constraints)})"
        )

    # Variables

    def _register(self, variable: DecisionVar) -> DecisionVar:
        if variable.name in self.variables:
            msg = f"variable {variable.name!r} already declared in {self.name}"
            raise DuplicateVariableError(msg)
        self.variables[variable.name] = variable
        if variable.lower is not None:
            self.add_lmi(
                as_expr(variable) - variable.lower,
                name=f"{variable.name}_lower",
                strict=variable.strict,
            )
        return variable

    def scalar(self, name: str, lower: float | None = None, *, strict: bool = False) -> DecisionVar:
        return self._register(DecisionVar(name, VariableKind.SCALAR, (1, 1), lower, strict))

    def rect(self, name: str, rows: int, cols: int) -> DecisionVar:
        return self._register(DecisionVar(name, VariableKind.RECT, (rows, cols)))

    def sym(self, name: str, n: int) -> DecisionVar:
        return self._register(DecisionVar(name, VariableKind.SYM, (n, n)))

    # Constraints and objective

    def add_lmi(self, expr: Expr, name: str = "", *, strict: bool = False) -> LMIConstraint:
        """Require ``expr >= 0`` (``> 0`` when ``strict``); ``expr`` must be square."""
        expr = as_expr(expr)
        rows, cols = shape_of(expr)
        if rows != cols:
            msg = f"constraint {name or len(self.constraints)} is {rows}x{cols}, not square"
            raise MalformedProgramError(msg)
        constraint = LMIConstraint(name or f"c{len(self.constraints)}", expr, strict)
        if rows:
            self.constraints.append(constraint)
        return constraint

    def add_inequality(self, lhs: Expr, rhs: Expr | float, name: str = "") -> LMIConstraint:
        """Scalar ``lhs <= rhs`` as a 1x1 LMI."""
        return self.add_lmi(as_expr(rhs) - as_expr(lhs), name=name)

    def minimize(self, objective: cp.Expression | float) -> None:
        self.objective = objective

    # Evaluation helpers

    def constant_parts(self) -> list[np.ndarray]:
        """``E_j(0)`` for every constraint."""
        saved = {name: var.expr.value for name, var in self.variables.items()}
        try:
            for var in self.variables.values():
                var.expr.value = np.zeros(var.expr.shape)
            return [_evaluate(constraint.expr) for constraint in self.constraints]
        finally:
            for name, var in self.variables.items():
                var.expr.value = saved[name]

    def margins(self, options: SolverOptions) -> list[float]:
        constants = self.constant_parts()
        return [
            options.strict_margin * (1.0 + float(np.linalg.norm(constant)))
            if constraint.strict
            else 0.0
            for constraint, constant in zip(self.constraints, constants, strict=True)
        ]

    def check_well_formed(self) -> None:
        referenced = {
            variable.id
            for constraint in self.constraints
            if isinstance(constraint.expr, cp.Expression)
            for variable in constraint.expr.variables()
        }
        if isinstance(self.objective, cp.Expression):
            referenced |= {variable.id for variable in self.objective.variables()}
        unused = [name for name, var in self.variables.items() if var.expr.id not in referenced]
        if unused:
            msg = f"{self.name}: variables {unused} appear in no constraint and not in the objective"
            raise MalformedProgramError(msg)

    def cvxpy_constraints(self, margins: list[float]) -> list[cp.Constraint]:
        compiled = []
        for constraint, margin in zip(self.constraints, margins, strict=True):
            size = constraint.size
            compiled.append(sym_part(constraint.expr) - margin * np.eye(size) >> 0)
        return compiled


def _evaluate(expr: Expr) -> np.ndarray:
    value = expr.value if isinstance(expr, cp.Expression) else expr
    return np.atleast_2d(np.asarray(value, dtype=float))


def _violation(constraints: list[LMIConstraint]) -> float:
    worst = 0.0
    for constraint in constraints:
        value = _evaluate(constraint.expr)
        lowest = float(np.linalg.eigvalsh((value + value.T) / 2)[0])
        worst = max(worst, -lowest)
    return worst


def _duality_gap(compiled: list[cp.Constraint]) -> float:
    gap = 0.0
    for constraint in compiled:
        dual = constraint.dual_value
        if dual is None:
            return float("nan")
        gap += float(np.sum(np.asarray(dual) * _evaluate(constraint.args[0])))
    return abs(gap)


def _status(raw: str | None, violation: float) -> SolveStatus:
    if raw is None:
        # the solver raised before producing an iterate
        return SolveStatus.NUMERICAL_ERROR
    if raw == cp.OPTIMAL:
        return SolveStatus.OPTIMAL
    if raw == cp.OPTIMAL_INACCURATE:
        return SolveStatus.OPTIMAL if violation <= INACCURATE_VIOLATION_TOL else SolveStatus.MAX_ITER
    if raw in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return SolveStatus.INFEASIBLE
    if raw in (cp.UNBOUNDED, cp.UNBOUNDED_INACCURATE):
        return SolveStatus.UNBOUNDED
    return SolveStatus.MAX_ITER


def _solve(
    prog: LMIProgram,
    problem: cp.Problem,
    compiled: list[cp.Constraint],
    options: SolverOptions,
) -> SDPSolution:
    started = time.perf_counter()
    message = ""
    try:
        problem.solve(**options.solve_kwargs())
    except cp.SolverError as exc:
        message = str(exc)
    elapsed = time.perf_counter() - started
    has_values = all(var.expr.value is not None for var in prog.variables.values())
    violation = _violation(prog.constraints) if has_values else float("inf")
    status = _status(problem.status if not message else None, violation)
    values = {
        name: (float(var.expr.value) if var.kind is VariableKind.SCALAR else np.array(var.expr.value))
        for name, var in prog.variables.items()
    } if has_values else {}
    stats = problem.solver_stats if not message else None
    objective = float(problem.value) if problem.value is not None and np.isfinite(problem.value) else float("nan")
    solution = SDPSolution(
        status=status,
        values=values,
        objective=objective,
        gap=_duality_gap(compiled) if has_values and not message else float("nan"),
        violation=violation,
        iterations=getattr(stats, "num_iters", None),
        solver=options.solver,
        solve_time=elapsed,
        message=message or str(problem.status),
    )
    logger.info(
        "%s: status=%s objective=%.8g gap=%.2e violation=%.2e iterations=%s (%.2fs)",
        prog.name,
        solution.status,
        solution.objective,
        solution.gap,
        solution.violation,
        solution.iterations,
        elapsed,
    )
    return solution


def _maybe_dump(prog: LMIProgram, options: SolverOptions) -> None:
    dump_dir = settings.LMI_DUMP_DIR
    if not dump_dir:
        return
    from .dump import dump_sdpa

    path = Path(dump_dir) / f"{prog.name}-{next(_dump_counter):04d}.dat-s"
    path.parent.mkdir(parents=True, exist_ok=True)
    dump_sdpa(prog, path, options)


def minimize(prog: LMIProgram) -> SDPSolution:
    """Solve ``prog``; solver trouble is reported through the status, never raised."""
    prog.check_well_formed()
    options = SolverOptions.from_settings()
    margins = prog.margins(options)
    compiled = prog.cvxpy_constraints(margins)
    objective = prog.objective if isinstance(prog.objective, cp.Expression) else cp.Constant(prog.objective)
    problem = cp.Problem(cp.Minimize(objective), compiled)
    _maybe_dump(prog, options)
    return _solve(prog, problem, compiled, options)


def feasible_point(prog: LMIProgram, cap: float = 1.0) -> SDPSolution:
    """Maximize ``t`` subject to ``E_j(x) - t I >= 0`` for every constraint.

    The objective of ``prog`` is ignored. The solution is Optimal only when
    the best margin is positive, which makes every strict constraint hold.
    """
    prog.check_well_formed()
    options = SolverOptions.from_settings()
    t = cp.Variable(name="margin")
    compiled = [
        sym_part(constraint.expr) - t * np.eye(constraint.size) >> 0
        for constraint in prog.constraints
    ]
    problem = cp.Problem(cp.Maximize(t), [*compiled, t <= cap])
    solution = _solve(prog, problem, compiled, options)
    margin = float(t.value) if t.value is not None else float("-inf")
    solution.margins["t"] = margin
    if solution.status is SolveStatus.OPTIMAL and margin <= 0.0:
        solution.status = SolveStatus.INFEASIBLE
    elif solution.status is SolveStatus.UNBOUNDED:
        solution.status = SolveStatus.MAX_ITER
    if solution.status is SolveStatus.OPTIMAL:
        solution.violation = _violation(prog.constraints)
    return solution
