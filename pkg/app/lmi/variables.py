"""Decision variables and affine matrix expression helpers.

Affine matrix expressions are plain cvxpy expressions; the helpers below only
add the block assembly and Kronecker products the synthesis code needs.
Symmetric variables are cvxpy ``symmetric=True`` variables, so their free
coordinates are the upper triangle.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__
from typing import Any

import cvxpy as cp
import numpy as np

from .exceptions import MalformedProgramError

Expr = cp.Expression | np.ndarray


class VariableKind(StrEnum):
    SCALAR = "scalar"
    RECT = "rect"
    SYM = "sym"


@dataclass(frozen=True, eq=False)
class DecisionVar:
    name: str
    kind: VariableKind
    shape: tuple[int, int]
    lower: float | None = None
    strict: bool = False
    expr: cp.Variable = field(repr=False, default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.expr is None:
            if self.kind is VariableKind.SCALAR:
                variable = cp.Variable(name=self.name)
            elif self.kind is VariableKind.SYM:
                variable = cp.Variable(self.shape, symmetric=True, name=self.name)
            else:
                variable = cp.Variable(self.shape, name=self.name)
            object.__setattr__(self, "expr", variable)

    @property
    def size(self) -> int:
        """Number of free coordinates."""
        if self.kind is VariableKind.SCALAR:
            return 1
        if self.kind is VariableKind.SYM:
            n = self.shape[0]
            return n * (n + 1) // 2
        return self.shape[0] * self.shape[1]

    def coordinates(self) -> list[np.ndarray]:
        """Basis matrices of the scaled half-vectorization (off-diagonals carry 1/sqrt(2))."""
        if self.kind is VariableKind.SCALAR:
            return [np.ones(())]
        rows, cols = self.shape
        basis = []
        if self.kind is VariableKind.SYM:
            for i in range(rows):
                for j in range(i, rows):
                    unit = np.zeros(self.shape)
                    if i == j:
                        unit[i, i] = 1.0
                    else:
                        unit[i, j] = unit[j, i] = 1.0 / np.sqrt(2.0)
                    basis.append(unit)
            return basis
        for i in range(rows):
            for j in range(cols):
                unit = np.zeros(self.shape)
                unit[i, j] = 1.0
                basis.append(unit)
        return basis

    @property
    def value(self) -> Any:
        return self.expr.value


def shape_of(item: Expr | float) -> tuple[int, int]:
    shape = item.shape if hasattr(item, "shape") else ()
    if len(shape) == 0:
        return (1, 1)
    if len(shape) == 1:
        return (shape[0], 1)
    return shape  # type: ignore[return-value]


def as_expr(item: Expr | DecisionVar | float) -> Expr:
    if isinstance(item, DecisionVar):
        return cp.reshape(item.expr, (1, 1), order="F") if item.kind is VariableKind.SCALAR else item.expr
    if isinstance(item, cp.Expression):
        if item.ndim == 0:
            return cp.reshape(item, (1, 1), order="F")
        if item.ndim == 1:
            return cp.reshape(item, (item.shape[0], 1), order="F")
        return item
    return np.atleast_2d(np.asarray(item, dtype=float))


def block(rows: Sequence[Sequence[Expr | DecisionVar | float]]) -> cp.Expression:
    """``cp.bmat`` that tolerates zero-height rows and zero-width columns."""
    grid = [[as_expr(item) for item in row] for row in rows]
    heights = [shape_of(row[0])[0] for row in grid]
    widths = [shape_of(item)[1] for item in grid[0]]
    for r, row in enumerate(grid):
        if len(row) != len(widths):
            msg = f"block row {r} has {len(row)} entries, expected {len(widths)}"
            raise MalformedProgramError(msg)
        for c, item in enumerate(row):
            if shape_of(item) != (heights[r], widths[c]):
                msg = f"block ({r},{c}) is {shape_of(item)}, expected {(heights[r], widths[c])}"
                raise MalformedProgramError(msg)
    kept_rows = [r for r, h in enumerate(heights) if h]
    kept_cols = [c for c, w in enumerate(widths) if w]
    if not kept_rows or not kept_cols:
        return np.zeros((sum(heights), sum(widths)))
    return cp.bmat([[grid[r][c] for c in kept_cols] for r in kept_rows])


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols))


def sym_part(expr: Expr) -> Expr:
    return (expr + expr.T) / 2


def kron_identity(expr: Expr | DecisionVar, q: int) -> Expr:
    """``expr (x) I_q`` assembled blockwise so it stays affine in the variable."""
    item = as_expr(expr)
    if isinstance(item, np.ndarray):
        return np.kron(item, np.eye(q))
    rows, cols = shape_of(item)
    if rows == 0 or cols == 0 or q == 0:
        return np.zeros((rows * q, cols * q))
    eye = np.eye(q)
    return cp.bmat([[item[i, j] * eye for j in range(cols)] for i in range(rows)])


def identity_kron(q: int, expr: Expr | DecisionVar) -> Expr:
    """``I_q (x) expr``."""
    item = as_expr(expr)
    if isinstance(item, np.ndarray):
        return np.kron(np.eye(q), item)
    rows, cols = shape_of(item)
    return block(
        [[item if i == j else zeros(rows, cols) for j in range(q)] for i in range(q)],
    )
