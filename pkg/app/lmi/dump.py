"""Write an LMI program in SDPA sparse format (``.dat-s``).

The program is evaluated coordinate by coordinate, so the dump reflects the
exact affine maps handed to the solver::

    minimize    c^T x
    subject to  sum_i x_i F_i - F_0 >= 0

with ``F_0 = mu I - E(0)`` per block and ``F_i = E(e_i) - E(0)``.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import cvxpy as cp
import numpy as np

if TYPE_CHECKING:
    from .program import LMIProgram
    from .program import SolverOptions

ZERO_TOL = 1e-14


def _objective_value(prog: LMIProgram) -> float:
    objective = prog.objective
    if isinstance(objective, cp.Expression):
        return float(objective.value)
    return float(objective)


def _coefficients(prog: LMIProgram) -> tuple[list[np.ndarray], float, list[list[np.ndarray]], list[float]]:
    """Return ``E(0)``, ``obj(0)``, ``[E(e_i)-E(0)]`` per coordinate and ``c``."""
    saved = {name: var.expr.value for name, var in prog.variables.items()}

    def evaluate() -> list[np.ndarray]:
        return [
            np.atleast_2d(np.asarray(c.expr.value if isinstance(c.expr, cp.Expression) else c.expr, dtype=float))
            for c in prog.constraints
        ]

    try:
        for var in prog.variables.values():
            var.expr.value = np.zeros(var.expr.shape)
        constants = evaluate()
        offset = _objective_value(prog)
        matrices: list[list[np.ndarray]] = []
        costs: list[float] = []
        for var in prog.variables.values():
            for unit in var.coordinates():
                var.expr.value = unit.reshape(var.expr.shape)
                shifted = evaluate()
                matrices.append([p - c for p, c in zip(shifted, constants, strict=True)])
                costs.append(_objective_value(prog) - offset)
            var.expr.value = np.zeros(var.expr.shape)
        return constants, offset, matrices, costs
    finally:
        for name, var in prog.variables.items():
            var.expr.value = saved[name]


def _entries(matno: int, blkno: int, matrix: np.ndarray) -> list[str]:
    sym = (matrix + matrix.T) / 2
    lines = []
    rows, cols = np.triu_indices(sym.shape[0])
    for i, j in zip(rows, cols, strict=True):
        value = sym[i, j]
        if abs(value) > ZERO_TOL:
            lines.append(f"{matno} {blkno} {i + 1} {j + 1} {value:.16g}")
    return lines


def sdpa_text(prog: LMIProgram, options: SolverOptions) -> str:
    constants, _, matrices, costs = _coefficients(prog)
    margins = prog.margins(options)
    sizes = [c.size for c in prog.constraints]
    lines = [
        f'"{prog.name}"',
        str(len(costs)),
        str(len(sizes)),
        " ".join(str(size) for size in sizes),
        " ".join(f"{cost:.16g}" for cost in costs),
    ]
    for blkno, (constant, margin) in enumerate(zip(constants, margins, strict=True), start=1):
        lines.extend(_entries(0, blkno, margin * np.eye(constant.shape[0]) - constant))
    for matno, blocks in enumerate(matrices, start=1):
        for blkno, matrix in enumerate(blocks, start=1):
            lines.extend(_entries(matno, blkno, matrix))
    return "\n".join(lines) + "\n"


def dump_sdpa(prog: LMIProgram, path: Path, options: SolverOptions) -> Path:
    path.write_text(sdpa_text(prog, options))
    return path
