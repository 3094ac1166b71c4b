import numpy as np
import pytest

from app.lmi.dump import sdpa_text
from app.lmi.program import LMIProgram
from app.lmi.program import SolverOptions
from app.lmi.variables import block


def _options() -> SolverOptions:
    return SolverOptions(solver="CLARABEL", max_iter=100, tol=1e-8, strict_margin=1e-7)


def test_two_by_two_block_layout():
    prog = LMIProgram("block")
    x = prog.scalar("x")
    prog.add_lmi(block([[x, 1.0], [1.0, x]]))
    prog.minimize(x.expr)
    lines = sdpa_text(prog, _options()).splitlines()
    assert lines[:5] == ['"block"', "1", "1", "2", "1"]
    assert set(lines[5:]) == {"0 1 1 2 -1", "1 1 1 1 1", "1 1 2 2 1"}


def test_strict_margin_enters_constant_block():
    prog = LMIProgram("strict")
    x = prog.scalar("x", lower=0.0, strict=True)
    prog.minimize(2.0 * x.expr)
    lines = sdpa_text(prog, _options()).splitlines()
    assert lines[4] == "2"
    assert "0 1 1 1 1e-07" in lines
    assert "1 1 1 1 1" in lines


def test_symmetric_variable_uses_scaled_coordinates():
    prog = LMIProgram("sym")
    P = prog.sym("P", 2)
    prog.add_lmi(P.expr - np.eye(2))
    lines = sdpa_text(prog, _options()).splitlines()
    assert lines[1] == "3"
    off_diagonal = [line for line in lines[5:] if line.startswith("2 1 1 2 ")]
    assert len(off_diagonal) == 1
    assert float(off_diagonal[0].split()[-1]) == pytest.approx(1 / np.sqrt(2))
