"""Realization assembly: interconnections, Kronecker structures and causal parts.

Naming follows the responses: ``product(F, G)`` realizes ``F(z) G(z)`` while
``series(F, G)`` feeds the output of ``F`` into ``G`` (response ``G F``).
"""

from functools import reduce

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg

from .exceptions import DimensionMismatchError
from .lyapunov import stein
from .systems import Adjoint
from .systems import StateSpace
from .systems import as_matrix


def _require(condition: bool, message: str) -> None:  # noqa: FBT001
    if not condition:
        raise DimensionMismatchError(message)


def series(first: StateSpace, second: StateSpace) -> StateSpace:
    _require(
        first.n_outputs == second.n_inputs,
        f"series: {first.shape} output cannot feed {second.shape}",
    )
    n1 = first.n_states
    n2 = second.n_states
    A = np.block(
        [
            [first.A, np.zeros((n1, n2))],
            [second.B @ first.C, second.A],
        ],
    )
    B = np.vstack([first.B, second.B @ first.D])
    C = np.hstack([second.D @ first.C, second.C])
    D = second.D @ first.D
    return StateSpace(A, B, C, D)


def product(*systems: StateSpace) -> StateSpace:
    """Response ``F_1 F_2 ... F_k``."""
    return reduce(lambda acc, item: series(item, acc), systems)


def parallel(*systems: StateSpace) -> StateSpace:
    shape = systems[0].shape
    _require(
        all(system.shape == shape for system in systems),
        "parallel: shapes differ",
    )
    return StateSpace(
        linalg.block_diag(*(s.A for s in systems)),
        np.vstack([s.B for s in systems]),
        np.hstack([s.C for s in systems]),
        sum((s.D for s in systems), start=np.zeros(shape)),
    )


def subtract(F: StateSpace, G: StateSpace) -> StateSpace:
    return parallel(F, scale(G, -1.0))


def hcat(*systems: StateSpace) -> StateSpace:
    """``[F_1  F_2  ...]``."""
    p = systems[0].n_outputs
    _require(all(s.n_outputs == p for s in systems), "hcat: output counts differ")
    return StateSpace(
        linalg.block_diag(*(s.A for s in systems)),
        linalg.block_diag(*(s.B for s in systems)),
        np.hstack([s.C for s in systems]),
        np.hstack([s.D for s in systems]),
    )


def vcat(*systems: StateSpace) -> StateSpace:
    """``[F_1; F_2; ...]``."""
    m = systems[0].n_inputs
    _require(all(s.n_inputs == m for s in systems), "vcat: input counts differ")
    return StateSpace(
        linalg.block_diag(*(s.A for s in systems)),
        np.vstack([s.B for s in systems]),
        linalg.block_diag(*(s.C for s in systems)),
        np.vstack([s.D for s in systems]),
    )


def block_diagonal(*systems: StateSpace) -> StateSpace:
    return StateSpace(
        linalg.block_diag(*(s.A for s in systems)),
        linalg.block_diag(*(s.B for s in systems)),
        linalg.block_diag(*(s.C for s in systems)),
        linalg.block_diag(*(s.D for s in systems)),
    )


def scale(F: StateSpace, factor: float) -> StateSpace:
    return StateSpace(F.A, F.B, factor * F.C, factor * F.D)


def left_multiply(matrix: ArrayLike, F: StateSpace) -> StateSpace:
    """Constant gain on the output side: ``M F``."""
    M = as_matrix(matrix, "M")
    _require(M.shape[1] == F.n_outputs, "left_multiply: shapes differ")
    return StateSpace(F.A, F.B, M @ F.C, M @ F.D)


def right_multiply(F: StateSpace, matrix: ArrayLike) -> StateSpace:
    """Constant gain on the input side: ``F M``."""
    M = as_matrix(matrix, "M")
    _require(M.shape[0] == F.n_inputs, "right_multiply: shapes differ")
    return StateSpace(F.A, F.B @ M, F.C, F.D @ M)


def transpose(F: StateSpace) -> StateSpace:
    return StateSpace(F.A.T, F.C.T, F.B.T, F.D.T)


def kron_identity(F: StateSpace, q: int) -> StateSpace:
    """``F (x) I_q``."""
    eye = np.eye(q)
    return StateSpace(
        np.kron(F.A, eye),
        np.kron(F.B, eye),
        np.kron(F.C, eye),
        np.kron(F.D, eye),
    )


def identity_kron(q: int, F: StateSpace) -> StateSpace:
    """``I_q (x) F``."""
    eye = np.eye(q)
    return StateSpace(
        np.kron(eye, F.A),
        np.kron(eye, F.B),
        np.kron(eye, F.C),
        np.kron(eye, F.D),
    )


def kron_with_factor(G: StateSpace, phi: StateSpace) -> StateSpace:
    """``G (x) phi^T`` as ``(G (x) I_q)(I_m (x) phi^T)``."""
    q = phi.n_outputs
    _require(phi.n_inputs == q, "kron_with_factor: phi must be square")
    return product(kron_identity(G, q), identity_kron(G.n_inputs, transpose(phi)))


def rvec(F: StateSpace) -> StateSpace:
    """Row-major vectorization: a ``pm x 1`` column with entry ``i*m + j`` = ``F_ij``."""
    p, m = F.shape
    n = F.n_states
    A = np.kron(np.eye(m), F.A)
    B = F.B.T.reshape(m * n, 1)
    C = np.zeros((p * m, m * n))
    for i in range(p):
        for j in range(m):
            C[i * m + j, j * n : (j + 1) * n] = F.C[i]
    return StateSpace(A, B, C, F.D.reshape(p * m, 1))


def causal_part(*terms: StateSpace | Adjoint) -> StateSpace:
    """``{sum of terms}_ca``: causal terms kept, each adjoint contributes its ``D^T``."""
    causal = [term for term in terms if isinstance(term, StateSpace)]
    adjoints = [term for term in terms if isinstance(term, Adjoint)]
    shape = (causal or adjoints)[0].shape
    _require(all(term.shape == shape for term in terms), "causal_part: shapes differ")
    constant = sum((term.system.D.T for term in adjoints), start=np.zeros(shape))
    if not causal:
        return StateSpace.static(constant)
    total = parallel(*causal)
    return StateSpace(total.A, total.B, total.C, total.D + constant)


def causal_part_product(T1: StateSpace, T2: StateSpace) -> StateSpace:
    """``{T1 T2*}_ca`` for stable ``T1``, ``T2`` with equal input counts."""
    _require(T1.n_inputs == T2.n_inputs, "causal_part_product: input counts differ")
    T1.require_stable()
    T2.require_stable()
    X = stein(T1.A, T2.A, T1.B @ T2.B.T)
    return StateSpace(
        T1.A,
        T1.B @ T2.D.T + T1.A @ X @ T2.C.T,
        T1.C,
        T1.D @ T2.D.T + T1.C @ X @ T2.C.T,
    )


def causal_part_adjoint_product(G: StateSpace, V: StateSpace) -> StateSpace:
    """``{G* V}_ca`` for stable ``G``, ``V`` with equal output counts."""
    _require(
        G.n_outputs == V.n_outputs,
        "causal_part_adjoint_product: output counts differ",
    )
    G.require_stable()
    V.require_stable()
    Y = stein(G.A.T, V.A.T, G.C.T @ V.C)
    return StateSpace(
        V.A,
        V.B,
        G.D.T @ V.C + G.B.T @ Y @ V.A,
        G.D.T @ V.D + G.B.T @ Y @ V.B,
    )
