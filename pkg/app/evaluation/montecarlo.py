"""Monte-Carlo experiments on the improvement set.

Samples are drawn in fixed-size chunks. Chunk ``i`` owns the ``i``-th child
of ``SeedSequence(seed)`` driving a Philox generator, so results depend only on
the seed and the chunk size, never on how chunks are scheduled.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from dataclasses import dataclass
from typing import Any

import numpy as np
from celery import group
from django.conf import settings
from scipy import optimize

from app.lti.algebra import block_diagonal
from app.lti.algebra import product
from app.lti.algebra import subtract
from app.lti.lyapunov import input_gram
from app.lti.systems import StateSpace
from app.synthesis.plants import signal_blocks
from app.synthesis.setup import EstimationSetup

from .exceptions import EvaluationError
from .exceptions import SampleSizeError
from .perturbation import PerturbationQuadratic
from .perturbation import coordinate_bank
from .perturbation import perturbation_quadratic
from .perturbation import sample_ball
from .tasks import evaluate_mc_chunk

logger = logging.getLogger(__name__)


def required_samples(epsilon: float, delta: float) -> int:
    """Smallest ``N`` with a two-sided ``(1 - delta)`` interval of half-width ``epsilon``: ``log(2/delta) / (2 epsilon^2)``."""
    return math.ceil(math.log(2.0 / delta) / (2.0 * epsilon**2))


def hoeffding_half_width(n_samples: int, delta: float) -> float:
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n_samples))


@dataclass(frozen=True)
class MCResult:
    samples: int
    improved: int
    frequency: float
    epsilon: float
    delta: float
    min_ratio: float
    max_ratio: float
    seed: int
    fir_length: int

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def chunk_payloads(
    quadratic_G: PerturbationQuadratic,
    quadratic_M: PerturbationQuadratic,
    radius: float,
    n_samples: int,
    seed: int,
    chunk_size: int | None = None,
) -> list[dict[str, Any]]:
    chunk_size = chunk_size or settings.MC_CHUNK_SIZE
    counts = [chunk_size] * (n_samples // chunk_size)
    if n_samples % chunk_size:
        counts.append(n_samples % chunk_size)
    children = np.random.SeedSequence(seed).spawn(len(counts))
    shared = {"G": quadratic_G.to_payload(), "G_M": quadratic_M.to_payload(), "radius": radius}
    return [
        {**shared, "count": count, "entropy": child.entropy, "spawn_key": list(child.spawn_key)}
        for count, child in zip(counts, children, strict=True)
    ]


def run_chunks(payloads: list[dict[str, Any]], threads: int | None = None) -> list[dict[str, Any]]:
    """Inline on a thread pool when tasks are eager, otherwise as a Celery group."""
    if settings.CELERY_TASK_ALWAYS_EAGER:
        with ThreadPoolExecutor(max_workers=threads or settings.MC_THREADS) as pool:
            return list(pool.map(lambda payload: evaluate_mc_chunk.delay(payload).get(), payloads))
    return group(evaluate_mc_chunk.s(payload) for payload in payloads).apply_async().get()


def mc_improvement(
    G: StateSpace,
    G_M: StateSpace,
    setup: EstimationSetup,
    fir_length: int,
    n_samples: int,
    seed: int,
    epsilon: float = 1e-2,
    delta: float = 1e-2,
    threads: int | None = None,
) -> MCResult:
    """Relative frequency of FIR perturbations (``L + 1`` taps) on which ``G`` beats ``G_M``."""
    needed = required_samples(epsilon, delta)
    if n_samples < needed:
        msg = f"{n_samples} samples are fewer than the {needed} needed for epsilon={epsilon:g}, delta={delta:g}"
        raise SampleSizeError(msg)
    quadratic_G = perturbation_quadratic(G, setup, fir_length)
    quadratic_M = perturbation_quadratic(G_M, setup, fir_length)
    payloads = chunk_payloads(quadratic_G, quadratic_M, setup.gamma, n_samples, seed)
    results = run_chunks(payloads, threads)
    improved = sum(result["improved"] for result in results)
    frequency = improved / n_samples
    logger.info("mc_improvement L=%d: %d of %d improved (%.4f)", fir_length, improved, n_samples, frequency)
    return MCResult(
        samples=n_samples,
        improved=improved,
        frequency=frequency,
        epsilon=hoeffding_half_width(n_samples, delta),
        delta=delta,
        min_ratio=min(result["min_ratio"] for result in results),
        max_ratio=max(result["max_ratio"] for result in results),
        seed=seed,
        fir_length=fir_length,
    )


# Path from the most favourable to the most unfavourable perturbation


@dataclass(frozen=True)
class PathPoint:
    position: float
    J_G: float
    J_M: float

    @property
    def ratio(self) -> float:
        return self.J_G / self.J_M if self.J_M else math.nan


def _extreme_perturbation(
    gain: PerturbationQuadratic,
    radius: float,
    rng: np.random.Generator,
    n_search: int,
) -> np.ndarray:
    """Maximizer of ``gain`` over the ball: sampled search refined by SLSQP."""
    candidates = sample_ball(gain.dim, radius, rng, size=n_search)
    start = candidates[int(np.argmax(gain(candidates)))]
    result = optimize.minimize(
        lambda theta: -float(gain(theta)[0]),
        start,
        jac=lambda theta: -(-2.0 * gain.l + 2.0 * gain.Q @ theta),
        method="SLSQP",
        constraints=[{"type": "ineq", "fun": lambda theta: radius**2 - theta @ theta, "jac": lambda theta: -2.0 * theta}],
    )
    best = result.x if gain(result.x)[0] >= gain(start)[0] else start
    norm = np.linalg.norm(best)
    return best * radius / norm if norm > radius else best


def path_profile(
    G: StateSpace,
    G_M: StateSpace,
    setup: EstimationSetup,
    fir_length: int,
    n_points: int,
    seed: int = 0,
) -> list[PathPoint]:
    """``J(G; H)`` and ``J(G_M; H)`` along the broken line best -> nominal -> worst.

    Position ``-1`` is the perturbation most favourable to ``G`` relative to
    ``G_M``, ``0`` the nominal channel and ``1`` the least favourable.
    """
    if n_points < 1 or n_points % 2 == 0:
        msg = f"n_points must be odd so that the nominal channel is the middle point, got {n_points}"
        raise EvaluationError(msg)
    quadratic_G = perturbation_quadratic(G, setup, fir_length)
    quadratic_M = perturbation_quadratic(G_M, setup, fir_length)
    positions = np.linspace(-1.0, 1.0, n_points) if n_points > 1 else np.zeros(1)
    if setup.gamma == 0 or n_points == 1:
        best = worst = np.zeros(quadratic_G.dim)
    else:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
        n_search = settings.MC_PATH_SEARCH_SAMPLES
        best = _extreme_perturbation(quadratic_M - quadratic_G, setup.gamma, rng, n_search)
        worst = _extreme_perturbation(quadratic_G - quadratic_M, setup.gamma, rng, n_search)
    thetas = np.array([-t * best if t < 0 else t * worst for t in positions])
    values_G, values_M = quadratic_G(thetas), quadratic_M(thetas)
    return [PathPoint(float(t), float(a), float(b)) for t, a, b in zip(positions, values_G, values_M, strict=True)]


# Signal-ball experiment


@dataclass(frozen=True)
class SignalMCResult:
    samples: int
    improved: int
    frequency: float
    sup_error_G: float
    sup_error_M: float
    seed: int
    fir_length: int

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def signal_error_gram(F: StateSpace, setup: EstimationSetup, fir_length: int) -> np.ndarray:
    """``Q`` with ``||e||^2 = z' Q z`` for FIR signals ``(y, v)`` of ``fir_length`` taps, coordinates ``(z_y, z_v)``."""
    H_I, H_o, _ = signal_blocks(setup, robust=False)
    bank = block_diagonal(
        coordinate_bank(setup.m_y, fir_length - 1),
        coordinate_bank(setup.m_v, fir_length - 1),
    )
    Q = input_gram(product(subtract(H_I, product(F, H_o)), bank))
    return (Q + Q.T) / 2


def signal_mc(
    G: StateSpace,
    G_M: StateSpace,
    setup: EstimationSetup,
    n_signals: int,
    fir_length: int,
    seed: int,
) -> SignalMCResult:
    """Random FIR signal pairs in the balls ``||y|| <= gamma_y``, ``||v|| <= gamma_v``."""
    Q_G = signal_error_gram(G, setup, fir_length)
    Q_M = signal_error_gram(G_M, setup, fir_length)
    n_y = setup.m_y * fir_length
    n_v = setup.m_v * fir_length
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    z = np.hstack(
        [
            sample_ball(n_y, setup.gamma_y, rng, size=n_signals),
            sample_ball(n_v, setup.gamma_v, rng, size=n_signals),
        ],
    )
    errors_G = np.einsum("ij,jk,ik->i", z, Q_G, z)
    errors_M = np.einsum("ij,jk,ik->i", z, Q_M, z)
    improved = int(np.count_nonzero(errors_G < errors_M))
    return SignalMCResult(
        samples=n_signals,
        improved=improved,
        frequency=improved / n_signals,
        sup_error_G=float(np.max(errors_G)),
        sup_error_M=float(np.max(errors_M)),
        seed=seed,
        fir_length=fir_length,
    )
