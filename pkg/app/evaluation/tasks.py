from typing import Any

import numpy as np
from celery import shared_task

from .perturbation import PerturbationQuadratic
from .perturbation import sample_ball


def chunk_generator(payload: dict[str, Any]) -> np.random.Generator:
    seed = np.random.SeedSequence(payload["entropy"], spawn_key=tuple(payload["spawn_key"]))
    return np.random.Generator(np.random.Philox(seed))


@shared_task()
def evaluate_mc_chunk(payload: dict[str, Any]) -> dict[str, Any]:
    """Count the sampled FIR perturbations on which ``G`` beats ``G_M``."""
    quadratic_G = PerturbationQuadratic.from_payload(payload["G"])
    quadratic_M = PerturbationQuadratic.from_payload(payload["G_M"])
    thetas = sample_ball(quadratic_G.dim, payload["radius"], chunk_generator(payload), size=payload["count"])
    J_G = quadratic_G(thetas)
    J_M = quadratic_M(thetas)
    ratios = J_G / J_M
    return {
        "count": int(payload["count"]),
        "improved": int(np.count_nonzero(J_G < J_M)),
        "min_ratio": float(np.min(ratios)),
        "max_ratio": float(np.max(ratios)),
    }
