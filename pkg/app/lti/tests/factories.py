import numpy as np
from factory import Factory
from factory import LazyAttribute
from factory import Sequence

from app.lti.systems import FIR
from app.lti.systems import StateSpace


def random_stable_matrix(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    if n == 0:
        return np.zeros((0, 0))
    A = rng.standard_normal((n, n))
    return radius * A / np.max(np.abs(np.linalg.eigvals(A)))


class StateSpaceFactory(Factory[StateSpace]):
    """Random stable realization, reproducible through ``seed``."""

    seed = Sequence(lambda n: 1000 + n)
    n_states = 3
    n_inputs = 1
    n_outputs = 1
    radius = 0.8
    rng = LazyAttribute(lambda o: np.random.default_rng(o.seed))

    A = LazyAttribute(lambda o: random_stable_matrix(o.rng, o.n_states, o.radius))
    B = LazyAttribute(lambda o: o.rng.standard_normal((o.n_states, o.n_inputs)))
    C = LazyAttribute(lambda o: o.rng.standard_normal((o.n_outputs, o.n_states)))
    D = LazyAttribute(lambda o: o.rng.standard_normal((o.n_outputs, o.n_inputs)))

    class Meta:
        model = StateSpace
        exclude = ("seed", "n_states", "n_inputs", "n_outputs", "radius", "rng")


class FIRFactory(Factory[FIR]):
    seed = Sequence(lambda n: 5000 + n)
    length = 3
    n_inputs = 1
    n_outputs = 1

    taps = LazyAttribute(
        lambda o: np.random.default_rng(o.seed).standard_normal(
            (o.length + 1, o.n_outputs, o.n_inputs),
        ),
    )

    class Meta:
        model = FIR
        exclude = ("seed", "length", "n_inputs", "n_outputs")
