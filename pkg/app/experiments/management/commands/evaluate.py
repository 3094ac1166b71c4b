import json
from pathlib import Path

from app.experiments.exceptions import EstimatorFileError
from app.experiments.management.base import ExperimentCommand
from app.experiments.runners import MINIMAX
from app.experiments.runners import evaluation_bundle
from app.experiments.runners import synthesize
from app.lti.exceptions import LTIError
from app.lti.systems import StateSpace


def load_estimator(path: Path) -> StateSpace:
    try:
        return StateSpace.from_dict(json.loads(path.read_text()))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError, LTIError) as exc:
        msg = f"cannot read estimator {path}: {exc}"
        raise EstimatorFileError(msg) from exc


class Command(ExperimentCommand):
    help = "Evaluate a serialized estimator against the minimax design of a config."
    command_name = "evaluate"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--estimator", required=True, help='JSON estimator {"type": "ss", "A", "B", "C", "D"}')

    def run(self, config, seed, options):
        path = Path(options["estimator"])
        G = load_estimator(path)
        minimax = synthesize(config, minimax_only=True)[MINIMAX]
        bundle = evaluation_bundle(config, path.stem, G, minimax)
        bundle.estimators[MINIMAX] = minimax.estimator
        return bundle
