from dataclasses import replace

from app.experiments.management.base import ExperimentCommand
from app.experiments.runners import design_bundle
from app.experiments.runners import synthesize
from app.experiments.serializers import SynthesisKind


class Command(ExperimentCommand):
    help = "Synthesize the minimax (and a/w) estimators of a config and tabulate them."
    command_name = "synth"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--kind",
            choices=[kind.value for kind in SynthesisKind],
            help="overrides synthesis.kind",
        )
        parser.add_argument("--alpha", type=float, help="overrides synthesis.alpha")

    def run(self, config, seed, options):
        if options["kind"]:
            config = replace(config, synthesis=SynthesisKind(options["kind"]))
        if options["alpha"] is not None:
            config = replace(config, alpha=options["alpha"])
        return design_bundle(config, synthesize(config), seed)
