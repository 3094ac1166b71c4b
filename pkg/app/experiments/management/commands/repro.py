from pathlib import Path

from django.core.management.base import CommandError

from app.experiments.configs import EXAMPLES
from app.experiments.configs import example_path
from app.experiments.management.base import ExperimentCommand
from app.experiments.runners import design_bundle
from app.experiments.runners import mc_bundle
from app.experiments.runners import synthesize


class Command(ExperimentCommand):
    help = "Reproduce one of the shipped examples end to end: designs, tables, improvement metrics and Monte Carlo."
    command_name = "repro"

    def add_config_argument(self, parser):
        parser.add_argument("example", choices=list(EXAMPLES))
        parser.add_argument("--skip-mc", action="store_true", help="tables and certificates only")

    def config_source(self, options):
        if options["example"] not in EXAMPLES:
            msg = f"unknown example {options['example']!r}"
            raise CommandError(msg, returncode=2)
        return example_path(options["example"])

    def default_out_dir(self, options, name) -> Path:
        return super().default_out_dir(options, options["example"])

    def run(self, config, seed, options):
        reports = synthesize(config)
        bundle = design_bundle(config, reports, seed)
        if not options["skip_mc"]:
            bundle.merge(mc_bundle(config, reports, seed, options["threads"]))
        return bundle
