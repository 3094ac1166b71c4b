from app.experiments.management.base import ExperimentCommand
from app.experiments.runners import mc_bundle
from app.experiments.runners import synthesize


class Command(ExperimentCommand):
    help = "Monte-Carlo comparison of the a/w and minimax estimators over the uncertainty set."
    command_name = "mc"

    def run(self, config, seed, options):
        reports = synthesize(config)
        bundle = mc_bundle(config, reports, seed, options["threads"])
        bundle.estimators.update({name: report.estimator for name, report in reports.items()})
        return bundle
