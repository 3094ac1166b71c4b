"""Shared plumbing of the experiment commands: flags, run ledger, log capture, exit codes."""

from __future__ import annotations

import contextlib
import io
import logging
from collections.abc import Iterator
from pathlib import Path
from typing import Any

from django.conf import settings
from django.core.management.base import BaseCommand
from django.core.management.base import CommandError

import app
from app.evaluation.exceptions import EvaluationError
from app.experiments.configs import config_digest
from app.experiments.configs import load_config
from app.experiments.exceptions import ConfigError
from app.experiments.models import ExperimentRun
from app.experiments.reports import ReportBundle
from app.experiments.reports import format_number
from app.experiments.reports import to_jsonable
from app.experiments.reports import write_bundle
from app.experiments.reports import write_error
from app.experiments.serializers import ProblemConfig
from app.lmi.exceptions import LMIError
from app.lmi.program import override_solver_options
from app.lti.exceptions import LTIError
from app.synthesis.exceptions import SynthesisError

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)s %(name)s %(message)s"
RUN_ERRORS = (SynthesisError, EvaluationError, LMIError, LTIError)


@contextlib.contextmanager
def capture_logs(level: int = logging.DEBUG) -> Iterator[io.StringIO]:
    """Copy ``app.*`` records into a buffer for the bundle's ``solver.log``."""
    stream = io.StringIO()
    handler = logging.StreamHandler(stream)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    target = logging.getLogger("app")
    target.addHandler(handler)
    try:
        yield stream
    finally:
        target.removeHandler(handler)


class ExperimentCommand(BaseCommand):
    """Load a config, run, write the bundle, record an :class:`ExperimentRun`.

    Exit codes: 0 when every solve was optimal and every check passed, 1 when
    the run failed or a check did not pass (the bundle is still written), 2 when
    the config was rejected (only ``error.json`` is written).
    """

    command_name = ""

    def add_arguments(self, parser):
        self.add_config_argument(parser)
        parser.add_argument("--out-dir", help="bundle directory (default: EXPERIMENTS_OUTPUT_DIR/<command>-<name>)")
        parser.add_argument("--seed", type=int, help="overrides mc.seed")
        parser.add_argument("--threads", type=int, help="Monte-Carlo threads (default: MC_THREADS)")
        parser.add_argument("--solver-tol", type=float, help="overrides LMI_SOLVER_TOL and solver.tol")
        parser.add_argument("--label", default="", help="free-text label stored with the run")

    def add_config_argument(self, parser):
        parser.add_argument("--config", required=True, help="path to a JSON experiment config")

    def config_source(self, options: dict[str, Any]) -> Path:
        return Path(options["config"])

    def run(self, config: ProblemConfig, seed: int, options: dict[str, Any]) -> ReportBundle:
        raise NotImplementedError

    def default_out_dir(self, options: dict[str, Any], name: str) -> Path:
        return Path(settings.EXPERIMENTS_OUTPUT_DIR) / f"{self.command_name}-{name}"

    def _reject(self, out_dir: Path, exc: ConfigError) -> CommandError:
        path = write_error(out_dir, str(exc), exc.errors)
        self.stderr.write(f"{exc}; details in {path}")
        return CommandError(str(exc), returncode=2)

    def handle(self, *args, **options):
        source = self.config_source(options)
        fallback = Path(options["out_dir"]) if options["out_dir"] else self.default_out_dir(options, source.stem)
        try:
            config, data = load_config(source)
        except ConfigError as exc:
            raise self._reject(fallback, exc) from exc

        out_dir = Path(options["out_dir"]) if options["out_dir"] else self.default_out_dir(options, config.name)
        seed = options["seed"] if options["seed"] is not None else config.mc.seed
        experiment = ExperimentRun.objects.create(
            command=self.command_name,
            label=options["label"] or config.name,
            config_digest=config_digest(data),
            seed=seed,
            output_dir=str(out_dir),
            version=app.__version__,
        )
        solver = config.solver.overrides()
        if options["solver_tol"] is not None:
            solver["tol"] = options["solver_tol"]

        with capture_logs() as log, override_solver_options(**solver):
            try:
                bundle = self.run(config, seed, options)
            except ConfigError as exc:
                experiment.finish(2, {"error": str(exc)})
                raise self._reject(out_dir, exc) from exc
            except RUN_ERRORS as exc:
                logger.exception("%s failed", self.command_name)
                bundle = ReportBundle(metrics={"error": str(exc), "error_type": type(exc).__name__})
                bundle.checks["completed"] = False
        write_bundle(bundle, out_dir, log.getvalue())

        exit_code = 0 if bundle.passed else 1
        failed = sorted(name for name, passed in bundle.checks.items() if not passed)
        experiment.finish(exit_code, to_jsonable({"rows": bundle.rows, "failed_checks": failed}))
        for row in bundle.rows:
            self.stdout.write("  ".join(f"{key}={format_number(value)}" for key, value in row.items()))
        if exit_code:
            msg = f"{self.command_name} finished with failed checks: {', '.join(failed)} (bundle in {out_dir})"
            raise CommandError(msg, returncode=1)
        self.stdout.write(self.style.SUCCESS(f"Bundle written to {out_dir}"))
