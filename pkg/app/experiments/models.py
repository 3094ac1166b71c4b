from django.db import models
from django.utils.translation import gettext_lazy as _
from model_utils.models import TimeStampedModel


class RunStatus(models.TextChoices):
    RUNNING = "running", _("Running")
    SUCCEEDED = "succeeded", _("Succeeded")
    FAILED = "failed", _("Failed")


class ExperimentRun(TimeStampedModel):
    """One invocation of an experiment command and where its bundle went."""

    command = models.CharField(max_length=32)
    label = models.CharField(max_length=120, blank=True)
    config_digest = models.CharField(
        max_length=64,
        blank=True,
        help_text=_("sha256 of the config bytes"),
    )
    seed = models.BigIntegerField(null=True, blank=True)
    status = models.CharField(max_length=16, choices=RunStatus.choices, default=RunStatus.RUNNING)
    exit_code = models.SmallIntegerField(null=True, blank=True)
    output_dir = models.CharField(max_length=500)
    summary = models.JSONField(default=dict, blank=True)
    version = models.CharField(max_length=32)

    class Meta:
        ordering = ["-created"]

    def __str__(self) -> str:
        return f"{self.command} {self.label or self.config_digest[:12]} ({self.status})"

    def finish(self, exit_code: int, summary: dict | None = None) -> None:
        self.exit_code = exit_code
        self.status = RunStatus.SUCCEEDED if exit_code == 0 else RunStatus.FAILED
        if summary is not None:
            self.summary = summary
        self.save(update_fields=["exit_code", "status", "summary", "modified"])
