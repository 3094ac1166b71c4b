import django.utils.timezone
import model_utils.fields
from django.db import migrations
from django.db import models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "created",
                    model_utils.fields.AutoCreatedField(
                        default=django.utils.timezone.now,
                        editable=False,
                        verbose_name="created",
                    ),
                ),
                (
                    "modified",
                    model_utils.fields.AutoLastModifiedField(
                        default=django.utils.timezone.now,
                        editable=False,
                        verbose_name="modified",
                    ),
                ),
                ("command", models.CharField(max_length=32)),
                ("label", models.CharField(blank=True, max_length=120)),
                (
                    "config_digest",
                    models.CharField(
                        blank=True,
                        help_text="sha256 of the config bytes",
                        max_length=64,
                    ),
                ),
                ("seed", models.BigIntegerField(blank=True, null=True)),
                (
                    "status",
                    models.CharField(
                        choices=[
                            ("running", "Running"),
                            ("succeeded", "Succeeded"),
                            ("failed", "Failed"),
                        ],
                        default="running",
                        max_length=16,
                    ),
                ),
                ("exit_code", models.SmallIntegerField(blank=True, null=True)),
                ("output_dir", models.CharField(max_length=500)),
                ("summary", models.JSONField(blank=True, default=dict)),
                ("version", models.CharField(max_length=32)),
            ],
            options={
                "ordering": ["-created"],
            },
        ),
    ]
