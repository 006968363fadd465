from django.core.management.base import BaseCommand, CommandError

from scenarios.registry import builtin_config
from scenarios.services import EXIT_VALIDATION, ScenarioService, exit_code_for, format_errors


class Command(BaseCommand):
    help = "Compute rf-SQUID flux levels and write potential, wavefunction and summary files"

    def add_arguments(self, parser):
        parser.add_argument("--config", help="device_spectrum JSON config (default: built-in 'device')")
        parser.add_argument("--out", help="output directory (default: config or OUTPUT_DIR)")

    def handle(self, *args, **options):
        config, errors = ScenarioService.load_config(options["config"] or builtin_config("device"))
        if errors:
            raise CommandError(f"Invalid config:\n{format_errors(errors)}", returncode=EXIT_VALIDATION)
        if config["scenario_type"] != "device_spectrum":
            raise CommandError(
                f"Expected a device_spectrum config, got {config['scenario_type']}",
                returncode=EXIT_VALIDATION,
            )

        try:
            summary, written = ScenarioService.run(config, options["out"])
        except (ValueError, ArithmeticError) as ex:
            raise CommandError(f"Device spectrum failed: {ex}", returncode=exit_code_for(ex))

        for path in written:
            self.stdout.write(f"wrote {path}")
        if summary["classification"] is None:
            self.stderr.write(summary["classification_error"])
