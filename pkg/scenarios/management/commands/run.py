from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from scenarios.registry import builtin_config, scenario_names
from scenarios.services import (
    EXIT_OK,
    EXIT_VALIDATION,
    ScenarioService,
    exit_code_for,
    format_errors,
)


class Command(BaseCommand):
    help = "Run a built-in scenario, a JSON config, or a sweep of configs"

    def add_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument("--scenario", choices=scenario_names(), help="built-in scenario name")
        source.add_argument("--config", help="path to a JSON scenario config")
        source.add_argument("--sweep", nargs="+", metavar="CONFIG", help="configs to run concurrently")
        parser.add_argument("--out", help="output directory (default: config or OUTPUT_DIR)")
        parser.add_argument("--dt", type=float, help="integrator step in ns, overrides the config")

    def handle(self, *args, **options):
        if options["sweep"]:
            return self.handle_sweep(options)

        source = builtin_config(options["scenario"]) if options["scenario"] else options["config"]
        config, errors = ScenarioService.load_config(source, dt=options["dt"])
        if errors:
            raise CommandError(f"Invalid config:\n{format_errors(errors)}", returncode=EXIT_VALIDATION)

        try:
            summary, written = ScenarioService.run(config, options["out"])
        except (ValueError, ArithmeticError) as ex:
            raise CommandError(f"{config['scenario_type']} run failed: {ex}", returncode=exit_code_for(ex))

        for path in written:
            self.stdout.write(f"wrote {path}")
        if flags := summary.get("flags"):
            self.stderr.write(f"flags: {', '.join(flags)}")

    def handle_sweep(self, options):
        out = options["out"] or settings.OUTPUT_DIR
        try:
            results = ScenarioService.sweep(options["sweep"], out, dt=options["dt"])
        except ValueError as ex:
            raise CommandError(str(ex), returncode=EXIT_VALIDATION)

        worst = EXIT_OK
        for path, code, message in results:
            self.stdout.write(f"{path}: {'ok' if code == EXIT_OK else f'exit {code}'} ({message})")
            worst = max(worst, code)
        if worst != EXIT_OK:
            raise CommandError("One or more sweep configs failed", returncode=worst)
