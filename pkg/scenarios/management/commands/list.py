from django.core.management.base import BaseCommand

from scenarios.registry import BUILTIN_SCENARIOS


class Command(BaseCommand):
    help = "List the built-in scenarios"

    def handle(self, *args, **options):
        for name, (description, _) in BUILTIN_SCENARIOS.items():
            self.stdout.write(f"{name}  {description}")
