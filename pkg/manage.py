#!/usr/bin/env python
"""squidlab command line: scenarios, device spectra and the test suite.

    python manage.py list
    python manage.py run --scenario fig4 --out runs/
    python manage.py device_spectrum --config device.json
    python manage.py test
"""
import os
import sys


def main():
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "squidlab.settings")
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the packages in requirements.txt "
            "into the active environment first."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == "__main__":
    main()
