import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "squidlab.settings")
django.setup()
