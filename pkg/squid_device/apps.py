from django.apps import AppConfig


class SquidDeviceConfig(AppConfig):
    name = "squid_device"
    verbose_name = "rf-SQUID device"
