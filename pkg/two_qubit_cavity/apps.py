from django.apps import AppConfig


class TwoQubitCavityConfig(AppConfig):
    name = "two_qubit_cavity"
    verbose_name = "Two-qubit cavity"
