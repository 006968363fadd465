from django.apps import AppConfig


class SingleQubitRotationConfig(AppConfig):
    name = "single_qubit_rotation"
    verbose_name = "Single-qubit rotation"
