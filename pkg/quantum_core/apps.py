from django.apps import AppConfig


class QuantumCoreConfig(AppConfig):
    name = "quantum_core"
    verbose_name = "Quantum core"
