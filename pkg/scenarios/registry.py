import copy
import math

# name -> (description, config); iteration order is the listing order
BUILTIN_SCENARIOS = {
    "fig2": (
        "Rabi rotation |0> -> |1> with m=2, delta=pi, Omega=2 rad/ns",
        {
            "scenario_type": "single_qubit",
            "params": {
                "phi": 5 * math.pi / 4,
                "eta": math.pi,
                "model": "rabi",
                "m": 2,
                "delta": math.pi,
                "Omega": 2.0,
                "psi_i": [1.0, 0.0],
                "frame": "rotating",
            },
        },
    ),
    "fig4": (
        "Cavity-assisted STIRAP transfer |0,1,0> -> |1,0,0> between two SQUIDs",
        {
            "scenario_type": "two_qubit_transfer",
            "params": {
                "g": 3.0,
                "Delta_prime": 0.0,
                "pulse_A": {"shape": "gaussian", "amplitude": -2.0, "center": 23.0, "width": 6.5},
                "pulse_B": {"shape": "gaussian", "amplitude": -2.0, "center": 17.0, "width": 6.5},
                "t_start": 0.0,
                "t_end": 40.0,
                "space": "closed5",
                "c0": 1.0,
                "c1": 0.0,
            },
        },
    ),
    "fig5": (
        "Fractional STIRAP preparing (|0,1> + |1,0>)/sqrt(2)",
        {
            "scenario_type": "two_qubit_fstirap",
            "params": {
                "g": 3.0,
                "Delta_prime": 0.0,
                "Omega_bar": -2.0,
                "tau_A": 38.5,
                "tau_B": 25.0,
                "tau_p": 10.0,
                "theta": math.pi / 4,
                "xi": 0.0,
                "t_start": 0.0,
                "t_end": 60.0,
                "space": "closed5",
            },
        },
    ),
    "device": (
        "rf-SQUID flux levels for L=100 pH, C=40 fF, I_c=3.95 uA, Phi_x=-0.501",
        {
            "scenario_type": "device_spectrum",
            "params": {"L": 100.0, "C": 40.0, "I_c": 3.95, "Phi_x": -0.501, "n_levels": 6},
        },
    ),
    "raman-demo": (
        "Far-detuned Gaussian pulse rotating |0> by the adiabatic-elimination phase",
        {
            "scenario_type": "single_qubit",
            "params": {
                "phi": math.pi / 4,
                "eta": 0.0,
                "model": "raman",
                "pulse": {"shape": "gaussian", "amplitude": 2.0, "center": 10.0, "width": 3.0},
                "Delta": 20.0,
                "t_start": 0.0,
                "t_end": 20.0,
                "psi_i": [1.0, 0.0],
                "frame": "rotating",
            },
        },
    ),
}


def scenario_names() -> list[str]:
    return list(BUILTIN_SCENARIOS)


def builtin_config(name: str) -> dict:
    if name not in BUILTIN_SCENARIOS:
        raise KeyError(f"Unknown scenario {name!r}; choose from {', '.join(BUILTIN_SCENARIOS)}")
    return copy.deepcopy(BUILTIN_SCENARIOS[name][1])
