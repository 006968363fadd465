import math

from django.conf import settings
from rest_framework import serializers

from pulses.models import PulseEnvelope
from single_qubit_rotation.models import FRAME_CHOICES
from two_qubit_cavity.models import SPACE_CHOICES

SCENARIO_TYPES = ("single_qubit", "two_qubit_transfer", "two_qubit_fstirap", "device_spectrum")
AMPLITUDE_TOLERANCE = 1e-12


class ComplexField(serializers.Field):
    """A JSON number or a ``[re, im]`` pair."""

    default_error_messages = {
        "invalid": "Expected a number or a [re, im] pair.",
        "not_finite": "Complex values must be finite.",
    }

    def to_internal_value(self, data):
        if isinstance(data, bool):
            self.fail("invalid")
        if isinstance(data, (int, float)):
            value = complex(data)
        elif isinstance(data, (list, tuple)) and len(data) == 2:
            if any(isinstance(part, bool) or not isinstance(part, (int, float)) for part in data):
                self.fail("invalid")
            value = complex(data[0], data[1])
        else:
            self.fail("invalid")
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            self.fail("not_finite")
        return value

    def to_representation(self, value):
        value = complex(value)
        return [value.real, value.imag]


class PositiveFloatField(serializers.FloatField):
    default_error_messages = {"not_positive": "Must be positive."}

    def to_internal_value(self, data):
        value = super().to_internal_value(data)
        if not value > 0:
            self.fail("not_positive")
        return value


def resolved(serializer_class, data=None) -> dict:
    """Validated data of a nested block, with its defaults applied."""
    serializer = serializer_class(data={} if data is None else data)
    serializer.is_valid(raise_exception=True)
    return dict(serializer.validated_data)


class PulseSerializer(serializers.Serializer):
    shape = serializers.ChoiceField(choices=PulseEnvelope.SHAPE_CHOICES)
    amplitude = ComplexField(default=1.0)
    center = serializers.FloatField(default=0.0)
    width = serializers.FloatField(required=False, allow_null=True, default=None)
    duration = serializers.FloatField(required=False, allow_null=True, default=None)
    terms = serializers.ListField(child=serializers.DictField(), required=False, default=list)

    def validate_terms(self, terms):
        validated = []
        for index, term in enumerate(terms):
            serializer = PulseTermSerializer(data=term)
            if not serializer.is_valid():
                raise serializers.ValidationError({index: serializer.errors})
            validated.append(dict(serializer.validated_data))
        return validated

    def validate(self, attrs):
        try:
            PulseSerializer.to_envelope(attrs)
        except ValueError as ex:
            raise serializers.ValidationError(str(ex))
        return attrs

    @staticmethod
    def to_envelope(data: dict, scale: float = 1.0) -> PulseEnvelope:
        """Build the envelope, multiplying every amplitude by ``scale``."""
        if data["shape"] == "scaled_sum":
            return PulseEnvelope.scaled_sum(
                [
                    (term["coefficient"], PulseSerializer.to_envelope(term["pulse"], scale))
                    for term in data["terms"]
                ]
            )
        return PulseEnvelope(
            data["shape"],
            amplitude=data["amplitude"] * scale,
            center=data["center"],
            width=data.get("width"),
            duration=data.get("duration"),
        )


class PulseTermSerializer(serializers.Serializer):
    coefficient = ComplexField(default=1.0)
    pulse = serializers.DictField()

    def validate_pulse(self, pulse):
        serializer = PulseSerializer(data=pulse)
        if not serializer.is_valid():
            raise serializers.ValidationError(serializer.errors)
        return dict(serializer.validated_data)


class IntegratorSerializer(serializers.Serializer):
    dt = PositiveFloatField(default=lambda: settings.DEFAULT_DT)


class OutputSerializer(serializers.Serializer):
    directory = serializers.CharField(required=False, allow_null=True, default=None)
    emit_trajectory = serializers.BooleanField(default=True)
    emit_summary = serializers.BooleanField(default=True)
    emit_plotdata = serializers.BooleanField(default=False)
    stride = serializers.IntegerField(min_value=1, default=lambda: settings.TRAJECTORY_STRIDE)


class SingleQubitParamsSerializer(serializers.Serializer):
    phi = serializers.FloatField()
    eta = serializers.FloatField()
    model = serializers.ChoiceField(choices=("rabi", "raman"), default="rabi")
    frame = serializers.ChoiceField(choices=FRAME_CHOICES, default="rotating")
    psi_i = serializers.ListField(
        child=ComplexField(), min_length=2, max_length=2, default=lambda: [1 + 0j, 0j]
    )
    # rabi
    m = serializers.IntegerField(min_value=1, default=1)
    delta = serializers.FloatField(required=False)
    Omega = PositiveFloatField(required=False)
    # raman
    pulse = PulseSerializer(required=False)
    Delta = serializers.FloatField(required=False)
    t_start = serializers.FloatField(required=False)
    t_end = serializers.FloatField(required=False)

    REQUIRED_BY_MODEL = {"rabi": ("delta", "Omega"), "raman": ("pulse", "Delta", "t_start", "t_end")}

    def validate_psi_i(self, value):
        norm = sum(abs(c) ** 2 for c in value)
        if abs(norm - 1.0) > AMPLITUDE_TOLERANCE:
            raise serializers.ValidationError(f"Initial state has norm^2 {norm!r}, expected 1.")
        return value

    def validate(self, attrs):
        missing = {
            name: ["This field is required."]
            for name in self.REQUIRED_BY_MODEL[attrs["model"]]
            if name not in attrs
        }
        if missing:
            raise serializers.ValidationError(missing)
        if attrs["model"] == "raman":
            if attrs["Delta"] == 0:
                raise serializers.ValidationError({"Delta": ["Raman model needs a non-zero detuning."]})
            if attrs["t_end"] <= attrs["t_start"]:
                raise serializers.ValidationError({"t_end": ["Must exceed t_start."]})
        return attrs


class CavitySerializerMixin:
    """Time-window check shared by both cavity scenarios."""

    def validate(self, attrs):
        if attrs["t_end"] <= attrs["t_start"]:
            raise serializers.ValidationError({"t_end": ["Must exceed t_start."]})
        return attrs


class TransferParamsSerializer(CavitySerializerMixin, serializers.Serializer):
    g = serializers.FloatField()
    Delta_prime = serializers.FloatField(default=0.0)
    pulse_A = PulseSerializer()
    pulse_B = PulseSerializer()
    t_start = serializers.FloatField()
    t_end = serializers.FloatField()
    space = serializers.ChoiceField(choices=SPACE_CHOICES, default="closed5")
    n_max = serializers.IntegerField(min_value=1, default=2)
    c0 = ComplexField(default=1.0)
    c1 = ComplexField(default=0.0)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        norm = abs(attrs["c0"]) ** 2 + abs(attrs["c1"]) ** 2
        if abs(norm - 1.0) > AMPLITUDE_TOLERANCE:
            raise serializers.ValidationError(
                {"c1": [f"|c0|^2 + |c1|^2 is {norm!r}, expected 1."]}
            )
        return attrs


class FractionalParamsSerializer(CavitySerializerMixin, serializers.Serializer):
    g = serializers.FloatField()
    Delta_prime = serializers.FloatField(default=0.0)
    Omega_bar = ComplexField()
    tau_A = serializers.FloatField()
    tau_B = serializers.FloatField()
    tau_p = PositiveFloatField()
    theta = serializers.FloatField()
    xi = serializers.FloatField(default=0.0)
    t_start = serializers.FloatField()
    t_end = serializers.FloatField()
    space = serializers.ChoiceField(choices=SPACE_CHOICES, default="closed5")
    n_max = serializers.IntegerField(min_value=1, default=2)


class GridSerializer(serializers.Serializer):
    phi_min = serializers.FloatField()
    phi_max = serializers.FloatField()
    n_points = serializers.IntegerField(min_value=3)

    def validate(self, attrs):
        if attrs["phi_max"] <= attrs["phi_min"]:
            raise serializers.ValidationError({"phi_max": ["Must exceed phi_min."]})
        return attrs


class DeviceParamsSerializer(serializers.Serializer):
    L = PositiveFloatField()
    C = PositiveFloatField()
    I_c = serializers.FloatField(min_value=0.0)
    Phi_x = serializers.FloatField()
    grid = GridSerializer(required=False, allow_null=True, default=None)
    n_levels = serializers.IntegerField(min_value=3, default=6)


PARAMS_SERIALIZERS = {
    "single_qubit": SingleQubitParamsSerializer,
    "two_qubit_transfer": TransferParamsSerializer,
    "two_qubit_fstirap": FractionalParamsSerializer,
    "device_spectrum": DeviceParamsSerializer,
}


class ScenarioConfigSerializer(serializers.Serializer):
    scenario_type = serializers.ChoiceField(choices=SCENARIO_TYPES)
    unit_scale = PositiveFloatField(default=1.0)
    integrator = IntegratorSerializer(required=False)
    output = OutputSerializer(required=False)
    params = serializers.DictField()

    def validate(self, attrs):
        attrs["integrator"] = resolved(IntegratorSerializer, attrs.get("integrator"))
        attrs["output"] = resolved(OutputSerializer, attrs.get("output"))
        params = PARAMS_SERIALIZERS[attrs["scenario_type"]](data=attrs["params"])
        if not params.is_valid():
            raise serializers.ValidationError({"params": params.errors})
        attrs["params"] = dict(params.validated_data)
        return attrs
