"""
Named flux families selectable from scenario files.
"""
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from fluxes.families import FluxFamily, as_polynomial, make_compatible_flux, make_weighted_flux_1d
from geometry.charts import FourierProfile, MetricChart, conformal_factor

BURGERS = (0.0, 0.0, 0.5)
LINEAR = (0.0, 1.0)
CUBIC = (0.0, 0.0, 0.0, 1.0 / 3.0)
ZERO = (0.0,)


def _constant_field(velocity: Sequence[float]):
    v = np.asarray(velocity, dtype=float)

    def field(pts):
        return np.broadcast_to(v, (pts.shape[0], v.shape[0])).copy()

    return field


def _velocity(params: Dict[str, object], default: Tuple[float, ...]) -> Tuple[float, ...]:
    return tuple(float(v) for v in params.get("velocity", default))


def _profile(params: Dict[str, object], default: Tuple[float, ...]) -> Tuple[float, ...]:
    return tuple(float(c) for c in params.get("coefficients", default))


def _flat_constant(name: str, default_profile, default_velocity, translation_invariant=True):
    def build(chart: MetricChart, params: Dict[str, object]) -> FluxFamily:
        velocity = _velocity(params, default_velocity)
        return make_compatible_flux(
            chart, _constant_field(velocity), _profile(params, default_profile), name=name,
            parameters={"velocity": list(velocity), "coefficients": list(_profile(params, default_profile))},
            translation_invariant=translation_invariant,
        )

    return build


def _shear(chart: MetricChart, params: Dict[str, object]) -> FluxFamily:
    def field(pts):
        return np.stack([np.sin(pts[:, 1]), np.sin(pts[:, 0])], axis=1)

    coefficients = _profile(params, CUBIC)
    return make_compatible_flux(chart, field, coefficients, name="shear_cubic_torus",
                                parameters={"coefficients": list(coefficients)})


def _wavy(chart: MetricChart, params: Dict[str, object]) -> FluxFamily:
    amplitude = float(chart.parameters.get("amplitude", 0.5))

    # c^2 V^1 independent of x1 makes d_1(sqrt|g| V^1) vanish
    def field(pts):
        c = conformal_factor(pts, amplitude)
        return np.stack([1.0 / c ** 2, np.zeros(pts.shape[0])], axis=1)

    coefficients = _profile(params, BURGERS)
    return make_compatible_flux(chart, field, coefficients, name="wavy_burgers_torus",
                                parameters={"coefficients": list(coefficients)})


def _zonal(name: str, default_profile):
    def build(chart: MetricChart, params: Dict[str, object]) -> FluxFamily:
        coefficients = _profile(params, default_profile)
        return make_compatible_flux(chart, _constant_field((0.0, 1.0)), coefficients, name=name,
                                    parameters={"coefficients": list(coefficients)})

    return build


def weight_profile(chart: MetricChart) -> FourierProfile:
    p = chart.parameters
    return FourierProfile(
        mean=float(p.get("k_mean", 2.0)),
        cos=tuple(float(v) for v in p.get("k_cos", ())),
        sin=tuple(float(v) for v in p.get("k_sin", (1.0,))),
    )


def _weighted(chart: MetricChart, params: Dict[str, object]) -> FluxFamily:
    coefficients = _profile(params, BURGERS)
    return make_weighted_flux_1d(weight_profile(chart), coefficients, name="weighted_burgers_1d",
                                 parameters={"coefficients": list(coefficients)})


def _weighted_compatible(chart: MetricChart, params: Dict[str, object]) -> FluxFamily:
    k = weight_profile(chart)

    def field(pts):
        return (1.0 / k(pts[:, 0])).reshape(-1, 1)

    coefficients = _profile(params, BURGERS)
    return make_compatible_flux(chart, field, coefficients, name="compatible_weighted_1d",
                                parameters={"coefficients": list(coefficients)})


def _zero(chart: MetricChart, params: Dict[str, object]) -> FluxFamily:
    return FluxFamily(
        name="zero_flux", chart=chart, profile=as_polynomial(ZERO),
        field=lambda pts: np.zeros(pts.shape), compatible=True, translation_invariant=True,
    )


# family name -> (charts it lives on, builder)
FLUX_FAMILIES: Dict[str, Tuple[Optional[Tuple[str, ...]], Callable[[MetricChart, Dict[str, object]], FluxFamily]]] = {
    "burgers_circle": (("flat_circle",), _flat_constant("burgers_circle", BURGERS, (1.0,))),
    "linear_transport_circle": (("flat_circle",), _flat_constant("linear_transport_circle", LINEAR, (1.0,))),
    "compatible_burgers_torus": (("flat_torus",), _flat_constant("compatible_burgers_torus", BURGERS, (1.0, 0.5))),
    "linear_transport_torus": (("flat_torus",), _flat_constant("linear_transport_torus", LINEAR, (1.0, 0.0))),
    "shear_cubic_torus": (("flat_torus",), _shear),
    "wavy_burgers_torus": (("wavy_torus",), _wavy),
    "zonal_transport_band": (("sphere_band",), _zonal("zonal_transport_band", LINEAR)),
    "zonal_burgers_band": (("sphere_band",), _zonal("zonal_burgers_band", BURGERS)),
    "weighted_burgers_1d": (("weighted_circle",), _weighted),
    "compatible_weighted_1d": (("weighted_circle",), _weighted_compatible),
    "zero_flux": (None, _zero),
}


def build_flux(family: str, chart: MetricChart, parameters: Optional[Dict[str, object]] = None) -> FluxFamily:
    """Construct a named flux family on a chart."""
    if family not in FLUX_FAMILIES:
        raise ValueError(f"Unknown flux family '{family}'")
    charts, builder = FLUX_FAMILIES[family]
    if charts is not None and chart.name not in charts:
        raise ValueError(f"Flux family '{family}' lives on {', '.join(charts)}, not on '{chart.name}'")
    return builder(chart, dict(parameters or {}))
