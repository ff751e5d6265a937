"""
Dynamic hot-spot temperature and insulation loss-of-life model.

Implements the IEEE Std C57.91 aging relations for an oil-immersed
transformer driven by an interval series of ambient temperature and load
ratio:

    per-unit life   L(θ_H)   = A · exp(B / (θ_H + 273))
    aging factor    F_AA     = exp(B/383 − B/(θ_H + 273))
    equivalent      F_EQA    = Σ F_AA,n Δt_n / Σ Δt_n
    loss of life    LOL %    = F_EQA · t · 100 / normal life
    hot spot        θ_H      = θ_A + Δθ_TO + Δθ_H
    transient       Δθ(t)    = (Δθ_U − Δθ_i)(1 − e^(−t/τ)) + Δθ_i
    top-oil rise    Δθ_TO,x  = Δθ_TO,R ((K_x² R + 1)/(R + 1))^n
    hot-spot rise   Δθ_H,x   = Δθ_H,R K_x^(2m)

The initial load ratio K_i of an interval is the ultimate load ratio K_U of
the interval before it, which is what makes the model dynamic.

Two conventions exist for the initial rises of an interval:

* ``"literal"`` (default): Δθ_TO,i and Δθ_H,i are recomputed from K_i with
  the ultimate-rise formulas, so each interval only remembers the previous
  load ratio.
* ``"carry"``: the initial rises are the actual rises reached at the end of
  the previous interval, so the oil temperature relaxes over many intervals.

The two agree whenever the load changes slowly compared with the top-oil
time constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, InputError

REFERENCE_HOTSPOT_K = 383.0  # 110 °C, the one-per-unit-life temperature
KELVIN_OFFSET = 273.0

ROUTING_MODES = ("literal", "carry")
START_MODES = ("warm", "cold")


@dataclass(frozen=True)
class TransformerParams:
    """Nameplate and thermal constants of the studied transformer.

    Defaults are the 934 A distribution transformer used for the
    surrogate study (R = 7.43, m = n = 0.8, rated rises 17.6 / 53.9 °C,
    top-oil time constant 6.8 h). The winding time constant is not part of
    that data set and defaults to five minutes.
    """

    rated_current: float = 934.0
    loss_ratio_R: float = 7.43
    exponent_m: float = 0.8
    exponent_n: float = 0.8
    hotspot_rise_rated: float = 17.6
    topoil_rise_rated: float = 53.9
    topoil_time_constant: float = 6.8
    winding_time_constant: float = 5.0 / 60.0
    normal_insulation_life: float = 180000.0
    arrhenius_A: float = 9.8e-18
    arrhenius_B: float = 15000.0

    def __post_init__(self):
        for name in (
            "rated_current",
            "loss_ratio_R",
            "hotspot_rise_rated",
            "topoil_rise_rated",
            "topoil_time_constant",
            "winding_time_constant",
            "normal_insulation_life",
            "arrhenius_A",
        ):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be finite and > 0, got {value!r}")
        for name in ("exponent_m", "exponent_n"):
            value = getattr(self, name)
            if not 0.8 <= value <= 1.0:
                raise DomainError(f"{name} must lie in [0.8, 1.0], got {value!r}")
        if not 11350.0 <= self.arrhenius_B <= 18000.0:
            raise DomainError(f"arrhenius_B must lie in [11350, 18000], got {self.arrhenius_B!r}")

    @classmethod
    def from_mapping(cls, mapping) -> "TransformerParams":
        known = set(cls.__dataclass_fields__)
        unknown = set(mapping) - known
        if unknown:
            raise DomainError(f"unknown transformer parameter(s): {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in mapping.items()})

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


@dataclass(frozen=True)
class ThermalState:
    """What one interval hands to the next."""

    load_ratio_prev: float
    topoil_rise_current: float
    hotspot_rise_current: float

    def __post_init__(self):
        if not self.load_ratio_prev >= 0:
            raise DomainError(f"load_ratio_prev must be >= 0, got {self.load_ratio_prev!r}")
        if not (self.topoil_rise_current >= 0 and self.hotspot_rise_current >= 0):
            raise DomainError("thermal rises must be >= 0")


@dataclass(frozen=True)
class LolRecord:
    """Thermal outcome and loss-of-life contribution of one interval."""

    interval_index: int
    ambient_temp: float
    load_ratio: float
    hotspot_temp: float
    aging_factor: float
    lol_percent: float


def _check_temperature(hotspot_temp) -> float:
    value = float(hotspot_temp)
    if not math.isfinite(value):
        raise DomainError(f"hot-spot temperature must be finite, got {hotspot_temp!r}")
    if value <= -KELVIN_OFFSET:
        raise DomainError(f"hot-spot temperature must exceed -273 °C, got {value!r}")
    return value


def _check_load(load_ratio) -> float:
    value = float(load_ratio)
    if not (math.isfinite(value) and value >= 0):
        raise DomainError(f"load ratio must be finite and >= 0, got {load_ratio!r}")
    return value


def per_unit_life(hotspot_temp: float, params: TransformerParams = TransformerParams()) -> float:
    """Arrhenius per-unit insulation life at a hot-spot temperature in °C."""
    theta = _check_temperature(hotspot_temp)
    return params.arrhenius_A * math.exp(params.arrhenius_B / (theta + KELVIN_OFFSET))


def aging_acceleration_factor(
    hotspot_temp: float, params: TransformerParams = TransformerParams()
) -> float:
    """Aging rate relative to operation at the 110 °C reference hot spot."""
    theta = _check_temperature(hotspot_temp)
    b = params.arrhenius_B
    return math.exp(b / REFERENCE_HOTSPOT_K - b / (theta + KELVIN_OFFSET))


def ultimate_topoil_rise(load_ratio: float, params: TransformerParams = TransformerParams()) -> float:
    """Steady-state top-oil rise over ambient (°C) for a constant load ratio."""
    k = _check_load(load_ratio)
    r = params.loss_ratio_R
    return params.topoil_rise_rated * ((k * k * r + 1.0) / (r + 1.0)) ** params.exponent_n


def ultimate_hotspot_rise(load_ratio: float, params: TransformerParams = TransformerParams()) -> float:
    """Steady-state hot-spot rise over top oil (°C) for a constant load ratio."""
    k = _check_load(load_ratio)
    return params.hotspot_rise_rated * k ** (2.0 * params.exponent_m)


def transient_rise(initial: float, ultimate: float, elapsed: float, time_constant: float) -> float:
    """First-order exponential relaxation from ``initial`` toward ``ultimate``."""
    if not (math.isfinite(time_constant) and time_constant > 0):
        raise DomainError(f"time_constant must be > 0, got {time_constant!r}")
    if not elapsed >= 0:
        raise DomainError(f"elapsed time must be >= 0, got {elapsed!r}")
    if math.isinf(elapsed):
        return float(ultimate)
    return (ultimate - initial) * -math.expm1(-elapsed / time_constant) + initial


def initial_state(
    load_ratio: float, params: TransformerParams = TransformerParams(), start: str = "warm"
) -> ThermalState:
    """State before the first interval.

    ``"warm"`` places both rises at their ultimate values for ``load_ratio``;
    ``"cold"`` starts them at zero (oil at ambient).
    """
    if start not in START_MODES:
        raise DomainError(f"start must be one of {START_MODES}, got {start!r}")
    k = _check_load(load_ratio)
    if start == "cold":
        return ThermalState(k, 0.0, 0.0)
    return ThermalState(k, ultimate_topoil_rise(k, params), ultimate_hotspot_rise(k, params))


def step_interval(
    state: ThermalState,
    ambient_temp: float,
    load_ratio: float,
    dt: float,
    params: TransformerParams = TransformerParams(),
    *,
    mode: str = "literal",
    index: int = 0,
) -> tuple[ThermalState, LolRecord]:
    """Advance the thermal state across one interval of length ``dt`` hours."""
    if not (math.isfinite(dt) and dt > 0):
        raise DomainError(f"dt must be > 0, got {dt!r}")
    if mode not in ROUTING_MODES:
        raise DomainError(f"mode must be one of {ROUTING_MODES}, got {mode!r}")
    theta_a = float(ambient_temp)
    if not math.isfinite(theta_a):
        raise DomainError(f"ambient temperature must be finite, got {ambient_temp!r}")
    k_u = _check_load(load_ratio)

    if mode == "literal":
        topoil_i = ultimate_topoil_rise(state.load_ratio_prev, params)
        hotspot_i = ultimate_hotspot_rise(state.load_ratio_prev, params)
    else:
        topoil_i = state.topoil_rise_current
        hotspot_i = state.hotspot_rise_current

    topoil = transient_rise(topoil_i, ultimate_topoil_rise(k_u, params), dt, params.topoil_time_constant)
    hotspot = transient_rise(
        hotspot_i, ultimate_hotspot_rise(k_u, params), dt, params.winding_time_constant
    )
    theta_h = theta_a + topoil + hotspot
    f_aa = aging_acceleration_factor(theta_h, params)
    lol = loss_of_life_percent(f_aa, dt, params)

    new_state = ThermalState(k_u, topoil, hotspot)
    record = LolRecord(index, theta_a, k_u, theta_h, f_aa, lol)
    return new_state, record


def run_profile(
    series,
    params: TransformerParams = TransformerParams(),
    initial_load_ratio: float | None = None,
    *,
    start: str = "warm",
    mode: str = "literal",
    dt: float = 1.0,
) -> list[LolRecord]:
    """Fold :func:`step_interval` over an interval series.

    ``series`` needs ``ambient_temp`` and ``load_ratio`` sequences of equal
    length (an :class:`~xfmr_aging.dataset.HourlySeries` qualifies).
    ``initial_load_ratio`` defaults to the first load ratio for a warm start
    and to zero for a cold start.
    """
    temps = np.asarray(series.ambient_temp, dtype=float)
    loads = np.asarray(series.load_ratio, dtype=float)
    if temps.shape != loads.shape or temps.ndim != 1:
        raise InputError("ambient_temp and load_ratio must be 1-D and of equal length")
    if temps.size == 0:
        raise InputError("cannot run an empty profile")
    if initial_load_ratio is None:
        initial_load_ratio = loads[0] if start == "warm" else 0.0

    state = initial_state(initial_load_ratio, params, start)
    records = []
    for i, (theta_a, k) in enumerate(zip(temps.tolist(), loads.tolist())):
        state, record = step_interval(state, theta_a, k, dt, params, mode=mode, index=i)
        records.append(record)
    return records


def equivalent_aging(records: Sequence[LolRecord] | Iterable[float], dt=1.0) -> float:
    """Time-weighted mean aging factor.

    ``records`` may be :class:`LolRecord` objects or bare aging factors;
    ``dt`` is either one interval length or one length per record.
    """
    factors = np.array(
        [r.aging_factor if isinstance(r, LolRecord) else float(r) for r in records], dtype=float
    )
    if factors.size == 0:
        raise InputError("equivalent aging needs at least one interval")
    dts = np.broadcast_to(np.asarray(dt, dtype=float), factors.shape)
    if np.any(dts <= 0):
        raise DomainError("interval lengths must be > 0")
    return float(np.sum(factors * dts) / np.sum(dts))


def loss_of_life_percent(
    equivalent_aging: float, total_hours: float, params: TransformerParams = TransformerParams()
) -> float:
    """Percent of normal insulation life consumed over ``total_hours``."""
    if equivalent_aging < 0 or total_hours < 0:
        raise DomainError("equivalent aging and elapsed time must be >= 0")
    return equivalent_aging * total_hours * 100.0 / params.normal_insulation_life


def records_as_arrays(records: Sequence[LolRecord]) -> dict[str, np.ndarray]:
    """Column view of a record list, keyed by field name."""
    fields = LolRecord.__dataclass_fields__
    return {
        name: np.array([getattr(r, name) for r in records], dtype=int if name == "interval_index" else float)
        for name in fields
    }

