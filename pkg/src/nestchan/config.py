"""Scenario configuration (JSON) for single estimates and Monte-Carlo sweeps."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .geometry import SelectionSet, build, parse_indices

METHODS = ("primal", "dual", "anm")
ARRAY_TYPES = ("nested", "mra", "coprime", "ula")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    """One experiment cell family: geometry, channel statistics and solver knobs.

    Only ``N``, ``M`` and ``array_type`` describe the switch network; ``indices``
    overrides the constructed set when given (1-based).
    """

    N: int = 32
    M: int = 11
    array_type: str = "nested"
    L: int = 3
    K: int = 3
    theta_range_deg: tuple = (-30.0, 30.0)
    f_range: tuple = (0.1, 0.7)
    snr_db: tuple = (0.0, 10.0, 20.0, 30.0)
    trials: int = 10
    seed: int = 0
    name: str = "scenario"
    methods: tuple = ("primal",)
    indices: tuple | None = None
    gain: str = "gaussian"
    noiseless: bool = False
    tau: float = 1e-3
    anm_kappa: float = 1.0
    backend: str = "interior-point"
    max_iterations: int = 20000
    abs_tolerance: float = 1e-8
    rel_tolerance: float = 1e-6
    decomposition_tolerance: float = float("inf")
    match_weight: tuple = (1.0, 0.01)

    def __post_init__(self):
        for key in ("theta_range_deg", "f_range", "snr_db", "methods", "match_weight"):
            v = getattr(self, key)
            v = (v,) if isinstance(v, (int, float, str)) else tuple(v)
            object.__setattr__(self, key, v)
        if self.indices is not None:
            object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        self.validate()

    def validate(self):
        if self.array_type not in ARRAY_TYPES:
            raise ConfigError(f"array_type must be one of {ARRAY_TYPES}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ConfigError(f"unknown methods {bad}; choose from {METHODS}")
        for key in ("N", "M", "L", "K", "trials"):
            if int(getattr(self, key)) < 1:
                raise ConfigError(f"{key} must be >= 1")
        if self.M > self.N:
            raise ConfigError("M cannot exceed N")
        if len(self.theta_range_deg) != 2 or not -90 < self.theta_range_deg[0] <= self.theta_range_deg[1] < 90:
            raise ConfigError("theta_range_deg must be an increasing pair inside (-90, 90)")
        if len(self.f_range) != 2 or self.f_range[0] > self.f_range[1]:
            raise ConfigError("f_range must be an increasing pair")
        if not self.snr_db:
            raise ConfigError("snr_db must list at least one value")
        if self.gain not in ("gaussian", "unit"):
            raise ConfigError("gain must be 'gaussian' or 'unit'")
        if self.tau <= 0 or self.anm_kappa <= 0:
            raise ConfigError("tau and anm_kappa must be positive")
        if len(self.match_weight) != 2 or min(self.match_weight) <= 0:
            raise ConfigError("match_weight must be a positive (degrees, doppler) pair")

    def selection(self) -> SelectionSet:
        if self.indices is not None:
            s = parse_indices(self.indices, self.N)
            if s.M != self.M:
                raise ConfigError(f"indices has {s.M} entries but M = {self.M}")
            return s
        return build(self.array_type, self.N, self.M)

    def with_overrides(self, **kw) -> "Scenario":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}


_FIELDS = {f.name for f in fields(Scenario)}


def scenario_from_dict(data: dict) -> Scenario:
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        return Scenario(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_scenario(path: str | Path) -> Scenario:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return scenario_from_dict(data)


# presets for the four experiment figures at desk scale
PRESETS = {
    "fig3": dict(name="fig3", N=32, M=11, array_type="nested", L=5, K=7, snr_db=(20.0,),
                 trials=1, methods=("primal", "dual")),
    "fig4": dict(name="fig4", N=14, M=6, L=5, K=3, snr_db=(0.0, 10.0, 20.0, 30.0), trials=50,
                 methods=("primal",)),
    "fig5": dict(name="fig5", N=32, M=11, array_type="nested", L=3, K=3,
                 snr_db=(-20.0, -10.0, 0.0, 10.0, 20.0, 30.0), trials=50,
                 methods=("primal", "dual", "anm")),
    "fig6": dict(name="fig6", N=32, M=11, array_type="nested", L=3, K=3,
                 snr_db=(-20.0, -10.0, 0.0, 10.0, 20.0, 30.0), trials=50,
                 methods=("primal", "dual", "anm")),
}


def preset(name: str, **overrides) -> Scenario:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return scenario_from_dict({**PRESETS[name], **overrides})
