"""Scenario configuration: JSON schema, validation, and object building.

A scenario file is one JSON object with blocks `probe`, `bath`, `force`,
`grid`, `window`, `sequential`, and `options`; each subcommand requires a
subset (see the CLI). Unknown keys are rejected everywhere so typos fail
loudly before any computation runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Optional

import jsonschema
import numpy as np

from . import force as force_mod
from .bath import ContinuousSpectrum, DiscreteBath, OccupationModel, discretize
from .errors import ConfigError
from .force import ForceModulation
from .probe import GaussianProbeInit
from .response import TimeGrid, default_grid

_NUMBER = {"type": "number"}

_OCCUPATION_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["model"],
    "properties": {
        "model": {"enum": ["zero", "thermal", "constant"]},
        "temperature": _NUMBER,
        "value": _NUMBER,
    },
}

_BATH_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "modes": {
            "type": "array",
            "items": {
                "type": "array",
                "minItems": 3,
                "maxItems": 3,
                "items": _NUMBER,
            },
        },
        "continuum": {
            "type": "object",
            "additionalProperties": False,
            "required": ["family", "scale", "cutoff", "n_modes"],
            "properties": {
                "family": {"enum": ["flat", "ohmic"]},
                "s": _NUMBER,
                "scale": _NUMBER,
                "cutoff": _NUMBER,
                "cutoff_shape": {"enum": ["hard", "exponential"]},
                "n_modes": {"type": "integer", "minimum": 1},
                "occupation": _OCCUPATION_SCHEMA,
            },
        },
    },
}

_INIT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["vacuum", "coherent", "squeezed", "thermal", "matrix"]},
        "alpha_re": _NUMBER,
        "alpha_im": _NUMBER,
        "r": _NUMBER,
        "axis_angle": _NUMBER,
        "nbar": _NUMBER,
        "mean_re": _NUMBER,
        "mean_im": _NUMBER,
        "cov": {
            "type": "array",
            "minItems": 2,
            "maxItems": 2,
            "items": {"type": "array", "minItems": 2, "maxItems": 2,
                      "items": _NUMBER},
        },
    },
}

_FORCE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["constant", "sinusoid", "gaussian_pulse", "table"]},
        "value": _NUMBER,
        "amplitude": _NUMBER,
        "frequency": _NUMBER,
        "phase": _NUMBER,
        "center": _NUMBER,
        "width": _NUMBER,
        "times": {"type": "array", "items": _NUMBER, "minItems": 2},
        "values": {"type": "array", "items": _NUMBER, "minItems": 2},
        "support": {"type": "array", "minItems": 2, "maxItems": 2,
                    "items": _NUMBER},
    },
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "probe": {
            "type": "object",
            "additionalProperties": False,
            "required": ["omega0"],
            "properties": {
                "omega0": _NUMBER,
                "energy": _NUMBER,
                "init": _INIT_SCHEMA,
            },
        },
        "bath": _BATH_SCHEMA,
        "force": _FORCE_SCHEMA,
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["t_end"],
            "properties": {
                "t_end": _NUMBER,
                "n_steps": {"type": "integer", "minimum": 2},
            },
        },
        "window": {
            "type": "object",
            "additionalProperties": False,
            "required": ["t0", "t"],
            "properties": {"t0": _NUMBER, "t": _NUMBER},
        },
        "sequential": {
            "type": "object",
            "additionalProperties": False,
            "required": ["total_window"],
            "properties": {
                "total_window": _NUMBER,
                "tau": _NUMBER,
                "optimize": {"type": "boolean"},
                "tau_bounds": {"type": "array", "minItems": 2, "maxItems": 2,
                               "items": _NUMBER},
            },
        },
        "options": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "seed": {"type": "integer"},
                "replications": {"type": "integer", "minimum": 2},
                "nu": {"type": "integer", "minimum": 1},
                "force_amplitude": _NUMBER,
                "theta": _NUMBER,
                "omega0_prefactor": {"type": "boolean"},
                "energy_sweep": {"type": "array", "items": _NUMBER,
                                 "minItems": 1},
                "gamma": _NUMBER,
                "n_thermal": _NUMBER,
                "report_points": {"type": "integer", "minimum": 2},
                "t_prime": _NUMBER,
            },
        },
    },
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario with lazily built domain objects."""

    raw: dict

    @property
    def omega0(self) -> float:
        return float(self.raw["probe"]["omega0"])

    @property
    def options(self) -> dict:
        return self.raw.get("options", {})

    def spectrum(self) -> Optional[ContinuousSpectrum]:
        block = self.raw.get("bath", {})
        if "continuum" not in block:
            return None
        c = block["continuum"]
        occ = c.get("occupation", {"model": "zero"})
        model = {"zero": OccupationModel.zero,
                 "thermal": lambda: OccupationModel.thermal(occ.get("temperature", 0.0)),
                 "constant": lambda: OccupationModel.constant(occ.get("value", 0.0)),
                 }[occ["model"]]()
        return ContinuousSpectrum(
            family=c["family"], scale=float(c["scale"]), cutoff=float(c["cutoff"]),
            exponent=float(c.get("s", 1.0)),
            cutoff_shape=c.get("cutoff_shape", "hard"), occupation=model)

    def bath(self) -> DiscreteBath:
        block = self.raw.get("bath")
        if block is None:
            raise ConfigError("scenario needs a 'bath' block for this subcommand")
        if "modes" in block and "continuum" in block:
            raise ConfigError("bath block must give either 'modes' or 'continuum'")
        if "modes" in block:
            rows = block["modes"]
            if not rows:
                return DiscreteBath.empty(self.omega0)
            arr = np.asarray(rows, dtype=float)
            return DiscreteBath.from_arrays(arr[:, 0], arr[:, 1], arr[:, 2],
                                            self.omega0)
        spectrum = self.spectrum()
        if spectrum is None:
            raise ConfigError("bath block must give either 'modes' or 'continuum'")
        return discretize(spectrum, int(block["continuum"]["n_modes"]),
                          self.omega0)

    def force(self) -> ForceModulation:
        block = self.raw.get("force")
        if block is None:
            raise ConfigError("scenario needs a 'force' block for this subcommand")
        support = tuple(block.get("support", (0.0, float("inf"))))
        kind = block["kind"]
        if kind == "constant":
            return force_mod.constant(block.get("value", 1.0), support)
        if kind == "sinusoid":
            return force_mod.sinusoid(block.get("amplitude", 1.0),
                                      block.get("frequency", 1.0),
                                      block.get("phase", 0.0), support)
        if kind == "gaussian_pulse":
            return force_mod.gaussian_pulse(block["center"], block["width"], support)
        return force_mod.TabulatedForce.from_samples(block["times"], block["values"])

    def init_state(self) -> GaussianProbeInit:
        probe = self.raw["probe"]
        init = probe.get("init")
        if init is None:
            if "energy" in probe:
                raise ConfigError("probe gives an energy: build the state per "
                                  "window with the best-state form instead")
            return GaussianProbeInit.vacuum()
        kind = init["kind"]
        if kind == "vacuum":
            return GaussianProbeInit.vacuum()
        if kind == "coherent":
            return GaussianProbeInit.coherent(
                complex(init.get("alpha_re", 0.0), init.get("alpha_im", 0.0)))
        if kind == "squeezed":
            return GaussianProbeInit.squeezed(init.get("r", 0.0),
                                              init.get("axis_angle", 0.0))
        if kind == "thermal":
            return GaussianProbeInit.thermal(init.get("nbar", 0.0))
        mean = complex(init.get("mean_re", 0.0), init.get("mean_im", 0.0))
        return GaussianProbeInit(mean, np.asarray(init["cov"], dtype=float))

    def energy(self) -> Optional[float]:
        val = self.raw["probe"].get("energy")
        return None if val is None else float(val)

    def grid(self, bath: DiscreteBath) -> TimeGrid:
        block = self.raw.get("grid")
        if block is None:
            raise ConfigError("scenario needs a 'grid' block for this subcommand")
        t_end = float(block["t_end"])
        if "n_steps" in block:
            return TimeGrid(0.0, t_end, int(block["n_steps"]))
        return default_grid(bath, t_end)

    def window(self) -> tuple[float, float]:
        block = self.raw.get("window")
        if block is None:
            raise ConfigError("scenario needs a 'window' block for this subcommand")
        t0, t1 = float(block["t0"]), float(block["t"])
        if t1 < t0:
            raise ConfigError("window must satisfy t0 <= t")
        return t0, t1


def validate(raw: Any) -> ScenarioConfig:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {path}: {exc.message}") from exc
    probe = raw.get("probe", {})
    if "energy" in probe and "init" in probe:
        raise ConfigError("probe.energy and probe.init are mutually exclusive: "
                          "the energy selects the best squeezed state")
    return ScenarioConfig(raw)


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON "
                          f"(line {exc.lineno}, column {exc.colno}): {exc.msg}") from exc
    return validate(raw)
