"""Run-configuration loading: defaults <- config file <- CLI flags, with
per-key provenance for explain-config. Unknown keys are rejected."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import yaml

from .controller import SimConfig
from .device import DeviceGeometry
from .metrics import EnergyWeights
from .mitigations import MECHANISMS, MitigationConfig
from .timing import OVERRIDABLE_NS_KEYS, ConfigError

DEFAULTS: dict = {
    "seed": 0,
    "instructions_per_core": 1_000_000,
    "max_cycles": None,
    "mapping": "mop",
    "use_cache": True,
    "geometry": {
        "channels": 1,
        "ranks": 2,
        "bank_groups": 8,
        "banks_per_group": 4,
        "rows_per_bank": 65536,
        "row_size_bits": 16384,
    },
    "timing": {},  # ns overrides, keys from OVERRIDABLE_NS_KEYS
    "scheduler": {"cap": 4},
    "refresh": {"postpone_max": 4, "enabled": True},
    "mitigation": {
        "mechanism": "none",
        "n_rh": 1000,
        "secure": True,      # derive thresholds from the security analysis
        "a_both": None,
        "n_bo_r": 4,
        "n_bo_a": None,      # defaults to n_bo_r
        "n_bo": None,
        "rfm_th": None,
        "att_capacity": 4,
        "para_probability": None,
    },
    "energy": {"act_pre": 2.0, "rd": 1.2, "wr": 1.3, "ref": 50.0, "rfm": 50.0},
    "workload": {
        "kind": "synthetic",   # synthetic | mix | traces | perf-attack
        "intensity": "H",
        "mix": "HHHH",
        "length": 20000,
        "seed": 0,
        "traces": [],
        "attack_rows": 8,
        "attack_banks": 4,
    },
}


@dataclass
class RunConfig:
    values: dict
    provenance: dict = field(default_factory=dict)

    def get(self, *path):
        node = self.values
        for p in path:
            node = node[p]
        return node

    def explain(self) -> list[tuple[str, object, str]]:
        out = []

        def walk(node, prefix):
            for k in sorted(node):
                v = node[k]
                dotted = f"{prefix}{k}"
                if isinstance(v, dict):
                    walk(v, dotted + ".")
                else:
                    out.append((dotted, v, self.provenance.get(dotted, "default")))

        walk(self.values, "")
        return out


# sections whose keys are validated elsewhere rather than against DEFAULTS
_OPEN_SECTIONS = {"timing"}


def _merge(base: dict, overlay: dict, provenance: dict, source: str,
           prefix: str = "") -> None:
    for key, value in overlay.items():
        dotted = f"{prefix}{key}"
        if key in _OPEN_SECTIONS and not prefix and isinstance(value, dict):
            base[key].update(value)
            for sub in value:
                provenance[f"{dotted}.{sub}"] = source
            continue
        if key not in base:
            raise ConfigError(f"unknown config key {dotted!r}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            _merge(base[key], value, provenance, source, dotted + ".")
        else:
            base[key] = value
            provenance[dotted] = source


def load_config(path: str | None = None, flag_overrides: dict | None = None) -> RunConfig:
    values = copy.deepcopy(DEFAULTS)
    provenance: dict = {}
    if path is not None:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        _merge(values, data, provenance, f"file:{path}")
    if flag_overrides:
        _merge(values, flag_overrides, provenance, "flag")
    _validate(values)
    return RunConfig(values, provenance)


def _validate(values: dict) -> None:
    mech = values["mitigation"]["mechanism"]
    if mech not in MECHANISMS:
        raise ConfigError(f"mitigation.mechanism must be one of {MECHANISMS}")
    bad = set(values["timing"]) - set(OVERRIDABLE_NS_KEYS)
    if bad:
        raise ConfigError(f"unknown timing override keys: {sorted(bad)}")
    wl = values["workload"]
    if wl["kind"] not in ("synthetic", "mix", "traces", "perf-attack"):
        raise ConfigError(f"unknown workload.kind {wl['kind']!r}")
    if values["scheduler"]["cap"] < 1:
        raise ConfigError("scheduler.cap must be >= 1")
    if not 0 <= values["refresh"]["postpone_max"] <= 4:
        raise ConfigError("refresh.postpone_max must be in [0, 4]")


def build_mitigation(values: dict) -> MitigationConfig:
    m = values["mitigation"]
    mech = m["mechanism"]
    n_rh = m["n_rh"]
    explicit = any(m[k] is not None for k in ("a_both", "n_bo", "rfm_th"))
    if m["secure"] and not explicit and mech != "none":
        name = f"prac-{m['n_bo_r']}" if mech == "prac" else mech
        cfg = MitigationConfig.secure(name, n_rh)
    else:
        cfg = MitigationConfig(
            mechanism=mech, n_rh=n_rh,
            a_both=m["a_both"] if m["a_both"] is not None else 1,
            n_bo_r=m["n_bo_r"],
            n_bo_a=m["n_bo_a"] if m["n_bo_a"] is not None else m["n_bo_r"],
            n_bo=m["n_bo"] if m["n_bo"] is not None else 256,
            rfm_th=m["rfm_th"] if m["rfm_th"] is not None else 32,
        )
    cfg.att_capacity = m["att_capacity"]
    if m["para_probability"] is not None:
        cfg.para_probability = m["para_probability"]
    return cfg


def build_sim_config(run: RunConfig) -> SimConfig:
    v = run.values
    geometry = DeviceGeometry(**v["geometry"])
    return SimConfig(
        mitigation=build_mitigation(v),
        geometry=geometry,
        mapping=v["mapping"],
        timing_overrides=dict(v["timing"]),
        instructions_per_core=v["instructions_per_core"],
        max_cycles=v["max_cycles"],
        seed=v["seed"],
        use_cache=v["use_cache"],
        scheduler_cap=v["scheduler"]["cap"],
        refresh_postpone_max=v["refresh"]["postpone_max"],
        refresh_enabled=v["refresh"]["enabled"],
        energy_weights=EnergyWeights(**v["energy"]),
    )
