"""Run configuration: one YAML file of record plus command-line overrides.

Relative data paths are resolved against the directory of the config file.
The key set is closed; unknown keys are rejected before anything runs.
"""

from dataclasses import asdict, dataclass, field, fields
from importlib import resources
import math
from pathlib import Path

import yaml

from .errors import ConfigurationError
from .potentials import read_dipole, read_potential
from .scans import ExcitedState, SystemConfig

FORMATS = ("csv", "json")


def bundled_model(name):
    """Path of the run config shipped with a bundled model (e.g. ``krb_like``)."""
    path = resources.files("mwassoc").joinpath("models", name, "system.yaml")
    if not path.is_file():
        raise ConfigurationError(f"no bundled model named {name!r}")
    return Path(str(path))


@dataclass
class RunConfig:
    masses_amu: list = field(default_factory=list)
    potentials: dict = field(default_factory=dict)
    dipoles: dict = field(default_factory=dict)
    excited: list = field(default_factory=list)
    trap_kHz: float = 200.0
    intensity_Wcm2: float = 1e4
    angular_C: float = 1.0
    points: int = 60000
    r_min: float = None
    r_max: float = None
    state: str = "a"
    ell: int = 0
    trap: bool = True
    e_max_cm1: float = None
    max_states: int = None
    from_top: int = 0
    initial_v: int = None
    final_v: int = 0
    intermediates: list = None
    detuning_MHz: float = None
    linewidth_MHz: float = None
    freqs_kHz: list = field(default_factory=lambda: [50.0, 100.0, 200.0, 400.0, 800.0])
    target_binding_cm1: float = -1.0
    final_v_scaling: int = None
    format: str = "csv"
    output: str = None
    base_dir: str = field(default=".", repr=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("base_dir")
        return d

    def dump(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def resolve(self, path):
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p


_KEYS = {f.name for f in fields(RunConfig)} - {"base_dir"}
_EXCITED_KEYS = {"potential", "dipole_a", "dipole_X"}


def _number(d, key, *, positive=False, nonneg=False, integer=False, optional=False):
    x = d.get(key)
    if x is None:
        if optional:
            return
        raise ConfigurationError(f"{key} is required")
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigurationError(f"{key} must be a number, got {x!r}")
    if integer and int(x) != x:
        raise ConfigurationError(f"{key} must be an integer, got {x!r}")
    if not math.isfinite(x):
        raise ConfigurationError(f"{key} must be finite")
    if positive and not x > 0:
        raise ConfigurationError(f"{key} must be > 0, got {x!r}")
    if nonneg and x < 0:
        raise ConfigurationError(f"{key} must be >= 0, got {x!r}")


def validate_dict(d):
    if not isinstance(d, dict):
        raise ConfigurationError("config must be a mapping of keys to values")
    unknown = sorted(set(d) - _KEYS)
    if unknown:
        raise ConfigurationError(f"unknown config key(s): {', '.join(unknown)}")
    masses = d.get("masses_amu", [])
    if not (isinstance(masses, list) and len(masses) == 2):
        raise ConfigurationError("masses_amu must be a list of two masses")
    for i, m in enumerate(masses):
        _number({"masses_amu": m}, "masses_amu", positive=True)
    for key in ("potentials", "dipoles"):
        value = d.get(key, {})
        if not isinstance(value, dict) or not all(isinstance(v, str) for v in value.values()):
            raise ConfigurationError(f"{key} must map state labels to file paths")
    if not d.get("potentials"):
        raise ConfigurationError("potentials must list at least one state")
    for entry in d.get("excited", []) or []:
        if not isinstance(entry, dict) or set(entry) - _EXCITED_KEYS or "potential" not in entry:
            raise ConfigurationError(f"excited entries need keys {sorted(_EXCITED_KEYS)}, got {entry!r}")
    _number(d, "trap_kHz", nonneg=True, optional=True)
    _number(d, "intensity_Wcm2", nonneg=True, optional=True)
    _number(d, "angular_C", optional=True)
    _number(d, "points", positive=True, integer=True, optional=True)
    _number(d, "r_min", positive=True, optional=True)
    _number(d, "r_max", positive=True, optional=True)
    _number(d, "ell", nonneg=True, integer=True, optional=True)
    _number(d, "e_max_cm1", optional=True)
    _number(d, "max_states", positive=True, integer=True, optional=True)
    _number(d, "from_top", nonneg=True, integer=True, optional=True)
    _number(d, "initial_v", nonneg=True, integer=True, optional=True)
    _number(d, "final_v", nonneg=True, integer=True, optional=True)
    _number(d, "final_v_scaling", nonneg=True, integer=True, optional=True)
    _number(d, "detuning_MHz", optional=True)
    _number(d, "linewidth_MHz", nonneg=True, optional=True)
    _number(d, "target_binding_cm1", optional=True)
    if d.get("from_top") not in (None, 0, 1):
        raise ConfigurationError("from_top must be 0 or 1")
    if "trap" in d and not isinstance(d["trap"], bool):
        raise ConfigurationError("trap must be true or false")
    if "state" in d and not isinstance(d["state"], str):
        raise ConfigurationError("state must be a label string")
    freqs = d.get("freqs_kHz")
    if freqs is not None:
        if not isinstance(freqs, list) or not freqs:
            raise ConfigurationError("freqs_kHz must be a non-empty list")
        for f in freqs:
            _number({"freqs_kHz": f}, "freqs_kHz", positive=True)
    inter = d.get("intermediates")
    if inter is not None and not (isinstance(inter, list) and all(isinstance(x, str) for x in inter)):
        raise ConfigurationError("intermediates must be a list of state labels")
    if d.get("format", "csv") not in FORMATS:
        raise ConfigurationError(f"format must be one of {FORMATS}")
    if d.get("output") is not None and not isinstance(d["output"], str):
        raise ConfigurationError("output must be a path")


def from_dict(d, base_dir="."):
    validate_dict(d)
    cfg = RunConfig(**d, base_dir=str(base_dir))
    for key in ("trap_kHz", "intensity_Wcm2", "angular_C", "r_min", "r_max", "detuning_MHz",
                "linewidth_MHz", "target_binding_cm1", "e_max_cm1"):
        value = getattr(cfg, key)
        if value is not None:
            setattr(cfg, key, float(value))
    cfg.masses_amu = [float(m) for m in cfg.masses_amu]
    cfg.freqs_kHz = [float(f) for f in cfg.freqs_kHz]
    return cfg


def parse_config(text, base_dir="."):
    try:
        d = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config is not valid YAML: {exc}") from None
    return from_dict(d or {}, base_dir)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, path.parent)


def apply_overrides(cfg, overrides):
    """Return a validated copy of ``cfg`` with non-None overrides applied."""
    d = cfg.to_dict()
    d.update({k: v for k, v in overrides.items() if v is not None})
    return from_dict(d, cfg.base_dir)


def _read(loader, cfg, path):
    p = cfg.resolve(path)
    if not p.is_file():
        raise ConfigurationError(f"data file not found: {p}")
    return loader(p)


def load_system(cfg):
    """Read every data file named in ``cfg`` and build a :class:`SystemConfig`."""
    potentials = {k: _read(read_potential, cfg, v) for k, v in cfg.potentials.items()}
    dipoles = {k: _read(read_dipole, cfg, v) for k, v in cfg.dipoles.items()}
    excited = []
    for e in cfg.excited:
        excited.append(
            ExcitedState(
                _read(read_potential, cfg, e["potential"]),
                _read(read_dipole, cfg, e["dipole_a"]) if e.get("dipole_a") else None,
                _read(read_dipole, cfg, e["dipole_X"]) if e.get("dipole_X") else None,
            )
        )
    return SystemConfig(
        masses_amu=tuple(cfg.masses_amu),
        potentials=potentials,
        dipoles=dipoles,
        excited=tuple(excited),
        trap_kHz=cfg.trap_kHz,
        intensity_Wcm2=cfg.intensity_Wcm2,
        angular_C=cfg.angular_C,
        points=cfg.points,
        r_min=cfg.r_min,
        r_max=cfg.r_max,
    )
