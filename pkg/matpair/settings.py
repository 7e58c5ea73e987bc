from __future__ import annotations
from dataclasses import dataclass, asdict, fields, replace
import os
import json
from enum import Enum
from pathlib import Path
from typing import Optional, Any

from .util import logger as log
from .util import encode_json, read_json_with_comments, base_type_match


class TolerancePreset(Enum):
    default = "Default"
    strict = "Strict"
    loose = "Loose"
    custom = "Custom"


@dataclass(frozen=True)
class Tolerances:
    tol_relation: float = 1e-8
    tol_snap: float = 1e-6
    eps_rank: float = 1e-9
    eps_deflate: float = 1e-8
    tol_witness: float = 1e-6
    tol_derived: float = 1e-7
    deflate_trials: int = 64

    @staticmethod
    def strict():
        return Tolerances(1e-11, 1e-8, 1e-12, 1e-10, 1e-9, 1e-10)

    @staticmethod
    def loose():
        return Tolerances(1e-5, 1e-4, 1e-7, 1e-6, 1e-4, 1e-4)

    def scaled(self, tol: float):
        """Tolerances for a user supplied relation tolerance, snapping kept 100x looser."""
        return replace(self, tol_relation=tol, tol_snap=max(self.tol_snap, 100 * tol))

    @staticmethod
    def from_dict(data: dict[str, Any], base: Tolerances | None = None):
        base = base or Tolerances()
        names = {f.name for f in fields(Tolerances)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"Unknown tolerance settings: {', '.join(sorted(unknown))}")
        for k, v in data.items():
            if not base_type_match(v, getattr(base, k)):
                raise ValueError(f"Tolerance '{k}' must be a number, got {v!r}")
        return replace(base, **data)


class Setting:
    def __init__(self, name: str, default, desc="", help=""):
        self.name = name
        self.desc = desc
        self.default = default
        self.help = help

    def str_to_enum(self, s: str):
        assert isinstance(self.default, Enum)
        EnumType = type(self.default)
        try:
            return EnumType[s]
        except KeyError:
            return self.default


class Settings:
    default_path = Path(os.environ.get("MATPAIR_SETTINGS", "matpair.json"))

    tolerance_preset: TolerancePreset
    _tolerance_preset = Setting(
        "Tolerance Preset",
        TolerancePreset.default,
        "Preset which sets all numeric tolerances at once",
    )

    tol_relation: float
    _tol_relation = Setting(
        "Relation Tolerance",
        1e-8,
        "Relative residual allowed for A^st F = F A^r and the form symmetry",
    )

    tol_snap: float
    _tol_snap = Setting(
        "Snap Tolerance",
        1e-6,
        "Distance within which a numeric eigenvalue is snapped to a root of unity or zero",
    )

    eps_rank: float
    _eps_rank = Setting(
        "Rank Threshold",
        1e-9,
        "Singular values below this fraction of the largest one count as zero",
    )

    eps_deflate: float
    _eps_deflate = Setting(
        "Deflation Threshold",
        1e-8,
        "Minimum relative size of F(v,v) for a vector to be split off as a 1x1 block",
    )

    tol_witness: float
    _tol_witness = Setting(
        "Witness Tolerance",
        1e-6,
        "Largest residual accepted for a returned transformation",
    )

    tol_derived: float
    _tol_derived = Setting(
        "Derived Identity Tolerance", 1e-7, "Relative residual allowed for A^(r^2) = A"
    )

    deflate_trials: int
    _deflate_trials = Setting(
        "Deflation Trials", 64, "Random combinations tried before deflation gives up"
    )

    cond_bound: float
    _cond_bound = Setting(
        "Scramble Condition Bound",
        100.0,
        "Largest condition number of random transformations used by the generator",
    )

    scramble_attempts: int
    _scramble_attempts = Setting(
        "Scramble Attempts", 100, "Random transformations sampled before giving up"
    )

    max_exponent: int
    _max_exponent = Setting(
        "Maximum Exponent",
        64,
        "Largest |r| accepted, keeps roots of unity apart by more than 1e-3",
    )

    _tolerance_presets = {
        TolerancePreset.default: Tolerances(),
        TolerancePreset.strict: Tolerances.strict(),
        TolerancePreset.loose: Tolerances.loose(),
    }

    _values: dict[str, Any]

    def __init__(self):
        self.restore()

    def __getattr__(self, name: str):
        if name in self._values:
            return self._values[name]
        return object.__getattribute__(self, name)

    def __setattr__(self, name: str, value):
        if name in self._values:
            self._values[name] = value
            if name == "tolerance_preset":
                self.apply_tolerance_preset(value)
        else:
            object.__setattr__(self, name, value)

    def restore(self):
        self.__dict__["_values"] = {
            k[1:]: v.default for k, v in Settings.__dict__.items() if isinstance(v, Setting)
        }

    def save(self, path: Optional[Path] = None):
        path = path or self.default_path
        with open(path, "w") as file:
            file.write(json.dumps(self._values, default=encode_json, indent=4))

    def load(self, path: Optional[Path] = None):
        path = path or self.default_path
        if not path.exists():
            return

        log.info(f"Loading settings from {path}")
        try:
            contents = read_json_with_comments(path)
            for k, v in contents.items():
                setting: Setting | None = getattr(Settings, f"_{k}", None)
                if setting is not None:
                    if isinstance(setting.default, Enum):
                        self._values[k] = setting.str_to_enum(v)
                    elif base_type_match(setting.default, v):
                        self._values[k] = v
                    else:
                        log.error(f"{path}: {v} is not a valid value for '{k}'")
                        self._values[k] = setting.default
        except Exception as e:
            log.error(f"Failed to load settings: {e}")

    def apply_tolerance_preset(self, preset: TolerancePreset):
        if preset is not TolerancePreset.custom:
            for k, v in asdict(self._tolerance_presets[preset]).items():
                self._values[k] = v

    def tolerances(self):
        names = [f.name for f in fields(Tolerances)]
        return Tolerances(**{k: self._values[k] for k in names})


settings = Settings()
if "MATPAIR_SETTINGS" in os.environ:
    settings.load()
