"""Experiment configuration: typed sections, strict JSON loading, and named RNG streams."""
from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .calibration import ConcentrationProfile
from .lti_core import LinearPlant, NoiseSpec, reference_noise, reference_plant

# Spawn order is part of the reproducibility contract: append, never reorder.
STREAMS = ("benchmark", "detection", "attack", "monte_carlo", "noise_benchmark")


class ConfigError(ValueError):
    pass


@dataclass
class PlantConfig:
    A: list = field(default_factory=lambda: reference_plant().to_dict()["A"])
    B: list = field(default_factory=lambda: reference_plant().to_dict()["B"])
    C: list = field(default_factory=lambda: reference_plant().to_dict()["C"])
    L: list = field(default_factory=lambda: reference_plant().to_dict()["L"])
    K: list = field(default_factory=lambda: reference_plant().to_dict()["K"])

    def build(self) -> LinearPlant:
        return LinearPlant(self.A, self.B, self.C, self.L, self.K)


@dataclass
class NoiseConfig:
    w: list = field(default_factory=lambda: reference_noise()[0].to_config())
    v: list = field(default_factory=lambda: reference_noise()[1].to_config())

    def build(self) -> tuple[NoiseSpec, NoiseSpec]:
        return NoiseSpec.from_config(self.w), NoiseSpec.from_config(self.v)


@dataclass
class ProfileConfig:
    q: float = 1.0
    a: float = 1.5
    c1: float = 1.84e6
    c2: float = 12.5
    p: int = 1

    def build(self) -> ConcentrationProfile:
        return ConcentrationProfile(self.q, self.a, self.c1, self.c2, self.p)


@dataclass
class DetectionConfig:
    N: int = 1000
    T: int = 100
    beta: float = 0.01
    Delta: float = 0.05
    burn_in: int = 1000
    gap: int = 10
    steps: int = 10000


@dataclass
class AttackConfig:
    kind: str = "none"
    vector: Optional[list] = None
    noise: Optional[list] = None
    jitter: float = 0.0
    start: int = 0
    end: Optional[int] = None


@dataclass
class ReachConfig:
    a_grid: list = field(default_factory=lambda: [round(0.1 * i, 1) for i in range(1, 10)])
    a1_fractions: list = field(default_factory=lambda: [round(0.1 * i, 1) for i in range(1, 10)])
    s: float = 2.0
    noise_samples: int = 1000
    trials: int = 10000
    M: int = 50


@dataclass
class ExperimentConfig:
    seed: int = 0
    plant: PlantConfig = field(default_factory=PlantConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    profile: ProfileConfig = field(default_factory=ProfileConfig)
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    attack: AttackConfig = field(default_factory=AttackConfig)
    reach: ReachConfig = field(default_factory=ReachConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def rng_streams(self) -> dict[str, np.random.Generator]:
        return rng_streams(self.seed)

    def validate(self) -> None:
        """Build every component once so their own invariants are checked."""
        checks = (
            ("plant", self.plant.build),
            ("noise", self.noise.build),
            ("profile", self.profile.build),
            ("detection", self._check_detection),
            ("attack", self._check_attack),
            ("reach", self._check_reach),
        )
        for name, fn in checks:
            try:
                fn()
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{name}: {exc}") from None

    def _check_detection(self):
        d = self.detection
        for key in ("N", "T", "steps"):
            if getattr(d, key) < 1:
                raise ValueError(f"{key} must be >= 1")
        if d.burn_in < 0 or d.gap < 1:
            raise ValueError("burn_in must be >= 0 and gap >= 1")
        if not 0 < d.beta < d.Delta < 1:
            raise ValueError("need 0 < beta < Delta < 1")

    def _check_attack(self):
        from .attacks import KINDS

        a = self.attack
        if a.kind not in KINDS:
            raise ValueError(f"unknown attack kind {a.kind!r}")
        if a.end is not None and a.start > a.end:
            raise ValueError("attack start must not exceed end")
        if a.kind == "additive_fixed" and a.vector is None:
            raise ValueError("additive_fixed needs a vector")
        if a.kind == "additive_noise":
            if a.noise is None:
                raise ValueError("additive_noise needs a noise spec")
            NoiseSpec.from_config(a.noise)
        if a.jitter < 0:
            raise ValueError("jitter must be nonnegative")

    def _check_reach(self):
        r = self.reach
        if not r.a_grid or any(not 0 <= a < 1 for a in r.a_grid):
            raise ValueError("a_grid values must lie in [0, 1)")
        if not r.a1_fractions or any(not 0 < f < 1 for f in r.a1_fractions):
            raise ValueError("a1_fractions must lie in (0, 1)")
        if r.s <= 0 or r.trials < 1 or r.M < 0 or r.noise_samples < 1:
            raise ValueError("need s > 0, trials >= 1, M >= 0, noise_samples >= 1")


def rng_streams(seed: int) -> dict[str, np.random.Generator]:
    """Independent generators, one per pipeline stage, all derived from ``seed``."""
    children = np.random.SeedSequence(int(seed)).spawn(len(STREAMS))
    return {name: np.random.default_rng(ss) for name, ss in zip(STREAMS, children)}


# ---------------------------------------------------------------------- loading


def _line_of(text: str, path: tuple[str, ...]) -> int:
    """Best-effort 1-based line of the last key in ``path``, following the nesting in order."""
    pos = 0
    for key in path:
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
        if m is None:
            break
        pos = m.start()
    return text.count("\n", 0, pos) + 1


_INT_FIELDS = {"seed", "N", "T", "burn_in", "gap", "steps", "p", "start", "end", "noise_samples", "trials", "M"}


def _coerce(cls, data: Any, text: str, path: tuple[str, ...]):
    if not isinstance(data, dict):
        where = ".".join(path) or "<root>"
        raise ConfigError(f"{where} (line {_line_of(text, path)}): expected an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        sub = path + (key,)
        if key not in fields:
            raise ConfigError(f"unknown key {'.'.join(sub)} (line {_line_of(text, sub)})")
        ftype = fields[key].default_factory if fields[key].default_factory is not dataclasses.MISSING else None
        if dataclasses.is_dataclass(ftype):
            kwargs[key] = _coerce(ftype, value, text, sub)
            continue
        if key in _INT_FIELDS and value is not None:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
                raise ConfigError(f"{'.'.join(sub)} (line {_line_of(text, sub)}): expected an integer")
            value = int(value)
        kwargs[key] = value
    return cls(**kwargs)


def loads(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    cfg = _coerce(ExperimentConfig, data, text, ())
    try:
        cfg.validate()
    except ConfigError as exc:
        section = str(exc).split(":", 1)[0]
        raise ConfigError(f"{exc} (line {_line_of(text, (section,))})") from None
    return cfg


def load(path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        return loads(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def dump(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(cfg.dumps())
