"""Scenario configuration: dataclass sections loaded from an INI file.

Every key has a default, so an empty file runs the canonical scenario.
Unknown sections or keys are rejected so typos do not silently fall back to
defaults.
"""

from __future__ import annotations

import configparser
import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .mcdm import ahp_weights, parse_ratio, validate_pairwise, WEIGHT_SUM_TOL
from .protocol import DEFAULT_WEIGHTS, STRATEGIES
from .workload import WorkloadConfig

log = logging.getLogger(__name__)


@dataclass
class NetworkConfig:
    n_peers: int = 50
    area_m: float = 1000.0
    range_m: float = 250.0
    hop_delay_s: float = 0.01


@dataclass
class MobilityConfig:
    v_min: float = 1.0
    v_max: float = 5.0
    pause_s: float = 5.0
    tick_s: float = 0.1


@dataclass
class EnergyConfig:
    e_lo: float = 50.0
    e_hi: float = 100.0
    e_tx: float = 0.05
    e_rx: float = 0.02
    beacon_rx: bool = True


@dataclass
class QueueConfig:
    capacity: int = 20
    mu: float = 20.0


@dataclass
class ProtocolConfig:
    strategy: str = "caqrp"
    k: int = 3
    ttl: int = 5
    p_base: float = 1.0
    beacon_s: float = 1.0
    neighbor_timeout_s: float = 2.5
    p_cap: int = 100
    horizon_s: float = 3600.0


@dataclass
class WeightsConfig:
    mode: str = "explicit"
    w: tuple = DEFAULT_WEIGHTS
    pairwise: tuple | None = None

    def resolve(self) -> np.ndarray:
        if self.mode == "ahp":
            w = ahp_weights(np.array(self.pairwise, dtype=float))
            log.info("AHP-derived weights: (%s)", ", ".join(f"{x:.3f}" for x in w))
            return w
        return np.array(self.w, dtype=float)


@dataclass
class RunConfig:
    duration_s: float = 300.0
    seeds: tuple = (1, 2, 3)


SECTIONS = {
    "network": NetworkConfig,
    "mobility": MobilityConfig,
    "energy": EnergyConfig,
    "queue": QueueConfig,
    "protocol": ProtocolConfig,
    "weights": WeightsConfig,
    "workload": WorkloadConfig,
    "run": RunConfig,
}


@dataclass
class ScenarioConfig:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    energy: EnergyConfig = field(default_factory=EnergyConfig)
    queue: QueueConfig = field(default_factory=QueueConfig)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    weights: WeightsConfig = field(default_factory=WeightsConfig)
    workload: WorkloadConfig = field(default_factory=WorkloadConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def replace(self, **sections) -> "ScenarioConfig":
        """Copy with some fields overridden, e.g. ``replace(protocol={"k": 2})``."""
        kwargs = {}
        for name in SECTIONS:
            sec = getattr(self, name)
            kwargs[name] = dataclasses.replace(sec, **sections.get(name, {}))
        return ScenarioConfig(**kwargs)

    def validate(self) -> list[str]:
        p = []
        n, m, e, q, pr, w, r = (self.network, self.mobility, self.energy, self.queue, self.protocol, self.weights, self.run)
        if n.n_peers < 1:
            p.append("network.n_peers must be >= 1")
        for key in ("area_m", "range_m"):
            if not getattr(n, key) > 0:
                p.append(f"network.{key} must be > 0")
        if n.hop_delay_s <= 0:
            p.append("network.hop_delay_s must be > 0")
        if not 0 <= m.v_min <= m.v_max:
            p.append("mobility.v_min/v_max must satisfy 0 <= v_min <= v_max")
        if m.pause_s < 0:
            p.append("mobility.pause_s must be >= 0")
        if m.tick_s <= 0:
            p.append("mobility.tick_s must be > 0")
        for key in ("e_lo", "e_hi", "e_tx", "e_rx"):
            if not getattr(e, key) > 0:
                p.append(f"energy.{key} must be > 0")
        if e.e_lo > e.e_hi:
            p.append("energy.e_lo must be <= energy.e_hi")
        if q.capacity < 1:
            p.append("queue.capacity must be >= 1")
        if not q.mu > 0:
            p.append("queue.mu must be > 0")
        if pr.strategy not in STRATEGIES:
            p.append(f"protocol.strategy {pr.strategy!r} is not one of: {', '.join(STRATEGIES)}")
        if pr.k < 0:
            p.append("protocol.k must be >= 0")
        if pr.ttl < 1:
            p.append("protocol.ttl must be >= 1")
        if not 0 <= pr.p_base <= 1:
            p.append("protocol.p_base must be in [0, 1]")
        for key in ("beacon_s", "neighbor_timeout_s", "horizon_s"):
            if not getattr(pr, key) > 0:
                p.append(f"protocol.{key} must be > 0")
        if pr.p_cap < 1:
            p.append("protocol.p_cap must be >= 1")
        if w.mode not in ("explicit", "ahp"):
            p.append(f"weights.mode must be 'explicit' or 'ahp', got {w.mode!r}")
        elif w.mode == "ahp":
            if w.pairwise is None:
                p.append("weights.pairwise is required when weights.mode = ahp")
            else:
                p.extend(f"weights.pairwise: {d}" for d in validate_pairwise(w.pairwise))
                if np.shape(w.pairwise) != (4, 4):
                    p.append("weights.pairwise must be 4x4")
        else:
            if len(w.w) != 4:
                p.append(f"weights.w needs 4 values, got {len(w.w)}")
            elif any(x < 0 for x in w.w) or abs(sum(w.w) - 1) > WEIGHT_SUM_TOL:
                p.append("weights.w must be nonnegative and sum to 1")
        p.extend(self.workload.validate())
        if r.duration_s <= 0:
            p.append("run.duration_s must be > 0")
        if not r.seeds or any(s < 0 for s in r.seeds):
            p.append("run.seeds must be a nonempty list of nonnegative integers")
        return p

    def check(self) -> "ScenarioConfig":
        problems = self.validate()
        if problems:
            raise ValidationError(problems)
        return self


def _parse_value(section: str, key: str, raw: str, default):
    name = f"{section}.{key}"
    raw = raw.strip()
    try:
        if key == "pairwise":
            rows = [r for r in raw.replace("\n", ";").split(";") if r.strip()]
            return tuple(tuple(parse_ratio(t) for t in row.split()) for row in rows)
        if isinstance(default, bool):
            if raw.lower() not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(raw)
            return raw.lower() in ("true", "yes", "1")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            tokens = raw.replace(",", " ").split()
            if key == "seeds":
                return tuple(int(t) for t in tokens)
            return tuple(parse_ratio(t) for t in tokens)
        return raw
    except (ValueError, ValidationError) as exc:
        raise ValidationError(f"{name}: cannot parse {raw!r}") from exc


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ValidationError(f"{source}: {exc}") from exc
    problems = []
    sections = {}
    for section in parser.sections():
        if section not in SECTIONS:
            problems.append(f"unknown section [{section}]; valid: {', '.join(SECTIONS)}")
            continue
        cls = SECTIONS[section]
        defaults = cls()
        known = {f.name for f in dataclasses.fields(cls)}
        values = {}
        for key, raw in parser.items(section):
            if key not in known:
                problems.append(f"unknown key {section}.{key}")
                continue
            try:
                values[key] = _parse_value(section, key, raw, getattr(defaults, key))
            except ValidationError as exc:
                problems.extend(exc.problems)
        sections[section] = values
    config = ScenarioConfig().replace(**sections)
    problems.extend(config.validate())
    if problems:
        raise ValidationError(problems)
    return config


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, str(path))
