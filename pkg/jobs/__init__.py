"""
One module per CLI subcommand. Each exposes ``run(cfg) -> dict`` returning
a status dict with the artifacts it wrote; errors propagate as
``FlagPointsError`` subclasses for the CLI to report.
"""
import logging
import os
from typing import List

import numpy as np

import config
import storage
from errors import ConfigError
from heights import MovingBox, SingleHeightCap, WindowSpec
from varieties import RealPoint, VarietyDescriptor, parse_center, parse_variety

log = logging.getLogger(__name__)


def output_path(cfg: config.ExperimentConfig, subcommand: str, name: str) -> str:
    variety = cfg.variety.replace(":", "-")
    return os.path.join(config.ensure_output_dir(cfg.output_dir), f"{subcommand}_{variety}_{name}")


def resolve(cfg: config.ExperimentConfig, subcommand: str):
    """Descriptor plus the config hash stamped on every artifact."""
    return parse_variety(cfg.variety), storage.config_hash(cfg.hash_payload(subcommand))


def require(cfg: config.ExperimentConfig, *names: str):
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError(f"missing required settings: {', '.join(missing)}", missing=missing)


def build_window(desc: VarietyDescriptor, spec, t: float = 0.0) -> WindowSpec:
    """``None``/``{"kind": "cap"}`` → SingleHeightCap; ``{"kind": "box", d0_lo, d0_hi, u}`` → MovingBox."""
    spec = spec or {"kind": "cap"}
    kind = spec.get("kind", "cap")
    if kind == "cap":
        if desc.generator_count != 1:
            raise ConfigError(f"{desc.id} has several heights; use a box window")
        return SingleHeightCap(t)
    if kind == "box":
        try:
            return MovingBox(tuple(spec["d0_lo"]), tuple(spec["d0_hi"]), tuple(spec["u"]), t)
        except KeyError as e:
            raise ConfigError(f"box window is missing {e}", window=spec)
    raise ConfigError(f"unknown window kind '{kind}'", window=spec)


def centers(desc: VarietyDescriptor, cfg: config.ExperimentConfig) -> List[RealPoint]:
    """Centre specs in order; every ``random`` draws the next seeded stream."""
    out, stream = [], 0
    for spec in cfg.centers:
        if spec == "random":
            spec = f"random:{stream}"
            stream += 1
        out.append(parse_center(desc, spec, cfg.seed))
    return out


def geometric_grid(hmax: float, count: int = 30, low_fraction: float = 0.05) -> List[float]:
    lo = max(2.0, hmax * low_fraction)
    return [float(h) for h in np.geomspace(lo, hmax, count)]
