import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

from dotenv import load_dotenv

from errors import ConfigError

# ======================================================
#               ENV SETUP
# ======================================================

load_dotenv()

OUTPUT_DIR = os.getenv("FLAGPOINTS_OUTPUT_DIR", "./output")

# Worker threads for sharded enumeration; the env var overrides the CLI default.
WORKERS = int(os.getenv("FLAGPOINTS_WORKERS", "1"))

# Hard cap on the predicted number of points a single enumeration may produce.
POINT_BUDGET = int(os.getenv("FLAGPOINTS_POINT_BUDGET", "20000000"))

# Decimal digits for mpmath work (frames of irrational centres, flowed lattices).
MP_DPS = int(os.getenv("FLAGPOINTS_MP_DPS", "50"))

# Successive minima are exact up to this rank, LLL-approximate above it.
EXACT_RANK_MAX = int(os.getenv("FLAGPOINTS_EXACT_RANK_MAX", "6"))

# Escape traces refuse flow times beyond this.
T_MAX = float(os.getenv("FLAGPOINTS_T_MAX", "25"))

LLL_DELTA = 0.75
LLL_ETA = 0.51

# Upper limit on the vectors a single short-vector enumeration may return.
SHORT_VECTOR_CAP = int(os.getenv("FLAGPOINTS_SHORT_VECTOR_CAP", "200000"))

# Fits only look at the tail of the grid.
FIT_TAIL_FRACTION = 0.5

# Relative SVD threshold for rank decisions in genericity checks.
RANK_TOL = 1e-9

LOG_LEVEL = os.getenv("FLAGPOINTS_LOG_LEVEL", "INFO")


def setup_logging(level: str = LOG_LEVEL) -> logging.Logger:
    """Console logging on stderr; stdout stays free for CSV output."""
    logger = logging.getLogger()
    logger.setLevel(level.upper())
    logger.handlers.clear()

    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(logging.Formatter("%(asctime)s | %(message)s", datefmt="%Y-%m-%d %H:%M:%S"))
    logger.addHandler(console)
    return logger


def ensure_output_dir(path: str = OUTPUT_DIR) -> str:
    os.makedirs(path, exist_ok=True)
    return path


# ======================================================
#               EXPERIMENT CONFIG
# ======================================================

@dataclass
class ExperimentConfig:
    """Everything one CLI run needs; a JSON file supplies defaults, flags override."""

    variety: str = "gr:1:2"
    hmax: Optional[List[float]] = None
    grid: Optional[List[float]] = None
    t_grid: Optional[List[float]] = None
    taus: List[float] = field(default_factory=lambda: [0.5])
    window: Optional[dict] = None
    box: Optional[List[List[float]]] = None
    centers: List[str] = field(default_factory=lambda: ["random"])
    bound: float = 10.0
    h_min: float = 100.0
    fit_b: Optional[int] = None
    seed: int = 0
    tol: float = RANK_TOL
    exclude_self: bool = True
    workers: Optional[int] = None
    output_dir: str = OUTPUT_DIR

    # Fields that never change results; kept out of the config hash.
    RUNTIME_ONLY = ("workers", "output_dir")

    @classmethod
    def load(cls, path: Optional[str] = None, overrides: Optional[dict] = None) -> "ExperimentConfig":
        values = {}
        if path:
            if not os.path.exists(path):
                raise ConfigError(f"config file not found: {path}", path=path)
            try:
                with open(path) as f:
                    values = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"config file is not valid JSON: {e}", path=path)
        values.update({k: v for k, v in (overrides or {}).items() if v is not None})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError("unknown config keys", keys=unknown)
        cfg = cls(**values)
        cfg.validate()
        return cfg

    def validate(self):
        if self.hmax is not None:
            self.hmax = [float(h) for h in _as_list(self.hmax)]
            if any(h <= 0 for h in self.hmax):
                raise ConfigError("hmax must be positive", hmax=self.hmax)
        for name in ("grid", "t_grid"):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, parse_grid(value))
        self.taus = [float(t) for t in _as_list(self.taus)]
        if any(t < 0 for t in self.taus):
            raise ConfigError("zoom factors must be nonnegative", taus=self.taus)
        self.centers = [str(c) for c in _as_list(self.centers)]
        if self.bound < 1:
            raise ConfigError("bound must be at least 1", bound=self.bound)
        if self.workers is not None and int(self.workers) < 1:
            raise ConfigError("workers must be at least 1", workers=self.workers)
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer", seed=self.seed)

    def hash_payload(self, subcommand: str) -> dict:
        payload = {k: v for k, v in asdict(self).items() if k not in self.RUNTIME_ONLY}
        payload["subcommand"] = subcommand
        return payload


def _as_list(value) -> list:
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def parse_grid(value) -> List[float]:
    """A list of numbers, or ``start:stop:step`` (inclusive) as a string."""
    if isinstance(value, str):
        if ":" in value:
            try:
                start, stop, step = (float(x) for x in value.split(":"))
            except ValueError:
                raise ConfigError(f"cannot parse grid '{value}'", grid=value)
            if step <= 0 or stop < start:
                raise ConfigError("grid needs start <= stop and a positive step", grid=value)
            count = int(round((stop - start) / step)) + 1
            return [round(start + i * step, 12) for i in range(count)]
        value = value.split(",")
    try:
        grid = [float(x) for x in _as_list(value)]
    except (TypeError, ValueError):
        raise ConfigError(f"cannot parse grid '{value}'", grid=str(value))
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("grid must be strictly increasing", grid=grid)
    return grid
