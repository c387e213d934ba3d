import logging
import math

import storage
from counting import count_series, fit_power_log
from errors import ConfigError
from heights import SingleHeightCap, nu_measure
from jobs import geometric_grid, output_path, require, resolve
from varieties import enumerate_points

log = logging.getLogger(__name__)


def run(cfg) -> dict:
    """Counting function N(H) on a height grid and its power-log fit."""
    require(cfg, "hmax")
    desc, chash = resolve(cfg, "count")
    if desc.generator_count != 1:
        raise ConfigError(f"{desc.id} has several heights; use the windows subcommand")

    hmax = cfg.hmax[0]
    grid = cfg.grid or geometric_grid(hmax)
    log.info(f"🔄 Counting {desc.id} on {len(grid)} heights up to {max(grid):g}")
    points = enumerate_points(desc, hmax, cfg.workers)
    series = count_series(points, grid)
    fit = fit_power_log(series, cfg.fit_b)

    frame = series.to_frame("H")
    frame["nu"] = [nu_measure(desc, SingleHeightCap(math.log(h))) if h >= 1 else 0.0 for h in grid]
    frame["ratio"] = [c / n if n > 0 else 0.0 for c, n in zip(frame["count"], frame["nu"])]
    csv_path = storage.write_csv(frame, output_path(cfg, "count", "series.csv"), chash)

    exponent = float(desc.count_exponent[0])
    summary = {
        **fit.to_dict(),
        "expected_a": exponent,
        "expected_b": desc.log_exponent,
        "count_at_max": int(series.counts[-1]),
        "normalized_count": series.counts[-1] / grid[-1] ** exponent,
        "config_hash": chash,
    }
    json_path = storage.write_json(summary, output_path(cfg, "count", "fit.json"))
    return {"status": "success", **summary, "artifacts": [csv_path, json_path]}
