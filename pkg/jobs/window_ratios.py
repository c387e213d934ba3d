import logging

import storage
from counting import window_ratio_series
from heights import at_time, window_hmax
from jobs import build_window, output_path, require, resolve
from varieties import enumerate_points
from zooming import predicted_slope

log = logging.getLogger(__name__)


def run(cfg) -> dict:
    """Counts in the moving windows D_t against ν(D_t), with the empirical κ̂."""
    require(cfg, "t_grid")
    desc, chash = resolve(cfg, "windows")
    window = build_window(desc, cfg.window)
    need = window_hmax(at_time(window, max(cfg.t_grid)))
    log.info(f"🔄 Window ratios for {desc.id}: t ∈ [{min(cfg.t_grid):g}, {max(cfg.t_grid):g}]")

    points = enumerate_points(desc, need, cfg.workers)
    ratios = window_ratio_series(desc, points, window, cfg.t_grid)
    csv_path = storage.write_csv(ratios.frame, output_path(cfg, "windows", "ratios.csv"), chash)

    summary = {
        **ratios.summary(),
        "predicted_count_slope": predicted_slope(desc, window, 0.0),
        "config_hash": chash,
    }
    json_path = storage.write_json(summary, output_path(cfg, "windows", "kappa.json"))
    return {"status": "success", **summary, "artifacts": [csv_path, json_path]}
