import logging

import pandas as pd

import storage
from errors import InsufficientMass
from heights import MovingBox, at_time, window_hmax
from jobs import build_window, centers, output_path, require, resolve
from varieties import enumerate_points
from zooming import build_zoom_cloud, default_box, fit_mass_slope, uniformity_stats, zoom_masses

log = logging.getLogger(__name__)


def run(cfg) -> dict:
    """Zoom masses per centre and τ, their fitted slopes, a cloud dump and uniformity at the last t."""
    require(cfg, "t_grid")
    desc, chash = resolve(cfg, "zoom")
    template = build_window(desc, cfg.window)
    moving = template if isinstance(template, MovingBox) else None
    box = tuple(tuple(b) for b in cfg.box) if cfg.box else default_box(desc)
    t_last = max(cfg.t_grid)

    points = None
    if desc.id != "gr:1:2":
        points = enumerate_points(desc, window_hmax(at_time(template, t_last)), cfg.workers)

    rows, fits, uniformity, artifacts = [], [], [], []
    for i, x in enumerate(centers(desc, cfg)):
        for tau in cfg.taus:
            log.info(f"🔄 Zoom: centre {i} ({x.provenance}), τ={tau:g}")
            masses = zoom_masses(desc, x, tau, cfg.t_grid, box, moving, points, cfg.workers)
            fit = fit_mass_slope(desc, masses, tau, moving, cfg.fit_b)
            masses.insert(0, "center", i)
            masses["predicted_slope"] = fit.predicted
            masses["fitted_slope"] = fit.a
            rows.append(masses)
            fits.append({"center": i, "tau": tau, **fit.to_dict()})

            cloud = build_zoom_cloud(desc, x, tau, t_last, at_time(template, t_last), points, box, cfg.workers)
            dump = output_path(cfg, "zoom", f"cloud_c{i}_tau{tau:g}.csv")
            artifacts.append(storage.write_csv(cloud.to_frame(), dump, chash))
            try:
                stats = uniformity_stats(cloud, box)
            except InsufficientMass as e:
                stats = e.to_dict()
            uniformity.append({"center": i, "tau": tau, "t": t_last, **stats})

    frame = pd.concat(rows, ignore_index=True)[["center", "t", "tau", "mass", "predicted_slope", "fitted_slope"]]
    artifacts.insert(0, storage.write_csv(frame, output_path(cfg, "zoom", "slopes.csv"), chash))
    summary = {"fits": fits, "uniformity": uniformity, "config_hash": chash}
    artifacts.append(storage.write_json(summary, output_path(cfg, "zoom", "summary.json")))
    errors = [abs(f["a"] - f["predicted"]) / abs(f["predicted"]) for f in fits if f["predicted"]]
    worst = max(errors) if errors else None
    return {"status": "success", "runs": len(fits), "worst_relative_slope_error": worst, "artifacts": artifacts}
