import logging

import storage
import varieties
from jobs import output_path, require, resolve

log = logging.getLogger(__name__)


def run(cfg) -> dict:
    """Write the canonical point list of the variety up to ``hmax``."""
    require(cfg, "hmax")
    desc, chash = resolve(cfg, "enumerate")
    hmax = cfg.hmax[0] if len(cfg.hmax) == 1 else cfg.hmax
    points = varieties.enumerate_points(desc, hmax, cfg.workers)
    path = storage.write_csv(points.to_frame(), output_path(cfg, "enumerate", "points.csv"), chash)
    return {"status": "success", "variety": desc.id, "points": len(points), "artifacts": [path]}
