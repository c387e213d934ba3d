import logging

import storage
from diophantine import schubert_genericity
from jobs import centers, output_path, resolve

log = logging.getLogger(__name__)


def run(cfg) -> dict:
    desc, chash = resolve(cfg, "genericity")
    x = centers(desc, cfg)[0]
    report = schubert_genericity(x, desc, cfg.bound, cfg.tol, cfg.workers)
    summary = {**report.to_dict(), "center": cfg.centers[0], "config_hash": chash}
    path = storage.write_json(summary, output_path(cfg, "genericity", "report.json"))
    return {"status": "success", "violations": len(report.violations), "artifacts": [path]}
