import logging

from mpmath import mp

import config
import storage
from diophantine import convergents, estimate_beta, scan_best_approximations
from jobs import centers, output_path, require, resolve

log = logging.getLogger(__name__)

# Records below this height are not expected to be convergents.
CONVERGENT_CHECK_FROM = 10.0


def run(cfg) -> dict:
    """Best-approximation records of the first centre and the exponent estimates."""
    require(cfg, "hmax")
    desc, chash = resolve(cfg, "beta")
    x = centers(desc, cfg)[0]
    hmax = cfg.hmax[0]
    log.info(f"🔄 Best approximations on {desc.id} up to H={hmax:g}")

    records = scan_best_approximations(desc, x, hmax, cfg.exclude_self, workers=cfg.workers)
    estimate = estimate_beta(records, cfg.h_min)
    summary = {
        **estimate.to_dict(),
        "expected_beta": desc.beta,
        "records": records.to_list(),
        "config_hash": chash,
    }

    if desc.id == "gr:1:2" and x.rational is None:
        with mp.workdps(config.MP_DPS):
            alpha = x.vectors[0][1] / x.vectors[0][0]
        oracle = convergents(alpha, hmax)
        late = [r for h, r in zip(records.heights, records.reps) if h >= CONVERGENT_CHECK_FROM]
        summary["convergents"] = [list(c) for c in oracle]
        summary["records_are_convergents"] = all(tuple(r) in set(oracle) for r in late)

    path = storage.write_json(summary, output_path(cfg, "beta", "records.json"))
    return {"status": "success", **estimate.to_dict(), "records": len(records), "artifacts": [path]}
