import logging

import pandas as pd

import storage
from dynamics import escape_trace
from jobs import centers, output_path, resolve

log = logging.getLogger(__name__)

DEFAULT_T_GRID = [0.5 * k for k in range(41)]


def run(cfg) -> dict:
    """λ₁ along the flow for every centre, one CSV block per centre."""
    desc, chash = resolve(cfg, "escape")
    t_grid = cfg.t_grid or DEFAULT_T_GRID
    frames, verdicts = [], []
    for i, x in enumerate(centers(desc, cfg)):
        trace = escape_trace(x, t_grid, cfg.workers)
        frame = trace.to_frame()
        frame.insert(0, "center", i)
        frames.append(frame)
        verdicts.append({"center": i, "spec": cfg.centers[i], **trace.summary()})

    csv_path = storage.write_csv(pd.concat(frames, ignore_index=True), output_path(cfg, "escape", "trace.csv"), chash)
    json_path = storage.write_json({"traces": verdicts, "config_hash": chash}, output_path(cfg, "escape", "summary.json"))
    return {"status": "success", "traces": verdicts, "artifacts": [csv_path, json_path]}
