import hashlib
import json
import logging
import os

import pandas as pd

log = logging.getLogger(__name__)


def config_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def csv_text(df: pd.DataFrame, chash: str) -> str:
    """CSV body plus the trailing ``# config-hash=`` metadata line."""
    body = df.to_csv(index=False, float_format="%.12g", lineterminator="\n")
    return f"{body}# config-hash={chash}\n"


def write_csv(df: pd.DataFrame, path: str, chash: str) -> str:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(csv_text(df, chash))
    log.info(f"💾 Saved {len(df)} rows → {path}")
    return path


def read_csv(path: str) -> pd.DataFrame:
    if not os.path.exists(path):
        raise FileNotFoundError(f"CSV not found at {path}")
    return pd.read_csv(path, comment="#")


def json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_jsonable) + "\n"


def write_json(obj, path: str) -> str:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as f:
        f.write(json_text(obj))
    log.info(f"💾 Saved summary → {path}")
    return path


def _jsonable(value):
    if hasattr(value, "tolist"):
        return value.tolist()
    if hasattr(value, "item"):
        return value.item()
    return str(value)
