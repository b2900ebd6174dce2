"""Deterministic CSV, JSON and SVG writers plus the run manifest."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import math
import os

import numpy as np

FLOAT_FORMAT = ".17g"


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), FLOAT_FORMAT)
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return "" if v is None else str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if hasattr(obj, "value") and not isinstance(obj, (str, bytes)):
        return obj.value
    return obj


def write_json(path, data):
    with open(path, "w") as fh:
        json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def save_svg(fig, path):
    """Write a self-contained SVG with no date stamp and a fixed id salt."""
    import matplotlib

    matplotlib.rcParams["svg.hashsalt"] = "readout-forge"
    fig.savefig(path, format="svg", metadata={"Date": None})
    import matplotlib.pyplot as plt

    plt.close(fig)
    return path


def new_figure(*args, **kwargs):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt.subplots(*args, **kwargs)


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, command, params, files, version):
    """``<command>_manifest.json`` listing every output with its checksum."""
    entries = [
        {"path": os.path.basename(f), "sha256": sha256(f)} for f in sorted(files)
    ]
    data = {
        "command": command,
        "params": params,
        "version": version,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "files": entries,
    }
    return write_json(os.path.join(out_dir, f"{command}_manifest.json"), data)


def verify_manifest(path):
    """True when every listed file exists next to the manifest with a matching checksum."""
    with open(path) as fh:
        data = json.load(fh)
    base = os.path.dirname(path)
    for entry in data["files"]:
        f = os.path.join(base, entry["path"])
        if not os.path.exists(f) or sha256(f) != entry["sha256"]:
            return False
    return True
