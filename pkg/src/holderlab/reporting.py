"""CSV reports and their JSON metadata sidecars."""
import csv
import json
import math
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .rng import ALGORITHM

__all__ = ["write_csv", "write_meta", "write_report", "CSV_HEADERS"]

# fixed column orders per report name
CSV_HEADERS = {
    "kernel_table": ["t", "u_unit"],
    "kernel_check": ["quantity", "k", "alpha", "epsilon", "computed", "expected", "rel_error", "tolerance", "passed"],
    "measure": ["x", "weight"],
    "measure_disk": ["x", "y", "weight"],
    "energy_trace": ["step", "energy", "method"],
    "energy_fit": ["lambda", "C_tilde", "kappa", "window_start", "window_end", "converged"],
    "holder_profile": ["r", "sup_mass"],
    "holder_fit": ["alpha_hat", "C_hat", "degenerate"],
    "threshold": ["n", "r", "sup_mass", "bound", "ratio"],
    "variance_check": ["residual", "threshold", "variance", "te_convolution", "te_average", "inequality_holds",
                       "passed"],
    "theta_check": ["wasserstein", "threshold", "lip_constant", "grid_points", "passed"],
    "dispersion": ["map", "probability", "distance", "metric"],
    "local_dimension": ["n", "k", "center", "half_width", "width", "mass", "floor", "sigma", "ratio", "warning"],
    "moments": ["n_max", "gamma", "moment", "log_moment", "log_moment_limit"],
}


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    if v is None:
        return ""
    return v


def write_csv(path, header, rows):
    """RFC 4180 CSV with shortest round-trip float formatting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


def write_meta(path, config=None, seed=None, runtime=None, **extra):
    """JSON sidecar; the only place timestamps and runtimes are written."""
    meta = {
        "version": __version__,
        "rng_algorithm": ALGORITHM,
        "seed": seed,
        "config": config,
        "runtime_seconds": runtime,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    meta.update(extra)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n")
    return path


def write_report(out_dir, name, rows, config=None, seed=None, started=None, header=None, **extra):
    """Write ``<name>.csv`` and ``<name>.meta`` into ``out_dir``."""
    out_dir = Path(out_dir)
    header = header or CSV_HEADERS[name]
    csv_path = write_csv(out_dir / f"{name}.csv", header, rows)
    runtime = None if started is None else time.perf_counter() - started
    write_meta(out_dir / f"{name}.meta", config, seed, runtime, columns=header, **extra)
    return csv_path
