"""CSV/JSON persistence. Floats are written as shortest round-trip decimals."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from rankone import trajectory as traj
from rankone.rmt import RunConfig
from rankone.trajectory import TrajectoryBundle

TRAJECTORY_COLUMNS = ["t", "j", "re", "im", "method"]


def tolerances() -> dict:
    return {
        "collision": traj.COLLISION_TOL,
        "newton_residual": traj.RESIDUAL_TOL,
        "newton_step": traj.STEP_TOL,
        "newton_max_iter": traj.NEWTON_MAX_ITER,
        "dt_min": traj.DT_MIN,
    }


def run_metadata(config: RunConfig, resampled=(), **extra) -> dict:
    meta = config.to_dict()
    meta["tolerances"] = tolerances()
    meta["resampled"] = list(resampled)
    meta.update(extra)
    return meta


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, tuple):
        return list(o)
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dumps(obj) -> str:
    # inf/nan would make invalid JSON
    def clean(x):
        if isinstance(x, float) and not np.isfinite(x):
            return None if np.isnan(x) else ("inf" if x > 0 else "-inf")
        if isinstance(x, dict):
            return {k: clean(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [clean(v) for v in x]
        if isinstance(x, (np.ndarray, np.generic, complex)):
            return clean(_jsonable(x))
        return x

    return json.dumps(clean(obj), indent=2, sort_keys=True, default=_jsonable) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def write_bundle_csv(bundle: TrajectoryBundle, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        for t, row in zip(bundle.times, bundle.lambdas):
            ts = repr(float(t))
            for j, z in enumerate(row, start=1):
                w.writerow([ts, j, repr(float(z.real)), repr(float(z.imag)), bundle.method])


def read_bundle_csv(path) -> TrajectoryBundle:
    times: list[float] = []
    values: dict[float, dict[int, complex]] = {}
    method = None
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            t = float(rec["t"])
            if t not in values:
                times.append(t)
                values[t] = {}
            values[t][int(rec["j"])] = complex(float(rec["re"]), float(rec["im"]))
            method = rec["method"]
    n = len(values[times[0]])
    lam = np.array([[values[t][j] for j in range(1, n + 1)] for t in times])
    return TrajectoryBundle(np.array(times), lam, method)
