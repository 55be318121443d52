"""File formats: trajectory CSV, binary coefficient dumps, run manifests.

Coefficient dump layout (little-endian throughout):

    uint32   M                 number of stored modes
    float64  t                 sample time
    float64  pairs (Re u_hat_n, Im u_hat_n) for n = 1..M

Floats in CSV files are written with repr-faithful %.17g so identical runs
produce byte-identical output.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .pde import RealState, Trajectory

TRAJECTORY_COLUMNS = ["t", "H_BO", "momentum", "P_value", "H_total"]


def write_trajectory_csv(path, times, observable_rows) -> None:
    """Rows are dicts with the TRAJECTORY_COLUMNS entries (t taken from times)."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(TRAJECTORY_COLUMNS) + "\n")
        for t, row in zip(times, observable_rows):
            vals = [t] + [row[c] for c in TRAJECTORY_COLUMNS[1:]]
            fh.write(",".join(f"{v:.17g}" for v in vals) + "\n")


def read_trajectory_csv(path) -> dict:
    """Columns as arrays, keyed by header name."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [list(map(float, line.split(","))) for line in fh if line.strip()]
    data = np.asarray(rows)
    return {name: data[:, i] for i, name in enumerate(header)}


def dump_filename(index: int) -> str:
    return f"coeffs_{index:06d}.bin"


def write_coeff_dump(path, t: float, coeffs: np.ndarray) -> None:
    coeffs = np.asarray(coeffs, dtype=complex)
    M = len(coeffs)
    pairs = np.empty(2 * M, dtype="<f8")
    pairs[0::2] = coeffs.real
    pairs[1::2] = coeffs.imag
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Id", M, float(t)))
        fh.write(pairs.tobytes())


def read_coeff_dump(path) -> tuple[float, np.ndarray]:
    raw = Path(path).read_bytes()
    M, t = struct.unpack_from("<Id", raw, 0)
    pairs = np.frombuffer(raw, dtype="<f8", offset=struct.calcsize("<Id"), count=2 * M)
    return t, pairs[0::2] + 1j * pairs[1::2]


def write_run_dumps(out_dir, traj: Trajectory) -> None:
    out_dir = Path(out_dir)
    for i in range(len(traj)):
        write_coeff_dump(out_dir / dump_filename(i), traj.times[i], traj.coeffs[i])


def read_run_dumps(run_dir) -> Trajectory:
    run_dir = Path(run_dir)
    files = sorted(run_dir.glob("coeffs_*.bin"))
    if not files:
        raise FileNotFoundError(f"no coefficient dumps under {run_dir}")
    times, coeffs = [], []
    for f in files:
        t, c = read_coeff_dump(f)
        times.append(t)
        coeffs.append(c)
    return Trajectory(times=np.asarray(times), coeffs=np.asarray(coeffs))


def write_manifest(path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())


def state_from_dump(path) -> tuple[float, RealState]:
    t, coeffs = read_coeff_dump(path)
    return t, RealState(coeffs)
