"""
Instance and report files.

Vectors are written one value per line and matrices as comma-separated rows without a header,
UTF-8 with LF line endings. Floats are written with `repr`, so a read gives back the exact values.
"""

import csv
import dataclasses
import json
import logging
import os
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from .datagen import Instance
from .errors import InputValidationError, MalformedInputError
from .parameter import Observation, TruthSpec

logger = logging.getLogger("eio")

PathLike = Union[str, os.PathLike]

Z_FILE = "Z.csv"
A_HAT_FILE = "A_hat.csv"
META_FILE = "meta.json"
TRUTH_FILE = "truth.json"


class ReportEncoder(json.JSONEncoder):
    def default(self, o):
        if hasattr(o, "to_dict"):
            return o.to_dict()
        if dataclasses.is_dataclass(o) and not isinstance(o, type):
            return dataclasses.asdict(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer, np.bool_)):
            return o.item()
        if isinstance(o, Path):
            return str(o)
        return super().default(o)


def write_json(path: PathLike, payload: Any):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, indent=2, cls=ReportEncoder)
        f.write("\n")


def read_json(path: PathLike) -> Any:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise InputValidationError(f"{path}: file not found")
    except json.JSONDecodeError as e:
        raise MalformedInputError(e.msg, str(path), e.lineno)


def _format(value: float) -> str:
    return repr(float(value))


def write_vector(path: PathLike, vector):
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        for value in np.asarray(vector, dtype=float).ravel():
            writer.writerow([_format(value)])


def write_matrix(path: PathLike, matrix):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        for row in matrix:
            writer.writerow([_format(value) for value in row])


def _read_rows(path: PathLike) -> list[list[float]]:
    rows = []
    try:
        with open(path, encoding="utf-8", newline="") as f:
            for line_number, row in enumerate(csv.reader(f), start=1):
                if not row or all(not cell.strip() for cell in row):
                    continue
                try:
                    values = [float(cell) for cell in row]
                except ValueError:
                    raise MalformedInputError(f"cannot parse {row!r} as numbers", str(path), line_number)
                if not all(np.isfinite(values)):
                    raise MalformedInputError("non-finite value", str(path), line_number)
                if rows and len(values) != len(rows[0]):
                    raise MalformedInputError(
                        f"row has {len(values)} columns, expected {len(rows[0])}", str(path), line_number
                    )
                rows.append(values)
    except FileNotFoundError:
        raise InputValidationError(f"{path}: file not found")
    except UnicodeDecodeError:
        raise MalformedInputError("not UTF-8 text", str(path))
    if not rows:
        raise MalformedInputError("no values", str(path))
    return rows


def read_vector(path: PathLike) -> np.ndarray:
    rows = _read_rows(path)
    if len(rows[0]) != 1:
        raise MalformedInputError(f"a vector file has one value per line, found {len(rows[0])}", str(path), 1)
    return np.array([row[0] for row in rows])


def read_matrix(path: PathLike) -> np.ndarray:
    return np.array(_read_rows(path))


def write_instance(out_dir: PathLike, instance: Instance, config: Optional[dict] = None) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    obs = instance.observation
    write_vector(out / Z_FILE, obs.z_obs)
    write_matrix(out / A_HAT_FILE, obs.a_hat)
    meta = {"p": obs.p, "q": obs.q, "mu2": obs.mu2, **instance.meta}
    if config is not None:
        meta["config"] = config
    write_json(out / META_FILE, meta)
    written = [out / Z_FILE, out / A_HAT_FILE, out / META_FILE]
    if instance.truth is not None:
        write_json(out / TRUTH_FILE, instance.truth.to_dict())
        written.append(out / TRUTH_FILE)
    logger.info("Wrote instance (p=%d, q=%d) to %s", obs.p, obs.q, out)
    return written


def read_truth(path: PathLike) -> TruthSpec:
    data = read_json(path)
    try:
        return TruthSpec(data["theta_star"], data["a_star"])
    except (KeyError, TypeError) as e:
        raise MalformedInputError(f"truth file needs 'theta_star' and 'a_star' ({e})", str(path))


def read_instance(in_dir: PathLike, mu2: Optional[float] = None) -> Instance:
    """Read Z.csv, A_hat.csv and meta.json (plus truth.json when present); `mu2` overrides the metadata."""
    root = Path(in_dir)
    meta = read_json(root / META_FILE)
    if not isinstance(meta, dict):
        raise MalformedInputError("metadata must be a JSON object", str(root / META_FILE))
    if mu2 is None:
        if "mu2" not in meta:
            raise MalformedInputError("metadata has no 'mu2'", str(root / META_FILE))
        mu2 = meta["mu2"]
    observation = Observation(read_vector(root / Z_FILE), read_matrix(root / A_HAT_FILE), mu2)
    truth = read_truth(root / TRUTH_FILE) if (root / TRUTH_FILE).exists() else None
    return Instance(observation=observation, truth=truth, meta=meta)
