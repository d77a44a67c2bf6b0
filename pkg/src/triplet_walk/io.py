"""File formats: states, density matrices and delimited tables.

Complex numbers are always written as explicit real/imaginary pairs and
floats with 17 significant digits so files round-trip exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analysis import density_matrix
from .core import BASIS_LABELS, TripletAmplitudes

FORMATS = ("csv", "json")


def fmt_float(x) -> str:
    return format(float(x), ".17g")


def _check_format(fmt: str):
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")


def _open_for_write(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def state_to_dict(state: TripletAmplitudes) -> dict:
    return {
        "basis": list(BASIS_LABELS),
        "frame": state.frame,
        "re": [float(v) for v in state.amps.real],
        "im": [float(v) for v in state.amps.imag],
    }


def state_from_dict(data) -> TripletAmplitudes:
    """Accept ``{"re": [...], "im": [...]}`` or a list of ``{"re", "im"}`` pairs."""
    if isinstance(data, dict):
        if "basis" in data and list(data["basis"]) != list(BASIS_LABELS):
            raise ValueError(f"basis order must be {list(BASIS_LABELS)}")
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
        frame = data.get("frame", "rotating")
    elif isinstance(data, (list, tuple)):
        re = np.array([float(v["re"]) if isinstance(v, dict) else float(v) for v in data])
        im = np.array([float(v.get("im", 0.0)) if isinstance(v, dict) else 0.0 for v in data])
        frame = "rotating"
    else:
        raise ValueError(f"cannot read a state from {type(data).__name__}")
    if re.shape != (8,) or im.shape != (8,):
        raise ValueError("a state needs exactly 8 real and 8 imaginary parts")
    return TripletAmplitudes(re + 1j * im, frame)


def save_state(state: TripletAmplitudes, path, fmt: str = "json") -> Path:
    _check_format(fmt)
    path = Path(path)
    with _open_for_write(path) as fh:
        if fmt == "json":
            json.dump(state_to_dict(state), fh, indent=2)
            fh.write("\n")
        else:
            writer = csv.writer(fh)
            writer.writerow(["basis", "re", "im", "probability"])
            for label, amp in zip(BASIS_LABELS, state.amps):
                writer.writerow([label, fmt_float(amp.real), fmt_float(amp.imag), fmt_float(abs(amp) ** 2)])
    return path


def load_state(path) -> TripletAmplitudes:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if path.suffix == ".csv":
        rows = list(csv.DictReader(text.splitlines()))
        labels = [r["basis"] for r in rows]
        if labels != list(BASIS_LABELS):
            raise ValueError(f"{path}: basis column must be {list(BASIS_LABELS)}")
        return TripletAmplitudes([complex(float(r["re"]), float(r["im"])) for r in rows])
    return state_from_dict(json.loads(text))


def export_density_matrix(state, path, fmt: str = "json") -> Path:
    """Write ``rho = |psi><psi|`` as real and imaginary 8x8 blocks."""
    _check_format(fmt)
    rho = density_matrix(state).rho
    path = Path(path)
    with _open_for_write(path) as fh:
        if fmt == "json":
            json.dump(
                {
                    "basis": list(BASIS_LABELS),
                    "re": [[float(v) for v in row] for row in rho.real],
                    "im": [[float(v) for v in row] for row in rho.imag],
                },
                fh,
                indent=2,
            )
            fh.write("\n")
        else:
            writer = csv.writer(fh)
            writer.writerow([f"re_{b}" for b in BASIS_LABELS] + [f"im_{b}" for b in BASIS_LABELS])
            for re_row, im_row in zip(rho.real, rho.imag):
                writer.writerow([fmt_float(v) for v in re_row] + [fmt_float(v) for v in im_row])
    return path


def load_density_matrix(path) -> np.ndarray:
    path = Path(path)
    if path.suffix == ".csv":
        rows = list(csv.reader(path.read_text().splitlines()))[1:]
        arr = np.array([[float(v) for v in row] for row in rows])
        return arr[:, :8] + 1j * arr[:, 8:]
    data = json.loads(path.read_text())
    return np.array(data["re"]) + 1j * np.array(data["im"])


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return fmt_float(value)
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    return str(value)


def _plain(value):
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def write_table(path, columns: Sequence[str], rows: Iterable[Sequence], fmt: str, meta: dict | None = None) -> Path:
    """Write a table as CSV rows or as a JSON document ``{"columns", "rows", **meta}``."""
    _check_format(fmt)
    path = Path(path)
    rows = list(rows)
    with _open_for_write(path) as fh:
        if fmt == "csv":
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
        else:
            doc = dict(_plain(meta or {}))
            doc["columns"] = list(columns)
            doc["rows"] = [[_plain(v) for v in row] for row in rows]
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return path


def write_json(path, data) -> Path:
    path = Path(path)
    with _open_for_write(path) as fh:
        json.dump(_plain(data), fh, indent=2)
        fh.write("\n")
    return path
