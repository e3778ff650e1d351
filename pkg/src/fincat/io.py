"""JSON state files and 17-significant-digit writers.

Schemas::

    {"probs": [...]}                       probability vector
    {"weights": [...]}                     Gibbs state, explicit weights
    {"energies": [...], "beta": x}         Gibbs state from energies
    {"dims": [dA, dB], "re": [[...]], "im": [[...]]}   density matrix

Non-finite floats are written as the strings "inf", "-inf" and "nan".
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .exceptions import FincatError
from .qstates import DensityMatrix
from .spectra import GibbsSpec, ProbVec


class InputError(FincatError):
    """A state file is missing, unreadable or does not match its schema."""


def read_json(path) -> dict:
    path = Path(path)
    try:
        with path.open() as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise InputError(f"{path}: expected a JSON object")
    return doc


def _require(doc: dict, key: str, path) -> Any:
    if key not in doc:
        raise InputError(f"{path}: missing key {key!r}")
    return doc[key]


def prob_vec_from_doc(doc: dict, path="<doc>") -> ProbVec:
    try:
        return ProbVec(np.asarray(_require(doc, "probs", path), dtype=float))
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def gibbs_from_doc(doc: dict, path="<doc>") -> GibbsSpec:
    try:
        if "weights" in doc:
            return GibbsSpec(np.asarray(doc["weights"], dtype=float))
        return GibbsSpec(energies=_require(doc, "energies", path), beta=float(_require(doc, "beta", path)))
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def density_matrix_from_doc(doc: dict, path="<doc>") -> DensityMatrix:
    try:
        re = np.asarray(_require(doc, "re", path), dtype=float)
        im = np.asarray(doc.get("im", np.zeros_like(re)), dtype=float)
        dims = doc.get("dims")
        return DensityMatrix(re + 1j * im, tuple(dims) if dims is not None else None)
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def load_prob_vec(path) -> ProbVec:
    return prob_vec_from_doc(read_json(path), path)


def load_gibbs(path) -> GibbsSpec:
    return gibbs_from_doc(read_json(path), path)


def load_density_matrix(path) -> DensityMatrix:
    return density_matrix_from_doc(read_json(path), path)


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _encode(obj: Any) -> str:
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return fmt_float(x) if math.isfinite(x) else json.dumps(fmt_float(x))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Deterministic JSON with every float at 17 significant digits."""
    return _encode(obj)


def prob_vec_doc(p: ProbVec) -> dict:
    return {"probs": p.tolist()}


def density_matrix_doc(rho: DensityMatrix) -> dict:
    return {
        "dims": list(rho.dims) if rho.dims else None,
        "re": rho.entries.real.tolist(),
        "im": rho.entries.imag.tolist(),
    }


def csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return fmt_float(float(value))
    return str(value)


def write_csv(fh, header: Sequence[str], rows: Iterable[dict], preamble: str | None = None) -> None:
    """CSV with an optional ``# ...`` preamble line carrying the format version."""
    if preamble:
        fh.write(f"# {preamble}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([csv_cell(row.get(col)) for col in header])
