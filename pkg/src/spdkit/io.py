"""File formats used by the command-line tool.

* matrices: plain CSV, one row per line, no header;
* Gaussian models: JSON ``{"mean": [...], "cov": [[...], ...]}``;
* Kronecker models: JSON ``{"sigma2": s, "factors": [...]}`` where each
  factor is an inline array of arrays or a CSV path (relative paths are
  resolved against the JSON file's directory).
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError
from .gaussian import GaussianModel
from .multiway import KroneckerSpd
from .spd import SpdMatrix


class FileFormatError(InputError):
    """A file could not be read or parsed."""


def read_matrix_array(path) -> np.ndarray:
    try:
        a = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    except (OSError, ValueError) as exc:
        raise FileFormatError(f"{path}: {exc}") from None
    return a


def read_matrix(path) -> SpdMatrix:
    return SpdMatrix(read_matrix_array(path))


def write_matrix(path_or_file, a) -> None:
    """Write a matrix as CSV using ``repr`` so values re-parse bit for bit."""
    text = format_matrix(a)
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        Path(path_or_file).write_text(text)


def format_matrix(a) -> str:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return "".join(",".join(repr(float(x)) for x in row) + "\n" for row in a)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, ValueError) as exc:
        raise FileFormatError(f"{path}: {exc}") from None


def read_gaussian(path) -> GaussianModel:
    doc = _load_json(path)
    try:
        return GaussianModel(doc["mean"], doc["cov"])
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{path}: expected fields 'mean' and 'cov' ({exc})") from None


def read_kronecker(path) -> KroneckerSpd:
    doc = _load_json(path)
    base = Path(path).parent
    try:
        factors = []
        for f in doc["factors"]:
            if isinstance(f, str):
                fp = Path(f)
                factors.append(read_matrix_array(fp if fp.is_absolute() else base / fp))
            else:
                factors.append(np.asarray(f, dtype=float))
        return KroneckerSpd(doc["sigma2"], factors)
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{path}: expected fields 'sigma2' and 'factors' ({exc})") from None


def file_digest(*paths) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()


def fmt(x) -> str:
    """12 significant digits; ``inf`` for positive infinity."""
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def _json_number(x):
    if x is None:
        return None
    x = float(x)
    return "inf" if x == math.inf else x


def _from_json_number(x):
    return math.inf if x == "inf" else x


@dataclass
class ResultRecord:
    digest: str
    params: dict
    value: float
    finite: bool
    terms: list | None = None
    regime: str | None = None
    timing: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = asdict(self)
        d["value"] = _json_number(self.value)
        if self.terms is not None:
            d["terms"] = [_json_number(t) for t in self.terms]
        return json.dumps(d, separators=(",", ":"), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        d = json.loads(text)
        d["value"] = _from_json_number(d["value"])
        if d.get("terms") is not None:
            d["terms"] = [_from_json_number(t) for t in d["terms"]]
        return cls(**d)


def thread_count() -> int:
    raw = os.environ.get("SPDKIT_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)
