"""On-disk formats.

* triplets: CSV with header ``i,j,k,y``; 0-based indices, ``j < k``, ``y`` in {-1, 1}
* embeddings / Gram matrices: JSON ``{"n", "d", "kind": "gram"|"points", "data"}``
  with ``data`` a row-major nested list
* results: CSV, see :data:`RESULT_FIELDS`
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .triplets import Dataset

TRIPLET_HEADER = ["i", "j", "k", "y"]
RESULT_FIELDS = ["solver", "samples", "trial", "seed", "pred_err", "frob_err", "rel_frob_err",
                 "wall_time_s", "status"]


class FormatError(ValueError):
    def __init__(self, path, line: int | None, message: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = str(path)
        self.line = line


def save_triplets(path, data: Dataset) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRIPLET_HEADER)
        w.writerows(np.column_stack([data.triplets, data.y]).tolist())


def load_triplets(path, n: int | None = None) -> Dataset:
    """Read a triplet file; ``n`` defaults to one more than the largest index seen."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != TRIPLET_HEADER:
            raise FormatError(path, 1, f"expected header {','.join(TRIPLET_HEADER)}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not f.strip() for f in rec):
                continue
            if len(rec) != 4:
                raise FormatError(path, lineno, f"expected 4 fields, got {len(rec)}")
            try:
                i, j, k, y = (int(f) for f in rec)
            except ValueError:
                raise FormatError(path, lineno, "fields must be integers") from None
            if min(i, j, k) < 0:
                raise FormatError(path, lineno, "indices must be non-negative")
            if i in (j, k):
                raise FormatError(path, lineno, "i must differ from j and k")
            if j >= k:
                raise FormatError(path, lineno, f"non-canonical triplet: need j < k, got j={j}, k={k}")
            if y not in (-1, 1):
                raise FormatError(path, lineno, f"label must be -1 or 1, got {y}")
            if n is not None and max(i, k) >= n:
                raise FormatError(path, lineno, f"index {max(i, k)} out of range for n={n}")
            rows.append((i, j, k, y))
    arr = np.array(rows, dtype=np.int64).reshape(-1, 4)
    if n is None:
        n = int(arr[:, :3].max()) + 1 if len(arr) else 0
    return Dataset(n, arr[:, :3], arr[:, 3])


def save_embedding(path, M, kind: str = "gram", d: int | None = None) -> None:
    M = np.asarray(M, dtype=float)
    if kind not in ("gram", "points"):
        raise ValueError("kind must be 'gram' or 'points'")
    if d is None:
        if kind == "points":
            d = M.shape[1]
        else:
            w = np.linalg.eigvalsh(M) if M.size else np.zeros(0)
            d = int((w > 1e-10 * max(w.max(initial=0.0), 1e-300)).sum())
    payload = {"n": int(M.shape[0]), "d": int(d), "kind": kind, "data": M.tolist()}
    Path(path).write_text(json.dumps(payload))


def load_embedding(path) -> tuple[str, np.ndarray, dict]:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(path, exc.lineno, f"invalid JSON: {exc.msg}") from None
    for key in ("n", "d", "kind", "data"):
        if key not in obj:
            raise FormatError(path, None, f"missing key {key!r}")
    M = np.array(obj["data"], dtype=float)
    if obj["kind"] == "gram":
        M = M.reshape(obj["n"], obj["n"])
    else:
        M = M.reshape(obj["n"], obj["d"])
    return obj["kind"], M, obj


def save_results(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RESULT_FIELDS)
        w.writeheader()
        for r in rows:
            w.writerow({k: getattr(r, k) for k in RESULT_FIELDS})


def save_table(path, rows: list[dict]) -> None:
    if not rows:
        Path(path).write_text("")
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


def load_results(path) -> list:
    from .experiment import TrialResult

    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            out.append(TrialResult(
                solver=rec["solver"], samples=int(rec["samples"]), trial=int(rec["trial"]),
                seed=int(rec["seed"]), pred_err=float(rec["pred_err"]),
                frob_err=float(rec["frob_err"]), rel_frob_err=float(rec["rel_frob_err"]),
                wall_time_s=float(rec["wall_time_s"]), status=rec["status"],
            ))
    return out
