"""CSV ingest, schema validation, and output serialization.

Input schemas (UTF-8, headered, one record per line):

* events:       src,dst,timestamp,kind,duration,cell_lat,cell_lon
* transactions: user,month,purchase,debt
* profiles:     user,age,gender,zip_lat,zip_lon,salary,income
* locations:    user,kind,lat,lon          (kind in {zip, home, work})

Empty fields mean "missing" for optional columns.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .econ import EgoProfile, TransactionRecord
from .geo import GeoPoint
from .graph import EventKind, EventRecord

EVENT_COLUMNS = ["src", "dst", "timestamp", "kind", "duration", "cell_lat", "cell_lon"]
TRANSACTION_COLUMNS = ["user", "month", "purchase", "debt"]
PROFILE_COLUMNS = ["user", "age", "gender", "zip_lat", "zip_lon", "salary", "income"]
LOCATION_COLUMNS = ["user", "kind", "lat", "lon"]


class IngestError(ValueError):
    pass


@dataclass
class Diagnostic:
    severity: str          # "fatal" or "warning"
    path: str
    message: str
    row: Optional[int] = None

    def __str__(self):
        where = f"{self.path}:{self.row}" if self.row is not None else self.path
        return f"[{self.severity}] {where}: {self.message}"


@dataclass
class Diagnostics:
    items: List[Diagnostic] = field(default_factory=list)

    def fatal(self, path, message, row=None):
        self.items.append(Diagnostic("fatal", str(path), message, row))

    def warn(self, path, message, row=None):
        self.items.append(Diagnostic("warning", str(path), message, row))

    @property
    def has_fatal(self) -> bool:
        return any(d.severity == "fatal" for d in self.items)

    def raise_if_fatal(self):
        if self.has_fatal:
            first = next(d for d in self.items if d.severity == "fatal")
            raise IngestError(str(first))


def _check_header(path: Path, expected: List[str], diags: Diagnostics) -> bool:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            diags.fatal(path, "file is empty")
            return False
    if [h.strip() for h in header] != expected:
        diags.fatal(path, f"bad header {header!r}, expected {expected!r}")
        return False
    return True


def _opt_float(s: str) -> Optional[float]:
    s = s.strip()
    return float(s) if s else None


def read_events(path, diags: Optional[Diagnostics] = None) -> List[EventRecord]:
    path = Path(path)
    diags = diags if diags is not None else Diagnostics()
    if not path.exists():
        diags.fatal(path, "file does not exist")
        diags.raise_if_fatal()
    if not _check_header(path, EVENT_COLUMNS, diags):
        diags.raise_if_fatal()
    out: List[EventRecord] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for i, row in enumerate(reader, start=2):
            try:
                kind = EventKind(row["kind"].strip().lower())
                lat = _opt_float(row["cell_lat"])
                lon = _opt_float(row["cell_lon"])
                if (lat is None) != (lon is None):
                    raise ValueError("cell_lat/cell_lon must come together")
                if lat is not None and not (-90 <= lat <= 90):
                    raise ValueError(f"latitude out of range: {lat}")
                if lon is not None and not (-180 < lon <= 180):
                    raise ValueError(f"longitude out of range: {lon}")
                out.append(EventRecord(
                    caller=row["src"].strip(), callee=row["dst"].strip(),
                    timestamp=float(row["timestamp"]), kind=kind,
                    duration=float(row["duration"] or 0.0),
                    cell_lat=lat, cell_lon=lon))
            except (ValueError, KeyError) as exc:
                diags.fatal(path, str(exc), row=i)
    diags.raise_if_fatal()
    return out


def read_transactions(path, diags: Optional[Diagnostics] = None
                      ) -> List[TransactionRecord]:
    path = Path(path)
    diags = diags if diags is not None else Diagnostics()
    if not path.exists():
        diags.fatal(path, "file does not exist")
        diags.raise_if_fatal()
    if not _check_header(path, TRANSACTION_COLUMNS, diags):
        diags.raise_if_fatal()
    merged: Dict[Tuple[str, int], TransactionRecord] = {}
    duplicates = 0
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for i, row in enumerate(reader, start=2):
            try:
                rec = TransactionRecord(
                    user=row["user"].strip(), month=int(row["month"]),
                    purchase_total=float(row["purchase"]),
                    debt=_opt_float(row["debt"]))
            except (ValueError, KeyError) as exc:
                diags.fatal(path, str(exc), row=i)
                continue
            key = (rec.user, rec.month)
            if key in merged:
                duplicates += 1
                prev = merged[key]
                debt = (None if prev.debt is None and rec.debt is None
                        else (prev.debt or 0.0) + (rec.debt or 0.0))
                merged[key] = TransactionRecord(
                    user=rec.user, month=rec.month,
                    purchase_total=prev.purchase_total + rec.purchase_total,
                    debt=debt)
            else:
                merged[key] = rec
    if duplicates:
        diags.warn(path, f"{duplicates} duplicate (user, month) rows summed")
    diags.raise_if_fatal()
    return [merged[k] for k in sorted(merged)]


def read_profiles(path, diags: Optional[Diagnostics] = None) -> Dict[str, EgoProfile]:
    path = Path(path)
    diags = diags if diags is not None else Diagnostics()
    if not path.exists():
        diags.fatal(path, "file does not exist")
        diags.raise_if_fatal()
    if not _check_header(path, PROFILE_COLUMNS, diags):
        diags.raise_if_fatal()
    out: Dict[str, EgoProfile] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for i, row in enumerate(reader, start=2):
            try:
                user = row["user"].strip()
                if user in out:
                    diags.warn(path, f"duplicate profile for {user}; keeping first", row=i)
                    continue
                lat, lon = _opt_float(row["zip_lat"]), _opt_float(row["zip_lon"])
                zip_point = None
                if lat is not None and lon is not None:
                    zip_point = (lat, lon)
                    GeoPoint(lat, lon)  # range check
                out[user] = EgoProfile(
                    user=user, age=_opt_float(row["age"]),
                    gender=row["gender"].strip() or None,
                    zip_point=zip_point,
                    salary=_opt_float(row["salary"]),
                    income=_opt_float(row["income"]))
            except (ValueError, KeyError) as exc:
                diags.fatal(path, str(exc), row=i)
    diags.raise_if_fatal()
    return out


def read_locations(path, diags: Optional[Diagnostics] = None
                   ) -> Dict[str, Dict[str, GeoPoint]]:
    """Returns user -> {kind -> point} with kind in {zip, home, work}."""
    path = Path(path)
    diags = diags if diags is not None else Diagnostics()
    if not path.exists():
        diags.fatal(path, "file does not exist")
        diags.raise_if_fatal()
    if not _check_header(path, LOCATION_COLUMNS, diags):
        diags.raise_if_fatal()
    out: Dict[str, Dict[str, GeoPoint]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for i, row in enumerate(reader, start=2):
            try:
                kind = row["kind"].strip().lower()
                if kind not in ("zip", "home", "work"):
                    raise ValueError(f"unknown location kind {kind!r}")
                point = GeoPoint(float(row["lat"]), float(row["lon"]))
                user = row["user"].strip()
                slot = out.setdefault(user, {})
                if kind in slot:
                    diags.warn(path, f"duplicate {kind} location for {user}", row=i)
                slot[kind] = point
            except (ValueError, KeyError) as exc:
                diags.fatal(path, str(exc), row=i)
    diags.raise_if_fatal()
    return out


def validate_inputs(events=None, transactions=None, profiles=None,
                    locations=None) -> Diagnostics:
    """Schema-check every provided CSV; fatal and warning diagnostics."""
    diags = Diagnostics()
    if events is not None:
        try:
            read_events(events, diags)
        except IngestError:
            pass
    if transactions is not None:
        try:
            read_transactions(transactions, diags)
        except IngestError:
            pass
    if profiles is not None:
        try:
            read_profiles(profiles, diags)
        except IngestError:
            pass
    if locations is not None:
        try:
            read_locations(locations, diags)
        except IngestError:
            pass
    return diags


# --- output helpers ---------------------------------------------------------


def write_csv(path, header: Sequence[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _fmt(x):
    if isinstance(x, float):
        if np.isnan(x):
            return ""
        return repr(x)
    return x


def write_matrix_csv(path, matrix: np.ndarray, label: str = "class") -> None:
    n = matrix.shape[0]
    header = [label] + [str(j + 1) for j in range(n)]
    rows = [[str(i + 1)] + [float(matrix[i, j]) for j in range(n)]
            for i in range(n)]
    write_csv(path, header, rows)


def read_matrix_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = [[float(x) if x else np.nan for x in row[1:]] for row in reader]
    return np.asarray(rows, dtype=np.float64)


def write_json(path, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
