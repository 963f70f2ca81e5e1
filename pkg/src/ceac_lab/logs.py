"""Trial logs: the unit of analysis.

A TrialLog is a uniformly sampled table of every logged channel plus a
JSON header block (schema version, config hash, task summary, event
markers).  On disk it is a CSV whose first line is the header JSON
behind a ``#``; see docs/formats.md for the bit-exact layout.
"""

from __future__ import annotations

import csv
import io
import json
import numpy as np

from .signals import TimeSeries

__all__ = ["LOG_COLUMNS", "TrialLog", "read_external_csv"]

LOG_SCHEMA_VERSION = 1

LOG_COLUMNS = [
    "t",
    "phi",
    "phi_ref",
    "eps",
    "theta",
    "beta",
    "omega_cmd",
    "pen_y",
    "pen_z",
    "in_contact",
    "motor_active",
    "target_index",
    "frozen",
]

_BOOL_COLUMNS = {"in_contact", "motor_active", "frozen"}
_INT_COLUMNS = {"target_index"}


class TrialLog:
    """In-memory trial log: channel arrays + header metadata."""

    def __init__(
        self,
        columns: dict[str, np.ndarray],
        header: dict,
        events: list[tuple[float, str]] | None = None,
        summary: dict | None = None,
    ):
        missing = [c for c in LOG_COLUMNS if c not in columns]
        if missing:
            raise ValueError(f"log missing columns: {missing}")
        n = len(columns["t"])
        if any(len(columns[c]) != n for c in LOG_COLUMNS):
            raise ValueError("all log columns must have equal length")
        self.columns = {c: np.asarray(columns[c]) for c in LOG_COLUMNS}
        self.header = dict(header)
        self.events = list(events or [])
        self.summary = dict(summary or {})

    def __len__(self) -> int:
        return len(self.columns["t"])

    @property
    def rate(self) -> float:
        return float(self.header.get("sample_rate", 60.0))

    def channel(self, name: str) -> TimeSeries:
        """A channel as a TimeSeries on the log's uniform grid."""
        return TimeSeries(t=self.columns["t"].astype(float), values=self.columns[name].astype(float), rate=self.rate)

    def pen_positions(self) -> np.ndarray:
        return np.column_stack([self.columns["pen_y"], self.columns["pen_z"]])

    def contact_trace(self) -> np.ndarray:
        """Pen positions while in contact (the rendered drawing trace)."""
        mask = self.columns["in_contact"].astype(bool)
        return self.pen_positions()[mask]

    def time_mask(self, start: float | None, end: float | None) -> np.ndarray:
        t = self.columns["t"]
        mask = np.ones(len(t), dtype=bool)
        if start is not None:
            mask &= t >= start
        if end is not None:
            mask &= t <= end
        return mask

    # --- serialization -------------------------------------------------

    def to_csv(self) -> str:
        header = dict(self.header)
        header["schema_version"] = LOG_SCHEMA_VERSION
        header["events"] = [[t, name] for t, name in self.events]
        header["summary"] = self.summary
        out = io.StringIO()
        out.write("# " + json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
        out.write(",".join(LOG_COLUMNS) + "\n")
        writer = csv.writer(out, lineterminator="\n")
        cols = [self.columns[c] for c in LOG_COLUMNS]
        for row in zip(*cols):
            cells = []
            for name, value in zip(LOG_COLUMNS, row):
                if name in _BOOL_COLUMNS:
                    cells.append("1" if value else "0")
                elif name in _INT_COLUMNS:
                    cells.append(str(int(value)))
                else:
                    cells.append(repr(float(value)))
            writer.writerow(cells)
        return out.getvalue()

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "TrialLog":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise ValueError("not a trial log: missing header line")
        header = json.loads(lines[0].lstrip("# "))
        version = header.get("schema_version")
        if version != LOG_SCHEMA_VERSION:
            raise ValueError(
                f"log schema_version {version!r} not supported (expected "
                f"{LOG_SCHEMA_VERSION}); migrate the log first"
            )
        names = lines[1].split(",")
        if names != LOG_COLUMNS:
            raise ValueError(f"unexpected log columns {names}")
        data = {c: [] for c in LOG_COLUMNS}
        for line in lines[2:]:
            if not line:
                continue
            for name, cell in zip(LOG_COLUMNS, line.split(",")):
                data[name].append(cell)
        columns = {}
        for name in LOG_COLUMNS:
            if name in _BOOL_COLUMNS:
                columns[name] = np.array([c == "1" for c in data[name]], dtype=bool)
            elif name in _INT_COLUMNS:
                columns[name] = np.array([int(c) for c in data[name]], dtype=int)
            else:
                columns[name] = np.array([float(c) for c in data[name]], dtype=float)
        events = [(float(t), str(name)) for t, name in header.pop("events", [])]
        summary = header.pop("summary", {})
        return cls(columns=columns, header=header, events=events, summary=summary)

    @classmethod
    def read(cls, path) -> "TrialLog":
        with open(path) as fh:
            return cls.from_csv(fh.read())


def read_external_csv(path, column_map: dict[str, str], rate: float | None = None) -> TrialLog:
    """Ingest a foreign motion-capture CSV export as a TrialLog.

    ``column_map`` maps canonical channel names to the external file's
    column names; ``t``, ``pen_y``, ``pen_z``, ``phi``, ``theta`` and
    ``beta`` must be mapped, the rest default to zeros.  Clock sync
    between devices is the exporter's responsibility.
    """
    required = ["t", "pen_y", "pen_z", "phi", "theta", "beta"]
    missing = [c for c in required if c not in column_map]
    if missing:
        raise ValueError(f"column_map must map at least {required}; missing {missing}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError("external CSV has no data rows")
    n = len(rows)
    columns: dict[str, np.ndarray] = {}
    for canonical in LOG_COLUMNS:
        external = column_map.get(canonical)
        if external is not None:
            if external not in rows[0]:
                raise ValueError(f"external CSV lacks mapped column {external!r}")
            values = np.array([float(r[external]) for r in rows])
        elif canonical in _BOOL_COLUMNS:
            values = np.zeros(n, dtype=bool)
        elif canonical in _INT_COLUMNS:
            values = np.zeros(n, dtype=int)
        else:
            values = np.zeros(n, dtype=float)
        if canonical in _BOOL_COLUMNS:
            values = values.astype(bool)
        columns[canonical] = values
    t = columns["t"]
    if rate is None:
        dt = np.median(np.diff(t))
        rate = 1.0 / float(dt)
    header = {
        "schema_version": LOG_SCHEMA_VERSION,
        "sample_rate": rate,
        "config_hash": None,
        "external": True,
    }
    return TrialLog(columns=columns, header=header, events=[], summary={"external": True})
