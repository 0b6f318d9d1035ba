"""CSV and JSON output files. Every file opens with the config hash and seed."""

from pathlib import Path
from typing import Optional
import csv
import json

import numpy as np

from iwkinetic.models import Provenance
from iwkinetic.solver.collision import CollisionResult
from iwkinetic.solver.evolution import MomentLedger
from iwkinetic.solver.spectrum import Spectrum
from iwkinetic.verify.checks import VerifyReport

LEDGER_COLUMNS = [
    "t", "m0", "m1", "mN", "mN1", "mN2", "l1N3", "c0", "c1", "envelope_slack",
    "s1", "s2", "s3", "trunc_warn", "restricted_mass", "restricted_bound",
]


def header_line(config_hash: str, seed: Optional[int]) -> str:
    return f"# config_hash={config_hash} seed={seed if seed is not None else 'none'}\n"


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    return format(float(value), ".17g")


def _write_rows(path: Path, header: str, columns: list[str], rows) -> Path:
    with open(path, "w", newline="") as handle:
        handle.write(header)
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def snapshot_name(t: float) -> str:
    return f"spectrum_t{t:.6f}.csv"


def write_spectrum(path: Path, f: Spectrum, header: str, envelope: Optional[Spectrum] = None) -> Path:
    if envelope is None:
        return _write_rows(path, header, ["r", "f"], zip(f.grid.nodes, f.values))
    return _write_rows(path, header, ["r", "f", "env"], zip(f.grid.nodes, f.values, envelope.values))


def read_spectrum(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Radii and values from a spectrum CSV; comment lines are skipped."""
    with open(path, newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or not {"r", "f"} <= set(reader.fieldnames):
        raise ValueError(f"{path} needs 'r' and 'f' columns")
    rows = [(float(row["r"]), float(row["f"])) for row in reader]
    data = np.array(rows, dtype=float).reshape(-1, 2)
    return data[:, 0], data[:, 1]


def write_ledger(path: Path, ledger: MomentLedger, header: str) -> Path:
    rows = ([getattr(row, column) for column in LEDGER_COLUMNS] for row in ledger.rows)
    return _write_rows(path, header, LEDGER_COLUMNS, rows)


def write_collision_dump(path: Path, f: Spectrum, result: CollisionResult, header: str) -> Path:
    rows = zip(f.grid.nodes, f.values, result.gain, result.theta, result.q)
    return _write_rows(path, header, ["r", "f", "gain", "theta", "q"], rows)


def write_report(path: Path, report: VerifyReport, config_hash: str) -> Path:
    """JSON array of check records; each record repeats the config hash and seed."""
    records = []
    for record in report.records:
        entry = record.model_dump(exclude={"id", "run_id"})
        entry["provenance"] = Provenance(record.provenance).value
        entry["config_hash"] = config_hash
        records.append(entry)
    with open(path, "w") as handle:
        json.dump(records, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path
