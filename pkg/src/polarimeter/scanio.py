"""
Scan CSV format.

One ``#`` comment block echoes the run configuration and scan metadata as
JSON, followed by the header ``swept_name,swept_value,ideal_intensity,counts``.
Floats are written with 17 significant digits so a read-back is lossless;
``counts`` is empty for noiseless scans.
"""
import json

import numpy as np

from .errors import ConfigError
from .experiment import ScanResult

CSV_HEADER = "swept_name,swept_value,ideal_intensity,counts"


def _num(x):
    return format(float(x), ".17g")


def write_scan_csv(result, fh, config_echo=None):
    fh.write("# polarimeter scan\n")
    echo = {"config": config_echo, "scan": result.metadata}
    for line in json.dumps(echo, sort_keys=True, indent=1, default=str).splitlines():
        fh.write(f"# {line}\n")
    fh.write(CSV_HEADER + "\n")
    for i, (x, y) in enumerate(zip(result.values, result.intensities)):
        c = "" if result.counts is None else str(int(result.counts[i]))
        fh.write(f"{result.swept_name},{_num(x)},{_num(y)},{c}\n")


def read_scan_csv(fh):
    """Inverse of :func:`write_scan_csv`; metadata comes back as the echoed JSON."""
    comments, rows = [], []
    header_seen = False
    for raw in fh:
        line = raw.rstrip("\n")
        if line.startswith("#"):
            comments.append(line[2:] if line.startswith("# ") else line[1:])
            continue
        if not line.strip():
            continue
        if not header_seen:
            if line != CSV_HEADER:
                raise ConfigError(f"unexpected CSV header {line!r}; expected {CSV_HEADER!r}")
            header_seen = True
            continue
        rows.append(line.split(","))
    if not header_seen:
        raise ConfigError("CSV header missing")
    try:
        metadata = json.loads("\n".join(comments[1:])) if len(comments) > 1 else {}
    except json.JSONDecodeError:
        metadata = {}
    names = {r[0] for r in rows}
    if len(names) > 1:
        raise ConfigError(f"mixed swept_name values {sorted(names)}")
    values = np.array([float(r[1]) for r in rows])
    intens = np.array([float(r[2]) for r in rows])
    have = [r[3] != "" for r in rows]
    if any(have) and not all(have):
        raise ConfigError("counts column is only partially filled")
    counts = np.array([int(r[3]) for r in rows], dtype=np.int64) if rows and all(have) else None
    return ScanResult(rows[0][0] if rows else "", values, intens, counts, metadata.get("scan", {}))
