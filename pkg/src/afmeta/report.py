"""Report writers: CSV tables and JSON documents with embedded run metadata.

Every file starts with (or contains) the metadata needed to reproduce it:
tool version, seed, resample count, weight scheme, taxonomy, and setup spec.
Files are written atomically (temp file + rename) and contain nothing
non-deterministic, so re-running with the same configuration is
bit-identical.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import __version__

META_KEY_ORDER = ("tool", "seed", "resamples", "weights", "taxonomy", "systems", "aggregate")


def run_metadata(**extra: object) -> dict[str, str]:
    meta = {"tool": f"afmeta {__version__}"}
    meta.update({k: str(v) for k, v in extra.items() if v is not None})
    return meta


def _ordered(meta: Mapping[str, str]) -> list[tuple[str, str]]:
    known = [(k, meta[k]) for k in META_KEY_ORDER if k in meta]
    rest = sorted((k, v) for k, v in meta.items() if k not in META_KEY_ORDER)
    return known + rest


def format_number(value: object) -> str:
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_csv(
    path: str | Path,
    header: Sequence[str],
    rows: Iterable[Sequence[object]],
    meta: Mapping[str, str],
) -> None:
    """CSV with leading '# key: value' comment lines for the run metadata."""
    out = io.StringIO()
    for key, value in _ordered(meta):
        out.write(f"# {key}: {value}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    write_atomic(path, out.getvalue())


def write_json(path: str | Path, document: object, meta: Mapping[str, str]) -> None:
    payload = {"meta": dict(_ordered(meta)), "data": document}
    write_atomic(path, json.dumps(payload, indent=2, sort_keys=False) + "\n")


def read_csv(path: str | Path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """Read back a metadata-embedded CSV (mostly for tests and round trips)."""
    meta: dict[str, str] = {}
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    body_start = 0
    for i, line in enumerate(lines):
        if not line.startswith("#"):
            body_start = i
            break
        key, _, value = line[1:].partition(":")
        meta[key.strip()] = value.strip()
    reader = csv.reader(lines[body_start:])
    header = next(reader, [])
    return meta, header, [row for row in reader]
