"""Atomic CSV / JSON writers. Floats are written with 17 significant digits and LF endings."""
import csv
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

from utils import const


def format_value(value: Any) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, int)):
        return str(value)
    return format(float(value), const.CSV_FLOAT_FORMAT)


def _atomic_write(path: Path, write) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as f:
            write(f)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    return path


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    def write(f):
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])

    return _atomic_write(path, write)


def write_json(path, payload: Any) -> Path:
    def write(f):
        json.dump(payload, f, indent=4)
        f.write("\n")

    return _atomic_write(path, write)
