"""Flat ``key = value`` config files, CSV writing and run manifests."""

import csv
import hashlib
import json
from math import isfinite

from . import __version__


def read_kv(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key] = value
    return out


def write_kv(path, items):
    with open(path, "w") as fh:
        for key, value in items.items():
            fh.write(f"{key} = {value}\n")


def fmt(x):
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return f"{x:.9g}" if isfinite(x) else str(x)
    return str(x)


def write_csv(path, header, rows, comment=None):
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(line for line in fh if not line.startswith("#")))
    return rows[0], rows[1:]


def manifest(command, params, seed=None, outputs=()):
    body = {
        "command": command,
        "params": params,
        "seed": seed,
        "version": __version__,
    }
    digest = hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()
    return {**body, "outputs": list(outputs), "sha256": digest}


def write_manifest(path, man):
    with open(path, "w") as fh:
        json.dump(man, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path):
    with open(path) as fh:
        return json.load(fh)
