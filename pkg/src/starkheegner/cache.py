"""On-disk cache for the expensive fixed-point lifts.

Location: ./.shp-cache by default, overridden by the SHP_CACHE_DIR
environment variable.  Writes are atomic (temp file + os.replace in the same
directory), so a reader never sees a partial file.  Any unreadable,
unparsable, or inconsistent entry counts as a miss and is recomputed and
rewritten: the cache is an accelerator, never a source of truth.  Stored
integers are decimal strings, like everywhere else in this package's files.
"""

from __future__ import annotations

import json
import os
import tempfile
from hashlib import sha256
from pathlib import Path

from .curves import EllipticCurve
from .modsym import eigensymbol_for_curve
from .overconvergent import MomentLift

CACHE_ENV = "SHP_CACHE_DIR"
DEFAULT_DIR = ".shp-cache"
CACHE_FORMAT = "shp.cache/1"


def cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV) or DEFAULT_DIR)


def _entry_name(parts: dict) -> str:
    digest = sha256(
        json.dumps(parts, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    return f"{parts['kind']}-{digest[:32]}.json"


def load_entry(parts: dict):
    """The stored payload for these parts, or None on any kind of miss."""
    path = cache_dir() / _entry_name(parts)
    try:
        with open(path, encoding="utf-8") as fh:
            entry = json.load(fh)
    except (OSError, ValueError):
        return None
    if not isinstance(entry, dict) or entry.get("parts") != parts:
        return None
    return entry.get("payload")


def store_entry(parts: dict, payload) -> None:
    directory = cache_dir()
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(
                {"parts": parts, "payload": payload},
                fh,
                sort_keys=True,
                separators=(",", ":"),
            )
        os.replace(tmp, directory / _entry_name(parts))
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def cached_moment_lift(curve_or_label, p: int, moments: int) -> MomentLift:
    """The moment lift, restored from disk when a consistent entry exists.

    The key binds the curve model, the eigensymbol values, p, and the moment
    count; restored vectors are sanity-checked (zeroth moments must equal the
    classical symbol values) before being trusted."""
    curve = (
        curve_or_label
        if isinstance(curve_or_label, EllipticCurve)
        else EllipticCurve.from_label(curve_or_label)
    )
    symbol = eigensymbol_for_curve(curve)
    parts = {
        "format": CACHE_FORMAT,
        "kind": "moment-lift",
        "ainvs": [str(a) for a in curve.ainvs],
        "p": str(p),
        "moments": str(moments),
        "symbol": [str(v) for v in symbol.values],
    }
    payload = load_entry(parts)
    if payload is not None:
        try:
            vectors = [[int(x) for x in row] for row in payload["vectors"]]
            lift = MomentLift.from_vectors(symbol, p, moments, vectors)
        except (KeyError, TypeError, ValueError):
            lift = None
        if lift is not None and all(
            lift.vectors[i][0] % lift.modulus == symbol.values[i] % lift.modulus
            for i in range(lift.space.nreps)
        ):
            return lift
    lift = MomentLift(symbol, p, moments)
    store_entry(
        parts, {"vectors": [[str(x) for x in row] for row in lift.vectors]}
    )
    return lift
