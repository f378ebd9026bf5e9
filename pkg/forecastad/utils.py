import hashlib
import json
import logging
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

PERCENTILE_METHOD = 'linear'


def percentile(values, q: float, axis=None):
    """
    Percentile with linear interpolation between order statistics.
    Every threshold and tag weight goes through here so the convention is pinned in one place.
    """
    return np.percentile(values, q, axis=axis, method=PERCENTILE_METHOD)


def true_runs(flags) -> list[tuple[int, int]]:
    """
    Maximal runs of True in a 1-d boolean sequence.
    returns: list of (start, end) with inclusive end indices
    """
    flags = np.asarray(flags, dtype=bool)
    if flags.size == 0:
        return []
    padded = np.concatenate(([False], flags, [False]))
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    return [(int(start), int(stop) - 1) for start, stop in zip(edges[::2], edges[1::2], strict=True)]


def derive_seed(*entropy: int) -> int:
    """Deterministic 32 bit seed from a tuple of non-negative integers (run seed, generation, slot, ...)."""
    return int(np.random.SeedSequence([int(e) for e in entropy]).generate_state(1)[0])


def file_digest(path, algorithm: str = 'sha256') -> str:
    digest = hashlib.new(algorithm)
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 20), b''):
            digest.update(chunk)
    return f'{algorithm}:{digest.hexdigest()}'


def content_digest(payload: dict, length: int = 12) -> str:
    """Short stable identifier of a JSON-serialisable structure."""
    raw = json.dumps(payload, sort_keys=True, separators=(',', ':')).encode('utf-8')
    return hashlib.sha1(raw).hexdigest()[:length]


def subprocess_group(tag_name: str) -> str:
    """
    Plant subprocess a tag belongs to, taken from the first digit in its name (FIT401 -> '4').
    Tags without digits have no group and return ''.
    """
    for char in tag_name:
        if char.isdigit():
            return char
    return ''


def ensure_directory(path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path
