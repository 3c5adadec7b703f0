import json
import math
import sys
import typing

import numpy as np

import configs


class InsufficientDataError(ValueError):
    """Not enough qualifying nodes (or no dataset file) to carry out a request."""


class InstanceTooLargeError(ValueError):
    pass


class InvariantViolation(AssertionError):
    pass


def info(msg):
    print(f"INFO: {msg}", file=sys.stderr)


def warn(msg):
    print(f"WARN: {msg}", file=sys.stderr)


def debug(msg):
    if configs.IS_DEBUG:
        print(f"DEBUG: {msg}", file=sys.stderr)


def bound(t, lower, upper):
    if isinstance(t, (float, int)):
        return min(max(t, lower), upper)
    else:
        return tuple(min(max(lower, i), upper) for i in t)


def in_range(x, lower, upper, eps=0.0) -> bool:
    return lower - eps <= x <= upper + eps


def check_weight(w, what="weight"):
    if not isinstance(w, (int, float, np.floating, np.integer)) or math.isnan(w):
        raise ValueError(f"{what} must be a real number, got {w!r}")
    if not in_range(w, -1.0, 1.0):
        raise ValueError(f"{what} out of range [-1, 1]: {w}")
    return float(w)


def rng_for(seed, *keys) -> np.random.Generator:
    """An independent RNG stream for (seed, *keys); the same keys always give the same stream."""
    entropy = [int(seed)] + [int(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def json_safe(val):
    """Converts numpy scalars/arrays and NaN into plain json-compatible values."""
    if isinstance(val, dict):
        return {str(k): json_safe(v) for k, v in val.items()}
    elif isinstance(val, (list, tuple)):
        return [json_safe(v) for v in val]
    elif isinstance(val, np.ndarray):
        return [json_safe(v) for v in val.tolist()]
    elif isinstance(val, (np.integer,)):
        return int(val)
    elif isinstance(val, (float, np.floating)):
        val = float(val)
        return None if math.isnan(val) or math.isinf(val) else val
    elif isinstance(val, np.bool_):
        return bool(val)
    else:
        return val


def dumps(blob) -> str:
    return json.dumps(json_safe(blob), indent=2, sort_keys=True)


def sorted_unique(items: typing.Iterable[int]) -> typing.List[int]:
    return sorted(set(int(i) for i in items))
