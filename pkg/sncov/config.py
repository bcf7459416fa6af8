"""Params files, JSON designs and the options shared by every subcommand."""
# Python imports
import dataclasses
import json
import logging
import os
from typing import Optional

# Project imports
from sncov.errors import ConfigError

logger = logging.getLogger(__name__)

# Names whose values are comma-separated lists, and the type of each element.
LIST_PARAMS = {"P_LIST": int, "Y_LIST": float, "TESTS": str}
INT_PARAMS = ("REPLICATIONS", "MASTER_SEED")
FLOAT_PARAMS = ("ALPHA",)
STRING_PARAMS = ("MODEL", "SIGMA", "LAYOUT")

DEFAULT_SEED = 42
SEED_LIMIT = 2 ** 64


def _typed_value(name, value):
    """Converts the text of a param to the type its name calls for"""
    try:
        if name in LIST_PARAMS:
            element_type = LIST_PARAMS[name]
            return [element_type(item.strip()) for item in value.split(",")
                    if item.strip()]
        elif name in INT_PARAMS:
            return int(value)
        elif name in FLOAT_PARAMS:
            return float(value)
        elif name in STRING_PARAMS or name.endswith("_NAME"):
            return value
        else:
            raise ConfigError("unknown param %s" % name)
    except ValueError:
        raise ConfigError("param %s has a malformed value: %r" % (name, value))


def parse_params(lines, source="<params>"):
    """Parses NAME=value lines and returns them as a dict"""
    params = {}

    for number, line in enumerate(lines, 1):
        line = line.strip()
        if line:
            if line.startswith('#'):
                pass  # comment in input, ignore
            else:
                if '=' not in line:
                    raise ConfigError("%s:%d: expected NAME=value, got %r" % (source, number, line))
                name, value = line.split('=', 1)
                name = name.upper().strip()
                params[name] = _typed_value(name, value.strip())

    return params


def read_params(path):
    """Reads the contents of a params file and returns them as a dict"""
    with open(path) as f:
        return parse_params(f, source=path)


def read_design_file(path):
    """Reads a design from a params file (.txt) or a JSON file (.json).

    JSON designs use the params names in lower case. The result always uses
    the upper case names that read_params() produces.
    """
    if path.endswith(".json"):
        with open(path) as f:
            try:
                raw = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError("%s is not valid JSON: %s" % (path, e))
        if not isinstance(raw, dict):
            raise ConfigError("%s must hold a JSON object" % path)
        params = {}
        for name, value in raw.items():
            name = name.upper()
            if isinstance(value, list):
                value = ",".join(str(item) for item in value)
            params[name] = _typed_value(name, str(value))
        return params
    else:
        return read_params(path)


def default_threads():
    """Worker count: SNCOV_THREADS if set, otherwise the number of CPUs"""
    value = os.environ.get("SNCOV_THREADS")
    if value:
        try:
            threads = int(value)
        except ValueError:
            raise ConfigError("SNCOV_THREADS must be an integer, got %r" % value)
    else:
        threads = os.cpu_count() or 1

    if threads < 1:
        raise ConfigError("thread count must be at least 1, got %d" % threads)

    return threads


def check_seed(seed, what="seed"):
    """Raises ConfigError unless seed is an integer in [0, 2**64)."""
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < SEED_LIMIT:
        raise ConfigError("%s must be an integer in [0, 2**64), got %r" % (what, seed))


@dataclasses.dataclass(frozen=True)
class GlobalOptions:
    """Options every subcommand understands.

    seed is None when the user gave none; each command then falls back to
    its own default (a design's MASTER_SEED, or DEFAULT_SEED).
    """
    seed: Optional[int] = None
    threads: int = dataclasses.field(default_factory=default_threads)
    out: Optional[str] = None
    log_level: str = "WARNING"

    def __post_init__(self):
        if self.seed is not None:
            check_seed(self.seed)
        if self.threads < 1:
            raise ConfigError("thread count must be at least 1, got %d" % self.threads)
        if self.log_level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ConfigError("unknown log level %r" % self.log_level)
