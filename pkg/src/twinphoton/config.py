"""Key-value configuration files (``key = value``, ``#`` comments)."""

import configparser
from importlib import resources
from pathlib import Path

_SECTION = "root"


def read_kv(path):
    """Parse a key-value text file into a ``{key: str}`` dict, case preserved."""
    text = Path(path).read_text()
    return parse_kv(text)


def parse_kv(text):
    parser = configparser.ConfigParser(
        delimiters=("=", ":"), comment_prefixes=("#", ";"), interpolation=None
    )
    parser.optionxform = str
    parser.read_string(f"[{_SECTION}]\n" + text)
    return dict(parser[_SECTION])


def data_path(name):
    return resources.files("twinphoton").joinpath("data", name)


def coerce(fields, raw, where="config"):
    """Convert string values to the types of ``fields`` ({name: type}).

    Unknown keys raise ``ValueError`` so typos do not silently fall back to
    defaults.
    """
    out = {}
    for key, value in raw.items():
        if key not in fields:
            raise ValueError(f"{where}: unknown key {key!r}")
        typ = fields[key]
        try:
            out[key] = _to_int(value) if typ is int else typ(value)
        except ValueError as exc:
            raise ValueError(f"{where}: bad value for {key!r}: {value!r}") from exc
    return out


def _to_int(value):
    try:
        return int(value)
    except ValueError:
        as_float = float(value)
        if not as_float.is_integer():
            raise
        return int(as_float)
