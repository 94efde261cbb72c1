"""Plain-text sectioned key-value configuration.

Grammar (diff-friendly, language-agnostic)::

    # comment
    [section]
    key = value

Values are parsed leniently: ints, floats, booleans (true/false),
comma-separated lists of numbers, and bare strings.  Sections used by
the CLI are ``[model]``, ``[run]`` and ``[output]``; manifests add a
``[meta]`` section.  :func:`write_config` emits sections and keys in
sorted order so a round trip is byte-stable.
"""

from __future__ import annotations

__all__ = ["ConfigError", "parse_value", "format_value",
           "read_config", "parse_config", "write_config", "merge"]


class ConfigError(ValueError):
    """Malformed configuration text or missing required key."""


def parse_value(text: str):
    """Best-effort typed parse of a single value string."""
    s = text.strip()
    if s.lower() in ("true", "false"):
        return s.lower() == "true"
    if "," in s:
        return tuple(parse_value(part) for part in s.split(","))
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    return s


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(text: str) -> dict:
    """Parse configuration text into {section: {key: value}}."""
    out: dict[str, dict] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if not section:
                raise ConfigError(f"line {lineno}: empty section name")
            out.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, _, val = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[section][key] = parse_value(val)
    return out


def read_config(path) -> dict:
    with open(path, "r") as fh:
        return parse_config(fh.read())


def write_config(path, cfg: dict) -> None:
    """Write {section: {key: value}} with sorted sections and keys."""
    lines = []
    for section in sorted(cfg):
        lines.append(f"[{section}]")
        for key in sorted(cfg[section]):
            lines.append(f"{key} = {format_value(cfg[section][key])}")
        lines.append("")
    with open(path, "w") as fh:
        fh.write("\n".join(lines))


def merge(base: dict, override: dict) -> dict:
    """New config with ``override``'s keys taking precedence."""
    out = {s: dict(kv) for s, kv in base.items()}
    for s, kv in override.items():
        out.setdefault(s, {}).update(kv)
    return out
