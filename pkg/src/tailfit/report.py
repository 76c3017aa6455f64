"""
Text formats written by the command line tool.

Every output starts with a manifest preamble of ``# key = value`` lines.
Tables follow as CSV. Fit reports are made of ``[section]`` blocks holding
``key = value`` lines, except ``[residuals]`` which holds a CSV block.
Floats are always rendered with 12 significant digits (``%.12g``).
"""

from __future__ import annotations

import hashlib
import os
import tempfile

__all__ = [
    "fmt",
    "file_digest",
    "render_manifest",
    "render_table",
    "render_sections",
    "parse_manifest",
    "parse_report",
    "write_atomic",
]


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        text = f"{value:.12g}"
        return "0" if text == "-0" else text
    return str(value)


def file_digest(data: bytes) -> str:
    """64-bit BLAKE2b content hash, hexadecimal."""
    return hashlib.blake2b(data, digest_size=8).hexdigest()


def render_manifest(items) -> list[str]:
    return [f"# {key} = {fmt(value)}" for key, value in items]


def render_table(header, rows) -> list[str]:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return lines


def render_sections(sections) -> list[str]:
    """``sections`` is a list of ``(name, body)``; a body is either a list of
    ``(key, value)`` pairs or a ``(header, rows)`` table."""
    lines = []
    for name, body in sections:
        lines.append(f"[{name}]")
        if isinstance(body, tuple):
            lines.extend(render_table(*body))
        else:
            lines.extend(f"{key} = {fmt(value)}" for key, value in body)
    return lines


def parse_manifest(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if not line.startswith("#"):
            continue
        key, sep, value = line[1:].partition("=")
        if sep:
            out[key.strip()] = value.strip()
    return out


def parse_report(text: str) -> dict:
    """Parse a fit or compare report into ``{section: dict or list of dicts}``.

    Key-value sections map to ``dict[str, str]``; CSV sections map to a list
    of row dictionaries keyed by the header.
    """
    sections: dict = {}
    name = None
    header = None
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name, header = line[1:-1], None
            continue
        if name is None:
            raise ValueError(f"content outside any section: {line!r}")
        if " = " in line and not isinstance(sections.get(name), list):
            key, _, value = line.partition(" = ")
            sections.setdefault(name, {})[key.strip()] = value.strip()
        elif header is None:
            header = line.split(",")
            sections[name] = []
        else:
            sections[name].append(dict(zip(header, line.split(","))))
    return sections


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tailfit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
