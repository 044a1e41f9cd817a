"""Reading and writing space spec files.

A spec file holds ``key = value`` lines; ``#`` starts a comment::

    kind = orlicz
    dim = 2
    orlicz_fn = example1(p=1.5, t0=0.09)

A numerically dualised 2-D space is written ``kind = numerical_dual`` with
``base = lp(p=1.5, dim=2)`` and an optional ``resolution = 10000``.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Tuple, Union

from .errors import InvalidParameterError, SpecParseError
from .spaces import SpaceSpec

__all__ = ["parse_spec", "dump_spec", "read_spec", "write_spec", "parse_space_call"]

FLOAT_KEYS = ("p", "q")
INT_KEYS = ("dim", "outer", "inner", "resolution")
STRING_KEYS = ("kind", "orlicz_fn", "base")
ORDER = ("kind", "p", "q", "dim", "outer", "inner", "orlicz_fn", "base", "resolution")


def _split_top(body: str) -> List[str]:
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ValueError("unbalanced parentheses")
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth:
        raise ValueError("unbalanced parentheses")
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def _build(fields: Dict[str, str]) -> SpaceSpec:
    kw = {}
    for key, raw in fields.items():
        if key == "kind":
            continue
        if key in FLOAT_KEYS:
            kw[key] = float(raw)
        elif key in INT_KEYS:
            v = float(raw)
            if v != int(v):
                raise ValueError(f"{key} must be an integer, got {raw}")
            kw["dual_resolution" if key == "resolution" else key] = int(v)
        elif key == "orlicz_fn":
            kw[key] = raw.strip()
        elif key == "base":
            kw[key] = parse_space_call(raw)
        else:
            raise ValueError(f"unknown key {key!r}")
    if "kind" not in fields:
        raise ValueError("missing 'kind'")
    return SpaceSpec(fields["kind"].strip(), **kw)


def parse_space_call(text: str) -> SpaceSpec:
    """Parse the one-line form ``kind(key=value, ...)`` used for ``base``."""
    text = text.strip()
    if "(" not in text or not text.endswith(")"):
        raise ValueError(f"expected kind(key=value, ...), got {text!r}")
    kind, body = text.split("(", 1)
    fields = {"kind": kind.strip()}
    for part in _split_top(body[:-1]):
        if "=" not in part:
            raise ValueError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        fields[k.strip()] = v.strip()
    return _build(fields)


def parse_spec(text: str) -> SpaceSpec:
    """Parse spec-file text. Errors carry the 1-based line number."""
    fields: Dict[str, Tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecParseError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in ORDER:
            raise SpecParseError(f"unknown key {key!r}", lineno)
        if key in fields:
            raise SpecParseError(f"duplicate key {key!r}", lineno)
        if not value:
            raise SpecParseError(f"empty value for {key!r}", lineno)
        fields[key] = (value, lineno)
    if "kind" not in fields:
        raise SpecParseError("missing 'kind' line", len(text.splitlines()) or 1)
    # check each line on its own so a bad value is reported where it stands
    for key, (value, lineno) in fields.items():
        try:
            if key in FLOAT_KEYS or key in INT_KEYS:
                v = float(value)
                if key in INT_KEYS and v != int(v):
                    raise ValueError(f"{key} must be an integer")
            elif key == "base":
                parse_space_call(value)
        except (ValueError, InvalidParameterError) as exc:
            raise SpecParseError(str(exc), lineno) from None
    try:
        return _build({k: v for k, (v, _) in fields.items()})
    except (ValueError, InvalidParameterError) as exc:
        raise SpecParseError(str(exc), fields["kind"][1]) from None


def _format(spec: SpaceSpec) -> Dict[str, str]:
    out = {"kind": spec.kind}
    for key in ORDER[1:]:
        attr = "dual_resolution" if key == "resolution" else key
        v = getattr(spec, attr)
        if v is None:
            continue
        if key == "base":
            out[key] = _call(v)
        elif key in FLOAT_KEYS:
            out[key] = repr(float(v))
        else:
            out[key] = str(v)
    return out


def _call(spec: SpaceSpec) -> str:
    fields = _format(spec)
    kind = fields.pop("kind")
    return f"{kind}({', '.join(f'{k}={v}' for k, v in fields.items())})"


def dump_spec(spec: SpaceSpec) -> str:
    """Spec-file text that :func:`parse_spec` turns back into ``spec``."""
    return "".join(f"{k} = {v}\n" for k, v in _format(spec).items())


def read_spec(path: Union[str, Path]) -> SpaceSpec:
    return parse_spec(Path(path).read_text())


def write_spec(spec: SpaceSpec, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_spec(spec))
