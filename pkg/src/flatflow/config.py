"""Run configuration: flat key = value sections, fully defaulted, validated.

Format: lines of ``key = value`` grouped under bracketed section headers,
``#`` starts a comment, blank lines ignored.  Unknown sections or keys and
duplicate keys are errors (with line numbers), not warnings.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ConstraintViolation, ParseError, UnknownKey
from .fields import DomainKind, GridSpec
from .solver import FlowKind

_SHAPE_KEY = re.compile(r"^shape(\d+)$")

_SCHEMA = {
    "grid": {"n", "side_length", "domain"},
    "flow": {"kind", "h", "steps", "seed"},
    "solver": {"tol_pd", "max_pd_iters", "tol_area", "neighbors", "deficit_every"},
    "output": {"dir", "frame_every"},
    "init": None,  # shapeN keys, validated separately
}

_INT_KEYS = {"n", "steps", "seed", "max_pd_iters", "neighbors", "frame_every",
             "deficit_every"}
_FLOAT_KEYS = {"side_length", "h", "tol_pd", "tol_area"}


@dataclass
class RunConfig:
    grid: GridSpec
    flow: FlowKind
    h: float
    steps: int
    seed: int
    shapes: list
    output_dir: str = "out"
    frame_every: int = 0
    tol_pd: float = 1e-6
    max_pd_iters: int = 20000
    tol_area: float = 1.0
    neighbors: int = 24
    deficit_every: int = 1


def _coerce(section, key, value, line):
    if key in _INT_KEYS:
        try:
            return int(value)
        except ValueError:
            raise ParseError(f"{section}.{key}: expected integer, got '{value}'", line)
    if key in _FLOAT_KEYS:
        try:
            return float(value)
        except ValueError:
            raise ParseError(f"{section}.{key}: expected number, got '{value}'", line)
    return value


def _parse_shape(text, line):
    from .shapes import ShapeSpec

    parts = text.split()
    if not parts:
        raise ParseError("empty shape specification", line)
    kind, params = parts[0], {}
    for item in parts[1:]:
        if "=" not in item:
            raise ParseError(f"shape parameter '{item}' is not key=value", line)
        k, v = item.split("=", 1)
        try:
            params[k] = float(v)
        except ValueError:
            raise ParseError(f"shape parameter {k}: expected number, got '{v}'", line)
    try:
        return ShapeSpec(kind, params)
    except ConstraintViolation as exc:
        raise ParseError(str(exc), line)


def parse_config(text: str) -> RunConfig:
    section = None
    values: dict[tuple[str, str], object] = {}
    shapes: dict[int, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(f"malformed section header '{raw.strip()}'", lineno)
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise UnknownKey(f"unknown section [{section}]", lineno)
            continue
        if "=" not in line:
            raise ParseError(f"expected key = value, got '{raw.strip()}'", lineno)
        if section is None:
            raise ParseError("key outside of any section", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if section == "init":
            mo = _SHAPE_KEY.match(key)
            if not mo:
                raise UnknownKey(f"unknown key '{key}' in [init] (use shapeN)", lineno)
            idx = int(mo.group(1))
            if idx in shapes:
                raise ParseError(f"duplicate key 'shape{idx}'", lineno)
            shapes[idx] = _parse_shape(value, lineno)
            continue
        if key not in _SCHEMA[section]:
            raise UnknownKey(f"unknown key '{key}' in [{section}]", lineno)
        if (section, key) in values:
            raise ParseError(f"duplicate key '{key}' in [{section}]", lineno)
        values[(section, key)] = _coerce(section, key, value, lineno)

    def get(section, key, default=None):
        return values.get((section, key), default)

    n = get("grid", "n", 256)
    side = get("grid", "side_length", 1.0)
    domain_txt = get("grid", "domain", "torus")
    try:
        domain = DomainKind(domain_txt)
    except ValueError:
        raise ConstraintViolation(f"grid.domain must be torus or plane, got '{domain_txt}'")
    grid = GridSpec(n=n, side_length=side, domain=domain)

    kind_txt = get("flow", "kind", "apmcf")
    try:
        flow = FlowKind(kind_txt)
    except ValueError:
        raise ConstraintViolation(f"flow.kind must be apmcf or mullins_sekerka, got '{kind_txt}'")
    if flow is FlowKind.MULLINS_SEKERKA and domain is not DomainKind.TORUS:
        raise ConstraintViolation("mullins_sekerka requires grid.domain = torus")

    if not shapes:
        raise ConstraintViolation("no initial shapes given ([init] section is empty)")
    shape_list = [shapes[k] for k in sorted(shapes)]

    return RunConfig(
        grid=grid,
        flow=flow,
        h=get("flow", "h", 4.0 * grid.dx),
        steps=get("flow", "steps", 200),
        seed=get("flow", "seed", 0),
        shapes=shape_list,
        output_dir=get("output", "dir", "out"),
        frame_every=get("output", "frame_every", 0),
        tol_pd=get("solver", "tol_pd", 1e-6),
        max_pd_iters=get("solver", "max_pd_iters", 20000),
        tol_area=get("solver", "tol_area", 1.0),
        neighbors=get("solver", "neighbors", 24),
        deficit_every=get("solver", "deficit_every", 1),
    )


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
