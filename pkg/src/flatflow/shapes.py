"""Initial-set generation from shape specifications."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintViolation
from .fields import BinaryField, DomainKind, GridSpec

_KIND_PARAMS = {
    "disk": {"cx", "cy", "r"},
    "ellipse": {"cx", "cy", "a", "b", "angle"},
    "strip": {"y0", "y1"},
    "dumbbell": {"cx", "cy", "r", "sep", "neck"},
    "random_blobs": {"count", "rmin", "rmax"},
}
_OPTIONAL = {"ellipse": {"angle"}}


@dataclass
class ShapeSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KIND_PARAMS:
            raise ConstraintViolation(f"unknown shape kind '{self.kind}'")
        required = _KIND_PARAMS[self.kind] - _OPTIONAL.get(self.kind, set())
        missing = required - set(self.params)
        extra = set(self.params) - _KIND_PARAMS[self.kind]
        if missing:
            raise ConstraintViolation(f"{self.kind}: missing parameters {sorted(missing)}")
        if extra:
            raise ConstraintViolation(f"{self.kind}: unknown parameters {sorted(extra)}")


class Lcg:
    """64-bit linear congruential generator (Knuth MMIX constants).

    The stream is documented and platform independent: the initial-set
    rasterization must be bit-identical everywhere.
    """

    MULT = 6364136223846793005
    INC = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = int(seed) & self.MASK

    def next_u64(self) -> int:
        self.state = (self.MULT * self.state + self.INC) & self.MASK
        return self.state

    def uniform(self, lo=0.0, hi=1.0) -> float:
        u = (self.next_u64() >> 11) * 2.0**-53
        return lo + (hi - lo) * u


def _wrap_delta(a, b, L, periodic):
    d = a - b
    if periodic:
        return (d + 0.5 * L) % L - 0.5 * L
    return d


def _rasterize_one(shape: ShapeSpec, spec: GridSpec, rng: Lcg) -> np.ndarray:
    n, L = spec.n, spec.side_length
    coords = (np.arange(n) + 0.5) * spec.dx
    X, Y = np.meshgrid(coords, coords)
    periodic = spec.domain is DomainKind.TORUS
    p = shape.params
    if shape.kind == "disk":
        dxs = _wrap_delta(X, p["cx"], L, periodic)
        dys = _wrap_delta(Y, p["cy"], L, periodic)
        return dxs**2 + dys**2 <= p["r"] ** 2
    if shape.kind == "ellipse":
        ang = p.get("angle", 0.0)
        dxs = _wrap_delta(X, p["cx"], L, periodic)
        dys = _wrap_delta(Y, p["cy"], L, periodic)
        u = np.cos(ang) * dxs + np.sin(ang) * dys
        v = -np.sin(ang) * dxs + np.cos(ang) * dys
        return (u / p["a"]) ** 2 + (v / p["b"]) ** 2 <= 1.0
    if shape.kind == "strip":
        return (Y > p["y0"]) & (Y <= p["y1"])
    if shape.kind == "dumbbell":
        cx, cy, r, sep, neck = p["cx"], p["cy"], p["r"], p["sep"], p["neck"]
        dl = _wrap_delta(X, cx - 0.5 * sep, L, periodic) ** 2 + _wrap_delta(Y, cy, L, periodic) ** 2
        dr = _wrap_delta(X, cx + 0.5 * sep, L, periodic) ** 2 + _wrap_delta(Y, cy, L, periodic) ** 2
        bar = (np.abs(_wrap_delta(X, cx, L, periodic)) <= 0.5 * sep) & (
            np.abs(_wrap_delta(Y, cy, L, periodic)) <= neck
        )
        return (dl <= r**2) | (dr <= r**2) | bar
    if shape.kind == "random_blobs":
        count = int(p["count"])
        rmin, rmax = p["rmin"], p["rmax"]
        mask = np.zeros((n, n), dtype=bool)
        margin = spec.guard_margin + rmax if spec.domain is DomainKind.BOXED_PLANE else 0.0
        for _ in range(count):
            cx = rng.uniform(margin, L - margin)
            cy = rng.uniform(margin, L - margin)
            r = rng.uniform(rmin, rmax)
            dxs = _wrap_delta(X, cx, L, periodic)
            dys = _wrap_delta(Y, cy, L, periodic)
            mask |= dxs**2 + dys**2 <= r * r
        return mask
    raise ConstraintViolation(f"unknown shape kind '{shape.kind}'")


def generate_initial(shapes, spec: GridSpec, seed: int = 0) -> BinaryField:
    """Rasterized union of shapes; raises GuardViolation if the result
    touches the guard margin of a boxed domain."""
    rng = Lcg(seed)
    mask = np.zeros((spec.n, spec.n), dtype=bool)
    for shape in shapes:
        mask |= _rasterize_one(shape, spec, rng)
    return BinaryField(spec, mask)
