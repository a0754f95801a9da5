"""Bit-exact output formats: PGM frames and CSV traces."""

from __future__ import annotations

import numpy as np

from .diagnostics import FlowTrace, TraceRow
from .errors import IoError, ParseError
from .fields import BinaryField, DomainKind, GridSpec

TRACE_HEADER = (
    "step,time,area,perimeter_poly,perimeter_tv,dissipation,lambda,"
    "clamped,n_components,deficit_d,deficit_value"
)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_frame(f: BinaryField, path) -> None:
    """Binary PGM (P5, maxval 255): 255 inside, 0 outside, rows from the
    top-left corner."""
    n = f.spec.n
    header = f"P5\n{n} {n}\n255\n".encode("ascii")
    payload = np.where(f.mask[::-1, :], 255, 0).astype(np.uint8).tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(payload)
    except OSError as exc:
        raise IoError(f"cannot write frame {path}: {exc}") from exc


def read_frame(path, side_length: float = 1.0,
               domain: DomainKind = DomainKind.TORUS) -> BinaryField:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read frame {path}: {exc}") from exc
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise ParseError(f"{path}: not a binary PGM (P5) file")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if w != h:
        raise ParseError(f"{path}: frame must be square, got {w}x{h}")
    if maxval != 255:
        raise ParseError(f"{path}: expected maxval 255, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    raster = np.frombuffer(data[pos : pos + w * h], dtype=np.uint8).reshape(h, w)
    mask = (raster >= 128)[::-1, :]
    return BinaryField(GridSpec(n=w, side_length=side_length, domain=domain), mask)


def write_trace(trace: FlowTrace, path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(TRACE_HEADER + "\n")
            for r in trace.rows:
                fh.write(
                    ",".join(
                        [
                            str(r.step),
                            _fmt(r.time),
                            _fmt(r.area),
                            _fmt(r.perimeter_poly),
                            _fmt(r.perimeter_tv),
                            _fmt(r.dissipation),
                            _fmt(r.lam),
                            "1" if r.clamped else "0",
                            str(r.n_components),
                            str(r.deficit_d),
                            _fmt(r.deficit_value),
                        ]
                    )
                    + "\n"
                )
    except OSError as exc:
        raise IoError(f"cannot write trace {path}: {exc}") from exc


def read_trace(path) -> FlowTrace:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read trace {path}: {exc}") from exc
    if not lines or lines[0] != TRACE_HEADER:
        raise ParseError(f"{path}: unexpected trace header")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 11:
            raise ParseError(f"{path}: expected 11 columns", lineno)
        rows.append(
            TraceRow(
                step=int(parts[0]),
                time=float(parts[1]),
                area=float(parts[2]),
                perimeter_poly=float(parts[3]),
                perimeter_tv=float(parts[4]),
                dissipation=float(parts[5]),
                lam=float(parts[6]),
                clamped=parts[7] == "1",
                n_components=int(parts[8]),
                deficit_d=int(parts[9]),
                deficit_value=float(parts[10]),
            )
        )
    if len(rows) >= 2:
        h = rows[1].time - rows[0].time
    else:
        h = 1.0
    m = rows[0].area if rows else 0.0
    return FlowTrace(rows=rows, h=h, m=m)
