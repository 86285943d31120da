"""Field dumps: 17-digit CSV and 16-bit PGM heatmaps, written atomically."""

import io
import os
import re
import tempfile

import numpy as np

from ..errors import InvalidArgumentError, OutputError
from ..phase_space.model import PhaseSpaceGrid, WignerField

FORMATS = ("csv", "pgm")
PGM_MAX = 65535


def atomic_write(path, data):
    """Write bytes or text to ``path`` through a temporary file and a rename."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def _header(W, hbar):
    g = W.grid
    return (f"q_min={g.q_min!r} q_max={g.q_max!r} p_min={g.p_min!r} p_max={g.p_max!r} "
            f"level={g.level} time={float(W.time)!r} hbar={float(hbar)!r}")


def _parse_header(line):
    pairs = dict(re.findall(r"(\w+)=(\S+)", line))
    return pairs


def pgm_mapping(values):
    """``(lo, hi)`` of the linear map ``[lo, hi] -> [0, 65535]``."""
    return float(np.min(values)), float(np.max(values))


def emit_snapshot(W, path, fmt="csv", hbar=1.0):
    """Write ``W`` as ``csv`` (rows = q, columns = p) or 16-bit binary ``pgm``."""
    if fmt not in FORMATS:
        raise InvalidArgumentError(f"snapshot format must be one of {FORMATS}, got {fmt!r}")
    v = np.asarray(W.values, dtype=float)
    if fmt == "csv":
        buf = io.StringIO()
        buf.write("# wigner-mrsolve snapshot\n")
        buf.write(f"# {_header(W, hbar)}\n")
        buf.write("# rows: q ascending; columns: p ascending\n")
        np.savetxt(buf, v, fmt="%.17g", delimiter=",")
        return atomic_write(path, buf.getvalue())
    lo, hi = pgm_mapping(v)
    if hi > lo:
        pix = np.rint((v - lo) / (hi - lo) * PGM_MAX)
    else:
        pix = np.zeros_like(v)
    n_q, n_p = v.shape
    head = (f"P5\n# {_header(W, hbar)}\n# min={lo!r} max={hi!r}\n"
            f"{n_p} {n_q}\n{PGM_MAX}\n").encode("ascii")
    return atomic_write(path, head + pix.astype(">u2").tobytes())


def _field(pairs, values):
    try:
        grid = PhaseSpaceGrid(float(pairs["q_min"]), float(pairs["q_max"]), float(pairs["p_min"]),
                              float(pairs["p_max"]), int(pairs["level"]))
    except KeyError as exc:
        raise InvalidArgumentError(f"snapshot header lacks {exc.args[0]}") from exc
    if values.shape != (grid.n, grid.n):
        raise InvalidArgumentError(f"snapshot has shape {values.shape}, header implies {grid.n}x{grid.n}")
    meta = {"hbar": float(pairs.get("hbar", 1.0))}
    return WignerField(grid, values, float(pairs.get("time", 0.0)), meta)


def read_snapshot(path):
    """Field stored by ``emit_snapshot``; the format is taken from the file content."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc
    if raw.startswith(b"P5"):
        return _read_pgm(raw, path)
    text = raw.decode("utf-8")
    pairs = {}
    for line in text.splitlines():
        if line.startswith("#"):
            pairs.update(_parse_header(line))
    values = np.loadtxt(io.StringIO(text), delimiter=",", comments="#", ndmin=2)
    return _field(pairs, values)


def _read_pgm(raw, path):
    pos, tokens, pairs = 2, [], {}
    # header: whitespace separated tokens, '#' comments to end of line
    while len(tokens) < 3:
        while raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            end = raw.index(b"\n", pos)
            pairs.update(_parse_header(raw[pos:end].decode("ascii")))
            pos = end
            continue
        start = pos
        while not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(int(raw[start:pos]))
    pos += 1
    width, height, maxval = tokens
    if maxval != PGM_MAX:
        raise InvalidArgumentError(f"{path}: expected maxval {PGM_MAX}, got {maxval}")
    pix = np.frombuffer(raw[pos:pos + 2 * width * height], dtype=">u2").reshape(height, width)
    lo, hi = float(pairs["min"]), float(pairs["max"])
    values = lo + pix.astype(float) / PGM_MAX * (hi - lo)
    field = _field(pairs, values)
    field.meta["pgm_range"] = (lo, hi)
    return field
