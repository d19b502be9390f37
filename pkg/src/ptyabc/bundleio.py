"""On-disk formats: PTYB1 dataset bundles, trace CSVs and 16-bit PGM renders.

A bundle is a directory::

    manifest.json     format, dims, dtypes, metadata
    patterns.bin      J x M x M float32, little-endian, row-major
    positions.bin     J x 2 int32 (row, col)
    object.bin        N x N interleaved re/im float32   (optional)
    probe.bin         M x M interleaved re/im float32   (optional)

Arrays are float64 in memory and float32 at rest; reading returns the
float32 values widened back to float64.
"""

import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .simulate import DiffractionStack, GroundTruth, ScanGeometry

FORMAT = "PTYB1"
_F32 = np.dtype("<f4")
_I32 = np.dtype("<i4")


class BundleError(ValueError):
    pass


def atomic_write(path, payload):
    """Write bytes or text to ``path`` through a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(payload, str):
        payload = payload.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def complex_to_bytes(f):
    f = np.asarray(f)
    inter = np.empty(f.shape + (2,), dtype=_F32)
    inter[..., 0] = f.real
    inter[..., 1] = f.imag
    return inter.tobytes()


def complex_from_bytes(raw, shape):
    inter = np.frombuffer(raw, dtype=_F32).reshape(tuple(shape) + (2,)).astype(np.float64)
    return inter[..., 0] + 1j * inter[..., 1]


def _blob(root, manifest, name, itemsize, shape):
    path = root / manifest["files"][name]
    try:
        raw = path.read_bytes()
    except OSError as err:
        raise BundleError(f"cannot read {name}: {err}") from err
    expected = int(np.prod(shape)) * itemsize
    if len(raw) != expected:
        raise BundleError(f"size mismatch: {name} has {len(raw)} bytes, manifest implies {expected}")
    return raw


def write_bundle(path, data, geom, truth=None, meta=None):
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    j, m = len(data), data.pattern_size
    if len(geom) != j or geom.probe_size != m:
        raise BundleError(f"data ({j} x {m}) inconsistent with geometry ({len(geom)} x {geom.probe_size})")
    files = {"patterns": "patterns.bin", "positions": "positions.bin"}
    atomic_write(root / files["patterns"], data.intensities.astype(_F32).tobytes())
    atomic_write(root / files["positions"], geom.positions.astype(_I32).tobytes())
    if truth is not None:
        files["object"], files["probe"] = "object.bin", "probe.bin"
        atomic_write(root / files["object"], complex_to_bytes(truth.object))
        atomic_write(root / files["probe"], complex_to_bytes(truth.probe))
    manifest = {
        "format": FORMAT,
        "dtype": {"patterns": "float32", "positions": "int32", "complex": "float32 interleaved re/im"},
        "endianness": "little",
        "count": j,
        "probe_size": m,
        "object_size": geom.object_size,
        "photon_scale": data.photon_scale,
        "has_truth": truth is not None,
        "files": files,
        "meta": dict(meta or {}),
    }
    atomic_write(root / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_manifest(path):
    root = Path(path)
    try:
        manifest = json.loads((root / "manifest.json").read_text())
    except OSError as err:
        raise BundleError(f"cannot read manifest: {err}") from err
    except json.JSONDecodeError as err:
        raise BundleError(f"malformed manifest: {err}") from err
    version = manifest.get("format")
    if version != FORMAT:
        raise BundleError(f"unsupported format version {version!r}, expected {FORMAT!r}")
    for key in ("count", "probe_size", "object_size", "files"):
        if key not in manifest:
            raise BundleError(f"manifest missing field: {key}")
    return manifest


def read_bundle(path):
    """Return ``(DiffractionStack, ScanGeometry, GroundTruth or None)``."""
    root = Path(path)
    man = read_manifest(root)
    j, m, n = int(man["count"]), int(man["probe_size"]), int(man["object_size"])
    patterns = np.frombuffer(_blob(root, man, "patterns", 4, (j, m, m)), dtype=_F32).reshape(j, m, m)
    positions = np.frombuffer(_blob(root, man, "positions", 4, (j, 2)), dtype=_I32).reshape(j, 2)
    try:
        geom = ScanGeometry(positions, m, n)
        data = DiffractionStack(patterns.astype(np.float64), man.get("photon_scale"))
    except ValueError as err:
        raise BundleError(f"invalid bundle contents: {err}") from err
    truth = None
    if man.get("has_truth"):
        obj = complex_from_bytes(_blob(root, man, "object", 8, (n, n)), (n, n))
        probe = complex_from_bytes(_blob(root, man, "probe", 8, (m, m)), (m, m))
        truth = GroundTruth(obj, probe, meta=man.get("meta", {}))
    return data, geom, truth


def _fmt(v):
    return "" if v is None else format(float(v), ".16e")


def trace_csv_text(traces, comments=None, timing=False, status=False):
    """CSV text for ``{label: ErrorTrace}`` (or a list of traces).

    ``elapsed_ms`` is left blank unless ``timing`` is set, which keeps files
    byte-identical across runs. ``status`` appends a per-row status column.
    """
    if isinstance(traces, dict):
        traces = list(traces.values())
    buf = io.StringIO()
    for line in comments or ():
        buf.write(f"# {line}\n")
    cols = ["preset", "iter", "data_error", "object_nrmse", "elapsed_ms"]
    if status:
        cols.append("status")
    buf.write(",".join(cols) + "\n")
    for tr in traces:
        for k in range(len(tr)):
            row = [
                tr.label,
                str(tr.iteration[k]),
                _fmt(tr.data_error[k]),
                _fmt(tr.object_nrmse[k]),
                _fmt(tr.elapsed_ms[k]) if timing else "",
            ]
            if status:
                row.append(tr.status)
            buf.write(",".join(row) + "\n")
    return buf.getvalue()


def write_trace_csv(traces, path, comments=None, timing=False, status=False):
    atomic_write(path, trace_csv_text(traces, comments, timing, status))


def read_trace_csv(path):
    """Parse a trace CSV into ``{label: list of row dicts}``, skipping comments."""
    import csv

    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    out = {}
    for row in csv.DictReader(lines):
        out.setdefault(row["preset"], []).append(row)
    return out


def render_field(f, kind, path):
    """Write ``|f|`` or ``arg f`` as a binary 16-bit PGM.

    Modulus maps ``[0, max]`` to ``[0, 65535]``; phase maps ``[-pi, pi)``
    to ``[0, 65535]``.
    """
    f = np.asarray(f)
    if f.ndim != 2:
        raise ValueError(f"render_field needs a 2D field, got shape {f.shape}")
    if kind == "modulus":
        mod = np.abs(f)
        peak = mod.max()
        img = np.zeros(f.shape) if peak == 0 else np.rint(mod / peak * 65535)
    elif kind == "phase":
        ph = np.angle(f)
        ph = np.where(ph >= np.pi, -np.pi, ph)
        img = np.floor((ph + np.pi) / (2 * np.pi) * 65536)
    else:
        raise ValueError(f"kind must be 'modulus' or 'phase', got {kind!r}")
    img = np.clip(img, 0, 65535).astype(">u2")
    header = f"P5\n{f.shape[1]} {f.shape[0]}\n65535\n".encode("ascii")
    atomic_write(path, header + img.tobytes())


def read_pgm(path):
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h = (int(v) for v in parts[1].split())
    maxval = int(parts[2])
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(parts[3], dtype=dtype).reshape(h, w)


def write_reconstruction(prefix, pair, meta=None):
    """Write ``<prefix>_object.bin``, ``<prefix>_probe.bin`` and ``<prefix>_recon.json``."""
    prefix = str(prefix)
    atomic_write(prefix + "_object.bin", complex_to_bytes(pair.object))
    atomic_write(prefix + "_probe.bin", complex_to_bytes(pair.probe))
    info = {
        "format": FORMAT,
        "object_shape": list(pair.object.shape),
        "probe_shape": list(pair.probe.shape),
        "dtype": "float32 interleaved re/im",
        "endianness": "little",
        "meta": dict(meta or {}),
    }
    atomic_write(prefix + "_recon.json", json.dumps(info, indent=2, sort_keys=True) + "\n")


def read_reconstruction(prefix):
    from .projections import ProbeObjectPair

    prefix = str(prefix)
    info = json.loads(Path(prefix + "_recon.json").read_text())
    obj = complex_from_bytes(Path(prefix + "_object.bin").read_bytes(), info["object_shape"])
    probe = complex_from_bytes(Path(prefix + "_probe.bin").read_bytes(), info["probe_shape"])
    return ProbeObjectPair(probe, obj)
