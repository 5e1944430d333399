"""Contour ingestion, synthetic ground-truth generation, and result export.

CSV is the primary contour format (the segmentation producing contours is
external tooling); a minimal marching-squares tracer handles binary PGM
rasters.  All exports are deterministic and round-trip at full float
precision.
"""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import canonical
from .curve_core import ConstantCurvatureClass, SampledCurve
from .errors import InvariantViolation, NoContour, ParseError

FLOAT_FMT = "%.17g"


# ---------------------------------------------------------------------------
# contour files
# ---------------------------------------------------------------------------

@dataclass
class ContourFile:
    format: str  # "csv" | "json"
    contours: dict  # name -> SampledCurve, insertion-ordered

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise InvariantViolation(f"unknown format {self.format!r}")


CSV_HEADER = ["contour_id", "point_index", "x", "y", "closed"]


def _parse_bool(text, line):
    t = text.strip().lower()
    if t in ("1", "true", "yes"):
        return True
    if t in ("0", "false", "no"):
        return False
    raise ParseError(f"invalid boolean {text!r}", line=line, field="closed")


def load_contours(path, fmt: str | None = None) -> ContourFile:
    """Parse a contour file; row order is preserved.

    Format is inferred from the extension unless given.  Malformed fields
    raise ParseError with their location; contours violating the curve
    invariants raise InvariantViolation naming the contour.
    """
    path = str(path)
    if fmt is None:
        fmt = "json" if path.endswith(".json") else "csv"
    if fmt == "json":
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}", line=exc.lineno) from None
        contours = {}
        for entry in doc.get("contours", []):
            name = str(entry["id"])
            if name in contours:
                raise InvariantViolation(f"duplicate contour id {name!r}")
            pts = np.asarray(entry["points"], dtype=float)
            try:
                contours[name] = SampledCurve(pts, bool(entry.get("closed", True)))
            except InvariantViolation as exc:
                raise InvariantViolation(f"contour {name!r}: {exc}") from None
        return ContourFile("json", contours)

    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != CSV_HEADER:
            raise ParseError(f"expected header {','.join(CSV_HEADER)}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ParseError(f"expected 5 fields, got {len(row)}", line=lineno)
            cid = row[0].strip()
            try:
                idx = int(row[1])
            except ValueError:
                raise ParseError(f"invalid integer {row[1]!r}", line=lineno,
                                 field="point_index") from None
            vals = []
            for name, text in zip(("x", "y"), row[2:4]):
                try:
                    vals.append(float(text))
                except ValueError:
                    raise ParseError(f"invalid number {text!r}", line=lineno,
                                     field=name) from None
            closed = _parse_bool(row[4], lineno)
            rows.append((cid, idx, vals[0], vals[1], closed, lineno))

    contours = {}
    current = None
    buf = []
    flags = []

    def flush():
        if current is None:
            return
        expected = list(range(len(buf)))
        if [i for i, _ in buf] != expected:
            raise ParseError(f"contour {current!r} has non-contiguous point_index")
        try:
            contours[current] = SampledCurve(np.array([p for _, p in buf]), flags[0])
        except InvariantViolation as exc:
            raise InvariantViolation(f"contour {current!r}: {exc}") from None

    for cid, idx, x, y, closed, lineno in rows:
        if cid != current:
            if cid in contours:
                raise ParseError(f"contour {cid!r} rows are not contiguous",
                                 line=lineno)
            flush()
            current = cid
            buf = []
            flags = []
        buf.append((idx, (x, y)))
        flags.append(closed)
    flush()
    return ContourFile("csv", contours)


def export_contours_csv(path, contours: dict) -> None:
    """Write contours in the standard CSV schema (17 significant digits)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for name, curve in contours.items():
            for i, (x, y) in enumerate(curve.points):
                w.writerow([name, i, FLOAT_FMT % x, FLOAT_FMT % y,
                            "true" if curve.closed else "false"])


def export_signature_csv(path, signatures: dict) -> None:
    """``contour_id,sample_index,s,kappa,eps`` rows per signature."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["contour_id", "sample_index", "s", "kappa", "eps"])
        for name, sig in signatures.items():
            for i in range(sig.n):
                w.writerow([name, i, FLOAT_FMT % sig.s[i],
                            FLOAT_FMT % sig.kappa[i], int(sig.eps[i])])


def load_signature_csv(path) -> dict:
    """Read the signature schema back as name -> (s, kappa, eps) arrays."""
    out = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["contour_id", "sample_index", "s", "kappa", "eps"]:
            raise ParseError("bad signature header", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                name, _, s, k, e = row[0], int(row[1]), float(row[2]), \
                    float(row[3]), int(row[4])
            except (ValueError, IndexError):
                raise ParseError("malformed signature row", line=lineno) from None
            out.setdefault(name, []).append((s, k, e))
    return {name: tuple(np.array(cols) for cols in zip(*vals))
            for name, vals in out.items()}


def export_correspondence_csv(path, rows) -> None:
    """``contourA_id,contourB_id,sampleA_idx,sampleB_idx`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["contourA_id", "contourB_id", "sampleA_idx", "sampleB_idx"])
        for a, b, ia, ib in rows:
            w.writerow([a, b, int(ia), int(ib)])


def load_correspondence_csv(path) -> list:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["contourA_id", "contourB_id", "sampleA_idx", "sampleB_idx"]:
            raise ParseError("bad correspondence header", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append((row[0], row[1], int(row[2]), int(row[3])))
            except (ValueError, IndexError):
                raise ParseError("malformed correspondence row", line=lineno) from None
    return rows


def export_trajectory_csv(path, states) -> None:
    """``t,point_index,x,y,g,kappa`` rows for a flow trajectory."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "point_index", "x", "y", "g", "kappa"])
        for st in states:
            for i, (x, y) in enumerate(st.curve.points):
                w.writerow([FLOAT_FMT % st.t, i, FLOAT_FMT % x, FLOAT_FMT % y,
                            FLOAT_FMT % st.g[i], FLOAT_FMT % st.kappa[i]])


def export_svg(path, polylines, width: int = 640, height: int = 640,
               margin: float = 0.05) -> None:
    """Write polylines (sequences of (n, 2) arrays) as a standalone SVG."""
    polylines = [np.asarray(p, dtype=float) for p in polylines]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">']
    if polylines:
        allpts = np.vstack(polylines)
        lo = allpts.min(axis=0)
        hi = allpts.max(axis=0)
        span = np.maximum(hi - lo, 1e-12)
        scale = (1 - 2 * margin) * min(width / span[0], height / span[1])
        off = np.array([width, height]) / 2 - scale * (lo + hi) / 2

        def to_px(p):
            q = off + scale * p
            return q[0], height - q[1]  # y axis up

        for poly in polylines:
            coords = " ".join("%.3f,%.3f" % to_px(p) for p in poly)
            parts.append(f'<polyline points="{coords}" fill="none" '
                         f'stroke="black" stroke-width="1"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# synthetic curves with ground truth
# ---------------------------------------------------------------------------

@dataclass
class SyntheticSpec:
    """Recipe for an analytically sampled test curve.

    ``base`` is a ConstantCurvatureClass, one of the strings ``circle``,
    ``ellipse``, ``perturbed_circle``, or a dict with a ``kind`` key and
    parameters.  ``transform`` must be nonsingular; noise is isotropic
    Gaussian in coordinate units, reproducible from ``seed``.
    """

    base: object
    n_points: int = 85
    transform: np.ndarray = field(default_factory=lambda: np.eye(2))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(2))
    noise_sigma: float = 0.0
    seed: int = 0
    param_range: tuple | None = None

    def __post_init__(self):
        self.transform = np.asarray(self.transform, dtype=float)
        self.translation = np.asarray(self.translation, dtype=float)
        if self.transform.shape != (2, 2) or abs(np.linalg.det(self.transform)) < 1e-12:
            raise InvariantViolation("transform must be a nonsingular 2x2 matrix")
        if self.n_points < 7:
            raise InvariantViolation("n_points must be >= 7")
        if self.noise_sigma < 0:
            raise InvariantViolation("noise_sigma must be >= 0")

    @classmethod
    def from_dict(cls, doc: dict) -> "SyntheticSpec":
        doc = dict(doc)
        base = doc.pop("base")
        return cls(base=base, **doc)


def _base_curve(base, param_range):
    if isinstance(base, ConstantCurvatureClass):
        kind = base.kind
        params = {"alpha": base.alpha, "phi": base.phi}
    elif isinstance(base, str):
        kind = base
        params = {}
    elif isinstance(base, dict):
        kind = base["kind"]
        params = {k: v for k, v in base.items() if k != "kind"}
    else:
        raise InvariantViolation(f"unsupported base {base!r}")
    kind = kind.lower()
    rng_kw = {} if param_range is None else {"x_range": tuple(param_range)}
    if kind in ("unit_circle", "circle"):
        return canonical.unit_circle()
    if kind == "ellipse":
        return canonical.ellipse(params.get("a", 2.0), params.get("b", 1.0))
    if kind == "perturbed_circle":
        return canonical.perturbed_circle(params.get("harmonics",
                                                     [(3, 0.08, 0.0), (5, 0.04, 1.0)]))
    if kind == "log_spiral":
        kw = {} if param_range is None else {"theta_range": tuple(param_range)}
        return canonical.log_spiral(params["phi"], **kw)
    if kind == "power_curve":
        return canonical.power_curve(params["alpha"], **rng_kw)
    if kind == "x_log_x":
        return canonical.x_log_x(**rng_kw)
    if kind == "hyperbola":
        return canonical.hyperbola(**rng_kw)
    raise InvariantViolation(f"unknown base kind {kind!r}")


@dataclass
class SyntheticResult:
    curve: SampledCurve
    base_params: np.ndarray
    correspondence: np.ndarray  # output sample i <-> base sample correspondence[i]


def generate_synthetic(spec: SyntheticSpec) -> SyntheticResult:
    """Sample the base curve analytically, transform, and add seeded noise.

    The same seed reproduces the output bitwise; the returned correspondence
    is the identity map from output samples to base parameters.
    """
    base = _base_curve(spec.base, spec.param_range)
    params = base.sample_params(spec.n_points)
    pts = base(params, 0) @ spec.transform.T + spec.translation
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.seed)
        pts = pts + rng.normal(0.0, spec.noise_sigma, size=pts.shape)
    period = None
    if base.closed:
        a, b = base.param_range
        period = b - a
    curve = SampledCurve(pts, base.closed, params, period)
    return SyntheticResult(curve, params, np.arange(spec.n_points))


# ---------------------------------------------------------------------------
# boundary tracing (binary PGM, marching squares)
# ---------------------------------------------------------------------------

def read_pgm(path) -> np.ndarray:
    """Binary (P5) PGM, returned as floats in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ParseError("only binary P5 PGM is supported", line=1)
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos: pos + 1].isspace():
            pos += 1
        if data[pos: pos + 1] == b"#":
            while pos < len(data) and data[pos: pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos: pos + 1].isspace():
            pos += 1
        try:
            fields.append(int(data[start: pos]))
        except ValueError:
            raise ParseError(f"invalid PGM header field {data[start:pos]!r}") from None
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if maxval != 255:
        raise ParseError("only maxval 255 PGM is supported")
    raw = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    return raw.reshape(height, width).astype(float) / 255.0


def write_pgm(path, image: np.ndarray) -> None:
    img = np.clip(np.asarray(image, dtype=float), 0.0, 1.0)
    data = (img * 255).round().astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (img.shape[1], img.shape[0]))
        fh.write(data.tobytes())


def trace_boundary(image: np.ndarray, threshold: float,
                   min_points: int = 7) -> list[SampledCurve]:
    """Closed marching-squares isocontours of a grayscale grid.

    Returns one counterclockwise contour per closed loop at the given level
    ((x, y) = (column, row) coordinates); open border-touching segments are
    ignored.  Raises NoContour when no closed loop exists.
    """
    from skimage import measure
    image = np.asarray(image, dtype=float)
    if image.min() < 0 or image.max() > 1:
        raise InvariantViolation("image values must lie in [0, 1]")
    found = measure.find_contours(image, threshold)
    out = []
    for rc in found:
        if len(rc) < min_points + 1:
            continue
        if not np.allclose(rc[0], rc[-1]):
            continue  # open segment hitting the border
        xy = np.stack([rc[:-1, 1], rc[:-1, 0]], axis=1)
        keep = np.ones(len(xy), dtype=bool)
        keep[1:] = np.any(np.diff(xy, axis=0) != 0, axis=1)
        xy = xy[keep]
        if len(xy) < min_points:
            continue
        area = 0.5 * np.sum(xy[:, 0] * np.roll(xy[:, 1], -1)
                            - np.roll(xy[:, 0], -1) * xy[:, 1])
        if area < 0:
            xy = xy[::-1].copy()
        out.append(SampledCurve(xy, closed=True))
    if not out:
        raise NoContour(f"no closed isocontour at level {threshold}")
    return out
