"""Rasters, regions of interest, result tables and experiment configs.

Raster formats:

* ``csv-matrix``: one image row per line, comma separated.
* ``raw-f32``: little-endian float32 pixels, row-major, next to a JSON
  sidecar ``<file>.json`` holding ``{"width": W, "height": H}``.

ROI pixels are flattened row-major.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .estimators import EstimatorConfig, fit
from .harness import ExperimentGrid, MetricsRow
from .model import ContaminationSpec, Gi0Error, Sample, TextureParams, quantile, rng_for
from .thresholds import ThresholdRule

METRICS_HEADER = [f.name for f in fields(MetricsRow)]
TABLE1_METHODS = ("MLE", "MPLE", "LME", "PWM", "MDPD")
TABLE1_SIZES = (36, 63, 121, 168, 270, 396, 468, 540, 665, 740)


class RasterError(Gi0Error):
    pass


class SizeMismatch(RasterError):
    pass


class NegativePixels(RasterError):
    pass


class MalformedSidecar(RasterError):
    pass


class RoiError(Gi0Error):
    pass


@dataclass
class Raster:
    width: int
    height: int
    pixels: np.ndarray  # row-major, float64

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=float).ravel()
        if px.size != self.width * self.height:
            raise SizeMismatch(f"{px.size} pixels for a {self.width}x{self.height} raster")
        if np.any(px < 0):
            raise NegativePixels("raster contains negative intensities")
        self.pixels = px

    def as_matrix(self) -> np.ndarray:
        return self.pixels.reshape(self.height, self.width)


@dataclass(frozen=True)
class RoiSpec:
    name: str
    x0: int
    y0: int
    w: int
    h: int

    @property
    def size(self) -> int:
        return self.w * self.h

    def validate(self, raster: Raster):
        if self.w * self.h < 2:
            raise RoiError(f"ROI {self.name!r} must hold at least two pixels")
        if self.x0 < 0 or self.y0 < 0 or self.x0 + self.w > raster.width or self.y0 + self.h > raster.height:
            raise RoiError(f"ROI {self.name!r} lies outside the {raster.width}x{raster.height} raster")

    def extract(self, raster: Raster) -> np.ndarray:
        self.validate(raster)
        return raster.as_matrix()[self.y0 : self.y0 + self.h, self.x0 : self.x0 + self.w].ravel()


# ------------------------------------------------------------------ rasters


def load_raster(path, fmt: str = "csv-matrix") -> Raster:
    path = Path(path)
    if fmt == "csv-matrix":
        rows = [line for line in path.read_text().splitlines() if line.strip()]
        try:
            mat = [[float(v) for v in line.split(",")] for line in rows]
        except ValueError as e:
            raise RasterError(f"{path}: {e}") from None
        widths = {len(r) for r in mat}
        if len(widths) != 1:
            raise SizeMismatch(f"{path}: ragged rows")
        return Raster(widths.pop(), len(mat), np.array(mat).ravel())
    if fmt in ("raw-f32", "raw-f32+json-sidecar"):
        side = sidecar_path(path)
        try:
            meta = json.loads(side.read_text())
            w, h = int(meta["width"]), int(meta["height"])
        except FileNotFoundError:
            raise
        except (ValueError, KeyError, TypeError) as e:
            raise MalformedSidecar(f"{side}: {e}") from None
        if w < 1 or h < 1:
            raise MalformedSidecar(f"{side}: width and height must be positive")
        data = path.read_bytes()
        if len(data) != 4 * w * h:
            raise SizeMismatch(f"{path}: {len(data)} bytes, expected {4 * w * h} for {w}x{h}")
        return Raster(w, h, np.frombuffer(data, dtype="<f4").astype(float))
    raise RasterError(f"unknown raster format {fmt!r}")


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_raster(raster: Raster, path, fmt: str = "csv-matrix"):
    path = Path(path)
    if fmt == "csv-matrix":
        m = raster.as_matrix()
        path.write_text("".join(",".join(repr(float(v)) for v in row) + "\n" for row in m))
    elif fmt in ("raw-f32", "raw-f32+json-sidecar"):
        path.write_bytes(raster.pixels.astype("<f4").tobytes())
        sidecar_path(path).write_text(json.dumps({"width": raster.width, "height": raster.height}))
    else:
        raise RasterError(f"unknown raster format {fmt!r}")


def synthetic_corner_raster(
    width: int = 96,
    height: int = 96,
    params: TextureParams = TextureParams(-4.0, 1.0),
    seed: int = 0,
    reflector: tuple[int, int, int, int] = (10, 10, 2, 2),
    reflector_value: float = 1000.0,
) -> Raster:
    """G0 background plus a bright block standing in for a corner reflector.

    ``reflector`` is (x0, y0, w, h).  Pixel values are rounded to float32 so
    the raw format round-trips exactly.
    """
    u = rng_for(seed, 0x5A4).random(width * height)
    img = np.asarray(quantile(u, params)).reshape(height, width)
    x0, y0, w, h = reflector
    img[y0 : y0 + h, x0 : x0 + w] = reflector_value
    return Raster(width, height, img.astype(np.float32).astype(float).ravel())


def default_rois() -> list[RoiSpec]:
    """Ten rectangles with the region sizes of the reference table.

    The 63-pixel region surrounds the default reflector; the others sit on
    clean background of the default 96x96 raster.
    """
    shapes = [(6, 6), (7, 9), (11, 11), (12, 14), (15, 18), (18, 22), (18, 26), (20, 27), (19, 35), (20, 37)]
    origins = [(1, 1), (7, 7), (30, 2), (44, 2), (58, 2), (76, 2), (2, 30), (22, 30), (44, 30), (66, 30)]
    return [RoiSpec(f"R{i + 1:02d}", x, y, w, h) for i, ((w, h), (x, y)) in enumerate(zip(shapes, origins))]


def load_rois(path) -> list[RoiSpec]:
    data = json.loads(Path(path).read_text())
    items = data["rois"] if isinstance(data, dict) else data
    try:
        return [RoiSpec(str(d["name"]), int(d["x0"]), int(d["y0"]), int(d["w"]), int(d["h"])) for d in items]
    except (KeyError, TypeError, ValueError) as e:
        raise RoiError(f"{path}: malformed ROI entry ({e})") from None


def write_rois(rois: list[RoiSpec], path):
    Path(path).write_text(json.dumps({"rois": [asdict(r) for r in rois]}, indent=2) + "\n")


@dataclass
class RoiRow:
    roi: str
    n: int
    estimates: dict[str, float]
    statuses: dict[str, str]


def roi_fit(raster: Raster, rois: list[RoiSpec], methods=TABLE1_METHODS) -> list[RoiRow]:
    """Texture estimate of every method on every region (validated up front)."""
    for r in rois:
        r.validate(raster)
    cfgs = [EstimatorConfig.parse(m) if isinstance(m, str) else m for m in methods]
    rows = []
    for r in rois:
        z = Sample(r.extract(raster))
        est, st = {}, {}
        for c in cfgs:
            try:
                res = fit(z, c)
                est[c.label] = res.alpha
                st[c.label] = str(res.status)
            except Gi0Error as e:
                est[c.label] = math.nan
                st[c.label] = f"Error: {e}"
        rows.append(RoiRow(r.name, r.size, est, st))
    return rows


def roi_table_csv(rows: list[RoiRow]) -> str:
    methods = list(rows[0].estimates) if rows else list(TABLE1_METHODS)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["roi", "n"] + methods + [f"{m}_status" for m in methods])
    for r in rows:
        w.writerow([r.roi, r.n] + [_num(r.estimates[m]) for m in methods] + [r.statuses[m] for m in methods])
    return buf.getvalue()


# ------------------------------------------------------------ metrics tables


def _num(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def metrics_csv(rows: list[MetricsRow]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRICS_HEADER)
    for r in rows:
        w.writerow([r.method] + [_num(getattr(r, k)) for k in METRICS_HEADER[1:]])
    return buf.getvalue()


def write_csv(rows: list[MetricsRow], path):
    path = Path(path)
    try:
        path.write_text(metrics_csv(rows))
    except OSError as e:
        raise OSError(f"cannot write {path}: {e}") from e


def read_csv(path) -> list[MetricsRow]:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if header != METRICS_HEADER:
            raise Gi0Error(f"{path}: unexpected header {header}")
        return [_row_from(dict(zip(header, rec))) for rec in rd]


def _row_from(d) -> MetricsRow:
    kw = {}
    for f in fields(MetricsRow):
        v = d[f.name]
        if f.name == "method":
            kw[f.name] = str(v)
        elif f.name in ("n", "replicates_used"):
            kw[f.name] = int(v)
        else:
            kw[f.name] = float(v)
    return MetricsRow(**kw)


def write_json(rows: list[MetricsRow], path):
    path = Path(path)
    payload = [{k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in asdict(r).items()} for r in rows]
    try:
        path.write_text(json.dumps(payload, indent=1) + "\n")
    except OSError as e:
        raise OSError(f"cannot write {path}: {e}") from e


def read_json(path) -> list[MetricsRow]:
    data = json.loads(Path(path).read_text())
    return [_row_from({k: (math.nan if v is None else v) for k, v in d.items()}) for d in data]


# ------------------------------------------------------------------- config


def _method_cfg(item) -> EstimatorConfig:
    if isinstance(item, str):
        return EstimatorConfig.parse(item)
    if isinstance(item, dict):
        d = dict(item)
        label = d.pop("method")
        for k in ("alpha_box", "gamma_box"):
            if k in d:
                d[k] = tuple(d[k])
        return EstimatorConfig.parse(label, **d)
    raise Gi0Error(f"bad method entry {item!r}")


def _rule_cfg(item) -> ThresholdRule:
    if item is None:
        return ThresholdRule()
    if isinstance(item, str):
        return ThresholdRule.from_label(item)
    if isinstance(item, dict):
        return ThresholdRule(**item)
    raise Gi0Error(f"bad threshold_rule entry {item!r}")


_GRID_KEYS = {"alphas", "gammas", "sizes", "replicates", "master_seed", "methods", "contamination", "threshold_rule"}


def grid_from_dict(d: dict) -> ExperimentGrid:
    """Validate a parsed config and build the grid it describes."""
    if not isinstance(d, dict):
        raise Gi0Error("config must be a JSON object")
    unknown = set(d) - _GRID_KEYS
    if unknown:
        raise Gi0Error(f"unknown config keys: {sorted(unknown)}")
    missing = {"alphas", "gammas", "sizes"} - set(d)
    if missing:
        raise Gi0Error(f"missing config keys: {sorted(missing)}")
    try:
        cont = d.get("contamination")
        return ExperimentGrid(
            alphas=[float(a) for a in d["alphas"]],
            gammas=[float(g) for g in d["gammas"]],
            sizes=[int(n) for n in d["sizes"]],
            replicates=int(d.get("replicates", 300)),
            master_seed=int(d.get("master_seed", 0)),
            contamination=ContaminationSpec(**cont) if cont else None,
            methods=[_method_cfg(m) for m in d.get("methods", ["MGF(ADR)", "MDPD", "MPLE", "LME", "MLE", "PWM"])],
            threshold_rule=_rule_cfg(d.get("threshold_rule")),
        )
    except (TypeError, KeyError) as e:
        raise Gi0Error(f"malformed config: {e}") from None


def load_grid(path) -> ExperimentGrid:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise Gi0Error(f"{path}: invalid JSON ({e})") from None
    return grid_from_dict(d)


def grid_to_dict(grid: ExperimentGrid) -> dict:
    def cfg(c: EstimatorConfig):
        d = {"method": c.label}
        default = EstimatorConfig(c.method, mgf_stat=c.mgf_stat)
        for f in fields(EstimatorConfig):
            if f.name in ("method", "mgf_stat"):
                continue
            v = getattr(c, f.name)
            if v != getattr(default, f.name):
                d[f.name] = list(v) if isinstance(v, tuple) else v
        return d

    out = {
        "alphas": list(grid.alphas),
        "gammas": list(grid.gammas),
        "sizes": list(grid.sizes),
        "replicates": grid.replicates,
        "master_seed": grid.master_seed,
        "methods": [cfg(c) for c in grid.methods],
        "threshold_rule": asdict(grid.threshold_rule),
    }
    if grid.contamination is not None:
        out["contamination"] = asdict(grid.contamination)
    return out
