"""Edge-time heatmaps of a closure as binary PPM images.

Pixel (i, j) shows the round in which the pair of the i-th and j-th vertex
(in the chosen order) entered the graph: initial edges get the first colour
stop, the last round the final stop, pairs never added and the diagonal are
white.  Colours interpolate linearly in RGB along the stops by round / T.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .closure import ClosureResult
from .graph import GraphError, ResourceError

DARK_BLUE = (8, 16, 96)
YELLOW = (255, 230, 0)
WHITE = (255, 255, 255)
ORDERS = ("retro", "id", "degree")


@dataclass(frozen=True)
class HeatmapSpec:
    stops: tuple[tuple[int, int, int], ...] = (DARK_BLUE, YELLOW)
    never: tuple[int, int, int] = WHITE
    size: int | None = None
    order: str = "retro"
    cap: int = 4000
    downsample: bool = False

    def __post_init__(self):
        if len(self.stops) < 2:
            raise ValueError("a gradient needs at least two colour stops")
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}, got {self.order!r}")
        if self.size is not None and self.size < 1:
            raise ValueError("size must be positive")


class EdgeTimes:
    """Round labels of a finished closure: -1 for absent pairs and the diagonal."""

    def __init__(self, n: int, labels: np.ndarray):
        self.n = n
        self.labels = labels

    @classmethod
    def from_result(cls, res: ClosureResult) -> "EdgeTimes":
        n = res.n
        lab = np.full((n, n), -1, dtype=np.int32)
        for u, v in res.initial.edges():
            lab[u, v] = lab[v, u] = 0
        lab[res.eu, res.ev] = res.rnd
        lab[res.ev, res.eu] = res.rnd
        return cls(n, lab)

    @classmethod
    def from_csv(cls, path: str | Path) -> "EdgeTimes":
        """Read the ``close`` output: ``# ... n=N ...`` then ``u,v,round`` rows."""
        n = None
        rows = []
        with open(path, newline="") as fh:
            for line in fh:
                if line.startswith("#"):
                    for tok in line[1:].split():
                        if tok.startswith("n="):
                            n = int(tok[2:])
                    continue
                rows.append(line)
        if n is None:
            raise GraphError(f"{path}: missing '# ... n=N' header line")
        lab = np.full((n, n), -1, dtype=np.int32)
        reader = csv.reader(rows)
        header = next(reader, None)
        if header != ["u", "v", "round"]:
            raise GraphError(f"{path}: expected a 'u,v,round' header, got {header}")
        for rec in reader:
            if not rec:
                continue
            try:
                u, v, t = (int(x) for x in rec)
            except ValueError:
                raise GraphError(f"{path}: malformed row {rec}") from None
            if not (0 <= u < n and 0 <= v < n) or u == v:
                raise GraphError(f"{path}: bad pair {u},{v}")
            lab[u, v] = lab[v, u] = t
        return cls(n, lab)

    @property
    def num_rounds(self) -> int:
        return int(self.labels.max(initial=0))


def _times(res: ClosureResult | EdgeTimes) -> EdgeTimes:
    return res if isinstance(res, EdgeTimes) else EdgeTimes.from_result(res)


def retrospective_vertex_order(res: ClosureResult | EdgeTimes) -> list[int]:
    """Ascending mean round over incident final edges; isolated vertices last; ties by id."""
    et = _times(res)
    lab = et.labels
    present = lab >= 0
    deg = present.sum(axis=1)
    tot = np.where(present, lab, 0).sum(axis=1)
    keyed = []
    for v in range(et.n):
        if deg[v]:
            keyed.append((0, Fraction(int(tot[v]), int(deg[v])), v))
        else:
            keyed.append((1, Fraction(0), v))
    keyed.sort()
    return [v for _, _, v in keyed]


def vertex_order(res: ClosureResult | EdgeTimes, mode: str) -> list[int]:
    et = _times(res)
    if mode == "retro":
        return retrospective_vertex_order(et)
    if mode == "id":
        return list(range(et.n))
    if mode == "degree":
        deg = (et.labels >= 0).sum(axis=1)
        return sorted(range(et.n), key=lambda v: (-int(deg[v]), v))
    raise ValueError(f"unknown order {mode!r}")


def palette(spec: HeatmapSpec, rounds: int) -> np.ndarray:
    """RGB per round 0..rounds, linear between consecutive stops."""
    stops = np.array(spec.stops, dtype=np.float64)
    segs = len(stops) - 1
    out = np.empty((rounds + 1, 3), dtype=np.uint8)
    for t in range(rounds + 1):
        x = t / rounds * segs if rounds else 0.0
        i = min(int(x), segs - 1)
        frac = x - i
        c = stops[i] + (stops[i + 1] - stops[i]) * frac
        out[t] = np.floor(c + 0.5).astype(np.uint8)
    return out


def heatmap_pixels(res: ClosureResult | EdgeTimes, spec: HeatmapSpec = HeatmapSpec()) -> np.ndarray:
    et = _times(res)
    n = et.n
    side = spec.size if spec.size is not None else n
    if side > spec.cap:
        raise ResourceError(f"image side {side} exceeds the cap of {spec.cap}; pass a smaller size")
    if side < n and not spec.downsample:
        raise ResourceError(f"n={n} is larger than the image side {side}; enable downsampling")
    order = np.array(vertex_order(et, spec.order), dtype=np.int64)
    if side != n:
        # nearest vertex per pixel row; the same map on both axes keeps symmetry
        order = order[(np.arange(side) * n) // side] if n else order
    lab = et.labels[np.ix_(order, order)] if n else np.zeros((0, 0), dtype=np.int32)
    pal = palette(spec, et.num_rounds)
    img = np.empty((side, side, 3), dtype=np.uint8)
    img[:] = spec.never
    mask = lab >= 0
    img[mask] = pal[lab[mask]]
    return img


def ppm_bytes(img: np.ndarray) -> bytes:
    h, w, _ = img.shape
    return f"P6\n{w} {h}\n255\n".encode() + np.ascontiguousarray(img, dtype=np.uint8).tobytes()


def render_heatmap(res: ClosureResult | EdgeTimes, spec: HeatmapSpec = HeatmapSpec(),
                   path: str | Path | None = None) -> bytes:
    data = ppm_bytes(heatmap_pixels(res, spec))
    if path is not None:
        try:
            Path(path).write_bytes(data)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return data


def read_ppm(data: bytes) -> np.ndarray:
    """Parse the P6 files written here (no comments, maxval 255)."""
    parts = data.split(b"\n", 3)
    if len(parts) < 4 or parts[0] != b"P6" or parts[2] != b"255":
        raise ValueError("not a P6 image with maxval 255")
    w, h = (int(x) for x in parts[1].split())
    body = parts[3]
    if len(body) != w * h * 3:
        raise ValueError("truncated pixel data")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)


def color_stop_check(img: np.ndarray, spec: HeatmapSpec) -> bool:
    """Every pixel is white or lies on the gradient polyline."""
    stops = np.array(spec.stops, dtype=np.float64)
    px = img.reshape(-1, 3).astype(np.float64)
    ok = np.all(px == np.array(spec.never, dtype=np.float64), axis=1)
    for a, b in zip(stops, stops[1:]):
        d = b - a
        t = np.clip(((px - a) @ d) / (d @ d), 0.0, 1.0)
        dist = np.abs(px - (a + t[:, None] * d)).max(axis=1)
        ok |= dist <= 1.0
    return bool(ok.all())


def format_edge_times(res: ClosureResult, all_pairs: bool = False) -> str:
    """``close`` CSV: final edges with round labels (0 initial); optionally
    absent pairs with round -1."""
    et = EdgeTimes.from_result(res)
    lines = [f"# krbootstrap close n={res.n} r={res.r} rounds={res.num_rounds} added={res.num_added}",
             "u,v,round"]
    lab = et.labels
    iu, iv = np.triu_indices(res.n, k=1)
    vals = lab[iu, iv]
    keep = np.ones_like(vals, dtype=bool) if all_pairs else vals >= 0
    for u, v, t in zip(iu[keep].tolist(), iv[keep].tolist(), vals[keep].tolist()):
        lines.append(f"{u},{v},{t}")
    return "\n".join(lines) + "\n"


def symmetric(img: np.ndarray) -> bool:
    return bool((img == img.transpose(1, 0, 2)).all())

