"""Phase-space points: sampled history on [-r, 0] plus discrete coordinates."""
import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels

DEFAULT_NODES = 201
ORIGIN_ZETA = 1e-9


class SegmentError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Segment:
    """A point of C(K, R) with K = [-r, 0] U {1, ..., N}.

    ``history_values``/``history_slopes`` sample x^0 and its derivative on a
    uniform grid over [-r, 0]; ``discrete_values`` holds x^1..x^N.
    Instances are read-only; the arrays are flagged non-writeable.
    """

    history_values: np.ndarray
    history_slopes: np.ndarray
    discrete_values: np.ndarray
    r: float
    n_components: int
    history_times: np.ndarray = field(repr=False)

    @property
    def h(self):
        return self.r / (len(self.history_values) - 1)

    @property
    def n_nodes(self):
        return len(self.history_values)

    def __call__(self, s):
        return evaluate(self, s)

    def __eq__(self, other):
        if not isinstance(other, Segment):
            return NotImplemented
        return (self.r == other.r and self.n_components == other.n_components
                and np.array_equal(self.history_values, other.history_values)
                and np.array_equal(self.history_slopes, other.history_slopes)
                and np.array_equal(self.discrete_values, other.discrete_values))

    __hash__ = None


def make_segment(values, slopes, discrete=(), r=1.0, N=None):
    """Validate and freeze a segment.

    ``N`` defaults to ``len(discrete)``. Raises SegmentError for length
    mismatches, non-finite samples or ``r <= 0``.
    """
    values = np.array(values, dtype=float).ravel()
    slopes = np.array(slopes, dtype=float).ravel()
    discrete = np.array(discrete, dtype=float).ravel()
    if N is None:
        N = len(discrete)
    if not np.isfinite(r) or r <= 0:
        raise SegmentError(f"history length must be positive, got r={r}")
    if len(values) < 2:
        raise SegmentError("need at least two history samples")
    if len(slopes) != len(values):
        raise SegmentError(f"{len(values)} values but {len(slopes)} slopes")
    if len(discrete) != N:
        raise SegmentError(f"N={N} but {len(discrete)} discrete values")
    for name, arr in (("values", values), ("slopes", slopes), ("discrete", discrete)):
        if not np.all(np.isfinite(arr)):
            raise SegmentError(f"non-finite entry in {name}")
    times = np.linspace(-r, 0.0, len(values))
    for arr in (values, slopes, discrete, times):
        arr.setflags(write=False)
    return Segment(values, slopes, discrete, float(r), int(N), times)


def from_function(func, deriv, discrete=(), r=1.0, nodes=DEFAULT_NODES):
    """Sample ``func``/``deriv`` on the standard grid."""
    s = np.linspace(-r, 0.0, nodes)
    return make_segment(np.broadcast_to(func(s), s.shape), np.broadcast_to(deriv(s), s.shape),
                        discrete, r)


def constant_segment(c, N=0, r=1.0, nodes=DEFAULT_NODES):
    return make_segment(np.full(nodes, float(c)), np.zeros(nodes), np.full(N, float(c)), r)


def evaluate(seg, s):
    """phi(s) for s in [-r, 0] (cubic Hermite) or s in {1, ..., N} (lookup)."""
    if s > 0:
        k = int(round(s))
        if abs(s - k) > 1e-12 or not 1 <= k <= seg.n_components:
            raise SegmentError(f"s={s} is not in K")
        return float(seg.discrete_values[k - 1])
    if s < -seg.r * (1 + 1e-12):
        raise SegmentError(f"s={s} is left of -r={-seg.r}")
    return float(kernels.hermite_eval_grid(seg.history_values, seg.history_slopes,
                                           -seg.r, seg.h, max(s, -seg.r)))


def evaluate_many(seg, pts):
    """Values and derivatives of the history interpolant at points in [-r, 0]."""
    pts = np.asarray(pts, dtype=float)
    v = np.empty(pts.shape)
    d = np.empty(pts.shape)
    kernels.hermite_eval_many(seg.history_values, seg.history_slopes, -seg.r, seg.h,
                              np.clip(pts.ravel(), -seg.r, 0.0), v.reshape(-1), d.reshape(-1))
    return v, d


def sup_norm(seg):
    m = np.max(np.abs(seg.history_values))
    if seg.n_components:
        m = max(m, np.max(np.abs(seg.discrete_values)))
    return float(m)


def norms(seg):
    """(sup norm, C^1 norm); the latter adds max |slope| on [-r, 0]."""
    sup = sup_norm(seg)
    return sup, sup + float(np.max(np.abs(seg.history_slopes)))


def _check_same_shape(a, b):
    if a.n_nodes != b.n_nodes or a.r != b.r or a.n_components != b.n_components:
        raise SegmentError("segments live on different grids")


def sup_distance(a, b):
    _check_same_shape(a, b)
    d = np.max(np.abs(a.history_values - b.history_values))
    if a.n_components:
        d = max(d, np.max(np.abs(a.discrete_values - b.discrete_values)))
    return float(d)


def c1_distance(a, b):
    _check_same_shape(a, b)
    return sup_distance(a, b) + float(np.max(np.abs(a.history_slopes - b.history_slopes)))


def is_near_origin(seg, zeta=ORIGIN_ZETA):
    return sup_norm(seg) <= zeta


def in_phase_space(seg, M, L0, rtol=1e-9):
    """Membership in X: ||phi|| < M and slopes bounded by L0 (up to rtol)."""
    return sup_norm(seg) < M and float(np.max(np.abs(seg.history_slopes))) <= L0 * (1 + rtol)


def add(seg, values, slopes, discrete=None):
    """Segment plus a perturbation sampled on the same grid."""
    disc = seg.discrete_values if discrete is None else seg.discrete_values + discrete
    return make_segment(seg.history_values + values, seg.history_slopes + slopes, disc, seg.r)


def resample(seg, nodes):
    """The same interpolant sampled on a grid with ``nodes`` points."""
    s = np.linspace(-seg.r, 0.0, nodes)
    v, d = evaluate_many(seg, s)
    return make_segment(v, d, seg.discrete_values, seg.r)


# ---------------------------------------------------------------- serialization

def to_csv(seg):
    """Columnar CSV (time, value, slope) and a JSON header string."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time", "value", "slope"])
    for t, v, d in zip(seg.history_times, seg.history_values, seg.history_slopes):
        w.writerow([repr(float(t)), repr(float(v)), repr(float(d))])
    header = json.dumps({"r": seg.r, "N": seg.n_components,
                         "discrete_values": [float(x) for x in seg.discrete_values]})
    return buf.getvalue(), header


def from_csv(text, header):
    meta = json.loads(header)
    rows = list(csv.DictReader(io.StringIO(text)))
    values = [float(row["value"]) for row in rows]
    slopes = [float(row["slope"]) for row in rows]
    seg = make_segment(values, slopes, meta.get("discrete_values", []), meta["r"], meta["N"])
    times = np.array([float(row["time"]) for row in rows])
    if not np.allclose(times, seg.history_times, rtol=0, atol=1e-12 * max(1.0, seg.r)):
        raise SegmentError("time column is not the uniform grid on [-r, 0]")
    return seg


def save(seg, path):
    """Write ``path`` (CSV) and ``path + '.json'`` (header)."""
    text, header = to_csv(seg)
    with open(path, "w") as fh:
        fh.write(text)
    with open(str(path) + ".json", "w") as fh:
        fh.write(header)


def load(path):
    with open(path) as fh:
        text = fh.read()
    with open(str(path) + ".json") as fh:
        header = fh.read()
    return from_csv(text, header)
