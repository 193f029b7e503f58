"""Sampling the boundary of a set's compatibility region along rays."""

import csv
import io as _io
from dataclasses import dataclass, field

import numpy as np

from . import bounds, compat
from .errors import NumericalError


def sample_directions(g, n, rng):
    """``g`` axes, the diagonal, then ``n`` uniform unit vectors in the positive orthant."""
    dirs = [np.eye(g)[i] for i in range(g)]
    dirs.append(np.ones(g) / np.sqrt(g))
    for _ in range(n):
        v = np.abs(rng.standard_normal(g))
        while not np.all(v > 0):
            v = np.abs(rng.standard_normal(g))
        dirs.append(v / np.linalg.norm(v))
    kinds = ["axis"] * g + ["symmetric"] + ["random"] * n
    return kinds, np.array(dirs)


@dataclass
class ScanRow:
    index: int
    kind: str
    direction: np.ndarray
    t: float
    status: str
    bounds: dict


@dataclass
class RegionScan:
    kind: str
    seed: int
    dim: int
    shape: tuple
    rows: list = field(default_factory=list)
    bound_names: tuple = ()

    def to_csv(self):
        g = len(self.shape)
        buf = _io.StringIO()
        buf.write(f"# seed={self.seed} model={self.kind} d={self.dim} "
                  f"k={','.join(map(str, self.shape))}\n")
        w = csv.writer(buf, lineterminator="\n")
        head = ["index", "kind"] + [f"a{i + 1}" for i in range(g)] + ["t"]
        head += [f"s{i + 1}" for i in range(g)] + ["status"]
        head += [f"{name}_t" for name in self.bound_names]
        w.writerow(head)
        for r in self.rows:
            fmt = "%.17g"
            line = [r.index, r.kind] + [fmt % x for x in r.direction]
            if np.isfinite(r.t):
                line += [fmt % r.t] + [fmt % (r.t * x) for x in r.direction]
            else:
                line += [""] * (g + 1)
            line.append(r.status)
            line += ["" if r.bounds.get(n) is None else fmt % r.bounds[n] for n in self.bound_names]
            w.writerow(line)
        return buf.getvalue()


def _bound_params(mset):
    """Region predicates that apply to every set of this dimension and shape."""
    d, k, g = mset.dim, mset.shape, mset.g
    out = {"cloning": {"d": d, "k": k}, "diamond_scaled": {"k": k}}
    mub_ok = all(ki >= d for ki in k) and g <= bounds.known_mub_count(d)
    if bounds.qc_applies(g, d) or mub_ok:
        out["qc"] = {}
    if d == 2:
        out["planar_sum"] = {}
    return out


def region_scan(mset, kind, n_directions, seed, options=None):
    """Robustness of ``mset`` along ``n_directions + g + 1`` rays, with bound columns."""
    rng = np.random.default_rng(seed)
    kinds, dirs = sample_directions(mset.g, n_directions, rng)
    params = _bound_params(mset)
    scan = RegionScan(kind=kind, seed=seed, dim=mset.dim, shape=mset.shape,
                      bound_names=tuple(params))
    for idx, (label, a) in enumerate(zip(kinds, dirs)):
        try:
            t = compat.robustness(mset, kind, a, options).t
            status = "Optimal"
        except NumericalError as exc:
            t = np.nan
            status = exc.solution.status.value if exc.solution is not None else "NumericalFailure"
        row_bounds = {name: bounds.ray_boundary(name, a, **p) for name, p in params.items()}
        scan.rows.append(ScanRow(idx, label, a, t, status, row_bounds))
    return scan
