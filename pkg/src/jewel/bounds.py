"""Closed-form inner and outer bounds on the balanced compatibility region.

For ``g`` POVMs on ``C^d`` with outcome counts ``k`` the region is the set of
noise weights ``s`` under which every such tuple becomes compatible.  Inner
bounds (every set is compatible there) come from asymmetric cloning, the
symmetrised jewel and a comparison with the matrix diamond; outer bounds
come from concrete incompatible families (MUBs, anti-commuting unitaries,
planar qubit observables).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import io
from .errors import ValidationError

BOUNDARY_TOL = 1e-9


def _vec(s):
    s = np.asarray(s, dtype=float).ravel()
    if s.size == 0:
        raise ValidationError("empty weight vector")
    if np.any(s < 0) or np.any(s > 1) or not np.all(np.isfinite(s)):
        raise ValidationError(f"weights must lie in [0, 1], got {s.tolist()}")
    return s


def _shape(k, g):
    k = tuple(int(x) for x in k)
    if len(k) != g:
        raise ValidationError(f"shape {k} has {len(k)} entries, expected {g}")
    if any(x < 2 for x in k):
        raise ValidationError(f"outcome counts must be >= 2, got {k}")
    return k


# ----------------------------------------------------------------------
# Region predicates


def cloning_sides(s, d_eff):
    """Both sides of the cloning inequality in effective dimension ``d_eff``."""
    s = _vec(s)
    g, D = s.size, float(d_eff)
    lhs = (g + D - 1) * (g - D * D + D + (D * D - 1) * s.sum())
    rhs = np.sum(np.sqrt(s * (D * D - 1) + 1)) ** 2
    return float(lhs), float(rhs)


def in_cloning(s, d_eff, tol=BOUNDARY_TOL):
    lhs, rhs = cloning_sides(s, d_eff)
    return lhs <= rhs + tol * max(1.0, abs(rhs))


def in_qc(s, tol=BOUNDARY_TOL):
    return float(np.sum(_vec(s) ** 2)) <= 1 + tol


def in_diamond_scaled(s, k, tol=BOUNDARY_TOL):
    s = _vec(s)
    km = np.asarray(_shape(k, s.size), dtype=float) - 1
    return float(np.sum(km * (s * km ** 2) ** 2)) <= 1 + tol


def mub_pair_mu(lam, d):
    """Largest ``mu`` compatible with ``lam`` for a Fourier-conjugate MUB pair."""
    disc = max(0.0, (1 - d) * lam * lam + (d - 2) * lam + 1)
    return ((d - 2) * (1 - lam) + 2 * math.sqrt(disc)) / d


def _mub_pair_quadratic(lam, mu, d):
    return lam * lam + mu * mu + 2 * (d - 2) / d * (1 - mu) * (1 - lam) - 1


def in_mub_pair(s, d, tol=BOUNDARY_TOL):
    """Explicit form ``mu <= mu(lam)`` cross-checked against the quadratic form."""
    s = _vec(s)
    if s.size != 2:
        raise ValidationError("the MUB-pair region is two-dimensional")
    lam, mu = float(s[0]), float(s[1])
    explicit = mu <= mub_pair_mu(lam, d) + tol
    quadratic = lam + mu <= 1 + tol or _mub_pair_quadratic(lam, mu, d) <= tol
    near = (abs(mu - mub_pair_mu(lam, d)) <= 1e-6 or abs(lam + mu - 1) <= 1e-6)
    if explicit != quadratic and not near:
        raise AssertionError(f"MUB-pair forms disagree at ({lam}, {mu}), d={d}")
    return explicit


def in_zhu_mub(s, tol=BOUNDARY_TOL):
    return in_qc(s, tol)


def in_planar_sum(s, tol=BOUNDARY_TOL):
    s = _vec(s)
    return float(s.sum()) <= 1 / math.sin(math.pi / (2 * s.size)) + tol


REGIONS = ("cloning", "qc", "diamond_scaled", "mub_pair", "zhu_mub", "planar_sum")


def region_contains(name, s, d=None, k=None, d_eff=None, tol=BOUNDARY_TOL):
    """Membership of ``s`` in the named region.

    ``cloning`` uses the effective dimension ``d_eff``, or ``max(k) * d``.
    """
    s = _vec(s)
    if name == "cloning":
        if d_eff is None:
            if d is None or k is None:
                raise ValidationError("cloning needs d_eff or both d and k")
            d_eff = max(_shape(k, s.size)) * int(d)
        return in_cloning(s, d_eff, tol)
    if name == "qc":
        return in_qc(s, tol)
    if name == "diamond_scaled":
        if k is None:
            raise ValidationError("diamond_scaled needs k")
        return in_diamond_scaled(s, k, tol)
    if name == "mub_pair":
        if d is None:
            raise ValidationError("mub_pair needs d")
        return in_mub_pair(s, int(d), tol)
    if name == "zhu_mub":
        return in_zhu_mub(s, tol)
    if name == "planar_sum":
        return in_planar_sum(s, tol)
    raise ValidationError(f"unknown region {name!r}; expected one of {', '.join(REGIONS)}")


def ray_boundary(name, direction, tol=1e-12, **params):
    """Largest ``t <= 1/max(a)`` with ``t * a`` in the region (regions are star-shaped)."""
    a = np.asarray(direction, dtype=float)
    cap = 1.0 / float(np.max(a))

    def inside(t):
        return region_contains(name, np.minimum(t * a, 1.0), tol=0.0, **params)

    if inside(cap):
        return cap
    lo, hi = 0.0, cap
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if inside(mid):
            lo = mid
        else:
            hi = mid
    return lo


# ----------------------------------------------------------------------
# Symmetric values


def cloning_symmetric(g, d, k):
    D = max(k) * d
    return (g + D) / (g * (1 + D))


def symmetrization_point(d, k):
    return tuple(1 / (2 * d * (ki - 1)) for ki in k)


def diamond_qc_point(k):
    n = sum(ki - 1 for ki in k)
    return tuple(1 / ((ki - 1) ** 2 * math.sqrt(n)) for ki in k)


def diamond_qc_symmetric(k):
    return 1 / math.sqrt(sum((ki - 1) ** 5 for ki in k))


def mub_pair_symmetric(d):
    return 0.5 * (1 + 1 / (1 + math.sqrt(d)))


def designolle_symmetric(g, d):
    return (math.sqrt(d) + g) / (g * (math.sqrt(d) + 1))


def planar_symmetric(g):
    return 1 / (g * math.sin(math.pi / (2 * g)))


def prime_power_factors(d):
    out, p = [], 2
    while p * p <= d:
        if d % p == 0:
            q = 1
            while d % p == 0:
                d //= p
                q *= p
            out.append(q)
        p += 1
    if d > 1:
        out.append(d)
    return out


def known_mub_count(d):
    """Number of MUBs known to exist in ``C^d``: ``d + 1`` for prime powers,
    otherwise the tensor-product count ``min p^r + 1`` over prime-power factors."""
    return min(q + 1 for q in prime_power_factors(d))


def qc_applies(g, d):
    return d >= 2 ** math.ceil((g - 1) / 2)


# ----------------------------------------------------------------------
# Report


@dataclass
class Bound:
    name: str
    value: float
    applicable: bool = True
    note: str = ""
    point: tuple = None

    def to_json(self):
        out = {"name": self.name, "value": self.value if self.applicable else None,
               "applicable": self.applicable, "note": self.note}
        if self.point is not None:
            out["point"] = list(self.point)
        return out


@dataclass
class BoundReport:
    g: int
    d: int
    k: tuple
    lower: list = field(default_factory=list)
    upper: list = field(default_factory=list)

    def get(self, name):
        for b in self.lower + self.upper:
            if b.name == name:
                return b
        raise KeyError(name)

    def best_lower(self):
        return max(b.value for b in self.lower if b.applicable)

    def best_upper(self):
        vals = [b.value for b in self.upper if b.applicable]
        return min(vals) if vals else 1.0

    def to_json(self):
        return {"g": self.g, "d": self.d, "k": list(self.k),
                "lower": [b.to_json() for b in self.lower],
                "upper": [b.to_json() for b in self.upper]}

    def dumps(self):
        return io.dumps(self.to_json())

    def table(self):
        rows = [("kind", "bound", "value", "note")]
        for kind, items in (("lower", self.lower), ("upper", self.upper)):
            for b in items:
                value = f"{b.value:.6f}" if b.applicable else "n/a"
                rows.append((kind, b.name, value, b.note))
        widths = [max(len(r[c]) for r in rows) for c in range(3)]
        head = f"g={self.g} d={self.d} k=({','.join(map(str, self.k))})"
        lines = [head]
        for r in rows:
            lines.append("  ".join(r[c].ljust(widths[c]) for c in range(3)) + "  " + r[3])
        return "\n".join(line.rstrip() for line in lines) + "\n"


def report(g, d, k):
    """Every applicable symmetric bound for ``(g, d, k)``; asserts lower <= upper."""
    g, d = int(g), int(d)
    if g < 1 or d < 2:
        raise ValidationError(f"need g >= 1 and d >= 2, got g={g}, d={d}")
    k = _shape(k, g)
    rep = BoundReport(g, d, k)

    rep.lower.append(Bound("cloning_symmetric", cloning_symmetric(g, d, k),
                           note=f"effective dimension max(k)*d = {max(k) * d}"))
    sym = symmetrization_point(d, k)
    rep.lower.append(Bound("symmetrization", min(sym), point=sym,
                           note="1/(2d(k_i-1)); value is the smallest coordinate"))
    rep.lower.append(Bound("diamond_qc_symmetric", diamond_qc_symmetric(k), point=diamond_qc_point(k),
                           note="largest s with (s,...,s) in the scaled QC set"))

    qc_ok = qc_applies(g, d)
    rep.upper.append(Bound("binary_qc", 1 / math.sqrt(g), qc_ok,
                           f"needs d >= 2^ceil((g-1)/2) = {2 ** math.ceil((g - 1) / 2)}"))
    mubs = known_mub_count(d)
    mub_ok = all(ki >= d for ki in k) and g <= mubs
    mub_note = f"needs every k_i >= d and g <= {mubs} MUBs"
    rep.upper.append(Bound("mub_symmetric", designolle_symmetric(g, d), mub_ok, mub_note))
    rep.upper.append(Bound("mub_qc", 1 / math.sqrt(g), mub_ok, mub_note))
    rep.upper.append(Bound("mub_pair_symmetric", mub_pair_symmetric(d), mub_ok and g == 2,
                           "Fourier-conjugate pair; " + mub_note + " and g = 2"))
    rep.upper.append(Bound("planar_symmetric", planar_symmetric(g), d == 2,
                           "qubits only"))

    lo, hi = rep.best_lower(), rep.best_upper()
    if lo > hi + 1e-12:
        raise AssertionError(f"lower bound {lo} exceeds upper bound {hi} for g={g}, d={d}, k={k}")
    return rep
