"""Joint measurability, noise robustness and the Zhu incompatibility criterion.

A joint POVM for a set of shape ``(k_1, ..., k_g)`` has one effect ``G_eta``
per multi-index ``eta`` in ``[k_1] x ... x [k_g]``, linearised row-major
(``numpy.ravel_multi_index`` order).  Every question here is posed as a
single SDP over those blocks.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from . import io, sdp
from .errors import NumericalError, ValidationError
from .linalg import hermitian_basis, vectorize
from .povm import BALANCED, LINEAR, MeasurementSet, Povm, noise_base, require_valid

MARGIN_TOL = 1e-7
MARGINAL_TOL = 1e-7


def joint_indices(shape):
    return list(itertools.product(*(range(k) for k in shape)))


def marginal(joint_effects, shape, i, j):
    """``sum_{eta : eta_i = j} G_eta`` for a stacked joint POVM."""
    G = np.asarray(joint_effects).reshape(tuple(shape) + joint_effects.shape[-2:])
    return np.take(G, j, axis=i).reshape((-1,) + joint_effects.shape[-2:]).sum(axis=0)


def marginal_error(joint_effects, mset):
    worst = 0.0
    for i, p in enumerate(mset):
        for j in range(p.k):
            err = np.linalg.norm(marginal(joint_effects, mset.shape, i, j) - p.effects[j])
            worst = max(worst, float(err))
    return worst


def _matrix_constraints(terms, rhs):
    """Scalar constraints ``sum_b coeff_b <B, X_b> = <B, rhs>`` over a Hermitian basis."""
    R = np.asarray(rhs, dtype=complex)
    out = []
    for B in hermitian_basis(R.shape[0]):
        con = {}
        for block, coeff in terms:
            con[block] = con.get(block, 0) + coeff * B
        out.append(sdp.Constraint(con, float(np.vdot(B, R).real)))
    return out


def _joint_constraints(shape, d, targets):
    """Normalisation plus all but the last marginal of every POVM.

    ``targets[i][j]`` is the right-hand side for outcome ``j`` of POVM ``i``;
    the last outcome of each POVM is implied by normalisation.
    """
    index = joint_indices(shape)
    cons = _matrix_constraints([(b, 1.0) for b in range(len(index))], np.eye(d))
    for i, k in enumerate(shape):
        for j in range(k - 1):
            blocks = [b for b, eta in enumerate(index) if eta[i] == j]
            cons += _matrix_constraints([(b, 1.0) for b in blocks], targets[i][j])
    return cons


@dataclass
class CompatVerdict:
    compatible: bool
    margin: float
    joint: Povm = None
    certificate: object = None
    shape: tuple = ()

    def to_json(self, emit_joint=False):
        out = {"compatible": bool(self.compatible), "margin": float(self.margin),
               "shape": list(self.shape)}
        if emit_joint and self.joint is not None:
            out["joint"] = self.joint.to_json()
        return out


def joint_feasibility(mset, tol=MARGIN_TOL, options=None):
    """Decide joint measurability through the max-margin feasibility SDP."""
    require_valid(mset)
    d, shape = mset.dim, mset.shape
    targets = [p.effects for p in mset]
    cons = _joint_constraints(shape, d, targets)
    n_blocks = int(np.prod(shape))
    try:
        res = sdp.max_margin([d] * n_blocks, cons, options)
    except NumericalError as exc:
        raise NumericalError(f"joint-measurability SDP failed for shape {shape}: {exc}",
                             exc.solution) from exc
    joint = np.array(res.X)
    err = marginal_error(joint, mset)
    if err > MARGINAL_TOL:
        raise NumericalError(f"joint POVM marginals deviate by {err:.3g}", res.solution)
    compatible = res.margin >= -tol
    return CompatVerdict(
        compatible=compatible,
        margin=res.margin,
        joint=Povm(joint) if compatible else None,
        certificate=None if compatible else res.solution.y,
        shape=shape,
    )


# ----------------------------------------------------------------------
# Robustness


@dataclass
class RobustnessResult:
    t: float
    cap: float
    direction: tuple
    kind: str
    joint: Povm = None
    solution: object = None

    @property
    def weights(self):
        return tuple(self.t * a for a in self.direction)

    def to_json(self):
        return {"t": self.t, "cap": self.cap, "direction": list(self.direction),
                "kind": self.kind, "weights": list(self.weights)}


def _check_direction(mset, direction):
    a = np.ones(mset.g) if direction is None else np.asarray(direction, dtype=float).ravel()
    if a.shape != (mset.g,):
        raise ValidationError(f"direction has {a.size} entries for {mset.g} POVMs")
    # Zero entries are allowed: that POVM is fully noised along the ray.
    if not np.all(np.isfinite(a)) or np.any(a < 0) or not np.any(a > 0):
        raise ValidationError("direction must be non-negative with a positive entry")
    return a


def _drop_zero_effects(p, tol=1e-12):
    keep = [j for j in range(p.k) if np.max(np.abs(p.effects[j])) > tol]
    return Povm(p.effects[keep]) if len(keep) < p.k else p


def robustness(mset, kind=BALANCED, direction=None, options=None):
    """Largest ``t <= 1/max(a)`` with the set compatible at noise weights ``t * a``.

    Solved as one SDP: the marginal equalities are affine in ``t``,
    ``marginal_ij = base_ij + t a_i (E_ij - base_ij)``.
    """
    if kind not in (BALANCED, LINEAR):
        raise ValidationError(f"noise kind must be 'balanced' or 'linear', got {kind!r}")
    require_valid(mset)
    a = _check_direction(mset, direction)
    if kind == LINEAR:
        # Zero effects stay zero under linear noise; dropping them keeps a
        # strictly feasible joint POVM available to the solver.
        mset = MeasurementSet(tuple(_drop_zero_effects(p) for p in mset))
    cap = 1.0 / float(np.max(a))
    d, shape = mset.dim, mset.shape
    index = joint_indices(shape)
    nj = len(index)

    prob = sdp.SdpProblem(sense="maximize")
    for _ in range(nj):
        prob.add_block(d)
    t_blk = prob.add_block(1)
    u_blk = prob.add_block(1)
    prob.set_objective(t_blk, [[1.0]])
    prob.add_constraint({t_blk: [[1.0]], u_blk: [[1.0]]}, cap)
    prob.add_matrix_equality([(b, 1.0) for b in range(nj)], np.eye(d))
    for i, p in enumerate(mset):
        base = noise_base(p, kind)
        for j in range(p.k - 1):
            blocks = [b for b, eta in enumerate(index) if eta[i] == j]
            terms = [(b, 1.0) for b in blocks]
            terms.append((t_blk, -a[i] * (p.effects[j] - base[j])))
            prob.add_matrix_equality(terms, base[j])
    sol = sdp.solve(prob, options)
    if not sol.optimal:
        raise NumericalError(f"robustness SDP ended with status {sol.status.value}", sol)
    t = float(min(max(sol.primal_value, 0.0), cap))
    return RobustnessResult(t=t, cap=cap, direction=tuple(float(x) for x in a), kind=kind,
                            joint=Povm(np.array(sol.X[:nj])), solution=sol)


def robustness_bisection(mset, kind=BALANCED, direction=None, tol=1e-6, options=None):
    """Reference value of :func:`robustness` by bisection on :func:`joint_feasibility`."""
    from .povm import NoiseModel, apply_noise

    require_valid(mset)
    a = _check_direction(mset, direction)
    cap = 1.0 / float(np.max(a))

    def feasible(t):
        noisy = apply_noise(mset, NoiseModel(kind, tuple(np.minimum(t * a, 1.0))))
        return joint_feasibility(noisy, options=options).compatible

    if feasible(cap):
        return cap
    lo, hi = 0.0, cap
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


# ----------------------------------------------------------------------
# Zhu criterion


def gbar(E):
    """``|E°><E°| / tr E`` with ``E° = E - tr(E) I/d``; the zero matrix maps to zero."""
    E = np.asarray(E, dtype=complex)
    d = E.shape[0]
    tr = float(np.trace(E).real)
    if tr < -1e-12:
        raise ValidationError(f"effect has negative trace {tr:.3g}")
    if tr <= 1e-12:
        return np.zeros((d * d, d * d), dtype=complex)
    v = vectorize(E - tr * np.eye(d) / d)
    return np.outer(v, v.conj()) / tr


def gbar_povm(p):
    return sum(gbar(E) for E in p.effects)


@dataclass
class ZhuResult:
    value: float
    incompatible_certified: bool
    dim: int

    def to_json(self):
        return {"value": self.value, "incompatible_certified": bool(self.incompatible_certified),
                "bound": self.dim - 1}


def zhu_check(mset, tol=1e-6, options=None):
    """``min tr H`` over ``H >= Gbar(E^(i))`` for every POVM.

    Solved through its dual ``max sum_i <Gbar_i, Y_i>`` subject to
    ``sum_i Y_i = I``, ``Y_i >= 0``.  Compatible sets satisfy
    ``1 + value <= d``; exceeding it certifies incompatibility.
    """
    require_valid(mset)
    d = mset.dim
    prob = sdp.SdpProblem(sense="maximize")
    for p in mset:
        b = prob.add_block(d * d)
        prob.set_objective(b, gbar_povm(p))
    prob.add_matrix_equality([(b, 1.0) for b in range(mset.g)], np.eye(d * d))
    sol = sdp.solve(prob, options)
    if not sol.optimal:
        raise NumericalError(f"Zhu SDP ended with status {sol.status.value}", sol)
    value = float(sol.primal_value)
    return ZhuResult(value=value, incompatible_certified=1 + value > d + tol, dim=d)


def verdict_dumps(verdict, emit_joint=False):
    return io.dumps(verdict.to_json(emit_joint))
