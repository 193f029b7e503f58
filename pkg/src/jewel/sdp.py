"""Small dense block-diagonal Hermitian semidefinite programs.

Problems are stated in equality standard form::

    minimize (or maximize)   sum_b <C_b, X_b>
    subject to               sum_b <A_{i,b}, X_b> = b_i,   i = 1..m
                             X_b >= 0 for every block b

with the real inner product ``<A, B> = Re tr(A^* B)``.  The dual of the
minimization form is ``max b^T y  s.t.  sum_i y_i A_i + Z = C, Z >= 0``.

The solver is an infeasible-start primal-dual path-following method using
the HKM search direction and Mehrotra's predictor-corrector heuristic.  It
works natively on complex Hermitian blocks, grouping blocks of equal size
into stacked arrays so that the per-iteration work is a handful of batched
numpy calls plus one Schur-complement kernel per group.  Optimal points
are finished with a few Newton steps on the complementarity equations,
which restores full accuracy in the optimizer itself.
"""

import enum
import json
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _kernels
from ._config import solver_tol
from .errors import NumericalError, ValidationError
from .linalg import hermitian_basis, hermitize


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    PRIMAL_INFEASIBLE = "PrimalInfeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class Constraint:
    """``sum_b <terms[b], X_b> = rhs``."""

    terms: dict
    rhs: float


@dataclass
class SdpProblem:
    blocks: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)
    sense: str = "minimize"

    def add_block(self, n):
        if int(n) < 1:
            raise ValidationError(f"block dimension must be positive, got {n}")
        self.blocks.append(int(n))
        return len(self.blocks) - 1

    def set_objective(self, block, C):
        C = np.atleast_2d(np.asarray(C, dtype=complex))
        self._check_shape(block, C)
        self.objective[block] = hermitize(C)

    def add_constraint(self, terms, rhs):
        clean = {}
        for block, A in terms.items():
            A = np.atleast_2d(np.asarray(A, dtype=complex))
            self._check_shape(block, A)
            clean[block] = hermitize(A)
        self.constraints.append(Constraint(clean, float(rhs)))

    def add_matrix_equality(self, terms, rhs):
        """Impose a Hermitian matrix identity as ``n*n`` scalar constraints.

        ``terms`` is a list of ``(block, coeff)``.  A scalar ``coeff`` on a
        block of the same size as ``rhs`` contributes ``coeff * X_block``; a
        matrix ``coeff`` on a 1x1 block contributes ``x_block * coeff``.
        """
        R = hermitize(np.atleast_2d(np.asarray(rhs, dtype=complex)))
        n = R.shape[0]
        basis = hermitian_basis(n)
        for B in basis:
            scalar_terms = {}
            for block, coeff in terms:
                if np.ndim(coeff) == 0:
                    if self.blocks[block] != n:
                        raise ValidationError(
                            f"block {block} has size {self.blocks[block]}, equality has size {n}")
                    contrib = float(np.real(coeff)) * B
                else:
                    if self.blocks[block] != 1:
                        raise ValidationError("matrix coefficients need a 1x1 block")
                    contrib = np.array([[np.vdot(B, coeff).real]])
                if block in scalar_terms:
                    scalar_terms[block] = scalar_terms[block] + contrib
                else:
                    scalar_terms[block] = contrib
            self.constraints.append(Constraint(scalar_terms, float(np.vdot(B, R).real)))

    def _check_shape(self, block, A):
        if not 0 <= block < len(self.blocks):
            raise ValidationError(f"unknown block index {block}")
        n = self.blocks[block]
        if A.shape != (n, n):
            raise ValidationError(f"block {block} expects {n}x{n}, got {A.shape}")

    # Debug dump --------------------------------------------------------

    def to_json(self):
        from .io import encode_matrix

        return {
            "blocks": list(self.blocks),
            "sense": self.sense,
            "objective": {str(b): encode_matrix(C) for b, C in sorted(self.objective.items())},
            "constraints": [
                {"rhs": c.rhs, "terms": {str(b): encode_matrix(A) for b, A in sorted(c.terms.items())}}
                for c in self.constraints
            ],
        }

    @classmethod
    def from_json(cls, data):
        from .io import decode_matrix

        prob = cls(blocks=[int(n) for n in data["blocks"]], sense=data.get("sense", "minimize"))
        for b, C in data.get("objective", {}).items():
            prob.set_objective(int(b), decode_matrix(C))
        for c in data.get("constraints", []):
            prob.add_constraint({int(b): decode_matrix(A) for b, A in c["terms"].items()}, c["rhs"])
        return prob

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass
class SolverOptions:
    eps_gap: float = None
    eps_feas: float = None
    eps_psd: float = 1e-9
    max_iter: int = 200
    step: float = 0.98
    rank_tol: float = 1e-10
    refine: int = 2
    polish: int = 4
    polish_max_dim: int = 900

    def __post_init__(self):
        tol = solver_tol()
        if self.eps_gap is None:
            self.eps_gap = tol
        if self.eps_feas is None:
            self.eps_feas = tol


@dataclass
class SdpSolution:
    status: Status
    X: list
    y: np.ndarray
    Z: list
    primal_value: float
    dual_value: float
    gap: float
    iterations: int
    primal_residual: float = np.nan
    dual_residual: float = np.nan
    certificate: object = None
    dropped: tuple = ()

    @property
    def optimal(self):
        return self.status is Status.OPTIMAL


# ----------------------------------------------------------------------
# Packing: blocks grouped by size into dense stacked arrays


class _Packed:
    def __init__(self, problem, sign):
        self.blocks = list(problem.blocks)
        m = len(problem.constraints)
        self.m = m
        sizes = sorted(set(self.blocks))
        self.groups = []
        self.where = {}
        for n in sizes:
            idx = [b for b, nb in enumerate(self.blocks) if nb == n]
            for pos, b in enumerate(idx):
                self.where[b] = (len(self.groups), pos)
            self.groups.append((n, np.array(idx)))
        self.A = [np.zeros((m, len(idx), n, n), dtype=complex) for n, idx in self.groups]
        self.C = [np.zeros((len(idx), n, n), dtype=complex) for n, idx in self.groups]
        for i, con in enumerate(problem.constraints):
            for b, Ab in con.terms.items():
                g, pos = self.where[b]
                self.A[g][i, pos] = Ab
        for b, Cb in problem.objective.items():
            g, pos = self.where[b]
            self.C[g][pos] = sign * Cb
        self.b = np.array([c.rhs for c in problem.constraints], dtype=float)
        self._flatten()

    def _flatten(self):
        self.Aflat = [Ag.reshape(self.m, -1) for Ag in self.A]

    def restrict(self, rows):
        self.A = [Ag[rows] for Ag in self.A]
        self.b = self.b[rows]
        self.m = len(rows)
        self._flatten()

    def real_matrix(self):
        parts = []
        for Af in self.Aflat:
            parts.append(Af.real)
            parts.append(Af.imag)
        if not parts:
            return np.zeros((self.m, 0))
        return np.hstack(parts)

    def op(self, X):
        out = np.zeros(self.m)
        for Af, Xg in zip(self.Aflat, X):
            out += (Af @ Xg.reshape(-1).conj()).real
        return out

    def adj(self, y):
        return [(y @ Af).reshape(Ag.shape[1:]) for Af, Ag in zip(self.Aflat, self.A)]

    def unpack(self, groups_list):
        out = [None] * len(self.blocks)
        for (n, idx), G in zip(self.groups, groups_list):
            for pos, b in enumerate(idx):
                out[b] = G[pos].copy()
        return out


def _inner(U, V):
    return float(sum(np.vdot(u, v).real for u, v in zip(U, V)))


def _sym(Y):
    return (Y + np.conj(np.swapaxes(Y, -1, -2))) / 2


def _eye_stack(nb, n, scale):
    return np.broadcast_to(np.eye(n, dtype=complex) * scale, (nb, n, n)).copy()


def _max_step(L, D):
    """Largest alpha with L L^* + alpha D >= 0 (inf when D >= 0)."""
    Linv = np.linalg.inv(L)
    T = Linv @ D @ np.conj(np.swapaxes(Linv, -1, -2))
    lam = np.linalg.eigvalsh(_sym(T))[..., 0].min()
    if lam >= 0:
        return np.inf
    return -1.0 / lam


def _independent_rows(P, rank_tol):
    """Rows of the constraint system kept after rank-revealing QR.

    Returns ``(rows, ray)`` where ``ray`` is a Farkas vector when the
    equality system is inconsistent.
    """
    F = P.real_matrix()
    if P.m == 0:
        return np.arange(0), None
    if F.shape[1] == 0:
        rows = np.arange(0)
    else:
        _, R, piv = scipy.linalg.qr(F.T, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        if diag.size == 0 or diag[0] == 0:
            rank = 0
        else:
            rank = int(np.sum(diag > rank_tol * diag[0]))
        rows = np.sort(piv[:rank])
    if len(rows) < P.m:
        if len(rows):
            coef, *_ = np.linalg.lstsq(F[rows].T, F.T, rcond=None)
            # Dependent rows must carry consistent right-hand sides.
            resid = P.b - coef.T @ P.b[rows]
        else:
            resid = P.b.copy()
        if np.max(np.abs(resid)) > 1e-9 * (1 + np.max(np.abs(P.b))):
            xs, *_ = np.linalg.lstsq(F, P.b, rcond=None)
            ray = P.b - F @ xs
            return rows, ray
    return rows, None


def _initial_point(P):
    X, Z = [], []
    bmax = np.abs(P.b)
    for (n, idx), Ag, Cg in zip(P.groups, P.A, P.C):
        nb = len(idx)
        Xg = np.empty((nb, n, n), dtype=complex)
        Zg = np.empty((nb, n, n), dtype=complex)
        for pos in range(nb):
            if P.m:
                normA = np.sqrt(np.sum(np.abs(Ag[:, pos]) ** 2, axis=(1, 2)))
                xi = max(10.0, np.sqrt(n), n * np.max((1 + bmax) / (1 + normA)))
                eta = max(10.0, np.sqrt(n), np.max(normA), np.linalg.norm(Cg[pos]))
            else:
                xi = eta = max(10.0, np.sqrt(n), np.linalg.norm(Cg[pos]))
            Xg[pos] = np.eye(n) * xi
            Zg[pos] = np.eye(n) * eta
        X.append(Xg)
        Z.append(Zg)
    return X, Z


def _ipm(P, opts):
    X, Z = _initial_point(P)
    y = np.zeros(P.m)
    ntot = sum(n * len(idx) for n, idx in P.groups)
    gamma = opts.step
    status = Status.MAX_ITERATIONS
    cert = None
    it = 0
    pinf = dinf = np.inf
    best_ray = None
    prep = [_kernels.schur_prepare(Ag) for Ag in P.A]
    F = P.real_matrix()
    gram = _factor(F @ F.T) if P.m else None
    for it in range(opts.max_iter + 1):
        rp = P.b - P.op(X)
        ATy = P.adj(y)
        Rd = [Cg - Zg - Ag for Cg, Zg, Ag in zip(P.C, Z, ATy)]
        pobj = _inner(P.C, X)
        dobj = float(P.b @ y)
        mu = _inner(X, Z) / ntot
        pinf = float(np.max(np.abs(rp))) if P.m else 0.0
        dinf = max((float(np.max(np.abs(R))) for R in Rd), default=0.0)
        if (pinf <= opts.eps_feas and dinf <= opts.eps_feas
                and abs(pobj - dobj) <= opts.eps_gap * (1 + abs(pobj))):
            status = Status.OPTIMAL
            break
        # Infeasibility rays.
        if dobj > 0:
            ray = y / dobj
            lam = max((np.linalg.eigvalsh(_sym(G))[..., -1].max() for G in P.adj(ray)), default=0.0)
            if lam <= opts.eps_feas * 1e-1:
                status, cert = Status.PRIMAL_INFEASIBLE, ray
                break
            if best_ray is None or lam < best_ray[0]:
                best_ray = (lam, ray)
        if pobj < 0:
            rayX = [G / (-pobj) for G in X]
            if np.max(np.abs(P.op(rayX)), initial=0.0) <= opts.eps_feas * 1e-1:
                status, cert = Status.UNBOUNDED, rayX
                break
        if it == opts.max_iter:
            break
        try:
            LX = [np.linalg.cholesky(Xg) for Xg in X]
            LZ = [np.linalg.cholesky(Zg) for Zg in Z]
            Zinv = [_sym(np.linalg.inv(Zg)) for Zg in Z]
            M = np.zeros((P.m, P.m))
            for pg, Xg, Zig in zip(prep, X, Zinv):
                M += _kernels.schur_complement(pg, Xg, Zig)
            M = (M + M.T) / 2
            solve_M = _factor(M)
        except (np.linalg.LinAlgError, NumericalError) as exc:
            return _salvage(P, X, y, Z, it, str(exc), best_ray, opts)

        XRdZ = [_sym(Xg @ Rg @ Zig) for Xg, Rg, Zig in zip(X, Rd, Zinv)]

        def direction(R):
            Q = [Rg - Sg for Rg, Sg in zip(R, XRdZ)]
            dy = solve_M(rp - P.op(Q))
            for _ in range(opts.refine + 1):
                dZ = [Rg - Ag for Rg, Ag in zip(Rd, P.adj(dy))]
                dX = [Rg - _sym(Xg @ dZg @ Zig) for Rg, Xg, dZg, Zig in zip(R, X, dZ, Zinv)]
                # Refine dy against the explicit map so A(dX) = rp holds even
                # when the Schur matrix is badly conditioned near the optimum.
                r = rp - P.op(dX)
                if not P.m or np.max(np.abs(r)) <= 1e-15 * (1 + np.max(np.abs(P.b))):
                    break
                dy = dy + solve_M(r)
            else:
                # Still off: project dX onto A(dX) = rp with the well-conditioned
                # Gram matrix of the constraints; dual feasibility is unaffected.
                w = gram(rp - P.op(dX))
                dX = [Dg + Ag for Dg, Ag in zip(dX, P.adj(w))]
            return dX, dy, dZ

        dXa, dya, dZa = direction([-Xg for Xg in X])
        ap = min(1.0, min(_max_step(L, D) for L, D in zip(LX, dXa)))
        ad = min(1.0, min(_max_step(L, D) for L, D in zip(LZ, dZa)))
        mu_aff = _inner([Xg + ap * D for Xg, D in zip(X, dXa)],
                        [Zg + ad * D for Zg, D in zip(Z, dZa)]) / ntot
        sigma = min(1.0, max(0.0, mu_aff / mu) ** 3) if mu > 0 else 0.0
        R = [sigma * mu * Zig - Xg - _sym(dXg @ dZg @ Zig)
             for Zig, Xg, dXg, dZg in zip(Zinv, X, dXa, dZa)]
        dX, dy, dZ = direction(R)
        ap = min(1.0, gamma * min(_max_step(L, D) for L, D in zip(LX, dX)))
        ad = min(1.0, gamma * min(_max_step(L, D) for L, D in zip(LZ, dZ)))
        if not (np.isfinite(ap) and np.isfinite(ad)) or max(ap, ad) < 1e-12:
            return _salvage(P, X, y, Z, it, "step length collapsed", best_ray, opts)
        X = [_sym(Xg + ap * D) for Xg, D in zip(X, dX)]
        y = y + ad * dy
        Z = [_sym(Zg + ad * D) for Zg, D in zip(Z, dZ)]
    return X, y, Z, status, it, cert, None


def _salvage(P, X, y, Z, it, msg, best_ray, opts):
    # Breakdown right at the optimum: the gap is closed but the dual residual
    # drifted.  Newton polishing restores an exactly dual feasible point.
    pobj, dobj = _inner(P.C, X), float(P.b @ y)
    pinf = float(np.max(np.abs(P.b - P.op(X)), initial=0.0))
    if pinf <= opts.eps_feas and abs(pobj - dobj) <= 1e2 * opts.eps_gap * (1 + abs(pobj)):
        polished = _polish(P, X, y, opts)
        if polished is not None:
            Xp, yp, Zp = polished
            pp, dp = _inner(P.C, Xp), float(P.b @ yp)
            if (np.max(np.abs(P.b - P.op(Xp)), initial=0.0) <= opts.eps_feas
                    and abs(pp - dp) <= opts.eps_gap * (1 + abs(pp))):
                return Xp, yp, Zp, Status.OPTIMAL, it, None, None
        # Otherwise the recomputed slack may already be PSD, which makes the
        # pair primal-dual feasible with the gap closed.
        Zr = [_sym(Cg - Ag) for Cg, Ag in zip(P.C, P.adj(y))]
        psd = opts.eps_psd * (1.0 + max(float(np.max(np.abs(G))) for G in Zr))
        if (abs(pobj - dobj) <= opts.eps_gap * (1 + abs(pobj))
                and all(np.linalg.eigvalsh(G)[..., 0].min() >= -psd for G in Zr)):
            return X, y, Zr, Status.OPTIMAL, it, None, None
    # Iterates on a nearly infeasible (or unbounded) problem diverge along the
    # certificate until the linear algebra breaks; the best ray seen so far
    # often already passes the checks done on the original data.
    if best_ray is not None:
        return X, y, Z, Status.PRIMAL_INFEASIBLE, it, best_ray[1], msg
    pobj = _inner(P.C, X)
    if pobj < 0:
        return X, y, Z, Status.UNBOUNDED, it, [G / (-pobj) for G in X], msg
    return X, y, Z, Status.NUMERICAL_FAILURE, it, None, msg


def _coords(B, H):
    # real coordinates of Hermitian H (..., n, n) in the orthonormal basis B
    return np.einsum("kpq,...pq->...k", B.conj(), H).real


def _kkt_residual(P, X, y, Z):
    rp = P.b - P.op(X)
    comp = [_sym(Xg @ Zg) for Xg, Zg in zip(X, Z)]
    return max(np.max(np.abs(rp), initial=0.0),
               max((float(np.max(np.abs(Cg), initial=0.0)) for Cg in comp), default=0.0))


def _polish(P, X, y, opts):
    """Newton steps on A(X) = b, Z = C - A*(y), XZ + ZX = 0 from a near-optimal point.

    Path-following stops with X accurate only to about sqrt(mu) in the
    directions coupling its range and kernel.  At a nondegenerate solution
    this system has a nonsingular Jacobian, so a few full steps converge
    quadratically.  Returns None when the steps do not clearly help.
    """
    dims = [len(idx) * n * n for n, idx in P.groups]
    N = sum(dims) + P.m
    if N > opts.polish_max_dim or P.m == 0:
        return None
    bases = [hermitian_basis(n) for n, _ in P.groups]

    def dual(y):
        return [Cg - Ag for Cg, Ag in zip(P.C, P.adj(y))]

    Z = dual(y)
    start = res = _kkt_residual(P, X, y, Z)
    scale = 1.0 + max(float(np.max(np.abs(Xg))) for Xg in X)
    for _ in range(opts.polish):
        J = np.zeros((N, N))
        rhs = np.zeros(N)
        rhs[:P.m] = P.b - P.op(X)
        col = row = 0
        for B, Xg, Zg, Ag, d in zip(bases, X, Z, P.A, dims):
            nb, k = len(Xg), len(B)
            # primal rows: <A_i, B_k> per block
            J[:P.m, col:col + d] = _coords(B, Ag).reshape(P.m, d)
            BZ = np.einsum("kpq,jqr->jkpr", B, Zg)
            LZ = _coords(B, BZ + np.conj(np.swapaxes(BZ, -1, -2)))  # (nb, k_in, k_out)
            XA = np.einsum("jpq,ijqr->ijpr", Xg, Ag)
            LX = _coords(B, XA + np.conj(np.swapaxes(XA, -1, -2)))  # (m, nb, k_out)
            r0 = P.m + row
            for j in range(nb):
                J[r0 + j * k:r0 + (j + 1) * k, col + j * k:col + (j + 1) * k] = LZ[j].T
            J[r0:r0 + d, N - P.m:] = -LX.reshape(P.m, d).T
            XZ = Xg @ Zg
            rhs[r0:r0 + d] = -_coords(B, XZ + np.conj(np.swapaxes(XZ, -1, -2))).reshape(d)
            col += d
            row += d
        try:
            step = np.linalg.solve(J, rhs)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)):
            return None
        col = 0
        Xn = []
        for B, Xg, d in zip(bases, X, dims):
            dX = np.einsum("jk,kpq->jpq", step[col:col + d].reshape(len(Xg), len(B)), B)
            Xn.append(_sym(Xg + dX))
            col += d
        yn = y + step[N - P.m:]
        Zn = dual(yn)
        new = _kkt_residual(P, Xn, yn, Zn)
        if not new < res:
            break
        X, y, Z, res = Xn, yn, Zn, new
        if res <= 1e-15 * scale:
            break
    if not res <= 1e-3 * start:
        return None
    psd = opts.eps_psd * scale
    if any(np.linalg.eigvalsh(G)[..., 0].min() < -psd for G in list(X) + list(Z)):
        return None
    return X, y, Z


def _factor(M):
    if M.size == 0:
        return lambda r: np.zeros(0)
    try:
        cf = scipy.linalg.cho_factor(M, check_finite=True)
        return lambda r: scipy.linalg.cho_solve(cf, r)
    except (np.linalg.LinAlgError, ValueError):
        pass
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu = scipy.linalg.lu_factor(M)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"Schur complement factorization failed: {exc}") from exc
    if not np.all(np.isfinite(lu[0])) or np.min(np.abs(np.diag(lu[0]))) == 0:
        raise NumericalError("singular Schur complement")
    return lambda r: scipy.linalg.lu_solve(lu, r)


def solve(problem, options=None):
    """Solve ``problem``; never raises for solver-side outcomes, see ``status``."""
    opts = options or SolverOptions()
    if problem.sense not in ("minimize", "maximize"):
        raise ValidationError(f"unknown sense {problem.sense!r}")
    sign = 1.0 if problem.sense == "minimize" else -1.0
    P = _Packed(problem, sign)
    m_full = P.m
    rows, ray = _independent_rows(P, opts.rank_tol)
    if ray is not None:
        y = sign * ray
        cert = ray
        sol = SdpSolution(Status.PRIMAL_INFEASIBLE, [], y, [], np.nan, np.nan, np.nan, 0,
                          certificate=cert)
        if not farkas_holds(problem, cert):
            sol.status = Status.NUMERICAL_FAILURE
        return sol
    dropped = tuple(sorted(set(range(m_full)) - set(rows.tolist())))
    P.restrict(rows)
    X, y, Z, status, it, cert, msg = _ipm(P, opts)
    if status is Status.OPTIMAL and opts.polish:
        polished = _polish(P, X, y, opts)
        if polished is not None:
            X, y, Z = polished

    y_full = np.zeros(m_full)
    y_full[rows] = y
    Xb = P.unpack(X)
    Zb = P.unpack(Z)
    pobj = sign * _inner(P.C, X)
    dobj = sign * float(P.b @ y)
    rp_full = np.array([c.rhs for c in problem.constraints]) - _apply(problem, Xb)
    dres = max((float(np.max(np.abs(R))) for R in
                (Cg - Zg - Ag for Cg, Zg, Ag in zip(P.C, Z, P.adj(y)))), default=0.0)
    sol = SdpSolution(
        status=status,
        X=Xb,
        y=sign * y_full,
        Z=Zb,
        primal_value=pobj,
        dual_value=dobj,
        gap=pobj - dobj,
        iterations=it,
        primal_residual=float(np.max(np.abs(rp_full))) if m_full else 0.0,
        dual_residual=dres,
        dropped=dropped,
    )
    if status is Status.PRIMAL_INFEASIBLE:
        full = np.zeros(m_full)
        full[rows] = cert
        sol.certificate = full
        if not farkas_holds(problem, full):
            sol.status = Status.NUMERICAL_FAILURE
    elif status is Status.UNBOUNDED:
        sol.certificate = P.unpack(cert)
        if not unbounded_ray_holds(problem, sol.certificate):
            sol.status = Status.NUMERICAL_FAILURE
    if msg and sol.status is Status.NUMERICAL_FAILURE:
        sol.certificate = msg
    return sol


def _apply(problem, X):
    out = np.zeros(len(problem.constraints))
    for i, con in enumerate(problem.constraints):
        out[i] = sum(np.vdot(A, X[b]).real for b, A in con.terms.items())
    return out


def _adjoint(problem, y):
    out = [np.zeros((n, n), dtype=complex) for n in problem.blocks]
    for yi, con in zip(y, problem.constraints):
        for b, A in con.terms.items():
            out[b] = out[b] + yi * A
    return out


def farkas_holds(problem, y, tol=1e-7):
    """Check ``sum y_i A_i <= 0`` with ``b^T y > 0`` on the original data."""
    y = np.asarray(y, dtype=float)
    b = np.array([c.rhs for c in problem.constraints])
    by = float(b @ y)
    if not by > 0:
        return False
    lam = max((np.linalg.eigvalsh(G)[-1] for G in _adjoint(problem, y)), default=0.0)
    return lam <= tol * by


def unbounded_ray_holds(problem, X, tol=1e-7):
    """Check ``X >= 0``, ``A(X) = 0`` and an improving objective direction."""
    sign = 1.0 if problem.sense == "minimize" else -1.0
    cx = sign * sum(np.vdot(C, X[b]).real for b, C in problem.objective.items())
    if not cx < 0:
        return False
    scale = -cx
    if any(np.linalg.eigvalsh(G)[0] < -tol * scale for G in X):
        return False
    return np.max(np.abs(_apply(problem, X)), initial=0.0) <= tol * scale


# ----------------------------------------------------------------------
# Max-margin phase I


@dataclass
class MarginResult:
    margin: float
    X: list
    solution: SdpSolution


def max_margin(blocks, constraints, options=None):
    """Largest ``t`` such that some ``X`` meets the equalities with ``X_b - tI >= 0``.

    ``constraints`` use the same :class:`Constraint` format as :class:`SdpProblem`
    and range over PSD blocks of sizes ``blocks``.  A non-negative margin
    means the PSD feasibility problem is feasible.

    Internally ``X_b = S_b + t I`` and ``t = tau + t0 - 1`` with ``tau >= 0``,
    where ``t0`` is the smallest eigenvalue of the least-norm affine solution;
    ``t0`` is a valid lower bound on the margin, so the shift loses nothing
    and both primal and dual keep strictly feasible points.
    """
    blocks = [int(n) for n in blocks]
    x0 = _least_norm_point(blocks, constraints)
    t0 = min(np.linalg.eigvalsh(Xb)[0] for Xb in x0)
    shift = t0 - 1.0

    prob = SdpProblem(sense="maximize")
    for n in blocks:
        prob.add_block(n)
    tau = prob.add_block(1)
    prob.set_objective(tau, [[1.0]])
    for con in constraints:
        traces = sum(np.trace(A).real for A in con.terms.values())
        terms = dict(con.terms)
        terms[tau] = [[traces]]
        prob.constraints.append(Constraint(
            {b: np.atleast_2d(np.asarray(A, dtype=complex)) for b, A in terms.items()},
            con.rhs - shift * traces))
    sol = solve(prob, options)
    if sol.status is Status.UNBOUNDED:
        raise ValidationError("margin is unbounded: the equalities do not pin the total trace")
    if sol.status is not Status.OPTIMAL:
        raise NumericalError(f"max-margin solve ended with status {sol.status.value}", sol)
    t = sol.primal_value + shift
    X = [sol.X[b] + t * np.eye(n) for b, n in enumerate(blocks)]
    return MarginResult(margin=float(t), X=X, solution=sol)


def _least_norm_point(blocks, constraints):
    bases = [hermitian_basis(n) for n in blocks]
    offsets = np.cumsum([0] + [n * n for n in blocks])
    F = np.zeros((len(constraints), offsets[-1]))
    rhs = np.array([c.rhs for c in constraints], dtype=float)
    for i, con in enumerate(constraints):
        for b, A in con.terms.items():
            A = np.asarray(A, dtype=complex)
            F[i, offsets[b]:offsets[b + 1]] = np.einsum("kpq,pq->k", bases[b].conj(), A).real
    coef, *_ = np.linalg.lstsq(F, rhs, rcond=None)
    if len(rhs) and np.max(np.abs(F @ coef - rhs)) > 1e-8 * (1 + np.max(np.abs(rhs))):
        raise ValidationError("equality system is inconsistent")
    return [np.tensordot(coef[offsets[b]:offsets[b + 1]], bases[b], axes=1)
            for b in range(len(blocks))]
