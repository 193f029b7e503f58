"""Incompatibility witnesses and their SDP relaxation.

A candidate of shape ``(k_1, ..., k_g)`` is a list of ``sum(k_s - 1)``
Hermitian ``n x n`` blocks ``X_{s,j}``.  It is a witness when it lies in the
matrix jewel; a witness certifies incompatibility of a POVM set whenever
``sum (2 E_sj - (2/k_s) I) (x) X_sj`` has an eigenvalue above one.
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import io, sdp, spectra
from .errors import NumericalError, ValidationError
from .linalg import SIGMA_X, SIGMA_Y, hermitize, kron
from .povm import to_spectral

EXACT_TOL = 1e-9
CERTIFY_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class WitnessCandidate:
    shape: tuple
    blocks: np.ndarray

    def __post_init__(self):
        shape = tuple(int(k) for k in self.shape)
        if not shape or any(k < 2 for k in shape):
            raise ValidationError(f"witness shape needs entries >= 2, got {shape}")
        X = np.asarray(self.blocks, dtype=complex)
        m = sum(k - 1 for k in shape)
        if X.ndim != 3 or X.shape[0] != m or X.shape[1] != X.shape[2]:
            raise ValidationError(f"shape {shape} needs {m} square blocks, got array {X.shape}")
        X = np.array([hermitize(B) for B in X])
        X.setflags(write=False)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "blocks", X)

    @property
    def n(self):
        return self.blocks.shape[1]

    @property
    def g(self):
        return len(self.shape)

    @property
    def binary(self):
        return all(k == 2 for k in self.shape)

    def scaled(self, c):
        return WitnessCandidate(self.shape, c * self.blocks)

    def grouped(self):
        """Blocks split per POVM: ``[(X_{s,1}, ..., X_{s,k_s-1}) for s]``."""
        out, pos = [], 0
        for k in self.shape:
            out.append(self.blocks[pos:pos + k - 1])
            pos += k - 1
        return out

    def to_json(self):
        return {"shape": list(self.shape), "n": self.n,
                "blocks": [io.encode_matrix(B) for B in self.blocks]}

    @classmethod
    def from_json(cls, data, path="$"):
        n = io.require_int(data, "n", path)
        shape = io.require(data, "shape", path)
        if (not isinstance(shape, list) or not shape
                or not all(isinstance(k, int) and not isinstance(k, bool) and k >= 2 for k in shape)):
            raise io.DecodeError(f"{path}.shape", "expected a non-empty array of integers >= 2")
        raw = io.require(data, "blocks", path)
        m = sum(k - 1 for k in shape)
        if not isinstance(raw, list) or len(raw) != m:
            raise io.DecodeError(f"{path}.blocks", f"expected {m} matrices for shape {shape}")
        mats = []
        for i, M in enumerate(raw):
            A = io.decode_matrix(M, f"{path}.blocks[{i}]")
            if A.shape != (n, n):
                raise io.DecodeError(f"{path}.blocks[{i}]", f"expected {n}x{n}, got {A.shape}")
            mats.append(A)
        try:
            return cls(tuple(shape), np.array(mats))
        except ValidationError as exc:
            raise io.DecodeError(f"{path}.blocks", str(exc)) from exc


def binary(blocks):
    X = np.asarray(blocks, dtype=complex)
    return WitnessCandidate((2,) * X.shape[0], X)


def exact_slack(X):
    return spectra.jewel_membership(X.shape, X.blocks, tol=np.inf).slack


def is_witness_exact(X, tol=EXACT_TOL):
    """Vertex test: ``sum_{s,j} w(s,j) X_{s,j} <= I`` at all ``prod k`` vertices."""
    return exact_slack(X) >= -tol


def sdp_margin(X, options=None):
    """Largest ``rho`` admitting a positive map from the cuboid with image ``rho X``.

    Blocks ``P_{s,r} >= 0`` sum to ``I_n`` and satisfy
    ``(k_s/2)(P_{s,k_s} - P_{s,j}) = rho X_{s,j}``.  ``rho >= 1`` certifies
    that ``X`` is a witness.  ``X = 0`` gives ``inf``.
    """
    if not np.any(X.blocks):
        return np.inf
    n = X.n
    prob = sdp.SdpProblem(sense="maximize")
    P = []
    for k in X.shape:
        P.append([prob.add_block(n) for _ in range(k)])
    rho = prob.add_block(1)
    prob.set_objective(rho, [[1.0]])
    prob.add_matrix_equality([(b, 1.0) for row in P for b in row], np.eye(n))
    for k, row, Xs in zip(X.shape, P, X.grouped()):
        for j in range(k - 1):
            prob.add_matrix_equality(
                [(row[k - 1], k / 2), (row[j], -k / 2), (rho, -Xs[j])], np.zeros((n, n)))
    sol = sdp.solve(prob, options)
    if not sol.optimal:
        raise NumericalError(f"witness SDP ended with status {sol.status.value}", sol)
    return float(sol.primal_value)


class Verdict(str, enum.Enum):
    WITNESS = "Witness"
    NOT_WITNESS = "NotWitness"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class WitnessClassification:
    verdict: Verdict
    rho: float
    theta_used: float

    def to_json(self):
        return {"verdict": self.verdict.value, "rho": self.rho, "theta_used": self.theta_used}


def default_theta(X):
    return 1.0 / np.sqrt(X.g) if X.binary else None


def classify(X, theta=None, tol=1e-6, options=None):
    """Classify from the SDP margin alone.

    ``rho >= 1`` means witness.  For binary shapes an exact witness always has
    ``rho >= theta`` with ``theta = g^{-1/2}``, so ``rho < theta`` rules it
    out; general shapes have no such constant unless ``theta`` is supplied.
    """
    if theta is None:
        theta = default_theta(X)
    rho = sdp_margin(X, options)
    if rho >= 1 - tol:
        verdict = Verdict.WITNESS
    elif theta is not None and rho < theta - tol:
        verdict = Verdict.NOT_WITNESS
    else:
        verdict = Verdict.INDETERMINATE
    return WitnessClassification(verdict, rho, np.nan if theta is None else float(theta))


@dataclass(frozen=True)
class WitnessApplication:
    max_eig: float
    certified_incompatible: bool

    def to_json(self):
        return {"max_eig": self.max_eig, "certified_incompatible": bool(self.certified_incompatible)}


def apply_witness(X, mset, tol=CERTIFY_TOL):
    """Evaluate ``sum B_{s,j} (x) X_{s,j}`` with ``B = 2E - (2/k)I``.

    Refuses candidates that fail the exact witness test.  A top eigenvalue
    above ``1 + tol`` certifies incompatibility; anything else proves nothing.
    """
    if tuple(mset.shape) != X.shape:
        raise ValidationError(f"witness shape {X.shape} does not match set shape {mset.shape}")
    if not is_witness_exact(X):
        raise ValidationError(f"candidate is not a witness (vertex slack {exact_slack(X):.3g})")
    L = np.zeros((mset.dim * X.n, mset.dim * X.n), dtype=complex)
    for p, Xs in zip(mset, X.grouped()):
        for B, Xj in zip(to_spectral(p), Xs):
            L += kron(B, Xj)
    top = float(np.linalg.eigvalsh(L)[-1])
    return WitnessApplication(top, top > 1 + tol)


def planar_witness(g):
    """``sin(pi/(2g)) X_j`` with ``X_j = cos(j pi/g) sigma_X + sin(j pi/g) sigma_Y``."""
    if g < 1:
        raise ValidationError(f"planar witness needs g >= 1, got {g}")
    lam = np.sin(np.pi / (2 * g))
    blocks = [lam * (np.cos(j * np.pi / g) * SIGMA_X + np.sin(j * np.pi / g) * SIGMA_Y)
              for j in range(1, g + 1)]
    return binary(blocks)
