"""Free spectrahedra from defining tuples: jewel, cuboid, diamond and cube.

A tuple ``A = (A_1, ..., A_m)`` of ``D x D`` Hermitian matrices defines the
free spectrahedron of all ``X = (X_1, ..., X_m)`` (``n x n`` at level ``n``)
with ``sum_i A_i (x) X_i <= I``.  Every shipped construction is diagonal, and
membership for a diagonal tuple splits into ``D`` independent ``n x n``
eigenvalue tests, one per diagonal position, which the vertex kernel sweeps.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from . import _kernels, io
from .errors import ValidationError
from .linalg import direct_sum, hermitize, kron

MEMBERSHIP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FreeTuple:
    """Defining matrices of shape ``(m, D, D)``; ``diagonal`` marks diagonal tuples."""

    matrices: np.ndarray
    label: str = ""

    def __post_init__(self):
        A = np.asarray(self.matrices, dtype=complex)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise ValidationError(f"tuple matrices must have shape (m, D, D), got {A.shape}")
        A = np.array([hermitize(M) for M in A]).reshape(A.shape)
        A.setflags(write=False)
        object.__setattr__(self, "matrices", A)

    @classmethod
    def from_diagonals(cls, diags, label=""):
        diags = np.asarray(diags, dtype=float)
        m, D = diags.shape
        A = np.zeros((m, D, D), dtype=complex)
        A[:, np.arange(D), np.arange(D)] = diags
        return cls(A, label)

    @property
    def m(self):
        return self.matrices.shape[0]

    @property
    def dimD(self):
        return self.matrices.shape[1]

    @property
    def diagonal(self):
        A = self.matrices
        off = A - A * np.eye(self.dimD)
        return not np.any(off)

    @property
    def diagonals(self):
        """``(m, D)`` real diagonals; only meaningful for diagonal tuples."""
        return np.diagonal(self.matrices, axis1=1, axis2=2).real.copy()

    def equals(self, other, atol=0.0):
        return (self.matrices.shape == other.matrices.shape
                and np.allclose(self.matrices, other.matrices, atol=atol, rtol=0))

    def to_json(self):
        return {"dimD": self.dimD, "label": self.label,
                "matrices": [io.encode_matrix(A) for A in self.matrices]}

    @classmethod
    def from_json(cls, data, path="$"):
        D = io.require_int(data, "dimD", path)
        label = data.get("label", "") if isinstance(data, dict) else ""
        if not isinstance(label, str):
            raise io.DecodeError(f"{path}.label", "expected a string")
        raw = io.require(data, "matrices", path)
        if not isinstance(raw, list):
            raise io.DecodeError(f"{path}.matrices", "expected an array of matrices")
        mats = []
        for i, M in enumerate(raw):
            A = io.decode_matrix(M, f"{path}.matrices[{i}]")
            if A.shape != (D, D):
                raise io.DecodeError(f"{path}.matrices[{i}]", f"expected {D}x{D}, got {A.shape}")
            mats.append(A)
        try:
            return cls(np.array(mats).reshape(len(mats), D, D), label)
        except ValidationError as exc:
            raise io.DecodeError(f"{path}.matrices", str(exc)) from exc


def empty_tuple():
    return FreeTuple(np.zeros((0, 1, 1)), "empty")


def _check_shape(shape):
    shape = tuple(int(k) for k in shape)
    if not shape or any(k < 2 for k in shape):
        raise ValidationError(f"jewel shape needs entries >= 2, got {shape}")
    return shape


# ----------------------------------------------------------------------
# Named constructions


def simplex_weights(k):
    """``(k, k-1)`` array whose row ``e`` is ``v^(k)(e)_j = -2/k + 2 [e == j]``."""
    return -2.0 / k + 2.0 * np.eye(k)[:, : k - 1]


def jewel_base(k):
    if k < 2:
        raise ValidationError(f"jewel base needs k >= 2, got {k}")
    return FreeTuple.from_diagonals(simplex_weights(k).T, f"jewel_base({k})")


def cuboid_base(k):
    if k < 2:
        raise ValidationError(f"cuboid base needs k >= 2, got {k}")
    # y_j = (k/2)(e_k - e_j)
    Y = np.zeros((k - 1, k))
    Y[:, k - 1] = k / 2
    Y[np.arange(k - 1), np.arange(k - 1)] = -k / 2
    return FreeTuple.from_diagonals(Y, f"cuboid_base({k})")


def cube(g):
    if g < 1:
        raise ValidationError(f"cube needs g >= 1, got {g}")
    diags = np.hstack([np.eye(g), -np.eye(g)])
    return FreeTuple.from_diagonals(diags, f"cube({g})")


def diamond(g):
    if g < 1:
        raise ValidationError(f"diamond needs g >= 1, got {g}")
    return FreeTuple(jewel_tuple((2,) * g).matrices, f"diamond({g})")


def named_base_tuple(kind, param):
    builders = {"jewel_base": jewel_base, "cuboid_base": cuboid_base,
                "diamond": diamond, "cube": cube}
    if kind not in builders:
        raise ValidationError(f"unknown tuple kind {kind!r}; expected one of {sorted(builders)}")
    return builders[kind](int(param))


def product_tuple(A, B):
    """``(A_i (+) 0, 0 (+) B_j)``: level-1 set is the Cartesian product."""
    if A.m == 0:
        return B
    if B.m == 0:
        return A
    zA, zB = np.zeros((A.dimD, A.dimD)), np.zeros((B.dimD, B.dimD))
    mats = [direct_sum(M, zB) for M in A.matrices] + [direct_sum(zA, M) for M in B.matrices]
    return FreeTuple(np.array(mats), f"product({A.label},{B.label})")


def sum_tuple(A, B):
    """``(A_i (x) I, I (x) B_j)``."""
    if A.m == 0:
        return B
    if B.m == 0:
        return A
    IA, IB = np.eye(A.dimD), np.eye(B.dimD)
    mats = [kron(M, IB) for M in A.matrices] + [kron(IA, M) for M in B.matrices]
    return FreeTuple(np.array(mats), f"sum({A.label},{B.label})")


def jewel_tuple(shape):
    """Diagonals ``I (x) ... (x) v^(k_i)_j (x) ... (x) I`` of size ``prod k``."""
    shape = _check_shape(shape)
    W = jewel_level1_weights(shape)
    return FreeTuple.from_diagonals(W.T, "jewel(" + ",".join(map(str, shape)) + ")")


def jewel_level1_weights(shape):
    """``(prod k, sum(k-1))``: one row per multi-index ``eps``, the diagonal entries."""
    shape = _check_shape(shape)
    rows = []
    for eps in itertools.product(*(range(k) for k in shape)):
        rows.append(np.concatenate([simplex_weights(k)[e] for k, e in zip(shape, eps)]))
    return np.array(rows)


# ----------------------------------------------------------------------
# Level-1 geometry


def jewel_vertices(k):
    """Extreme points of the level-1 jewel base: ``-(k/2) e_i`` and ``(k/2) 1``."""
    if k < 2:
        raise ValidationError(f"jewel base needs k >= 2, got {k}")
    pts = [-(k / 2) * np.eye(k - 1)[i] for i in range(k - 1)]
    pts.append((k / 2) * np.ones(k - 1))
    return np.array(pts) + 0.0  # no negative zeros


def cuboid_vertices(shape):
    """All concatenations of simplex vertices ``w^(k_s)_{i_s}``, one per group."""
    return jewel_level1_weights(shape)


def vertices_csv(points, header=None):
    points = np.atleast_2d(points)
    if header is None:
        header = [f"x{i + 1}" for i in range(points.shape[1])]
    lines = [",".join(header)]
    for p in points:
        lines.append(",".join("%.17g" % float(x) for x in p))
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# Membership


@dataclass(frozen=True)
class Membership:
    member: bool
    slack: float

    def __bool__(self):
        return self.member


def _as_blocks(X, m):
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[:, None, None]
    if X.ndim != 3 or X.shape[1] != X.shape[2]:
        raise ValidationError(f"expected {m} square blocks, got array of shape {X.shape}")
    if X.shape[0] != m:
        raise ValidationError(f"expected {m} blocks, got {X.shape[0]}")
    if m:
        X = np.array([hermitize(B) for B in X])
    return X


def diagonal_max_eig(weights, X):
    """Largest eigenvalue of ``sum_j w_j X_j`` over every row ``w`` of ``weights``."""
    if X.shape[0] == 0:
        return 0.0
    return float(np.max(_kernels.vertex_max_eig(weights, X)))


def membership(A, X, tol=MEMBERSHIP_TOL):
    """Test ``sum_i A_i (x) X_i <= I``; ``slack = 1 - max eigenvalue``."""
    X = _as_blocks(X, A.m)
    if A.m == 0:
        return Membership(True, 1.0)
    if A.diagonal:
        top = diagonal_max_eig(A.diagonals.T, X)
    else:
        L = sum(kron(Ai, Xi) for Ai, Xi in zip(A.matrices, X))
        top = float(np.linalg.eigvalsh(L)[-1])
    slack = 1.0 - top
    return Membership(slack >= -tol, slack)


def jewel_membership(shape, X, tol=MEMBERSHIP_TOL):
    """Membership in the matrix jewel via its ``prod k`` vertex inequalities."""
    shape = _check_shape(shape)
    X = _as_blocks(X, sum(k - 1 for k in shape))
    slack = 1.0 - diagonal_max_eig(jewel_level1_weights(shape), X)
    return Membership(slack >= -tol, slack)


def inclusion_check(shape, B, tol=1e-7, options=None):
    """Whether the jewel of ``shape`` sits inside the spectrahedron of ``B``.

    ``B`` lists ``sum(k_i - 1)`` matrices; they are read as the spectral
    tuple ``2E - (2/k)I`` of POVMs, and inclusion holds iff those are
    jointly measurable.  Returns the :class:`~jewel.compat.CompatVerdict`.
    """
    from . import compat, povm

    shape = _check_shape(shape)
    B = np.asarray(B, dtype=complex)
    if B.ndim != 3 or B.shape[0] != sum(k - 1 for k in shape):
        raise ValidationError(f"expected {sum(k - 1 for k in shape)} matrices for shape {shape}")
    mset = povm.set_from_spectral(shape, B)
    return compat.joint_feasibility(mset, tol=tol, options=options)


def level1_inclusion(shape, B, tol=1e-8):
    """Level-1 inclusion: every converted POVM is a valid POVM."""
    from . import povm

    mset = povm.set_from_spectral(_check_shape(shape), B)
    return mset.validate(tol).ok

