"""Dense complex linear algebra on Hermitian matrices.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  The
functions here validate Hermiticity once at the boundary and otherwise stay
out of the way.
"""

import numpy as np

from .errors import NumericalError, ValidationError

HERMITIAN_TOL = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_matrix(M):
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2:
        raise ValidationError(f"expected a 2-d matrix, got shape {A.shape}")
    return A


def hermitize(M, tol=HERMITIAN_TOL):
    """Return ``(M + M^*)/2``, refusing inputs whose skew part exceeds ``tol``.

    The tolerance is relative to the largest entry magnitude (absolute for
    matrices with entries below one).
    """
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise ValidationError(f"matrix is not square: shape {A.shape}")
    if A.size == 0:
        return A.copy()
    skew = np.max(np.abs(A - A.conj().T))
    scale = max(1.0, float(np.max(np.abs(A))))
    if skew > tol * scale:
        raise ValidationError(f"matrix is not Hermitian (skew part {skew:.3g} > {tol:.3g})")
    return (A + A.conj().T) / 2


def is_hermitian(M, tol=HERMITIAN_TOL):
    try:
        hermitize(M, tol)
    except ValidationError:
        return False
    return True


def kron(A, B):
    return np.kron(as_matrix(A), as_matrix(B))


def direct_sum(*mats):
    """Block-diagonal stack; zero-sized blocks are neutral."""
    mats = [as_matrix(M) for M in mats]
    rows = sum(M.shape[0] for M in mats)
    cols = sum(M.shape[1] for M in mats)
    out = np.zeros((rows, cols), dtype=np.complex128)
    r = c = 0
    for M in mats:
        out[r:r + M.shape[0], c:c + M.shape[1]] = M
        r += M.shape[0]
        c += M.shape[1]
    return out


def direct_sum_mat(A, B):
    return direct_sum(A, B)


def eigh(A):
    """Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix."""
    A = as_matrix(A)
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Hermitian eigensolver did not converge: {exc}") from exc
    return w, V


def eigvalsh(A):
    try:
        return np.linalg.eigvalsh(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Hermitian eigensolver did not converge: {exc}") from exc


def eig_min(A):
    return float(eigvalsh(as_matrix(A))[0])


def eig_max(A):
    return float(eigvalsh(as_matrix(A))[-1])


def vectorize(A):
    """Column-stacking vectorization, so that ``vdot(vec(A), vec(B)) = tr(A^* B)``."""
    return as_matrix(A).ravel(order="F")


def inner(A, B):
    """Real inner product ``Re tr(A^* B)``."""
    return float(np.vdot(A, B).real)


def is_psd(A, tol=0.0):
    return eig_min(A) >= -tol


def hermitian_basis(n):
    """Orthonormal basis of the n x n Hermitian matrices for ``Re tr(A B)``.

    Returns an array of shape ``(n*n, n, n)``: diagonal units first, then for
    each ``p < q`` the symmetric and antisymmetric off-diagonal pairs.
    """
    basis = np.zeros((n * n, n, n), dtype=np.complex128)
    k = 0
    for p in range(n):
        basis[k, p, p] = 1.0
        k += 1
    r = 1.0 / np.sqrt(2.0)
    for p in range(n):
        for q in range(p + 1, n):
            basis[k, p, q] = basis[k, q, p] = r
            k += 1
            basis[k, p, q] = -1j * r
            basis[k, q, p] = 1j * r
            k += 1
    return basis


def random_hermitian(n, rng, scale=1.0):
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (G + G.conj().T) / 2


def random_isometry(d, l, rng):
    """Haar-distributed isometry ``C^l -> C^d`` as a ``d x l`` matrix."""
    if l > d:
        raise ValidationError(f"no isometry from dimension {l} into {d}")
    G = rng.standard_normal((d, l)) + 1j * rng.standard_normal((d, l))
    Q, R = np.linalg.qr(G)
    phases = np.diag(R) / np.abs(np.diag(R))
    return Q * phases


def psd_sqrt_inv(S):
    w, V = eigh(S)
    if w[0] <= 0:
        raise NumericalError("matrix is not positive definite")
    return (V / np.sqrt(w)) @ V.conj().T
