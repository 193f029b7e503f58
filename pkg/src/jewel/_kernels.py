"""Hot inner loops, each with a numba and a pure-numpy implementation.

The backend is chosen once at import time: numba when it is importable and
``JEWEL_DISABLE_NUMBA`` is unset, numpy otherwise.  Both paths are always
importable under explicit names so tests and the benchmark can compare them.

Kernels
-------
vertex_max_eig(weights, mats)
    For every row ``w`` of ``weights`` (shape ``(V, m)``) return the largest
    eigenvalue of ``sum_j w[j] * mats[j]``.  This is the sweep behind every
    diagonal free-spectrahedron membership test (jewel, cube, witnesses).
schur_prepare(A) / schur_complement(prep, X, Zinv)
    HKM Schur matrix ``M[i, j] = Re tr(A_i X A_j Zinv)`` summed over a group
    of equally sized blocks; ``A`` has shape ``(m, nb, n, n)``.  ``prep`` is
    built once per solve.  The numpy path keeps ``A`` dense and leans on
    BLAS; the numba path stores the nonzeros of ``A`` per block and sums
    ``A_i[p,q] A_j[r,s] X[q,r] Zinv[s,p]`` over pairs of nonzeros, which wins
    because constraint matrices carry one or two entries per block.
"""

import numpy as np

from ._config import numba_requested

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

# Bound on the number of matrix entries materialised per numpy chunk.
_CHUNK_ENTRIES = 1 << 20


def vertex_max_eig_numpy(weights, mats):
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    mats = np.ascontiguousarray(mats, dtype=np.complex128)
    n_vert = weights.shape[0]
    n = mats.shape[1]
    out = np.empty(n_vert)
    if n_vert == 0:
        return out
    chunk = max(1, _CHUNK_ENTRIES // max(1, n * n))
    for start in range(0, n_vert, chunk):
        stop = min(n_vert, start + chunk)
        sums = np.tensordot(weights[start:stop], mats, axes=1)
        out[start:stop] = np.linalg.eigvalsh(sums)[:, -1]
    return out


def schur_prepare_numpy(A):
    return A


def schur_complement_numpy(A, X, Zinv):
    m = A.shape[0]
    if m == 0:
        return np.zeros((0, 0))
    W = X[None] @ A @ Zinv[None]
    # tr(A_i W_j) = sum_{b,p,q} A_i[b,p,q] W_j[b,q,p]
    lhs = A.reshape(m, -1)
    rhs = np.swapaxes(W, -1, -2).reshape(m, -1)
    return (lhs @ rhs.T).real


if numba is not None:

    @numba.njit(cache=True)
    def _vertex_max_eig_jit(weights, mats):
        n_vert, m = weights.shape
        n = mats.shape[1]
        out = np.empty(n_vert)
        acc = np.empty((n, n), dtype=np.complex128)
        for v in range(n_vert):
            acc[:, :] = 0.0
            for j in range(m):
                w = weights[v, j]
                if w != 0.0:
                    for p in range(n):
                        for q in range(n):
                            acc[p, q] += w * mats[j, p, q]
            if n == 2:
                # closed form avoids a LAPACK call per vertex for qubit blocks
                h = 0.5 * (acc[0, 0].real - acc[1, 1].real)
                off = acc[0, 1]
                out[v] = 0.5 * (acc[0, 0].real + acc[1, 1].real) + np.sqrt(
                    h * h + off.real * off.real + off.imag * off.imag)
            else:
                out[v] = np.linalg.eigvalsh(acc)[-1]
        return out

    @numba.njit(cache=True)
    def _schur_sparse_jit(m, ptr, con, row, col, val, X, Zinv):
        M = np.zeros((m, m))
        nb = ptr.shape[0] - 1
        for b in range(nb):
            Xb = X[b]
            Zb = Zinv[b]
            for e1 in range(ptr[b], ptr[b + 1]):
                i1 = con[e1]
                p = row[e1]
                q = col[e1]
                v1 = val[e1]
                for e2 in range(ptr[b], ptr[b + 1]):
                    i2 = con[e2]
                    if i2 < i1:
                        continue
                    M[i1, i2] += (v1 * val[e2] * Xb[q, row[e2]] * Zb[col[e2], p]).real
        for i in range(m):
            for j in range(i):
                M[i, j] = M[j, i]
        return M

    def vertex_max_eig_numba(weights, mats):
        weights = np.ascontiguousarray(weights, dtype=np.float64)
        mats = np.ascontiguousarray(mats, dtype=np.complex128)
        return _vertex_max_eig_jit(weights, mats)

    def schur_prepare_numba(A):
        m, nb = A.shape[:2]
        i, b, p, q = np.nonzero(A)
        order = np.argsort(b, kind="stable")
        ptr = np.zeros(nb + 1, dtype=np.int64)
        np.cumsum(np.bincount(b, minlength=nb), out=ptr[1:])
        return (m, ptr, i[order].astype(np.int64), p[order].astype(np.int64),
                q[order].astype(np.int64), np.ascontiguousarray(A[i, b, p, q][order]))

    def schur_complement_numba(prep, X, Zinv):
        m, ptr, con, row, col, val = prep
        return _schur_sparse_jit(
            m, ptr, con, row, col, val,
            np.ascontiguousarray(X, dtype=np.complex128),
            np.ascontiguousarray(Zinv, dtype=np.complex128),
        )

else:  # pragma: no cover
    vertex_max_eig_numba = None
    schur_prepare_numba = None
    schur_complement_numba = None


USING_NUMBA = numba is not None and numba_requested()

if USING_NUMBA:
    vertex_max_eig = vertex_max_eig_numba
    schur_prepare = schur_prepare_numba
    schur_complement = schur_complement_numba
else:
    vertex_max_eig = vertex_max_eig_numpy
    schur_prepare = schur_prepare_numpy
    schur_complement = schur_complement_numpy


def backend():
    return "numba" if USING_NUMBA else "numpy"
