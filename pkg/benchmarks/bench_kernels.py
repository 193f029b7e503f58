"""Compare the numba and numpy kernels on representative sizes.

Run with ``python3 benchmarks/bench_kernels.py``.  The first numba call
compiles (or loads from cache) and is excluded from the timings.
"""

import argparse
import time

import numpy as np

from jewel import _kernels
from jewel.linalg import random_hermitian
from jewel.spectra import jewel_level1_weights


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def vertex_case(shape, n, rng):
    W = jewel_level1_weights(shape)
    X = np.array([random_hermitian(n, rng) for _ in range(W.shape[1])])
    return W, X


def schur_case(shape, d, rng):
    """Constraint data of the joint-POVM SDP for a random set, at a random interior point."""
    from jewel import sdp
    from jewel.compat import _joint_constraints
    from jewel.povm import random_set

    mset = random_set(d, shape, rng)
    cons = _joint_constraints(mset.shape, d, [p.effects for p in mset])
    prob = sdp.SdpProblem(blocks=[d] * int(np.prod(shape)), constraints=cons)
    A = sdp._Packed(prob, 1.0).A[0]
    nb = A.shape[1]
    X = np.array([np.eye(d) + 0.1 * random_hermitian(d, rng) for _ in range(nb)])
    Z = np.array([np.eye(d) + 0.1 * random_hermitian(d, rng) for _ in range(nb)])
    return A, X, np.linalg.inv(Z)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    if _kernels.vertex_max_eig_numba is None:
        raise SystemExit("numba is not importable; nothing to compare")

    cases = [
        ("vertex_max_eig", "shape=(2,)*8 n=2", vertex_case((2,) * 8, 2, rng),
         _kernels.vertex_max_eig_numba, _kernels.vertex_max_eig_numpy),
        ("vertex_max_eig", "shape=(3,3,3,3) n=3", vertex_case((3, 3, 3, 3), 3, rng),
         _kernels.vertex_max_eig_numba, _kernels.vertex_max_eig_numpy),
        ("vertex_max_eig", "shape=(2,)*6 n=8", vertex_case((2,) * 6, 8, rng),
         _kernels.vertex_max_eig_numba, _kernels.vertex_max_eig_numpy),
    ]
    for shape, d in (((3, 3), 3), ((2, 2, 2), 2), ((3, 3, 3), 3), ((2, 2), 6)):
        A, X, Zinv = schur_case(shape, d, rng)
        label = f"joint k={','.join(map(str, shape))} d={d}"
        cases.append(("schur_complement", label,
                      (A, X, Zinv), _kernels.schur_complement_numba, _kernels.schur_complement_numpy))
    print(f"{'kernel':<18} {'case':<22} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8} {'max diff':>10}")
    for name, label, data, fast, slow in cases:
        fast_args, slow_args = data, data
        if name == "schur_complement":
            A, X, Zinv = data
            fast_args = (_kernels.schur_prepare_numba(A), X, Zinv)
        ref = slow(*slow_args)
        got = fast(*fast_args)  # warm-up / compile
        diff = float(np.max(np.abs(ref - got)))
        t_fast = best_of(fast, fast_args, args.repeat)
        t_slow = best_of(slow, slow_args, args.repeat)
        print(f"{name:<18} {label:<22} {1e3 * t_fast:10.3f} {1e3 * t_slow:10.3f} "
              f"{t_slow / t_fast:8.2f} {diff:10.2e}")


if __name__ == "__main__":
    main()
