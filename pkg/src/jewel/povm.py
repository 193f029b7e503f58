"""POVMs, measurement sets, noise models and structural transforms."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .linalg import SIGMA_X, SIGMA_Y, SIGMA_Z, as_matrix, eigvalsh, hermitize
from . import io

VALIDATION_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Povm:
    """Ordered list of ``k`` effects on ``C^d``, stored as a ``(k, d, d)`` array.

    Construction only enforces shapes and Hermiticity; positivity and
    normalisation are checked by :meth:`validate`.
    """

    effects: np.ndarray

    def __post_init__(self):
        E = np.asarray(self.effects, dtype=complex)
        if E.ndim != 3 or E.shape[1] != E.shape[2] or E.shape[0] < 1 or E.shape[1] < 1:
            raise ValidationError(f"effects must have shape (k, d, d), got {E.shape}")
        E = np.array([hermitize(M) for M in E])
        E.setflags(write=False)
        object.__setattr__(self, "effects", E)

    @classmethod
    def from_effects(cls, effects):
        return cls(np.array([as_matrix(E) for E in effects]))

    @property
    def dim(self):
        return self.effects.shape[1]

    @property
    def k(self):
        return self.effects.shape[0]

    def __len__(self):
        return self.k

    def __getitem__(self, j):
        return self.effects[j]

    def validate(self, tol=VALIDATION_TOL):
        return validate(self, tol)

    def is_valid(self, tol=VALIDATION_TOL):
        return validate(self, tol).ok

    def allclose(self, other, atol=1e-12):
        return self.effects.shape == other.effects.shape and np.allclose(
            self.effects, other.effects, atol=atol, rtol=0)

    def to_json(self):
        return {"dim": self.dim, "effects": [io.encode_matrix(E) for E in self.effects]}

    @classmethod
    def from_json(cls, data, path="$"):
        dim = io.require_int(data, "dim", path)
        effects = io.require(data, "effects", path)
        if not isinstance(effects, list) or not effects:
            raise io.DecodeError(f"{path}.effects", "expected a non-empty array of matrices")
        mats = []
        for j, M in enumerate(effects):
            A = io.decode_matrix(M, f"{path}.effects[{j}]")
            if A.shape != (dim, dim):
                raise io.DecodeError(f"{path}.effects[{j}]", f"expected {dim}x{dim}, got {A.shape}")
            mats.append(A)
        try:
            return cls(np.array(mats))
        except ValidationError as exc:
            raise io.DecodeError(f"{path}.effects", str(exc)) from exc


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    povms: tuple

    def __post_init__(self):
        povms = tuple(self.povms)
        if not povms:
            raise ValidationError("a measurement set needs at least one POVM")
        dims = {p.dim for p in povms}
        if len(dims) != 1:
            raise ValidationError(f"POVMs have different dimensions {sorted(dims)}")
        object.__setattr__(self, "povms", povms)

    @property
    def dim(self):
        return self.povms[0].dim

    @property
    def g(self):
        return len(self.povms)

    @property
    def shape(self):
        return tuple(p.k for p in self.povms)

    def __len__(self):
        return len(self.povms)

    def __iter__(self):
        return iter(self.povms)

    def __getitem__(self, i):
        return self.povms[i]

    def validate(self, tol=VALIDATION_TOL):
        report = ValidationReport()
        for i, p in enumerate(self.povms):
            for v in validate(p, tol).violations:
                report.violations.append(Violation(v.kind, v.value, v.outcome, povm=i))
        return report

    def replace(self, i, povm):
        povms = list(self.povms)
        povms[i] = povm
        return MeasurementSet(tuple(povms))

    def to_json(self):
        return {"dim": self.dim, "povms": [p.to_json() for p in self.povms]}

    @classmethod
    def from_json(cls, data, path="$"):
        dim = io.require_int(data, "dim", path)
        raw = io.require(data, "povms", path)
        if not isinstance(raw, list) or not raw:
            raise io.DecodeError(f"{path}.povms", "expected a non-empty array of POVMs")
        povms = []
        for i, p in enumerate(raw):
            povm = Povm.from_json(p, f"{path}.povms[{i}]")
            if povm.dim != dim:
                raise io.DecodeError(f"{path}.povms[{i}].dim", f"expected {dim}, got {povm.dim}")
            povms.append(povm)
        return cls(tuple(povms))


@dataclass(frozen=True)
class Violation:
    kind: str  # "not_psd" | "exceeds_identity" | "sum_deviation"
    value: float
    outcome: int = None
    povm: int = None

    def __str__(self):
        where = "" if self.povm is None else f"POVM {self.povm} "
        if self.kind == "sum_deviation":
            return f"{where}effects sum to identity only up to {self.value:.3g}"
        if self.kind == "not_psd":
            return f"{where}effect {self.outcome} has min eigenvalue {self.value:.6g}"
        return f"{where}effect {self.outcome} has max eigenvalue {self.value:.6g} > 1"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "valid" if self.ok else "; ".join(map(str, self.violations))


def validate(p, tol=VALIDATION_TOL):
    """List every effect outside ``[0, I]`` and the deviation of the sum from ``I``."""
    report = ValidationReport()
    eigs = eigvalsh(p.effects)
    for j in range(p.k):
        if eigs[j, 0] < -tol:
            report.violations.append(Violation("not_psd", float(eigs[j, 0]), j))
        if eigs[j, -1] > 1 + tol:
            report.violations.append(Violation("exceeds_identity", float(eigs[j, -1]), j))
    dev = np.linalg.norm(p.effects.sum(axis=0) - np.eye(p.dim), ord=2)
    if dev > tol:
        report.violations.append(Violation("sum_deviation", float(dev)))
    return report


def require_valid(obj, tol=VALIDATION_TOL):
    report = obj.validate(tol)
    if not report.ok:
        raise ValidationError(f"invalid measurement: {report}")
    return obj


# ----------------------------------------------------------------------
# Noise


BALANCED = "balanced"
LINEAR = "linear"


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    weights: tuple

    def __post_init__(self):
        if self.kind not in (BALANCED, LINEAR):
            raise ValidationError(f"noise kind must be 'balanced' or 'linear', got {self.kind!r}")
        w = tuple(float(s) for s in self.weights)
        for s in w:
            if not 0.0 <= s <= 1.0:
                raise ValidationError(f"noise weight {s} outside [0, 1]")
        object.__setattr__(self, "weights", w)


def noise_base(p, kind):
    """The trivial POVM that noise of ``kind`` mixes in."""
    d, k = p.dim, p.k
    if kind == BALANCED:
        return np.broadcast_to(np.eye(d) / k, (k, d, d)).astype(complex)
    if kind == LINEAR:
        tr = np.trace(p.effects, axis1=1, axis2=2).real / d
        return tr[:, None, None] * np.eye(d)
    raise ValidationError(f"unknown noise kind {kind!r}")


def noisy_povm(p, kind, s):
    return Povm(s * p.effects + (1 - s) * noise_base(p, kind))


def apply_noise(mset, model):
    if len(model.weights) != mset.g:
        raise ValidationError(f"{len(model.weights)} weights for {mset.g} POVMs")
    return MeasurementSet(tuple(noisy_povm(p, model.kind, s) for p, s in zip(mset, model.weights)))


# ----------------------------------------------------------------------
# Structural transforms


def coarse_grain(p, partition):
    """Merge outcomes group by group; ``partition`` must cover ``range(k)`` disjointly."""
    groups = [list(g) for g in partition]
    flat = [j for g in groups for j in g]
    if any(not g for g in groups):
        raise ValidationError("empty outcome group")
    if sorted(flat) != list(range(p.k)):
        raise ValidationError(f"partition {groups} is not a partition of the {p.k} outcomes")
    return Povm(np.array([p.effects[g].sum(axis=0) for g in groups]))


def pad_outcomes(p, k_new):
    if k_new < p.k:
        raise ValidationError(f"cannot pad {p.k} outcomes down to {k_new}")
    zeros = np.zeros((k_new - p.k, p.dim, p.dim), dtype=complex)
    return Povm(np.concatenate([p.effects, zeros]))


def compress(mset, V, tol=1e-9):
    """Map every effect to ``V^* E V`` for an isometry ``V`` (``d x l``)."""
    V = as_matrix(V)
    if V.shape[0] != mset.dim:
        raise ValidationError(f"isometry has {V.shape[0]} rows, POVMs act on C^{mset.dim}")
    if np.max(np.abs(V.conj().T @ V - np.eye(V.shape[1]))) > tol:
        raise ValidationError("V is not an isometry (V^* V != I)")
    Vh = V.conj().T
    return MeasurementSet(tuple(Povm(Vh @ p.effects @ V) for p in mset))


def cyclic_lift(p):
    """``F_j = E_j (+) E_{j+1} (+) ... (+) E_{j+k-1}`` (indices mod k) on ``C^{kd}``."""
    k, d = p.k, p.dim
    F = np.zeros((k, k * d, k * d), dtype=complex)
    for j in range(k):
        for r in range(k):
            F[j, r * d:(r + 1) * d, r * d:(r + 1) * d] = p.effects[(j + r) % k]
    return Povm(F)


# ----------------------------------------------------------------------
# Conversions between POVMs and spectrahedral tuples


def to_reduced(p):
    """Drop the last effect."""
    return p.effects[:-1].copy()


def from_reduced(E):
    E = np.asarray(E, dtype=complex)
    d = E.shape[-1]
    last = np.eye(d) - E.sum(axis=0)
    return Povm(np.concatenate([E, last[None]]))


def to_spectral(p):
    """Tuple ``B_j = 2 E_j - (2/k) I`` for ``j < k``."""
    return 2 * p.effects[:-1] - (2.0 / p.k) * np.eye(p.dim)


def from_spectral(B, k=None):
    B = np.asarray(B, dtype=complex)
    if B.ndim != 3:
        raise ValidationError(f"spectral tuple must have shape (k-1, d, d), got {B.shape}")
    if k is None:
        k = B.shape[0] + 1
    if B.shape[0] != k - 1:
        raise ValidationError(f"{B.shape[0]} matrices given for {k} outcomes")
    return from_reduced((B + (2.0 / k) * np.eye(B.shape[-1])) / 2)


def set_to_spectral(mset):
    return [to_spectral(p) for p in mset]


def set_from_spectral(shape, B):
    """Split a flat list of ``sum(k_i - 1)`` matrices back into POVMs."""
    B = np.asarray(B, dtype=complex)
    if B.shape[0] != sum(k - 1 for k in shape):
        raise ValidationError(f"expected {sum(k - 1 for k in shape)} matrices for shape {tuple(shape)}")
    povms, pos = [], 0
    for k in shape:
        povms.append(from_spectral(B[pos:pos + k - 1], k))
        pos += k - 1
    return MeasurementSet(tuple(povms))


# ----------------------------------------------------------------------
# Constructions


def basis_povm(vectors):
    """Rank-one projective POVM from the columns of a unitary."""
    U = as_matrix(vectors)
    return Povm(np.einsum("pj,qj->jpq", U, U.conj()))


def computational_basis(d):
    return basis_povm(np.eye(d))


def fourier_basis(d):
    idx = np.arange(d)
    return np.exp(2j * np.pi * np.outer(idx, idx) / d) / np.sqrt(d)


def _is_prime(n):
    if n < 2:
        return False
    return all(n % p for p in range(2, int(n ** 0.5) + 1))


def max_mubs_constructible(d):
    if d == 2 or _is_prime(d):
        return d + 1
    return 2


def mub_bases(d, count):
    """Orthonormal bases (as unitaries) that are pairwise mutually unbiased."""
    if d < 2 or count < 1:
        raise ValidationError(f"need d >= 2 and count >= 1, got d={d}, count={count}")
    limit = max_mubs_constructible(d)
    if count > limit:
        raise ValidationError(f"only {limit} MUBs are constructed in dimension {d}")
    if d == 2:
        # Eigenbases of sigma_Z, sigma_X, sigma_Y; Z and X are Fourier-conjugate.
        bases = [np.eye(2, dtype=complex),
                 np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
                 np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2)]
        return bases[:count]
    bases = [np.eye(d, dtype=complex)]
    l = np.arange(d)
    for a in range(count - 1):
        # v_b(l) = w^(a l^2 + b l) / sqrt(d); a = 0 is the Fourier basis.
        phase = (a * l[:, None] ** 2 + np.outer(l, l)) % d
        bases.append(np.exp(2j * np.pi * phase / d) / np.sqrt(d))
    return bases


def mub_povms(d, count):
    return MeasurementSet(tuple(basis_povm(U) for U in mub_bases(d, count)))


def mub_overlap_error(mset):
    """Largest deviation of a cross-basis overlap ``tr(E F)`` from ``1/d``."""
    d = mset.dim
    worst = 0.0
    for i in range(mset.g):
        for v in range(i + 1, mset.g):
            overlaps = np.einsum("jpq,uqp->ju", mset[i].effects, mset[v].effects).real
            worst = max(worst, float(np.max(np.abs(overlaps - 1.0 / d))))
    return worst


def planar_observable(j, g):
    return np.cos(j * np.pi / g) * SIGMA_X + np.sin(j * np.pi / g) * SIGMA_Y


def planar_qubit_set(g, t):
    t = np.broadcast_to(np.asarray(t, dtype=float), (g,))
    if np.any(t < 0) or np.any(t > 1):
        raise ValidationError("planar lengths must lie in [0, 1]")
    povms = []
    for j in range(1, g + 1):
        E = (np.eye(2) + t[j - 1] * planar_observable(j, g)) / 2
        povms.append(Povm(np.array([E, np.eye(2) - E])))
    return MeasurementSet(tuple(povms))


def z_basis_qubit():
    return Povm(np.array([(np.eye(2) + SIGMA_Z) / 2, (np.eye(2) - SIGMA_Z) / 2]))


def trivial_povm(d, k):
    return Povm(np.broadcast_to(np.eye(d) / k, (k, d, d)).astype(complex))


def random_povm(d, k, rng):
    """``E_j = S^{-1/2} G_j G_j^* S^{-1/2}`` with Ginibre ``G_j`` and ``S = sum G_j G_j^*``."""
    G = rng.standard_normal((k, d, d)) + 1j * rng.standard_normal((k, d, d))
    P = G @ np.conj(np.swapaxes(G, 1, 2))
    w, V = np.linalg.eigh(P.sum(axis=0))
    S_inv_half = (V / np.sqrt(w)) @ V.conj().T
    return Povm(S_inv_half @ P @ S_inv_half)


def random_set(d, shape, seed):
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return MeasurementSet(tuple(random_povm(d, k, rng) for k in shape))
