"""Dense complex linear algebra over labeled tensor-product registers.

A register is an ordered list of named slots, each with its own dimension.
Slot ordering is big-endian: the leftmost slot is the most significant
index, so on a three-qubit register (s, a_up, a_dn) the basis word |110>
sits at amplitude index 6.  Everything downstream (gates, Pauli strings,
partial traces, detector models) relies on this one convention.

All values are immutable; operations return new objects.  Randomness never
enters this module except through an explicit seed or generator argument.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Registers above this total dimension are refused: the dense backend is
# meant for small exact computations, not large-scale simulation.
DIM_CAP = 2**16

NORM_TOL = 1e-12
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10


class RegisterError(ValueError):
    """Unknown label, label collision, or dimension mismatch."""


class DimensionCapError(RuntimeError):
    """Requested register exceeds the dense-backend dimension cap."""


@dataclass(frozen=True)
class Register:
    """Ordered, labeled tensor-product structure.

    slots: tuple of (label, dimension) pairs, most significant first.
    """

    slots: tuple[tuple[str, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple((str(l), int(d)) for l, d in self.slots))
        labels = [l for l, _ in self.slots]
        if len(set(labels)) != len(labels):
            raise RegisterError(f"duplicate slot labels in {labels}")
        if any(d < 1 for _, d in self.slots):
            raise RegisterError("slot dimensions must be >= 1")
        if self.dim > DIM_CAP:
            raise DimensionCapError(
                f"register dimension {self.dim} exceeds cap {DIM_CAP}"
            )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(l for l, _ in self.slots)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.slots)

    @property
    def dim(self) -> int:
        out = 1
        for _, d in self.slots:
            out *= d
        return out

    def axis(self, label: str) -> int:
        for i, (l, _) in enumerate(self.slots):
            if l == label:
                return i
        raise RegisterError(f"unknown slot label {label!r} (have {self.labels})")

    def dim_of(self, label: str) -> int:
        return self.slots[self.axis(label)][1]

    def subregister(self, labels) -> "Register":
        return Register(tuple((l, self.dim_of(l)) for l in labels))


def qubits(*labels: str) -> Register:
    """Register of two-dimensional slots, one per label."""
    return Register(tuple((l, 2) for l in labels))


@dataclass(frozen=True)
class PureState:
    """Normalized complex amplitude vector over a register.

    Construction validates the squared norm to 1e-12 unless
    ``normalized=False`` (used for intermediate projector output).
    """

    register: Register
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != self.register.dim:
            raise RegisterError(
                f"amplitude length {amps.shape[0]} != register dimension {self.register.dim}"
            )
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        if self.normalized and abs(self.norm() - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {self.norm()} deviates from 1 beyond {NORM_TOL}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "PureState":
        n = self.norm()
        if n < 1e-14:
            raise ValueError("cannot normalize a (numerically) zero state")
        return PureState(self.register, self.amplitudes / n)

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.register, np.outer(self.amplitudes, self.amplitudes.conj()))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def overlap(self, other: "PureState") -> complex:
        if self.register != other.register:
            raise RegisterError("overlap requires identical registers")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "PureState") -> float:
        return abs(self.overlap(other)) ** 2


def basis_state(register: Register, word) -> PureState:
    """Computational basis state for a word of per-slot values.

    ``word`` is a sequence of slot values (e.g. "110" or (1, 1, 0)) in
    register order, most significant slot first.
    """
    values = [int(w) for w in word]
    if len(values) != len(register.slots):
        raise RegisterError("word length does not match slot count")
    index = 0
    for v, d in zip(values, register.dims):
        if not 0 <= v < d:
            raise RegisterError(f"slot value {v} out of range for dimension {d}")
        index = index * d + v
    amps = np.zeros(register.dim, dtype=complex)
    amps[index] = 1.0
    return PureState(register, amps)


@dataclass(frozen=True)
class EnsembleState:
    """Weighted classical mixture of pure states on one register."""

    members: tuple[tuple[float, PureState], ...]

    def __post_init__(self):
        members = tuple((float(w), s) for w, s in self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise ValueError("ensemble needs at least one member")
        weights = np.array([w for w, _ in members])
        if np.any(weights < 0):
            raise ValueError("ensemble weights must be nonnegative")
        if abs(weights.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"ensemble weights sum to {weights.sum()}, not 1")
        reg = members[0][1].register
        if any(s.register != reg for _, s in members):
            raise RegisterError("all ensemble members must share one register")

    @property
    def register(self) -> Register:
        return self.members[0][1].register

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.members])

    def to_density_matrix(self) -> "DensityMatrix":
        reg = self.register
        rho = np.zeros((reg.dim, reg.dim), dtype=complex)
        for w, s in self.members:
            rho += w * np.outer(s.amplitudes, s.amplitudes.conj())
        return DensityMatrix(reg, rho)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix on a register."""

    register: Register
    entries: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.entries, dtype=complex)
        d = self.register.dim
        if mat.shape != (d, d):
            raise RegisterError(f"entries shape {mat.shape} != ({d}, {d})")
        if np.max(np.abs(mat - mat.conj().T)) > HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian within tolerance")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr} deviates from 1")
        if float(np.linalg.eigvalsh(mat).min()) < EIGENVALUE_FLOOR:
            raise ValueError("density matrix has a negative eigenvalue beyond tolerance")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "entries", mat)


def tensor_product(a: PureState, b: PureState) -> PureState:
    """Kronecker product of two states on label-disjoint registers."""
    collision = set(a.register.labels) & set(b.register.labels)
    if collision:
        raise RegisterError(f"label collision in tensor product: {sorted(collision)}")
    reg = Register(a.register.slots + b.register.slots)
    return PureState(reg, np.kron(a.amplitudes, b.amplitudes),
                     normalized=a.normalized and b.normalized)


def _apply_to_amplitudes(amps: np.ndarray, dims, op: np.ndarray, axes) -> np.ndarray:
    """op acting on the listed axes, identity on the rest."""
    n = len(dims)
    psi = amps.reshape(dims)
    psi = np.moveaxis(psi, axes, range(len(axes)))
    target_dims = [dims[a] for a in axes]
    rest_dims = [dims[i] for i in range(n) if i not in axes]
    d_t = int(np.prod(target_dims, dtype=int))
    out = op @ psi.reshape(d_t, -1)
    out = out.reshape(target_dims + rest_dims)
    out = np.moveaxis(out, range(len(axes)), axes)
    return out.reshape(-1)


def apply_operator(state: PureState, op: np.ndarray, targets,
                   renormalize: bool = False) -> PureState:
    """Apply a matrix to the named target slots (identity elsewhere).

    ``op`` need not be unitary; projectors are allowed.  The result is
    renormalized only when ``renormalize=True``; otherwise the output may
    carry a norm != 1 and is marked unnormalized when it does.
    """
    reg = state.register
    targets = list(targets)
    axes = [reg.axis(t) for t in targets]
    if len(set(axes)) != len(axes):
        raise RegisterError(f"repeated target label in {targets}")
    op = np.asarray(op, dtype=complex)
    d_t = int(np.prod([reg.dims[a] for a in axes], dtype=int))
    if op.shape != (d_t, d_t):
        raise RegisterError(
            f"operator shape {op.shape} does not match target dimension {d_t}"
        )
    out = _apply_to_amplitudes(state.amplitudes, reg.dims, op, axes)
    if renormalize:
        n = float(np.linalg.norm(out))
        if n < 1e-14:
            raise ValueError("operator annihilated the state; cannot renormalize")
        return PureState(reg, out / n)
    norm_ok = abs(float(np.linalg.norm(out)) - 1.0) <= NORM_TOL
    return PureState(reg, out, normalized=norm_ok)


def expectation(state, op: np.ndarray, targets) -> complex:
    """<psi|O|psi> for a PureState, Tr(rho O) for a DensityMatrix.

    The public contract assumes Hermitian ``op``; the imaginary part of the
    result is then below 1e-12 and the full complex value is returned for
    inspection.
    """
    targets = list(targets)
    if isinstance(state, PureState):
        applied = apply_operator(state, op, targets)
        return complex(np.vdot(state.amplitudes, applied.amplitudes))
    if isinstance(state, DensityMatrix):
        reduced = partial_trace(state, keep=targets)
        return complex(np.trace(np.asarray(op, dtype=complex) @ reduced.entries))
    if isinstance(state, EnsembleState):
        return complex(sum(w * expectation(s, op, targets) for w, s in state.members))
    raise TypeError(f"unsupported state type {type(state).__name__}")


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced density matrix on the ``keep`` labels, in the order given."""
    reg = rho.register
    keep = list(keep)
    if not keep:
        raise RegisterError("keep must name at least one slot")
    keep_axes = [reg.axis(l) for l in keep]
    if len(set(keep_axes)) != len(keep_axes):
        raise RegisterError(f"repeated label in keep list {keep}")
    dims = reg.dims
    n = len(dims)
    tensor = rho.entries.reshape(dims + dims)
    row = list(range(n))
    col = [n + i if i in keep_axes else i for i in range(n)]
    out_idx = [a for a in keep_axes] + [n + a for a in keep_axes]
    reduced = np.einsum(tensor, row + col, out_idx)
    d_keep = int(np.prod([dims[a] for a in keep_axes], dtype=int))
    return DensityMatrix(reg.subregister(keep), reduced.reshape(d_keep, d_keep))


def factor_out(state: PureState, label: str, tol: float = 1e-10) -> tuple[PureState, PureState]:
    """Split off a disentangled slot, returning (slot_state, remainder).

    Raises if the slot is entangled with the rest beyond ``tol`` (second
    singular value of the bipartite amplitude matrix).
    """
    reg = state.register
    ax = reg.axis(label)
    dims = reg.dims
    mat = np.moveaxis(state.amplitudes.reshape(dims), ax, 0).reshape(dims[ax], -1)
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    if len(s) > 1 and s[1] > tol:
        raise ValueError(f"slot {label!r} is entangled (Schmidt value {s[1]:.3e})")
    slot_amps = u[:, 0] * s[0]
    rest_amps = u[:, 0].conj() @ mat
    rest_labels = [l for l in reg.labels if l != label]
    slot_state = PureState(reg.subregister([label]), slot_amps / np.linalg.norm(slot_amps))
    rest_state = PureState(reg.subregister(rest_labels),
                           rest_amps / np.linalg.norm(rest_amps))
    return slot_state, rest_state


def haar_unitary(d: int, seed) -> np.ndarray:
    """Haar-distributed d x d unitary.

    Construction: complex-Gaussian (Ginibre) matrix, QR orthonormalization,
    then the R-diagonal phase correction that makes the distribution Haar.
    ``seed`` may be an integer or a numpy Generator.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    from .sampling import stream  # local import to avoid a cycle

    rng = seed if isinstance(seed, np.random.Generator) else stream(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))
    return q
