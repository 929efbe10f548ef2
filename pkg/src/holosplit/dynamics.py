"""Time-dependent Hamiltonians and Schrodinger propagation of frames.

A frame is an N x M matrix of orthonormal columns spanning an M-dimensional
subspace. Propagation marches one unitary slice per step, exp(-i H(t_mid) dt)
with the Hamiltonian evaluated at the step midpoint (second-order accurate),
and re-orthonormalizes symmetrically after every step, so orthonormality
never drifts. Units: hbar = 1; times in s, frequencies in rad/s, both
dimensionless in code.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    as_complex_matrix,
    frobenius,
    hermitian_part,
    loewdin_orthonormalize,
)

__all__ = [
    "Constant",
    "FramePath",
    "HamiltonianSpec",
    "LambdaSystem",
    "Sampled",
    "TimeGrid",
    "dimension",
    "hamiltonian_path",
    "projector_path",
    "propagate_frame",
    "restricted_generator",
    "restricted_generator_path",
    "sample_hamiltonian",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing sample times starting at 0, ending at tau."""

    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("time grid needs at least 2 points")
        if t[0] != 0.0:
            raise ValueError("time grid must start at 0")
        if not np.all(np.diff(t) > 0):
            raise ValueError("time grid must be strictly increasing")
        object.__setattr__(self, "times", _freeze(t))

    @classmethod
    def uniform(cls, tau: float, steps: int) -> "TimeGrid":
        if steps < 1:
            raise ValueError("need at least one step")
        if tau <= 0:
            raise ValueError("tau must be positive")
        return cls(np.linspace(0.0, float(tau), int(steps) + 1))

    @property
    def tau(self) -> float:
        return float(self.times[-1])

    @property
    def steps(self) -> int:
        return self.times.size - 1

    def __len__(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class Constant:
    """Time-independent Hamiltonian."""

    matrix: np.ndarray
    structure_tol: float = DEFAULT_TOL.structure_tol

    def __post_init__(self):
        h = as_complex_matrix(self.matrix)
        if h.shape[0] != h.shape[1]:
            raise ValueError("Hamiltonian must be square")
        if frobenius(h - h.conj().T) > self.structure_tol:
            raise ValueError("Hamiltonian is not Hermitian within tolerance")
        object.__setattr__(self, "matrix", _freeze(hermitian_part(h)))


@dataclass(frozen=True)
class LambdaSystem:
    """Three-level Lambda Hamiltonian in the rotating frame.

    H = omega0 (|3><b| + |b><3|) + 2 delta |3><3| on the fixed basis
    {|1>,|2>,|3>}, with bright state |b> = conj(omega1)|1> + conj(omega2)|2>.
    The laser parameters must satisfy |omega1|^2 + |omega2|^2 = 1.
    """

    omega0: float
    delta: float
    omega1: complex = 1.0
    omega2: complex = 0.0

    def __post_init__(self):
        norm = abs(self.omega1) ** 2 + abs(self.omega2) ** 2
        if abs(norm - 1.0) > DEFAULT_TOL.structure_tol:
            raise ValueError("laser parameters must satisfy |w1|^2+|w2|^2 = 1")

    @property
    def bright_state(self) -> np.ndarray:
        return np.array([np.conj(self.omega1), np.conj(self.omega2), 0.0], dtype=complex)

    @property
    def dark_state(self) -> np.ndarray:
        return np.array([-self.omega2, self.omega1, 0.0], dtype=complex)

    @property
    def matrix(self) -> np.ndarray:
        b = self.bright_state
        e3 = np.array([0.0, 0.0, 1.0], dtype=complex)
        h = self.omega0 * (np.outer(e3, b.conj()) + np.outer(b, e3.conj()))
        h += 2.0 * self.delta * np.outer(e3, e3.conj())
        return h


@dataclass(frozen=True)
class Sampled:
    """Hamiltonian given on a time grid; linear interpolation in between."""

    grid: TimeGrid
    samples: np.ndarray = field(repr=False)
    structure_tol: float = DEFAULT_TOL.structure_tol

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 3 or s.shape[1] != s.shape[2]:
            raise ValueError("samples must have shape (npoints, n, n)")
        if s.shape[0] != len(self.grid):
            raise ValueError("sample count must equal grid point count")
        skew = s - s.conj().swapaxes(1, 2)
        if np.linalg.norm(skew, axis=(1, 2)).max() > self.structure_tol:
            raise ValueError("non-Hermitian sample in Hamiltonian data")
        object.__setattr__(self, "samples", _freeze(hermitian_part(s)))


HamiltonianSpec = Constant | LambdaSystem | Sampled


def dimension(spec: HamiltonianSpec) -> int:
    if isinstance(spec, Constant):
        return spec.matrix.shape[0]
    if isinstance(spec, LambdaSystem):
        return 3
    if isinstance(spec, Sampled):
        return spec.samples.shape[1]
    raise TypeError(f"not a Hamiltonian spec: {type(spec).__name__}")


def sample_hamiltonian(spec: HamiltonianSpec, t: float) -> np.ndarray:
    """Hermitian H(t) for the given spec."""
    return hamiltonian_path(spec, np.array([float(t)]))[0]


def hamiltonian_path(spec: HamiltonianSpec, times: np.ndarray) -> np.ndarray:
    """Stack of H(t) over the given times, shape (len(times), n, n)."""
    times = np.asarray(times, dtype=float)
    if isinstance(spec, (Constant, LambdaSystem)):
        return np.broadcast_to(spec.matrix, (times.size, *spec.matrix.shape)).copy()
    if isinstance(spec, Sampled):
        tg = spec.grid.times
        if times.min() < tg[0] or times.max() > tg[-1]:
            raise ValueError("requested time outside the sampled interval")
        hi = np.clip(np.searchsorted(tg, times, side="left"), 1, tg.size - 1)
        lo = hi - 1
        w = (times - tg[lo]) / (tg[hi] - tg[lo])
        return (1.0 - w)[:, None, None] * spec.samples[lo] + w[:, None, None] * spec.samples[hi]
    raise TypeError(f"not a Hamiltonian spec: {type(spec).__name__}")


@dataclass(frozen=True)
class FramePath:
    """Orthonormal N x M frame per grid point, stored as (npoints, N, M)."""

    grid: TimeGrid
    frames: np.ndarray = field(repr=False)
    structure_tol: float = DEFAULT_TOL.structure_tol

    def __post_init__(self):
        f = np.asarray(self.frames, dtype=complex)
        if f.ndim != 3:
            raise ValueError("frames must have shape (npoints, n, m)")
        if f.shape[0] != len(self.grid):
            raise ValueError("frame count must equal grid point count")
        if not np.isfinite(f).all():
            raise ValueError("frame path contains non-finite entries")
        grams = np.einsum("tnj,tnk->tjk", f.conj(), f)
        eye = np.eye(f.shape[2])
        drift = np.linalg.norm(grams - eye, axis=(1, 2)).max()
        if drift > 10 * self.structure_tol:
            raise ValueError(f"columns not orthonormal (residual {drift:.3e})")
        object.__setattr__(self, "frames", _freeze(f))

    @property
    def n(self) -> int:
        return self.frames.shape[1]

    @property
    def m(self) -> int:
        return self.frames.shape[2]

    @property
    def initial(self) -> np.ndarray:
        return self.frames[0]

    @property
    def final(self) -> np.ndarray:
        return self.frames[-1]


def _midpoint_slices(hams: np.ndarray, dts: np.ndarray) -> np.ndarray:
    """Unitaries exp(-i H_k dt_k) from a stack of Hermitian matrices."""
    w, v = np.linalg.eigh(hermitian_part(hams))
    phases = np.exp(-1j * w * dts[:, None])
    return np.einsum("tij,tj,tkj->tik", v, phases, v.conj())


def _propagate(sample_fn, psi0: np.ndarray, grid: TimeGrid) -> FramePath:
    times = grid.times
    mids = 0.5 * (times[:-1] + times[1:])
    dts = np.diff(times)
    hams = sample_fn(mids)
    slices = _midpoint_slices(hams, dts)
    out = np.empty((times.size, *psi0.shape), dtype=complex)
    out[0] = psi0
    s = psi0
    for k in range(times.size - 1):
        s = loewdin_orthonormalize(slices[k] @ s)
        out[k + 1] = s
    return FramePath(grid, out)


def propagate_frame(
    spec: HamiltonianSpec,
    psi0,
    grid: TimeGrid,
    *,
    tol: Tolerances = DEFAULT_TOL,
) -> FramePath:
    """Solve the Schrodinger equation for each column of psi0 over the grid.

    psi0 must have orthonormal columns; the returned path starts at psi0
    exactly and keeps orthonormality at every grid point.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.ndim != 2:
        raise ValueError("psi0 must be an N x M matrix of column vectors")
    n = dimension(spec)
    if psi0.shape[0] != n:
        raise ValueError(f"psi0 has dimension {psi0.shape[0]}, spec has {n}")
    gram = psi0.conj().T @ psi0
    if frobenius(gram - np.eye(psi0.shape[1])) > 10 * tol.structure_tol:
        raise ValueError("psi0 columns are not orthonormal")
    return _propagate(lambda ts: hamiltonian_path(spec, ts), psi0, grid)


def projector_path(path: FramePath) -> np.ndarray:
    """Rank-M projectors S(t) S(t)^dag per grid point, shape (npoints, N, N)."""
    f = path.frames
    return np.einsum("tnj,tmj->tnm", f, f.conj())


def restricted_generator(spec: HamiltonianSpec, path: FramePath, k: int) -> np.ndarray:
    """-i <psi_j(t_k)| H(t_k) |psi_l(t_k)>, the M x M generator of the
    evolution restricted to the instantaneous subspace. Anti-Hermitian."""
    npts = len(path.grid)
    if not (-npts <= k < npts):
        raise IndexError(f"grid index {k} out of range for {npts} points")
    return restricted_generator_path(spec, path)[k]


def restricted_generator_path(spec: HamiltonianSpec, path: FramePath) -> np.ndarray:
    """Stack of restricted generators over the whole grid."""
    hams = hamiltonian_path(spec, path.grid.times)
    f = path.frames
    gen = -1j * np.einsum("tnj,tnm,tmk->tjk", f.conj(), hams, f)
    # exact skew projection; the Hermitian residual is pure roundoff here
    return (gen - gen.conj().swapaxes(1, 2)) / 2
