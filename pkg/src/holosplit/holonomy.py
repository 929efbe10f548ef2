"""Connection and dynamical generators, the Anandan equation, ordered
exponential factors, and the separability analysis.

The frame-change matrix obeys dW/dt = (A + K) W with the connection
A_jk = <dphi_j/dt|phi_k> and the dynamical matrix K_jk = -i<phi_j|H|phi_k>,
both anti-Hermitian. Its solution is a forward time-ordered exponential,
which factors as W = G D with dG/dt = A G and dD/dt = D F (F the generator
restricted to the Schrodinger frame); that product form is an identity and
holds whether or not A and K commute. A genuine split into holonomic and
dynamical forward-ordered factors additionally requires [A(t), K(t')] = 0
for all pairs of times, which the report quantifies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .dynamics import (
    FramePath,
    HamiltonianSpec,
    TimeGrid,
    _propagate,
    hamiltonian_path,
    projector_path,
    propagate_frame,
    restricted_generator_path,
)
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    expm_skew_stack,
    frobenius,
    skew_part,
)
from .sections import (
    InPhaseViolation,
    SectionPath,
    overlap_path,
    u_matrix_path,
    w_path,
)

__all__ = [
    "DecompositionReport",
    "GeneratorPath",
    "connection_path",
    "generator_path",
    "k_path",
    "kw_wf_residual",
    "max_commutator_scan",
    "ordered_factor",
    "separability_report",
    "solve_anandan",
    "trivial_shift_check",
    "yu_tong_factors",
]

COMMUTATOR_SCAN_LIMIT = 64


@dataclass(frozen=True)
class GeneratorPath:
    """Connection A(t), dynamical matrix K(t) and restricted generator F(t)
    sampled on a common grid; all anti-Hermitian M x M."""

    grid: TimeGrid
    a_mats: np.ndarray = field(repr=False)
    k_mats: np.ndarray = field(repr=False)
    f_mats: np.ndarray = field(repr=False)

    def __post_init__(self):
        npts = len(self.grid)
        for name in ("a_mats", "k_mats", "f_mats"):
            mats = np.asarray(getattr(self, name), dtype=complex)
            if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
                raise ValueError(f"{name} must be a stack of square matrices")
            if mats.shape[0] != npts:
                raise ValueError(f"{name} length does not match the grid")
            skew_res = np.linalg.norm(
                mats + mats.conj().swapaxes(1, 2), axis=(1, 2)
            ).max()
            if skew_res > 10 * DEFAULT_TOL.structure_tol:
                raise ValueError(f"{name} is not anti-Hermitian (residual {skew_res:.3e})")
            object.__setattr__(self, name, mats)


@dataclass(frozen=True)
class DecompositionReport:
    """Endpoint factorization of the subspace evolution and its diagnostics.

    time_evolution = overlap @ w_direct reproduces S(0)^dag S(tau);
    separation_residual compares W(tau) against the forward-ordered
    holonomic and dynamical factors, product_residual against the G D
    product form (an identity, small on every run).
    """

    overlap: np.ndarray
    w_final: np.ndarray
    w_direct: np.ndarray
    holonomic_factor: np.ndarray
    dynamical_factor: np.ndarray
    g_factor: np.ndarray
    d_factor: np.ndarray
    max_commutator: float
    separation_residual: float
    product_residual: float
    classification: str
    time_evolution: np.ndarray
    in_phase_margin: float
    tau: float
    steps: int


def connection_path(section: SectionPath) -> np.ndarray:
    """A_jk(t) = <dphi_j/dt|phi_k> per grid point, from second-order finite
    differences of the section columns (one-sided at the endpoints),
    projected exactly anti-Hermitian."""
    times = section.path.grid.times
    if times.size < 3:
        raise ValueError("connection needs a grid with at least 3 points")
    frames = section.path.frames
    dframes = np.gradient(frames, times, axis=0, edge_order=2)
    a = np.einsum("tnj,tnk->tjk", dframes.conj(), frames)
    return skew_part(a)


def k_path(section: SectionPath, spec: HamiltonianSpec) -> np.ndarray:
    """K_jk(t) = -i <phi_j(t)|H(t)|phi_k(t)> per grid point."""
    frames = section.path.frames
    hams = hamiltonian_path(spec, section.path.grid.times)
    if hams.shape[1] != frames.shape[1]:
        raise ValueError(
            f"Hamiltonian dimension {hams.shape[1]} does not match frame dimension {frames.shape[1]}"
        )
    k = -1j * np.einsum("tnj,tnm,tmk->tjk", frames.conj(), hams, frames)
    return skew_part(k)


def generator_path(
    section: SectionPath, schrodinger: FramePath, spec: HamiltonianSpec
) -> GeneratorPath:
    """Assemble A, K and F along the grid."""
    return GeneratorPath(
        grid=section.path.grid,
        a_mats=connection_path(section),
        k_mats=k_path(section, spec),
        f_mats=restricted_generator_path(spec, schrodinger),
    )


def kw_wf_residual(generators: GeneratorPath, w: np.ndarray) -> float:
    """max_t || K(t) W(t) - W(t) F(t) ||_F, an exact identity up to roundoff."""
    w = np.asarray(w, dtype=complex)
    if w.shape != generators.k_mats.shape:
        raise ValueError("W path does not match the generator grid")
    lhs = np.einsum("tij,tjk->tik", generators.k_mats, w)
    rhs = np.einsum("tij,tjk->tik", w, generators.f_mats)
    return float(np.linalg.norm(lhs - rhs, axis=(1, 2)).max())


def _midpoint_products(mats: np.ndarray, times: np.ndarray) -> np.ndarray:
    mids = 0.5 * (mats[:-1] + mats[1:])
    dts = np.diff(times)
    return expm_skew_stack(mids * dts[:, None, None])


def solve_anandan(generators: GeneratorPath) -> np.ndarray:
    """Integrate dW/dt = (A + K) W with W(0) = identity.

    One unitary slice per step, generator averaged over the step endpoints
    (midpoint rule, second order); later slices multiply on the left.
    Returns W at every grid point.
    """
    gen = generators.a_mats + generators.k_mats
    slices = _midpoint_products(gen, generators.grid.times)
    m = gen.shape[1]
    out = np.empty_like(gen)
    out[0] = np.eye(m)
    acc = out[0]
    for k in range(slices.shape[0]):
        acc = slices[k] @ acc
        out[k + 1] = acc
    return out


def ordered_factor(
    mats: np.ndarray,
    grid: TimeGrid,
    direction: Literal["forward", "reverse"] = "forward",
) -> np.ndarray:
    """Time-ordered exponential of an anti-Hermitian generator path.

    forward solves dX/dt = m(t) X (later slices on the left), reverse solves
    dX/dt = X m(t) (later slices on the right); both start from the identity.
    """
    mats = np.asarray(mats, dtype=complex)
    if mats.shape[0] != len(grid):
        raise ValueError("generator path length does not match the grid")
    slices = _midpoint_products(mats, grid.times)
    acc = np.eye(mats.shape[1], dtype=complex)
    if direction == "forward":
        for k in range(slices.shape[0]):
            acc = slices[k] @ acc
    elif direction == "reverse":
        for k in range(slices.shape[0]):
            acc = acc @ slices[k]
    else:
        raise ValueError(f"unknown ordering direction: {direction!r}")
    return acc


def yu_tong_factors(generators: GeneratorPath) -> tuple[np.ndarray, np.ndarray]:
    """The auxiliary pair (G, D) with dG/dt = A G and dD/dt = D F.

    G D equals W(tau) identically; the D factor is reverse-ordered and is
    built from the Schrodinger-frame generator F rather than K, which is
    what makes the product form circular as a holonomic/dynamical split.
    """
    g = ordered_factor(generators.a_mats, generators.grid, "forward")
    d = ordered_factor(generators.f_mats, generators.grid, "reverse")
    return g, d


def max_commutator_scan(
    a_mats: np.ndarray,
    k_mats: np.ndarray,
    limit: int = COMMUTATOR_SCAN_LIMIT,
) -> float:
    """max over sampled (t, t') of ||[A(t), K(t')]||_F.

    The scan subsamples each axis to at most `limit` points, always
    including both endpoints.
    """
    npts = a_mats.shape[0]
    idx = np.unique(np.linspace(0, npts - 1, min(limit, npts)).round().astype(int))
    a = a_mats[idx]
    k = k_mats[idx]
    ak = np.einsum("imj,njk->inmk", a, k)
    ka = np.einsum("nmj,ijk->inmk", k, a)
    return float(np.linalg.norm(ak - ka, axis=(2, 3)).max())


def _scalar_block_residual(mats: np.ndarray, bases: list[np.ndarray]) -> float:
    """Distance of each matrix from the span of the block projectors.

    bases holds orthonormal M x r column blocks; the projection of X onto
    span{P_j} (Frobenius-orthogonal) replaces each block by its mean
    eigenvalue, so the residual vanishes exactly for matrices of the form
    sum_j c_j(t) P_j.
    """
    approx = np.zeros_like(mats)
    for b in bases:
        r = b.shape[1]
        coeff = np.einsum("ni,tnm,mi->t", b.conj(), mats, b) / r
        p = b @ b.conj().T
        approx += coeff[:, None, None] * p
    return float(np.linalg.norm(mats - approx, axis=(1, 2)).max())


def _refine_blocks(bases: list[np.ndarray], refiner: np.ndarray, cluster_tol: float) -> list[np.ndarray]:
    """Split each block along the eigenspaces of the refiner restricted to it."""
    herm = 1j * refiner
    out: list[np.ndarray] = []
    for b in bases:
        if b.shape[1] == 1:
            out.append(b)
            continue
        restricted = b.conj().T @ herm @ b
        w, v = np.linalg.eigh((restricted + restricted.conj().T) / 2)
        start = 0
        for i in range(1, w.size + 1):
            if i == w.size or w[i] - w[start] > cluster_tol:
                out.append(b @ v[:, start:i])
                start = i
    return out


def _common_projector_family_fits(
    a_mats: np.ndarray, k_mats: np.ndarray, tol: Tolerances
) -> bool:
    """Test whether A(t) and K(t) share one time-independent eigenprojector
    family, i.e. both have the form -i sum_j c_j(t) P_j.

    Candidate projectors are seeded from the time-averaged connection and
    refined by the averaged dynamical matrix and a few samples of each path.
    """
    npts, m, _ = a_mats.shape
    idx = np.unique(np.linspace(0, npts - 1, min(9, npts)).round().astype(int))
    refiners = [a_mats.mean(axis=0), k_mats.mean(axis=0)]
    refiners += [a_mats[i] for i in idx[1:-1:2]] + [k_mats[i] for i in idx[1:-1:2]]
    scale = max(
        1.0,
        float(np.linalg.norm(a_mats, axis=(1, 2)).max()),
        float(np.linalg.norm(k_mats, axis=(1, 2)).max()),
    )
    bases = [np.eye(m, dtype=complex)]
    for ref in refiners:
        bases = _refine_blocks(bases, ref, cluster_tol=1e-4 * scale)
        if all(b.shape[1] == 1 for b in bases):
            break
    check = np.unique(np.linspace(0, npts - 1, min(33, npts)).round().astype(int))
    worst = max(
        _scalar_block_residual(a_mats[check], bases),
        _scalar_block_residual(k_mats[check], bases),
    )
    return worst <= tol.separation_tol


def _classify(
    schrodinger: FramePath,
    generators: GeneratorPath,
    max_comm: float,
    tol: Tolerances,
) -> str:
    projectors = projector_path(schrodinger)
    drift = float(np.linalg.norm(projectors - projectors[0], axis=(1, 2)).max())
    if drift <= tol.separation_tol:
        return "case_i"
    if float(np.linalg.norm(generators.k_mats, axis=(1, 2)).max()) <= tol.separation_tol:
        return "case_ii"
    if _common_projector_family_fits(generators.a_mats, generators.k_mats, tol):
        return "case_iii"
    # cross-commutators can vanish even when the family detection is too
    # conservative; the scan is the authoritative separability signal
    if max_comm <= tol.separation_tol:
        return "case_iii"
    return "non_separable"


def separability_report(
    section: SectionPath,
    schrodinger: FramePath,
    spec: HamiltonianSpec,
    tol: Tolerances = DEFAULT_TOL,
) -> DecompositionReport:
    """Full endpoint decomposition: overlap, W by two routes, all four
    ordered factors, the commutator scan and the case classification.

    Raises InPhaseViolation when the endpoint overlap fails positivity.
    """
    if not np.array_equal(section.path.grid.times, schrodinger.grid.times):
        raise ValueError("section and Schrodinger paths use different grids")
    if section.in_phase_margin <= tol.positivity_tol:
        raise InPhaseViolation(
            f"in-phase margin {section.in_phase_margin:.3e} is not positive"
        )

    generators = generator_path(section, schrodinger, spec)
    w_list = w_path(section, schrodinger, tol=tol)
    w_direct = w_list[-1]
    w_final = solve_anandan(generators)[-1]
    overlap = overlap_path(section)[-1]

    hol = ordered_factor(generators.a_mats, generators.grid, "forward")
    dyn = ordered_factor(generators.k_mats, generators.grid, "forward")
    g, d = yu_tong_factors(generators)

    max_comm = max_commutator_scan(generators.a_mats, generators.k_mats)
    separation = frobenius(w_direct - hol @ dyn)
    product = frobenius(w_direct - g @ d)
    classification = _classify(schrodinger, generators, max_comm, tol)

    return DecompositionReport(
        overlap=overlap,
        w_final=w_final,
        w_direct=w_direct,
        holonomic_factor=hol,
        dynamical_factor=dyn,
        g_factor=g,
        d_factor=d,
        max_commutator=max_comm,
        separation_residual=separation,
        product_residual=product,
        classification=classification,
        time_evolution=overlap @ w_direct,
        in_phase_margin=section.in_phase_margin,
        tau=section.path.grid.tau,
        steps=section.path.grid.steps,
    )


def trivial_shift_check(
    spec: HamiltonianSpec,
    psi0: np.ndarray,
    f_dot: Callable[[float], float],
    grid: TimeGrid,
) -> float:
    """Residual max_t ||W(t) - identity|| for a common-phase section.

    The section phi_j(t) = exp(i f(t)) psi_j(t), f(0) = 0, consists of
    solutions of the Schrodinger equation for the shifted Hamiltonian
    H(t) - df/dt; the frame-change matrix against that shifted evolution is
    therefore the identity. A commuting-but-nontrivial W cannot be produced
    this way, which is why [K(t), W(t)] = 0 forces W(t) = identity.
    """
    times = grid.times
    mids = 0.5 * (times[:-1] + times[1:])
    rates = np.array([float(f_dot(t)) for t in mids])

    base = propagate_frame(spec, psi0, grid)
    n = base.n
    eye = np.eye(n)

    def shifted(ts: np.ndarray) -> np.ndarray:
        hams = hamiltonian_path(spec, ts)
        rs = np.array([float(f_dot(t)) for t in ts])
        return hams - rs[:, None, None] * eye

    shifted_path = _propagate(shifted, np.asarray(psi0, dtype=complex), grid)

    # accumulate f by the same midpoint quadrature the propagator applies,
    # so the phase relation between the two paths is exact per step
    f = np.concatenate([[0.0], np.cumsum(rates * np.diff(times))])
    section_frames = base.frames * np.exp(1j * f)[:, None, None]
    w = np.einsum("tnj,tnk->tjk", section_frames.conj(), shifted_path.frames)
    return float(np.linalg.norm(w - np.eye(w.shape[1]), axis=(1, 2)).max())
