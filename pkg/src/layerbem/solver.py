"""Nystrom discretization of the multilayer interface system.

Self-interaction layer potentials use the Kress logarithmic-singularity
split (singular part under corrected trapezoidal weights, smooth remainder
under the periodic trapezoid rule, analytic diagonal limits). Operators
between distinct interfaces have smooth kernels and use the plain periodic
trapezoid rule, as does off-boundary field evaluation.

Unknowns are the traces u_{j,j} and normal traces du_{j,j}/dn on each
interface, interface-major, u block before the normal-trace block.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, special

from .analytic import LayerConfig, incident_field
from .geometry import BoundaryGrid, make_grid

EULER_GAMMA = float(np.euler_gamma)
CLOSE_EVAL_SPACINGS = 5.0


class CloseEvaluationWarning(UserWarning):
    """Field requested within the untrusted band next to an interface."""


class IllConditionedSystemError(RuntimeError):
    """Direct solve produced an untrustworthy residual."""


def kress_log_weights(M: int) -> np.ndarray:
    """Quadrature weights R[i, j] for the 2pi-periodic log kernel.

    Row i integrates f against ln(4 sin^2((theta_i - tau)/2)); exact for
    trigonometric polynomials of degree < M/2. M must be even.
    """
    if M % 2 != 0:
        raise ValueError(f"M must be even, got {M}")
    lags = np.arange(M)
    m = np.arange(1, M // 2)
    # R(lag) = -(4 pi / M) [ sum_m cos(2 pi m lag / M) / m + cos(pi lag) / M ]
    cosines = np.cos(2 * np.pi * np.outer(lags, m) / M)
    r_of_lag = -(4 * np.pi / M) * (cosines @ (1.0 / m) + np.cos(np.pi * lags) / M)
    idx = (np.arange(M)[:, None] - np.arange(M)[None, :]) % M
    return r_of_lag[idx]


def _pairwise(points_t: np.ndarray, points_s: np.ndarray):
    diff = points_t[:, None, :] - points_s[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    return diff, dist


def self_layer_matrices(grid: BoundaryGrid, k: float) -> tuple[np.ndarray, np.ndarray]:
    """Kress-corrected Nystrom matrices (S, D) on one interface.

    Both map node values of a density to boundary values of the layer
    potential (principal value; the +-1/2 jump is added by the caller).
    """
    M = grid.M
    jac = grid.jacobians
    diff, dist = _pairwise(grid.points, grid.points)
    np.fill_diagonal(dist, 1.0)  # masked below

    dtheta = grid.thetas[:, None] - grid.thetas[None, :]
    log_term = np.log(4 * np.sin(dtheta / 2) ** 2, where=~np.eye(M, dtype=bool),
                      out=np.zeros((M, M)))
    R = kress_log_weights(M)
    ptr_w = 2 * np.pi / M

    kr = k * dist
    # single layer: kernel (i/4) H0(kr) |x'(tau)|
    m1 = -(1.0 / (4 * np.pi)) * special.j0(kr) * jac[None, :]
    m_full = 0.25j * special.hankel1(0, kr) * jac[None, :]
    m2 = m_full - m1 * log_term
    diag_m2 = (0.25j - EULER_GAMMA / (2 * np.pi)
               - np.log(0.5 * k * jac) / (2 * np.pi)) * jac
    np.fill_diagonal(m2, diag_m2)
    np.fill_diagonal(m1, -(1.0 / (4 * np.pi)) * jac)  # J0(0) = 1
    S = R * m1 + ptr_w * m2

    # double layer: kernel (ik/4) H1(kr) ((x - y).n(y)) / r * |x'(tau)|
    dot = np.einsum("ijk,jk->ij", diff, grid.normals)
    l1 = -(k / (4 * np.pi)) * special.j1(kr) * dot / dist * jac[None, :]
    l_full = 0.25j * k * special.hankel1(1, kr) * dot / dist * jac[None, :]
    l2 = l_full - l1 * log_term
    np.fill_diagonal(l1, 0.0)
    np.fill_diagonal(l2, -grid.curvatures * jac / (4 * np.pi))
    D = R * l1 + ptr_w * l2
    return S, D


def cross_layer_matrices(
    grid: BoundaryGrid, k: float, targets: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Plain-PTR (S, D) matrices from grid nodes to off-interface targets."""
    diff, dist = _pairwise(np.atleast_2d(targets), grid.points)
    w = 2 * np.pi / grid.M * grid.jacobians[None, :]
    kr = k * dist
    S = 0.25j * special.hankel1(0, kr) * w
    dot = np.einsum("ijk,jk->ij", diff, grid.normals)
    D = 0.25j * k * special.hankel1(1, kr) * dot / dist * w
    return S, D


@dataclass(frozen=True)
class SystemMatrix:
    """Dense trace system A x = rhs with its geometry bookkeeping."""

    config: LayerConfig
    grids: tuple[BoundaryGrid, ...]
    matrix: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    sound_hard: bool = False

    @property
    def Ms(self) -> tuple[int, ...]:
        return tuple(g.M for g in self.grids)

    def u_slice(self, i: int) -> slice:
        if self.sound_hard:
            return slice(0, self.grids[0].M)
        off = 2 * sum(g.M for g in self.grids[:i])
        return slice(off, off + self.grids[i].M)

    def dn_slice(self, i: int) -> slice:
        if self.sound_hard:
            raise ValueError("sound-hard system has no normal-trace unknowns")
        off = 2 * sum(g.M for g in self.grids[:i]) + self.grids[i].M
        return slice(off, off + self.grids[i].M)


@dataclass(frozen=True)
class TraceSolution:
    """Solved interface traces with the defining system and residual."""

    system: SystemMatrix
    u_traces: tuple[np.ndarray, ...]
    dn_traces: tuple[np.ndarray, ...]
    residual: float

    @property
    def config(self) -> LayerConfig:
        return self.system.config

    @property
    def grids(self) -> tuple[BoundaryGrid, ...]:
        return self.system.grids


def assemble_system(
    config: LayerConfig, Ms, sound_hard: bool = False
) -> SystemMatrix:
    """Build the dense 2N-equation trace system (or its Neumann reduction).

    Equations, in row order: exterior limit on the outer interface; for each
    inner region the limits on its bounding pair of interfaces; the core
    limit on the innermost interface.
    """
    if isinstance(Ms, int):
        Ms = [Ms] * config.n_interfaces
    Ms = [int(m) for m in Ms]
    if len(Ms) != config.n_interfaces:
        raise ValueError(f"need one M per interface, got {len(Ms)}")
    grids = tuple(make_grid(c, m) for c, m in zip(config.curves, Ms))
    k = config.wavenumbers
    betas = config.betas
    n = config.n_interfaces

    if sound_hard:
        if n != 1:
            raise ValueError("sound-hard assembly requires a single interface")
        _, D = self_layer_matrices(grids[0], k[0])
        A = 0.5 * np.eye(Ms[0]) - D
        rhs = incident_field(config, grids[0].points)
        return SystemMatrix(config, grids, A, rhs, sound_hard=True)

    size = 2 * sum(Ms)
    A = np.zeros((size, size), dtype=complex)
    rhs = np.zeros(size, dtype=complex)
    sysm = SystemMatrix(config, grids, A, rhs)

    self_ops = {}

    def ops_self(i: int, kj: float):
        key = (i, kj)
        if key not in self_ops:
            self_ops[key] = self_layer_matrices(grids[i], kj)
        return self_ops[key]

    row = 0

    def add_block(r0: int, col: slice, block: np.ndarray):
        A[r0:r0 + block.shape[0], col] += block

    # exterior limit on Gamma_0: (1/2) u0 - D00 u0 + S00 dnu0 = u_in
    S00, D00 = ops_self(0, k[0])
    add_block(row, sysm.u_slice(0), 0.5 * np.eye(Ms[0]) - D00)
    add_block(row, sysm.dn_slice(0), S00)
    rhs[row:row + Ms[0]] = incident_field(config, grids[0].points)
    row += Ms[0]

    for j in range(1, config.n_layers - 1):
        kj = k[j]
        So, Do = ops_self(j - 1, kj)  # on Gamma_{j-1}
        Si, Di = ops_self(j, kj)  # on Gamma_j
        Sc_oi, Dc_oi = cross_layer_matrices(grids[j], kj, grids[j - 1].points)
        Sc_io, Dc_io = cross_layer_matrices(grids[j - 1], kj, grids[j].points)
        b = betas[j - 1]

        # limit from Omega_j onto Gamma_{j-1}
        add_block(row, sysm.u_slice(j - 1), 0.5 * np.eye(Ms[j - 1]) + Do)
        add_block(row, sysm.dn_slice(j - 1), -b * So)
        add_block(row, sysm.u_slice(j), -Dc_oi)
        add_block(row, sysm.dn_slice(j), Sc_oi)
        row += Ms[j - 1]

        # limit from Omega_j onto Gamma_j
        add_block(row, sysm.u_slice(j), 0.5 * np.eye(Ms[j]) - Di)
        add_block(row, sysm.dn_slice(j), Si)
        add_block(row, sysm.u_slice(j - 1), Dc_io)
        add_block(row, sysm.dn_slice(j - 1), -b * Sc_io)
        row += Ms[j]

    # core limit on Gamma_{N-1}
    S_core, D_core = ops_self(n - 1, k[-1])
    add_block(row, sysm.u_slice(n - 1), 0.5 * np.eye(Ms[n - 1]) + D_core)
    add_block(row, sysm.dn_slice(n - 1), -betas[-1] * S_core)
    row += Ms[n - 1]
    assert row == size
    return sysm


def solve_traces(system: SystemMatrix, residual_tol: float = 1e-10) -> TraceSolution:
    """Dense LU solve; the discrete residual must meet residual_tol."""
    lu, piv = linalg.lu_factor(system.matrix)
    x = linalg.lu_solve((lu, piv), system.rhs)
    rhs_norm = np.linalg.norm(system.rhs)
    residual = float(
        np.linalg.norm(system.matrix @ x - system.rhs) / max(rhs_norm, 1e-300)
    )
    if not np.all(np.isfinite(x)) or residual > max(residual_tol, 1e-10):
        raise IllConditionedSystemError(
            f"solve residual {residual:.3e} exceeds {residual_tol:.1e}"
        )
    n = system.config.n_interfaces
    u = tuple(x[system.u_slice(i)].copy() for i in range(n))
    if system.sound_hard:
        dn = tuple(np.zeros_like(u[0]) for _ in range(n))
    else:
        dn = tuple(x[system.dn_slice(i)].copy() for i in range(n))
    return TraceSolution(system, u, dn, residual)


def solve_config(config: LayerConfig, Ms, sound_hard: bool = False) -> TraceSolution:
    """Assemble and solve in one step."""
    return solve_traces(assemble_system(config, Ms, sound_hard=sound_hard))


def classify_points(config: LayerConfig, points: np.ndarray) -> np.ndarray:
    """Layer index per point; works for concentric circles and stars."""
    points = np.atleast_2d(points)
    r = np.linalg.norm(points, axis=1)
    theta = np.arctan2(points[:, 1], points[:, 0])
    layers = np.zeros(points.shape[0], dtype=int)
    for curve in config.curves:
        layers += r < curve.rho(theta)
    return layers


def close_evaluation_mask(
    config: LayerConfig,
    grids,
    points: np.ndarray,
    n_spacings: float = CLOSE_EVAL_SPACINGS,
) -> np.ndarray:
    """True where a point sits within n_spacings grid spacings of an interface."""
    points = np.atleast_2d(points)
    r = np.linalg.norm(points, axis=1)
    theta = np.arctan2(points[:, 1], points[:, 0])
    mask = np.zeros(points.shape[0], dtype=bool)
    for grid in grids:
        h = 2 * np.pi / grid.M * grid.jacobians.mean()
        mask |= np.abs(r - grid.curve.rho(theta)) < n_spacings * h
    return mask


def eval_field(
    traces: TraceSolution,
    points,
    warn_close: bool = True,
) -> np.ndarray:
    """Total field at off-interface Cartesian points via the PTR.

    Uses the layer-appropriate boundary representation; points inside the
    close-evaluation band are still evaluated but trigger a warning.
    """
    points = np.asarray(points, dtype=float)
    scalar = points.ndim == 1
    pts = np.atleast_2d(points)
    config = traces.config
    grids = traces.grids
    k = config.wavenumbers
    betas = config.betas
    n_layers = config.n_layers
    out = np.zeros(pts.shape[0], dtype=complex)

    if warn_close and close_evaluation_mask(config, grids, pts).any():
        warnings.warn(
            "evaluating within the close-evaluation band; quadrature weights "
            "are untrusted there",
            CloseEvaluationWarning,
            stacklevel=2,
        )

    layers = classify_points(config, pts)
    for lay in np.unique(layers):
        sel = layers == lay
        tgt = pts[sel]
        if lay == 0:
            val = incident_field(config, tgt)
            S, D = cross_layer_matrices(grids[0], k[0], tgt)
            if traces.system.sound_hard:
                val = val + D @ traces.u_traces[0]
            else:
                val = val + D @ traces.u_traces[0] - S @ traces.dn_traces[0]
        elif traces.system.sound_hard:
            val = np.zeros(tgt.shape[0], dtype=complex)
        elif lay == n_layers - 1:
            S, D = cross_layer_matrices(grids[-1], k[-1], tgt)
            val = -D @ traces.u_traces[-1] + betas[-1] * (S @ traces.dn_traces[-1])
        else:
            So, Do = cross_layer_matrices(grids[lay - 1], k[lay], tgt)
            Si, Di = cross_layer_matrices(grids[lay], k[lay], tgt)
            val = (
                -Do @ traces.u_traces[lay - 1]
                + betas[lay - 1] * (So @ traces.dn_traces[lay - 1])
                + Di @ traces.u_traces[lay]
                - Si @ traces.dn_traces[lay]
            )
        out[sel] = val
    return out[0] if scalar else out
