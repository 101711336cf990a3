"""Closed-form reference solutions for concentric circular interfaces.

Multilayer transmission coefficients come from independent 2N x 2N per-mode
systems enforcing continuity of u and of the contrast-weighted normal
derivative at every radius. The single-interface sound-hard (Neumann)
solution is available in closed form.

The plane wave e^{i k0 a.x} is expanded in cylinder harmonics over all
integer orders; negative orders are folded onto m >= 0 with
J_{-m} = (-1)^m J_m, so mode m of the incident field carries a unit
coefficient and the -m coefficients follow by linearity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .geometry import InterfaceCurve

COND_LIMIT = 1e14
TAIL_TOL = 1e-14


class NearResonanceError(RuntimeError):
    """A per-mode system is too ill-conditioned to trust."""


@dataclass(frozen=True)
class LayerConfig:
    """Wavenumbers, interfaces and incident direction of one problem instance.

    wavenumbers has one entry per layer (outermost first); radii one entry
    per interface, strictly decreasing.
    """

    wavenumbers: tuple[float, ...]
    radii: tuple[float, ...]
    curves: tuple[InterfaceCurve, ...] = ()
    incident_direction: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        k = tuple(float(v) for v in self.wavenumbers)
        r = tuple(float(v) for v in self.radii)
        object.__setattr__(self, "wavenumbers", k)
        object.__setattr__(self, "radii", r)
        if len(k) != len(r) + 1:
            raise ValueError(f"need |k| = |r| + 1, got {len(k)} and {len(r)}")
        if any(v <= 0 for v in k):
            raise ValueError("wavenumbers must be positive")
        if not all(r[i] > r[i + 1] for i in range(len(r) - 1)) or (r and r[-1] <= 0):
            raise ValueError(f"radii must be strictly decreasing and positive: {r}")
        if not self.curves:
            object.__setattr__(
                self, "curves", tuple(InterfaceCurve(radius=v) for v in r)
            )
        if len(self.curves) != len(r):
            raise ValueError("one curve per interface required")
        a = np.asarray(self.incident_direction, dtype=float)
        if abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise ValueError(f"incident direction must be a unit vector: {a}")

    @property
    def n_interfaces(self) -> int:
        return len(self.radii)

    @property
    def n_layers(self) -> int:
        return len(self.wavenumbers)

    @property
    def betas(self) -> tuple[float, ...]:
        k = self.wavenumbers
        return tuple(k[j + 1] ** 2 / k[j] ** 2 for j in range(self.n_interfaces))

    @property
    def is_circular(self) -> bool:
        return all(c.kind == "circle" for c in self.curves)

    def angle_shift(self) -> float:
        """Rotation mapping the incident direction onto (0, 1)."""
        ax, ay = self.incident_direction
        return math.atan2(ay, ax) - math.pi / 2

    def layer_of_radius(self, r) -> np.ndarray:
        """Layer index for circular interfaces (0 = exterior)."""
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=int)
        for radius in self.radii:
            out += r < radius
        return out


def incident_field(config: LayerConfig, points) -> np.ndarray:
    """Plane wave e^{i k0 a.x} at Cartesian points, shape (..., 2)."""
    points = np.asarray(points, dtype=float)
    a = np.asarray(config.incident_direction, dtype=float)
    return np.exp(1j * config.wavenumbers[0] * (points @ a))


@dataclass(frozen=True)
class ModeCoefficients:
    """Truncated series coefficients, one row per mode m = 0..m_max."""

    m_max: int
    scattered: np.ndarray = field(repr=False)  # A_m, exterior
    ring_h: np.ndarray = field(repr=False)  # B_{j,m}, layers 1..N-1
    ring_j: np.ndarray = field(repr=False)  # C_{j,m}, layers 1..N-1
    core: np.ndarray = field(repr=False)  # E_m, innermost layer
    sound_hard: bool = False

    def tail_ratio(self, config: "LayerConfig") -> float:
        """Largest relative last-mode contribution to any interface trace.

        Raw coefficients are a poor truncation measure: A_m may shrink while
        its radial factor H_m(k0 R) grows with m, so the tail is judged on
        the products that actually enter the series.
        """
        worst = 0.0
        for i, R in enumerate(config.radii):
            for layer in (i, i + 1):
                prof = np.abs(
                    _radial_profiles(self, config, layer, np.array([R]), False)
                ).ravel()
                scale = prof.max()
                if scale > 0.0:
                    worst = max(worst, float(prof[-1] / scale))
        return worst


def _zfun(kind: str, m: int, z: float, deriv: bool) -> complex:
    if kind == "J":
        return complex(special.jvp(m, z)) if deriv else complex(special.jv(m, z))
    return complex(special.h1vp(m, z)) if deriv else complex(special.hankel1(m, z))


def _basis_slots(config: LayerConfig, m: int, layer: int):
    """Column slots with per-layer basis normalizations.

    Each radial basis function is scaled by its magnitude at the radius where
    it peaks inside the layer (H at the inner radius, J at the outer), so the
    per-mode system stays well scaled at high order.
    """
    k = config.wavenumbers
    radii = config.radii
    size = 2 * config.n_interfaces
    kk = k[layer]
    if layer == 0:
        norm = abs(_zfun("H", m, kk * radii[0], False))
        return [(0, "H", kk, norm)]
    if layer == config.n_layers - 1:
        norm = abs(_zfun("J", m, kk * radii[-1], False))
        return [(size - 1, "J", kk, max(norm, 1e-300))]
    base = 1 + 2 * (layer - 1)
    norm_h = abs(_zfun("H", m, kk * radii[layer], False))
    norm_j = max(abs(_zfun("J", m, kk * radii[layer - 1], False)), 1e-300)
    return [(base, "H", kk, norm_h), (base + 1, "J", kk, norm_j)]


def _mode_system(config: LayerConfig, m: int):
    """Matrix, rhs and column normalizations of one per-mode system."""
    k = config.wavenumbers
    radii = config.radii
    betas = config.betas
    n = config.n_interfaces
    size = 2 * n
    mat = np.zeros((size, size), dtype=complex)
    rhs = np.zeros(size, dtype=complex)
    norms = np.ones(size)
    for i in range(n):
        R = radii[i]
        row_u, row_du = 2 * i, 2 * i + 1
        # continuity: u_{i+1}(R) - u_i(R) = [incident part when i = 0]
        for col, kind, kk, norm in _basis_slots(config, m, i + 1):
            norms[col] = norm
            mat[row_u, col] += _zfun(kind, m, kk * R, False) / norm
            mat[row_du, col] += kk * _zfun(kind, m, kk * R, True) / norm
        for col, kind, kk, norm in _basis_slots(config, m, i):
            norms[col] = norm
            mat[row_u, col] -= _zfun(kind, m, kk * R, False) / norm
            mat[row_du, col] -= betas[i] * kk * _zfun(kind, m, kk * R, True) / norm
        if i == 0:
            rhs[row_u] += _zfun("J", m, k[0] * R, False)
            rhs[row_du] += betas[0] * k[0] * _zfun("J", m, k[0] * R, True)
    return mat, rhs, norms


def solve_mode_coefficients(
    config: LayerConfig,
    m_max: int | None = None,
    tail_tol: float = TAIL_TOL,
    cond_limit: float = COND_LIMIT,
) -> ModeCoefficients:
    """Solve the per-mode transmission systems for m = 0..m_max.

    When m_max is omitted it starts at ceil(k_max R_0) + 16 and grows until
    the scattered-coefficient tail falls below tail_tol.
    """
    if not config.is_circular:
        raise ValueError("analytic coefficients require circular interfaces")
    auto = m_max is None
    if auto:
        m_max = int(math.ceil(max(config.wavenumbers) * config.radii[0])) + 16
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    while True:
        coeffs = _solve_modes(config, m_max, cond_limit)
        if not auto or coeffs.tail_ratio(config) < tail_tol:
            return coeffs
        m_max += 8


def _solve_modes(config: LayerConfig, m_max: int, cond_limit: float) -> ModeCoefficients:
    n = config.n_interfaces
    A = np.zeros(m_max + 1, dtype=complex)
    B = np.zeros((max(n - 1, 0), m_max + 1), dtype=complex)
    C = np.zeros_like(B)
    E = np.zeros(m_max + 1, dtype=complex)
    for m in range(m_max + 1):
        mat, rhs, norms = _mode_system(config, m)
        rscale = np.abs(mat).max(axis=1)
        rscale[rscale == 0] = 1.0
        mat_s = mat / rscale[:, None]
        cond = np.linalg.cond(mat_s)
        if cond > cond_limit:
            raise NearResonanceError(
                f"mode {m}: condition number {cond:.3e} exceeds {cond_limit:.1e}"
            )
        sol = np.linalg.solve(mat_s, rhs / rscale) / norms
        A[m] = sol[0]
        for j in range(n - 1):
            B[j, m] = sol[1 + 2 * j]
            C[j, m] = sol[2 + 2 * j]
        E[m] = sol[-1]
    return ModeCoefficients(m_max, A, B, C, E)


def sound_hard_coefficients(
    config: LayerConfig, m_max: int | None = None, tail_tol: float = TAIL_TOL
) -> ModeCoefficients:
    """A_m = -J'_m(k0 R0) / H'_m(k0 R0); the interior field vanishes."""
    if config.n_interfaces != 1:
        raise ValueError("sound-hard solution requires a single interface")
    k0, R0 = config.wavenumbers[0], config.radii[0]
    auto = m_max is None
    if auto:
        m_max = int(math.ceil(k0 * R0)) + 16
    while True:
        m = np.arange(m_max + 1)
        jp = special.jvp(m, k0 * R0)
        hp = special.h1vp(m, k0 * R0)
        A = -jp / hp
        coeffs = ModeCoefficients(
            m_max, A.astype(complex), np.zeros((0, m_max + 1), complex),
            np.zeros((0, m_max + 1), complex), np.zeros(m_max + 1, complex),
            sound_hard=True,
        )
        if not auto or coeffs.tail_ratio(config) < tail_tol:
            return coeffs
        m_max += 8


def _radial_profiles(coeffs: ModeCoefficients, config: LayerConfig, layer: int,
                     r: np.ndarray, deriv: bool) -> np.ndarray:
    """f_m(r) (or d/dr f_m) for every mode, shape (m_max+1, len(r))."""
    m = np.arange(coeffs.m_max + 1)[:, None]
    n_layers = config.n_layers
    if coeffs.sound_hard and layer >= 1:
        return np.zeros((coeffs.m_max + 1, r.size), dtype=complex)
    k = config.wavenumbers[layer]
    z = k * r[None, :]
    if deriv:
        jm = k * special.jvp(m, z)
        hm = k * special.h1vp(m, z) if layer < n_layers - 1 or layer == 0 else None
    else:
        jm = special.jv(m, z)
        hm = special.hankel1(m, z) if layer < n_layers - 1 or layer == 0 else None
    if layer == 0:
        # scattered part only; the incident plane wave is added in closed form
        return coeffs.scattered[:, None] * hm
    if layer == n_layers - 1:
        return coeffs.core[:, None] * jm
    j = layer - 1
    return coeffs.ring_h[j][:, None] * hm + coeffs.ring_j[j][:, None] * jm


def _assemble_series(profiles: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Sum over modes with the negative-order fold (-1)^m f_m e^{-im phi}."""
    m_max = profiles.shape[0] - 1
    m = np.arange(m_max + 1)[:, None]
    phase = np.exp(1j * m * phi[None, :])
    signs = np.where(m % 2 == 0, 1.0, -1.0)
    total = profiles[0] + (
        profiles[1:] * (phase[1:] + signs[1:] * np.conj(phase[1:]))
    ).sum(axis=0)
    return total


def eval_analytic(
    coeffs: ModeCoefficients,
    config: LayerConfig,
    r,
    theta,
    layer: int | None = None,
    deriv: bool = False,
):
    """Total analytic field (or its radial derivative) at polar points.

    The layer is inferred from r unless given explicitly (useful exactly on
    an interface, where both one-sided values exist).
    """
    r_arr, th_arr = np.broadcast_arrays(
        np.asarray(r, dtype=float), np.asarray(theta, dtype=float)
    )
    shape = r_arr.shape
    r_flat = r_arr.ravel()
    phi = th_arr.ravel() - config.angle_shift()
    out = np.zeros(r_flat.size, dtype=complex)
    layers = (
        np.full(r_flat.size, layer, dtype=int)
        if layer is not None
        else config.layer_of_radius(r_flat)
    )
    for lay in np.unique(layers):
        sel = layers == lay
        profiles = _radial_profiles(coeffs, config, int(lay), r_flat[sel], deriv)
        out[sel] = _assemble_series(profiles, phi[sel])
        if lay == 0:
            k0 = config.wavenumbers[0]
            plane = np.exp(1j * k0 * r_flat[sel] * np.sin(phi[sel]))
            if deriv:
                plane = plane * (1j * k0 * np.sin(phi[sel]))
            out[sel] += plane
    result = out.reshape(shape)
    return result if shape else complex(result)


def eval_sound_hard(config: LayerConfig, r, theta, m_max: int | None = None):
    """Sound-hard exterior series; identically zero inside the obstacle."""
    coeffs = sound_hard_coefficients(config, m_max)
    return eval_analytic(coeffs, config, r, theta)


def analytic_traces(coeffs: ModeCoefficients, config: LayerConfig, interface: int,
                    thetas) -> tuple[np.ndarray, np.ndarray]:
    """(u, du/dn) on interface i, taken from the outer layer side."""
    thetas = np.asarray(thetas, dtype=float)
    R = config.radii[interface]
    u = eval_analytic(coeffs, config, R, thetas, layer=interface)
    du = eval_analytic(coeffs, config, R, thetas, layer=interface, deriv=True)
    return u, du


def transmission_residuals(
    coeffs: ModeCoefficients, config: LayerConfig, n_theta: int | None = None
) -> tuple[float, float]:
    """Max relative jump of u and of beta-weighted du/dr over all interfaces."""
    if n_theta is None:
        n_theta = max(4 * coeffs.m_max, 64)
    thetas = 2 * np.pi * np.arange(n_theta) / n_theta
    worst_u = worst_du = 0.0
    for i in range(config.n_interfaces):
        R = config.radii[i]
        u_out = eval_analytic(coeffs, config, R, thetas, layer=i)
        u_in = eval_analytic(coeffs, config, R, thetas, layer=i + 1)
        du_out = eval_analytic(coeffs, config, R, thetas, layer=i, deriv=True)
        du_in = eval_analytic(coeffs, config, R, thetas, layer=i + 1, deriv=True)
        scale = max(np.abs(u_out).max(), np.abs(du_out).max(), 1e-300)
        worst_u = max(worst_u, float(np.abs(u_in - u_out).max() / scale))
        worst_du = max(
            worst_du,
            float(np.abs(du_in - config.betas[i] * du_out).max() / scale),
        )
    return worst_u, worst_du
