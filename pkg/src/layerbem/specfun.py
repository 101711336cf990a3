"""Cylinder special functions and the 2D Helmholtz fundamental solution.

Thin, validated wrappers around scipy.special that expose exactly the
quantities the rest of the package needs: Bessel J_m, Y_m with derivatives,
Hankel H_m^(1), the free-space kernel Phi(x, y) = (i/4) H_0^(1)(k|x-y|),
and its derivative along the source normal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

MAX_ORDER = 200
DIST_FLOOR = 1e-14


class OrderLimitError(ValueError):
    """Requested order exceeds the configured maximum."""


@dataclass(frozen=True)
class CylinderEval:
    """J_m, Y_m and their derivatives at a single (order, argument) pair."""

    order: int
    argument: float
    j_value: float
    y_value: float
    jprime_value: float
    yprime_value: float


def bessel_jy(order: int, x: float, include_y: bool = True) -> CylinderEval:
    """Evaluate J_m(x), Y_m(x) and their derivatives.

    x = 0 is allowed only with include_y=False (the Y fields are NaN there).
    Raises OverflowError when Y_m(x) leaves the representable range
    (large order, small argument).
    """
    if order < 0:
        raise ValueError("negative orders are not supported; use J_{-m} = (-1)^m J_m")
    if order > MAX_ORDER:
        raise OrderLimitError(f"order {order} exceeds maximum {MAX_ORDER}")
    if x < 0:
        raise ValueError(f"argument must be nonnegative, got {x}")
    j = float(special.jv(order, x))
    jp = float(special.jvp(order, x))
    if x == 0.0:
        if include_y:
            raise ValueError("Y_m is singular at x = 0")
        return CylinderEval(order, x, j, float("nan"), jp, float("nan"))
    y = float(special.yv(order, x))
    yp = float(special.yvp(order, x))
    if include_y and not (np.isfinite(y) and np.isfinite(yp)):
        raise OverflowError(f"Y_{order}({x}) overflows the representable range")
    return CylinderEval(order, x, j, y, jp, yp)


def hankel1(order: int, x: float) -> tuple[complex, complex]:
    """H_m^(1)(x) = J_m(x) + i Y_m(x) and its derivative.

    Built from the same bessel_jy values, so the two surfaces agree
    bit-for-bit.
    """
    c = bessel_jy(order, x)
    return (
        complex(c.j_value, c.y_value),
        complex(c.jprime_value, c.yprime_value),
    )


def fundamental_solution(k: float, x, y, dist_floor: float = DIST_FLOOR) -> complex:
    """Phi(x, y) = (i/4) H_0^(1)(k |x - y|)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dist = float(np.hypot(*(x - y)))
    if dist < dist_floor:
        raise ValueError(f"source and target coincide (dist={dist:.3e})")
    return 0.25j * complex(special.hankel1(0, k * dist))


def fundamental_solution_normal_derivative(
    k: float, x, y, n_y, dist_floor: float = DIST_FLOOR
) -> complex:
    """Derivative of Phi(x, y) along the unit normal n_y at the source point.

    Equals (ik/4) H_1^(1)(k|x-y|) ((x - y) . n_y) / |x-y|; verified against a
    central finite difference of Phi in the tests.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n_y = np.asarray(n_y, dtype=float)
    diff = x - y
    dist = float(np.hypot(*diff))
    if dist < dist_floor:
        raise ValueError(f"source and target coincide (dist={dist:.3e})")
    return 0.25j * k * complex(special.hankel1(1, k * dist)) * float(diff @ n_y) / dist
