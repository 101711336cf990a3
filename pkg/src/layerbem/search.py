"""Iterative per-interface resolution search and points-per-wavelength rules."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analytic import LayerConfig, ModeCoefficients
from .errors import boundary_l2_error
from .solver import solve_config


class SearchCapReached(RuntimeError):
    """The point-count cap was hit before every interface met the target."""


@dataclass(frozen=True)
class SearchSchedule:
    m_start: int = 16
    delta_m: int = 2
    eps: float = 1e-6
    m_cap: int = 1024
    # Stopping thresholds compare the trace error normalized by the analytic
    # trace norm; set False for the raw L2 distance.
    relative: bool = True

    def __post_init__(self):
        if self.m_start % 2 or self.m_start < 4:
            raise ValueError("m_start must be even and at least 4")
        if self.delta_m % 2 or self.delta_m <= 0:
            raise ValueError("delta_m must be a positive even integer")
        if not self.eps > 0.0:
            raise ValueError("eps must be positive")


@dataclass(frozen=True)
class SearchResult:
    M_tar: tuple[int, ...]
    errors: tuple[float, ...]
    nppw: tuple[float, ...]
    trace: tuple[tuple[tuple[int, ...], tuple[float, ...]], ...]

    @property
    def iterations(self) -> int:
        return len(self.trace)


def adjacent_wavenumber(config: LayerConfig, interface: int) -> float:
    """Larger of the two wavenumbers meeting at interface i."""
    return max(config.wavenumbers[interface], config.wavenumbers[interface + 1])


def estimate_nppw(M: int, R: float, k: float) -> float:
    return M / (R * k)


def general_rule_estimate(config: LayerConfig, nppw: float) -> tuple[int, ...]:
    """M_i = nppw * R_i * max adjacent k, rounded up to an even count."""
    if not nppw > 0.0:
        raise ValueError("nppw must be positive")
    out = []
    for i, R in enumerate(config.radii):
        m = int(np.ceil(nppw * R * adjacent_wavenumber(config, i)))
        out.append(m + m % 2)
    return tuple(out)


def _measure(config, coeffs, Ms, sound_hard, relative):
    traces = solve_config(config, Ms, sound_hard=sound_hard)
    return tuple(
        boundary_l2_error(traces, coeffs, i, relative=relative)
        for i in range(len(Ms))
    )


def find_optimal_M(
    config: LayerConfig,
    coeffs: ModeCoefficients,
    schedule: SearchSchedule = SearchSchedule(),
    sound_hard: bool = False,
) -> SearchResult:
    """Smallest per-interface point counts meeting the target accuracy.

    Every interface starts at m_start.  While any interface violates the
    threshold, all violators are refined by delta_m; interfaces are coupled
    through the system matrix, so refining only the worst violator can
    deadlock when an under-resolved neighbour dominates its error.  A final
    trim pass walks each interface (lowest index first) back down while all
    errors stay below the threshold, which certifies minimality: reducing any
    single returned count by delta_m breaks the target somewhere.
    """
    n = len(config.radii)
    Ms = [schedule.m_start] * n
    log: list[tuple[tuple[int, ...], tuple[float, ...]]] = []

    errs = _measure(config, coeffs, Ms, sound_hard, schedule.relative)
    log.append((tuple(Ms), errs))
    while any(e > schedule.eps for e in errs):
        for i in range(n):
            if errs[i] > schedule.eps:
                Ms[i] += schedule.delta_m
        if max(Ms) > schedule.m_cap:
            raise SearchCapReached(
                "cap %d reached; unsatisfied interfaces: %s"
                % (schedule.m_cap,
                   [i for i in range(n) if errs[i] > schedule.eps]))
        errs = _measure(config, coeffs, Ms, sound_hard, schedule.relative)
        log.append((tuple(Ms), errs))

    changed = True
    while changed:
        changed = False
        for i in range(n):
            while Ms[i] - schedule.delta_m >= 4:
                trial = list(Ms)
                trial[i] -= schedule.delta_m
                errs_t = _measure(config, coeffs, trial, sound_hard,
                                  schedule.relative)
                log.append((tuple(trial), errs_t))
                if max(errs_t) > schedule.eps:
                    break
                Ms, errs, changed = trial, errs_t, True

    nppw = tuple(
        estimate_nppw(
            Ms[i], config.radii[i],
            # a sound-hard boundary has no interior wave to resolve
            config.wavenumbers[i] if sound_hard
            else adjacent_wavenumber(config, i),
        )
        for i in range(n)
    )
    return SearchResult(tuple(Ms), errs, nppw, tuple(log))


def find_machine_precision_M(
    config: LayerConfig,
    coeffs: ModeCoefficients,
    schedule: SearchSchedule | None = None,
    sound_hard: bool = False,
) -> SearchResult:
    if schedule is None:
        schedule = SearchSchedule(eps=1e-12)
    return find_optimal_M(config, coeffs, schedule, sound_hard=sound_hard)
