"""Built-in experiment configurations.

The two study tables share a "case 5" label with different parameters; the
registry keeps both as case5a (three wavenumbers (8, 2, 6)) and case5b
((2, 6, 1)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .analytic import LayerConfig
from .geometry import InterfaceCurve


@dataclass(frozen=True)
class CaseSpec:
    name: str
    wavenumbers: tuple[float, ...]
    radii: tuple[float, ...]
    star_amplitudes: tuple[float, ...] = ()
    star_lobes: tuple[int, ...] = ()
    sound_hard: bool = False

    def __post_init__(self):
        if len(self.wavenumbers) != len(self.radii) + 1:
            raise ValueError("need exactly one more wavenumber than radii")
        if self.star_amplitudes and len(self.star_amplitudes) != len(self.radii):
            raise ValueError("one star amplitude per interface")

    @property
    def betas(self) -> tuple[float, ...]:
        k = self.wavenumbers
        return tuple(k[j + 1] ** 2 / k[j] ** 2 for j in range(len(self.radii)))

    def config(self, star_a: float | None = None,
               star_n: int | None = None) -> LayerConfig:
        """LayerConfig for this case; star_a/star_n perturb every interface."""
        amps = self.star_amplitudes or (0.0,) * len(self.radii)
        lobes = self.star_lobes or (0,) * len(self.radii)
        if star_a is not None:
            amps = (star_a,) * len(self.radii)
            lobes = (star_n if star_n is not None else 10,) * len(self.radii)
        curves = tuple(
            InterfaceCurve(radius=r, amplitude=a, lobes=n)
            for r, a, n in zip(self.radii, amps, lobes)
        )
        return LayerConfig(self.wavenumbers, self.radii, curves=curves)


CASES: dict[str, CaseSpec] = {
    "case1": CaseSpec("case1", (2.0, 6.0), (4.0,)),
    "case2": CaseSpec("case2", (6.0, 2.0), (4.0,)),
    "case3": CaseSpec("case3", (2.0, 10.0), (4.0,)),
    "case4": CaseSpec("case4", (10.0, 2.0), (4.0,)),
    "case5a": CaseSpec("case5a", (8.0, 2.0, 6.0), (6.0, 2.0)),
    "case5b": CaseSpec("case5b", (2.0, 6.0, 1.0), (4.0, 2.0)),
    "case6": CaseSpec("case6", (2.0, 6.0, 10.0), (4.0, 2.0)),
    "case7": CaseSpec("case7", (6.0, 2.0, 4.0, 1.0), (4.0, 2.0, 1.0)),
}


def get_case(name: str) -> CaseSpec:
    try:
        return CASES[name]
    except KeyError:
        raise KeyError(
            f"unknown case {name!r}; available: {', '.join(sorted(CASES))}"
        ) from None
