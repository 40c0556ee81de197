"""Smooth pair potentials with closed-form derivatives up to third order.

Both built-in families are normalized so the well sits at unit distance with
depth -1, which makes F = 1 the natural reference strain for every chain
model built on top of them:

    lennard_jones:  phi(r) = r**-12 - 2 r**-6
    morse(a):       phi(r) = exp(-2a(r-1)) - 2 exp(-a(r-1)),  a > 0

A `Custom` potential can be assembled from four callables (orders 0..3) for
code-level experiments; there is no file format for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import ArgumentError, DomainError

__all__ = [
    "PairPotential",
    "lennard_jones",
    "morse",
    "custom",
    "parse_potential",
    "fd_consistency",
]


@dataclass(frozen=True)
class PairPotential:
    """A pair interaction phi on (0, inf) with analytic derivatives.

    `derivs[k]` evaluates d^k phi / dr^k in closed form.
    """

    family: str
    derivs: Sequence[Callable[[float], float]]
    params: dict = field(default_factory=dict)

    def __call__(self, r: float, order: int = 0) -> float:
        return evaluate(self, r, order)

    def label(self) -> str:
        if self.family == "morse":
            return f"morse:a={self.params['a']:g}"
        return self.family


def evaluate(potential: PairPotential, r: float, order: int = 0) -> float:
    """Evaluate d^order phi / dr^order at r > 0 (closed form, no differencing)."""
    if not r > 0.0:
        raise DomainError(f"pair potential needs r > 0, got r = {r}")
    if order not in (0, 1, 2, 3):
        raise ArgumentError(f"derivative order must be in 0..3, got {order}")
    return potential.derivs[order](r)


def lennard_jones() -> PairPotential:
    """Lennard-Jones potential with minimum at r = 1 and depth -1."""
    return PairPotential(
        family="lj",
        derivs=(
            lambda r: r**-12 - 2.0 * r**-6,
            lambda r: -12.0 * r**-13 + 12.0 * r**-7,
            lambda r: 156.0 * r**-14 - 84.0 * r**-8,
            lambda r: -2184.0 * r**-15 + 672.0 * r**-9,
        ),
    )


def morse(a: float) -> PairPotential:
    """Morse potential with stiffness a > 0, minimum at r = 1 and depth -1."""
    if not a > 0.0:
        raise ArgumentError(f"morse stiffness must be positive, got {a}")

    def deriv(order):
        def f(r, _k=order):
            u = math.exp(-2.0 * a * (r - 1.0))
            v = math.exp(-a * (r - 1.0))
            return (-2.0 * a) ** _k * u - 2.0 * (-a) ** _k * v

        return f

    return PairPotential(family="morse", derivs=tuple(deriv(k) for k in range(4)), params={"a": a})


def custom(derivs: Sequence[Callable[[float], float]], label: str = "custom") -> PairPotential:
    """Wrap four callables (phi, phi', phi'', phi''') as a potential."""
    if len(derivs) != 4:
        raise ArgumentError("custom potential needs exactly four derivative callables")
    return PairPotential(family=label, derivs=tuple(derivs))


def parse_potential(text: str) -> PairPotential:
    """Parse a CLI potential spec: 'lj' or 'morse:a=<float>'."""
    if text == "lj":
        return lennard_jones()
    if text.startswith("morse"):
        try:
            _, params = text.split(":", 1)
            key, value = params.split("=", 1)
            if key.strip() != "a":
                raise ValueError
            return morse(float(value))
        except (ValueError, ArgumentError) as exc:
            raise ArgumentError(f"cannot parse potential spec {text!r}") from exc
    raise ArgumentError(f"unknown potential family in {text!r}")


def fd_consistency(potential: PairPotential, r: float, h: float = 1e-5) -> float:
    """Compare each analytic derivative against a central difference of the
    next-lower order and return the maximum relative discrepancy over orders 1..3.

    The relative scale is max(1, |analytic|), so points where a derivative
    crosses zero do not dominate the report.
    """
    if not h > 0.0:
        raise ArgumentError(f"step must be positive, got {h}")
    if not r - 3.0 * h > 0.0:
        raise ArgumentError(f"stencil leaves (0, inf): r = {r}, h = {h}")
    worst = 0.0
    for order in (1, 2, 3):
        fd = (evaluate(potential, r + h, order - 1) - evaluate(potential, r - h, order - 1)) / (2.0 * h)
        exact = evaluate(potential, r, order)
        worst = max(worst, abs(fd - exact) / max(1.0, abs(exact)))
    return worst
