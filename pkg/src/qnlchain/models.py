"""Energy models on periodic chains: values, first variations, Hessians.

Three pair-interaction models share one term table:

  atomistic    eps * sum_l [ phi(|y'_l|) + phi(|y'_{l+1} + y'_l|) ]
  cauchy_born  eps * sum_l [ phi(|y'_l|) + phi(2 |y'_l|) ]
  qnl          atomistic next-nearest terms on bonds of a nonlocal region
               {1..K}, local phi(2|y'_l|) terms elsewhere, and half-weighted
               phi(2|y'_l|) terms on the two interfacial bonds {1, K+1}

plus an optional bond-angle energy eps * sum_l alpha * (1 - cos beta_l) over
signed turning angles beta_l. Every term is a smooth function of one or two
bond vectors, so gradients and Hessians are assembled in closed form from the
chain rule; finite differencing is used only in the test suite.

First variations are returned as Riesz representers with respect to the
lattice inner product: <first_variation, v> equals the directional
derivative for every periodic mean-zero v.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import (
    ChainGeometry,
    InterfacePartition,
    SubspaceOperators,
    backward_diff,
    strains,
)
from .errors import ArgumentError, DomainError, GeometryError
from .potentials import PairPotential

__all__ = [
    "ModelSpec",
    "atomistic",
    "cauchy_born",
    "qnl",
    "energy",
    "first_variation",
    "hessian",
    "second_variation",
    "ghost_force",
    "atomistic_quadratic_rearranged",
    "qnl_quadratic_rearranged",
]

MODEL_KINDS = ("atomistic", "cauchy_born", "qnl")


@dataclass(frozen=True)
class ModelSpec:
    """Which energy to evaluate: pair model kind, potential, bond-angle weight."""

    kind: str
    potential: PairPotential
    alpha: float = 0.0
    partition: InterfacePartition | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ArgumentError(f"unknown model kind {self.kind!r}")
        if self.alpha < 0.0:
            raise ArgumentError(f"bond-angle weight must be >= 0, got {self.alpha}")
        if self.kind == "qnl" and self.partition is None:
            raise ArgumentError("qnl model needs an InterfacePartition")
        if self.kind != "qnl" and self.partition is not None:
            raise ArgumentError("only the qnl model takes a partition")

    def label(self) -> str:
        return self.kind


def atomistic(potential, alpha=0.0) -> ModelSpec:
    return ModelSpec("atomistic", potential, alpha)


def cauchy_born(potential, alpha=0.0) -> ModelSpec:
    return ModelSpec("cauchy_born", potential, alpha)


def qnl(potential, partition: InterfacePartition, alpha=0.0) -> ModelSpec:
    return ModelSpec("qnl", potential, alpha, partition)


# --------------------------------------------------------------------------
# term tables
#
# Each pair term contributes eps * w * phi(c * |(y_b - y_a) / eps|) where a, b
# are atom labels (possibly outside 1..N; the periodic image is resolved with
# the period shift). Tables are triples of integer/float arrays (w, c, la, lb).
# --------------------------------------------------------------------------


def _pair_terms(model: ModelSpec, N: int):
    ell = np.arange(1, N + 1)
    w, c, la, lb = [], [], [], []

    def add(weight, scale, a, b):
        w.append(np.full(len(a), float(weight)))
        c.append(np.full(len(a), float(scale)))
        la.append(np.asarray(a))
        lb.append(np.asarray(b))

    add(1.0, 1.0, ell - 1, ell)  # nearest bonds, all models
    if model.kind == "atomistic":
        add(1.0, 1.0, ell - 1, ell + 1)
    elif model.kind == "cauchy_born":
        add(1.0, 2.0, ell - 1, ell)
    else:
        K = model.partition.K
        nl = np.arange(1, K + 1)
        add(1.0, 1.0, nl - 1, nl + 1)
        loc = np.arange(K + 2, N + 1)
        if len(loc):
            add(1.0, 2.0, loc - 1, loc)
        add(0.5, 2.0, np.array([0, K]), np.array([1, K + 1]))
    return (np.concatenate(w), np.concatenate(c), np.concatenate(la), np.concatenate(lb))


def _label_positions(labels: np.ndarray, positions: np.ndarray, shift: np.ndarray) -> np.ndarray:
    """Positions of atoms by 1-based label, periodically extended with the shift."""
    N = len(positions)
    wraps = (labels - 1) // N
    rows = (labels - 1) % N
    return positions[rows] + wraps[:, None] * shift[None, :]


def _bond_data(model, positions, shift, eps):
    w, c, la, lb = _pair_terms(model, len(positions))
    g = (_label_positions(lb, positions, shift) - _label_positions(la, positions, shift)) / eps
    r = np.linalg.norm(g, axis=1)
    if np.any(r <= 1e-12):
        raise GeometryError("coincident neighbors: zero bond length")
    return w, c, la, lb, g, r


def _phi_vec(potential, x, order):
    return np.array([potential(v, order) for v in x])


# --------------------------------------------------------------------------
# energy / gradient / hessian
# --------------------------------------------------------------------------


def energy(model: ModelSpec, geometry: ChainGeometry,
           displacement: np.ndarray | None = None) -> float:
    """Model energy at the (optionally displaced) configuration."""
    y = _positions(geometry, displacement)
    return energy_at(model, y, geometry.shift, geometry.eps)


def energy_at(model: ModelSpec, positions: np.ndarray, shift: np.ndarray, eps: float) -> float:
    w, c, _, _, _, r = _bond_data(model, positions, shift, eps)
    total = eps * float(np.sum(w * _phi_vec(model.potential, c * r, 0)))
    if model.alpha > 0.0:
        total += _angle_energy(model.alpha, positions, shift, eps)
    return total


def first_variation(model: ModelSpec, geometry: ChainGeometry,
                    displacement: np.ndarray | None = None) -> np.ndarray:
    """Riesz representer of the first variation at the given configuration."""
    y = _positions(geometry, displacement)
    return first_variation_at(model, y, geometry.shift, geometry.eps)


def first_variation_at(model, positions, shift, eps) -> np.ndarray:
    N = len(positions)
    w, c, la, lb, g, r = _bond_data(model, positions, shift, eps)
    coeff = w * c * _phi_vec(model.potential, c * r, 1) / r
    gvec = coeff[:, None] * g
    grad = np.zeros((N, 2))
    np.add.at(grad, (lb - 1) % N, gvec)
    np.add.at(grad, (la - 1) % N, -gvec)
    if model.alpha > 0.0:
        grad += _angle_gradient(model.alpha, positions, shift, eps)
    return grad / eps


def hessian(model: ModelSpec, geometry: ChainGeometry,
            displacement: np.ndarray | None = None) -> np.ndarray:
    """Full-coordinate (2N, 2N) second-variation matrix at the configuration."""
    y = _positions(geometry, displacement)
    return hessian_at(model, y, geometry.shift, geometry.eps)


def hessian_at(model, positions, shift, eps) -> np.ndarray:
    N = len(positions)
    w, c, la, lb, g, r = _bond_data(model, positions, shift, eps)
    phi1 = _phi_vec(model.potential, c * r, 1)
    phi2 = _phi_vec(model.potential, c * r, 2)
    h = np.zeros((2 * N, 2 * N))
    eye = np.eye(2)
    for k in range(len(w)):
        u = g[k] / r[k]
        proj = np.outer(u, u)
        m = (w[k] / eps) * (c[k] ** 2 * phi2[k] * proj
                            + (c[k] * phi1[k] / r[k]) * (eye - proj))
        _scatter_pair(h, (la[k] - 1) % N, (lb[k] - 1) % N, m)
    if model.alpha > 0.0:
        h += _angle_hessian(model.alpha, positions, shift, eps)
    return 0.5 * (h + h.T)


def _positions(geometry, displacement):
    if displacement is None:
        return geometry.positions
    displacement = np.asarray(displacement, dtype=float)
    if displacement.shape != geometry.positions.shape:
        raise ArgumentError(f"displacement shape {displacement.shape} does not match chain")
    return geometry.positions + displacement


def _scatter_pair(h, a, b, m):
    """Add the bond-spring block pattern of a 2x2 matrix m between atoms a, b."""
    sa, sb = 2 * a, 2 * b
    h[sb:sb + 2, sb:sb + 2] += m
    h[sa:sa + 2, sa:sa + 2] += m
    h[sa:sa + 2, sb:sb + 2] -= m
    h[sb:sb + 2, sa:sa + 2] -= m


# --------------------------------------------------------------------------
# bond-angle energy
#
# With a = y'_l and b = y'_{l+1}, each angle term is alpha * (1 - a.b/(|a||b|)).
# The cosine derivatives below are the exact first and second partials of
# cos beta with respect to the two bond vectors; both are exercised against
# finite differences in the tests.
# --------------------------------------------------------------------------


def _angle_bonds(positions, shift, eps):
    bonds = backward_diff(positions, 1, eps, shift=shift)
    a = bonds
    b = np.roll(bonds, -1, axis=0)
    ra = np.linalg.norm(a, axis=1)
    rb = np.linalg.norm(b, axis=1)
    if np.any(ra <= 1e-12) or np.any(rb <= 1e-12):
        raise GeometryError("coincident neighbors: zero bond length")
    cosb = np.einsum("ij,ij->i", a, b) / (ra * rb)
    if np.any(cosb <= -1.0 + 1e-12):
        raise DomainError("turning angle hit +/- pi; bond-angle energy undefined")
    return a, b, ra, rb, cosb


def _angle_energy(alpha, positions, shift, eps):
    _, _, _, _, cosb = _angle_bonds(positions, shift, eps)
    return eps * alpha * float(np.sum(1.0 - cosb))


def _angle_gradient(alpha, positions, shift, eps):
    N = len(positions)
    a, b, ra, rb, cosb = _angle_bonds(positions, shift, eps)
    ah = a / ra[:, None]
    bh = b / rb[:, None]
    # d(-cos)/da and d(-cos)/db, scaled by alpha (the eps energy weight and the
    # 1/eps of the difference map cancel).
    dda = -alpha * (bh - cosb[:, None] * ah) / ra[:, None]
    ddb = -alpha * (ah - cosb[:, None] * bh) / rb[:, None]
    rows = np.arange(N)
    grad = np.zeros((N, 2))
    np.add.at(grad, rows, dda)            # a = (y_{l} - y_{l-1})/eps, + at l
    np.add.at(grad, (rows - 1) % N, -dda)
    np.add.at(grad, (rows + 1) % N, ddb)  # b = (y_{l+1} - y_l)/eps, + at l+1
    np.add.at(grad, rows, -ddb)
    return grad


def _angle_hessian(alpha, positions, shift, eps):
    N = len(positions)
    a, b, ra, rb, cosb = _angle_bonds(positions, shift, eps)
    ah = a / ra[:, None]
    bh = b / rb[:, None]
    eye = np.eye(2)
    h = np.zeros((2 * N, 2 * N))
    scale = -alpha / eps
    for l in range(N):
        pa, pb = np.outer(ah[l], ah[l]), np.outer(bh[l], bh[l])
        mixed = np.outer(ah[l], bh[l])
        sym = mixed + mixed.T
        caa = (-sym + cosb[l] * (3.0 * pa - eye)) / ra[l] ** 2
        cbb = (-sym + cosb[l] * (3.0 * pb - eye)) / rb[l] ** 2
        cab = (eye - pb - pa + cosb[l] * mixed) / (ra[l] * rb[l])
        a0, a1 = (l - 1) % N, l          # atoms of bond a
        b0, b1 = l, (l + 1) % N          # atoms of bond b
        _scatter_pair(h, a0, a1, scale * caa)
        _scatter_pair(h, b0, b1, scale * cbb)
        _scatter_cross(h, (a0, a1), (b0, b1), scale * cab)
    return h


def _scatter_cross(h, apair, bpair, m):
    """Add m between difference a and difference b (and its transpose block)."""
    a0, a1 = apair
    b0, b1 = bpair
    for (i, si) in ((a1, 1.0), (a0, -1.0)):
        for (j, sj) in ((b1, 1.0), (b0, -1.0)):
            h[2 * i:2 * i + 2, 2 * j:2 * j + 2] += si * sj * m
            h[2 * j:2 * j + 2, 2 * i:2 * i + 2] += si * sj * m.T


# --------------------------------------------------------------------------
# compressed operators and ghost force
# --------------------------------------------------------------------------


def second_variation(model: ModelSpec, geometry: ChainGeometry,
                     constrained: bool = False,
                     ops: SubspaceOperators | None = None) -> np.ndarray:
    """Hessian at the uniform reference, compressed to the mean-zero subspace
    (or to its line-constrained part)."""
    if ops is None:
        ops = SubspaceOperators(geometry.N, constrained=constrained)
    return ops.compress_operator(hessian(model, geometry))


def ghost_force(model: ModelSpec, geometry: ChainGeometry,
                ops: SubspaceOperators | None = None):
    """Riesz representer of the first-variation mismatch against the atomistic
    model at the uniform reference, and its dual strain norm."""
    if model.kind == "atomistic":
        raise ArgumentError("ghost force is defined against the atomistic reference")
    reference = ModelSpec("atomistic", model.potential, model.alpha)
    field = first_variation(model, geometry) - first_variation(reference, geometry)
    if ops is None:
        ops = SubspaceOperators(geometry.N)
    return field, ops.dual_norm(field)


# --------------------------------------------------------------------------
# rearranged quadratic forms (verification targets only)
#
# These evaluate the summed-by-parts expressions for the second variation on
# uniform chains. Production Hessians come from hessian(); any disagreement
# between the two is a bug in one of them, which is exactly what the
# cross-check tests and `selfcheck` exist to catch.
# --------------------------------------------------------------------------


def _uniform_projection_stacks(geometry):
    bonds = geometry.bond_vectors()
    chords = np.roll(bonds, -1, axis=0) + bonds
    pl = np.einsum("li,lj->lij", bonds, bonds) / np.einsum("li,li->l", bonds, bonds)[:, None, None]
    pt = np.einsum("li,lj->lij", chords, chords) / np.einsum("li,li->l", chords, chords)[:, None, None]
    return pl, pt


def atomistic_quadratic_rearranged(geometry: ChainGeometry, u: np.ndarray, v: np.ndarray,
                                   potential: PairPotential) -> float:
    """Second variation of the atomistic energy on a uniform chain, in the
    rearranged form that exposes the curvature term -eps^2 phi''(2F1) |u''|^2."""
    eps = geometry.eps
    f1, f2 = strains(geometry)
    du, dv = backward_diff(u, 1, eps), backward_diff(v, 1, eps)
    ddu, ddv = backward_diff(du, 1, eps), backward_diff(dv, 1, eps)
    pl, pt = _uniform_projection_stacks(geometry)
    eye = np.eye(2)
    pot = potential

    su, sv = np.roll(du, -1, axis=0) + du, np.roll(dv, -1, axis=0) + dv
    ddu_next, ddv_next = np.roll(ddu, -1, axis=0), np.roll(ddv, -1, axis=0)
    pt_prev = np.roll(pt, 1, axis=0)

    gamma = pot(f1, 2) + 4.0 * pot(2.0 * f1, 2)
    total = np.einsum("li,lij,lj->", du, gamma * pl + (pot(f1, 1) / f1) * (eye - pl), dv)
    total += np.einsum("li,lij,lj->", su, (pot(2.0 * f1, 1) / (2.0 * f1)) * (eye - pt), sv)
    total -= eps ** 2 * pot(2.0 * f1, 2) * np.einsum("li,lij,lj->", ddu_next, pt, ddv_next)
    total += 2.0 * pot(2.0 * f1, 2) * np.einsum("li,lij,lj->", du, pt + pt_prev - 2.0 * pl, dv)
    total += (pot(2.0 * f2, 2) - pot(2.0 * f1, 2)) * np.einsum("li,lij,lj->", su, pt, sv)
    total += (pot(2.0 * f2, 1) / (2.0 * f2) - pot(2.0 * f1, 1) / (2.0 * f1)) \
        * np.einsum("li,lij,lj->", su, eye[None] - pt, sv)
    return float(eps * total)


def qnl_quadratic_rearranged(geometry: ChainGeometry, partition: InterfacePartition,
                             u: np.ndarray, v: np.ndarray, potential: PairPotential) -> float:
    """Second variation of the quasi-nonlocal energy on a uniform chain, in the
    interface-collected rearranged form."""
    eps, N, K = geometry.eps, geometry.N, partition.K
    f1, f2 = strains(geometry)
    du, dv = backward_diff(u, 1, eps), backward_diff(v, 1, eps)
    ddu, ddv = backward_diff(du, 1, eps), backward_diff(dv, 1, eps)
    pl, pt = _uniform_projection_stacks(geometry)
    eye = np.eye(2)
    pot = potential
    su, sv = np.roll(du, -1, axis=0) + du, np.roll(dv, -1, axis=0) + dv
    ddu_next, ddv_next = np.roll(ddu, -1, axis=0), np.roll(ddv, -1, axis=0)
    pt_prev = np.roll(pt, 1, axis=0)

    gamma = pot(f1, 2) + 4.0 * pot(2.0 * f1, 2)

    def rows(labels):
        return [(l - 1) % N for l in labels]

    def quad(lhs, mats, rhs, labels):
        r = rows(labels)
        return float(np.einsum("li,lij,lj->", lhs[r], mats[r], rhs[r]))

    nl_interior = list(range(2, K + 1))
    nl_bonds = list(range(1, K + 1))
    loc_interior = list(range(K + 2, N + 1))

    total = quad(du, gamma * pl + (pot(f1, 1) / f1) * (eye[None] - pl), dv, nl_interior)
    total += quad(su, (pot(2.0 * f1, 1) / (2.0 * f1)) * (eye[None] - pt), sv, nl_bonds)
    total -= eps ** 2 * pot(2.0 * f1, 2) * quad(ddu_next, pt, ddv_next, nl_bonds)
    total += 2.0 * pot(2.0 * f1, 2) * quad(du, pt + pt_prev - 2.0 * pl, dv, nl_interior)
    total += (pot(2.0 * f2, 2) - pot(2.0 * f1, 2)) * quad(su, pt, sv, nl_bonds)
    total += (pot(2.0 * f2, 1) / (2.0 * f2) - pot(2.0 * f1, 1) / (2.0 * f1)) \
        * quad(su, eye[None] - pt, sv, nl_bonds)
    total += quad(du, gamma * pl + ((pot(f1, 1) + 2.0 * pot(2.0 * f1, 1)) / f1) * (eye[None] - pl),
                  dv, loc_interior)
    total += quad(du, gamma * pl + ((pot(f1, 1) + pot(2.0 * f1, 1)) / f1) * (eye[None] - pl),
                  dv, [1, K + 1])
    total += 2.0 * pot(2.0 * f1, 2) * quad(du, pt - pl, dv, [1, K + 1])
    return float(eps * total)


def parallelogram_residual(yp: np.ndarray, up: np.ndarray, a: np.ndarray, eps: float) -> float:
    """Residual of the summed chord identity used in every rearrangement:
    sum (y'_{l+1}+y'_l) . A (u'_{l+1}+u'_l) = sum [2 y' . A u' (both ends)
    - eps^2 y''_{l+1} . A u''_{l+1}] for periodic fields and any matrix A."""
    ys = np.roll(yp, -1, axis=0) + yp
    us = np.roll(up, -1, axis=0) + up
    ypp = backward_diff(yp, 1, eps)
    upp = backward_diff(up, 1, eps)
    lhs = np.einsum("li,ij,lj->", ys, a, us)
    rhs = (2.0 * np.einsum("li,ij,lj->", np.roll(yp, -1, axis=0), a, np.roll(up, -1, axis=0))
           + 2.0 * np.einsum("li,ij,lj->", yp, a, up)
           - eps ** 2 * np.einsum("li,ij,lj->", np.roll(ypp, -1, axis=0), a, np.roll(upp, -1, axis=0)))
    return abs(lhs - rhs)
