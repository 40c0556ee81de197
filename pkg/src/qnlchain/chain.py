"""Periodic chain geometry, difference calculus, and discrete norms.

Atoms are labeled 1..N per period and stored at rows 0..N-1 of an (N, 2)
array. A chain repeats with period N and lattice parameter eps = 1/N:
positions satisfy y_{l+N} = y_l + shift, displacements are strictly periodic
(u_{l+N} = u_l) and mean-zero. Backward differences are scaled by 1/eps, so
row i of the first difference holds (y_{i+1} - y_i)/eps in label terms.

Two reference families are provided: straight chains with spacing F*eps along
the x-axis, and regular N-gons ("circular chains") of radius
R = F*eps / (2 sin(pi*eps)), for which next-nearest distances are
2*F*eps*cos(pi*eps) and every turning angle is 2*pi*eps.

The mean-zero subspace is carried as an explicit orthonormal basis (built
once per (N, constrained) pair); operators are assembled in full coordinates
and compressed to it, which keeps the strain Gram matrix strictly positive
definite in all eigen- and linear solves.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import null_space

from .errors import ArgumentError, GeometryError
from .numerics import cholesky_spd, solve_spd

__all__ = [
    "ChainGeometry",
    "InterfacePartition",
    "SubspaceOperators",
    "make_linear",
    "make_circular",
    "backward_diff",
    "strains",
    "turning_angles",
    "projections",
    "inner",
    "l2eps_norm",
    "partial_strain_norm",
    "seminorms",
    "min_curvature_ratio",
    "project_mean_zero",
    "random_displacement",
    "field_to_csv",
]


@dataclass(frozen=True)
class ChainGeometry:
    """A uniform periodic reference configuration in the plane."""

    kind: str  # "linear" | "circular"
    N: int
    F: float
    positions: np.ndarray  # (N, 2), row i holds atom i+1
    shift: np.ndarray  # (2,) period shift y_N - y_0
    radius: float | None = None

    @property
    def eps(self) -> float:
        return 1.0 / self.N

    def bond_vectors(self, displacement: np.ndarray | None = None) -> np.ndarray:
        """First backward difference of the (optionally displaced) positions."""
        y = self.positions if displacement is None else self.positions + displacement
        return backward_diff(y, 1, self.eps, shift=self.shift)


@dataclass(frozen=True)
class InterfacePartition:
    """Split of the period into a nonlocal region {1..K} and its complement.

    Bond index sets (atom labels, 1-based) drive the three strain seminorms:
    interior nonlocal bonds 2..K, interior local bonds K+2..N, and the two
    interfacial bonds {1, K+1} that carry the half-weighted coupling terms.
    """

    N: int
    K: int

    def __post_init__(self):
        if not 1 < self.K < self.N - 1:
            raise ArgumentError(f"need 1 < K < N-1, got K = {self.K}, N = {self.N}")

    @property
    def nonlocal_atoms(self) -> range:
        return range(1, self.K + 1)

    @property
    def local_atoms(self) -> range:
        return range(self.K + 1, self.N + 1)

    @property
    def nonlocal_bonds(self) -> tuple[int, ...]:
        return tuple(range(2, self.K + 1))

    @property
    def local_bonds(self) -> tuple[int, ...]:
        return tuple(range(self.K + 2, self.N + 1))

    @property
    def interface_bonds(self) -> tuple[int, int]:
        return (1, self.K + 1)


def make_linear(N: int, F: float) -> ChainGeometry:
    """Straight chain along (1, 0) with spacing F*eps and period shift (F, 0)."""
    _validate_chain_args(N, F)
    eps = 1.0 / N
    xs = F * eps * np.arange(1, N + 1, dtype=float)
    positions = np.column_stack([xs, np.zeros(N)])
    return ChainGeometry(kind="linear", N=N, F=float(F), positions=positions,
                         shift=np.array([F, 0.0]))


def make_circular(N: int, F: float) -> ChainGeometry:
    """Regular N-gon of radius F*eps / (2 sin(pi*eps)); period shift zero."""
    _validate_chain_args(N, F)
    eps = 1.0 / N
    radius = F * eps / (2.0 * math.sin(math.pi * eps))
    theta = 2.0 * math.pi * eps * np.arange(1, N + 1, dtype=float)
    positions = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    return ChainGeometry(kind="circular", N=N, F=float(F), positions=positions,
                         shift=np.zeros(2), radius=radius)


def _validate_chain_args(N, F):
    if int(N) != N or N < 4:
        raise ArgumentError(f"need integer N >= 4 so next-nearest bonds never wrap, got {N}")
    if not F > 0.0:
        raise ArgumentError(f"strain F must be positive, got {F}")


def backward_diff(values: np.ndarray, order: int, eps: float,
                  shift: np.ndarray | None = None) -> np.ndarray:
    """n-th backward difference scaled by eps**-n of a periodic field.

    `shift` is the period shift of the zeroth-order field (positions); all
    differenced fields are strictly periodic, so higher orders ignore it.
    """
    if order < 1:
        raise ArgumentError(f"difference order must be >= 1, got {order}")
    out = np.asarray(values, dtype=float)
    for k in range(order):
        prev = np.roll(out, 1, axis=0)
        if k == 0 and shift is not None:
            prev[0] = prev[0] - shift
        out = (out - prev) / eps
    return out


def strains(geometry: ChainGeometry) -> tuple[float, float]:
    """Nearest strain F1 = |y'_l| and next-nearest strain F2 = |y'_{l+1}+y'_l| / 2."""
    if geometry.kind == "linear":
        return geometry.F, geometry.F
    return geometry.F, geometry.F * math.cos(math.pi * geometry.eps)


def turning_angles(bonds: np.ndarray) -> np.ndarray:
    """Signed angle from each bond vector to the next (negative = clockwise)."""
    nxt = np.roll(bonds, -1, axis=0)
    cross = bonds[:, 0] * nxt[:, 1] - bonds[:, 1] * nxt[:, 0]
    dot = np.einsum("ij,ij->i", bonds, nxt)
    return np.arctan2(cross, dot)


def projections(geometry: ChainGeometry, ell: int) -> tuple[np.ndarray, np.ndarray]:
    """Rank-1 projections onto bond l and onto the next-nearest chord at l."""
    if not 1 <= ell <= geometry.N:
        raise ArgumentError(f"bond label must be in 1..{geometry.N}, got {ell}")
    bonds = geometry.bond_vectors()
    b = bonds[ell - 1]
    chord = bonds[ell % geometry.N] + b
    return _unit_projection(b), _unit_projection(chord)


def _unit_projection(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n <= 1e-14:
        raise GeometryError("degenerate bond: coincident neighbors")
    u = v / n
    return np.outer(u, u)


def inner(v: np.ndarray, w: np.ndarray, eps: float) -> float:
    """Lattice inner product eps * sum_l v_l . w_l."""
    v, w = np.asarray(v, float), np.asarray(w, float)
    if v.shape != w.shape:
        raise ArgumentError(f"field shapes differ: {v.shape} vs {w.shape}")
    return float(eps * np.sum(v * w))


def l2eps_norm(v: np.ndarray, eps: float) -> float:
    """Lattice norm (eps * sum_l |v_l|^2)^(1/2)."""
    return math.sqrt(max(inner(v, v, eps), 0.0))


def partial_strain_norm(diff_field: np.ndarray, labels, eps: float) -> float:
    """(eps * sum over labeled rows |field_l|^2)^(1/2), labels 1-based mod N."""
    rows = [(l - 1) % len(diff_field) for l in labels]
    return math.sqrt(float(eps * sum(np.dot(diff_field[i], diff_field[i]) for i in rows)))


def seminorms(du: np.ndarray, partition: InterfacePartition, eps: float) -> tuple[float, float, float]:
    """Strain seminorms of a first-difference field over the nonlocal, local,
    and interfacial bond sets; their squares sum to the full strain norm."""
    if len(du) != partition.N:
        raise ArgumentError(f"field length {len(du)} does not match N = {partition.N}")
    return (
        partial_strain_norm(du, partition.nonlocal_bonds, eps),
        partial_strain_norm(du, partition.local_bonds, eps),
        partial_strain_norm(du, partition.interface_bonds, eps),
    )


def min_curvature_ratio(N: int) -> float:
    """inf over mean-zero periodic u of |u''| / |u'| = 2 sin(pi/N) * N."""
    if N < 4:
        raise ArgumentError(f"need N >= 4, got {N}")
    return 2.0 * math.sin(math.pi / N) * N


def project_mean_zero(u: np.ndarray) -> np.ndarray:
    """Remove the per-component mean of a periodic displacement field."""
    u = np.asarray(u, dtype=float)
    return u - u.mean(axis=0)


def random_displacement(rng: np.random.Generator, N: int, scale: float = 1.0,
                        constrained: bool = False) -> np.ndarray:
    """Random mean-zero displacement; constrained fields stay on the chain line."""
    u = rng.standard_normal((N, 2)) * scale
    if constrained:
        u[:, 1] = 0.0
    return project_mean_zero(u)


def field_to_csv(field: np.ndarray) -> str:
    """Serialize a planar field as 'index,x,y' lines (atoms labeled from 1)."""
    buf = io.StringIO()
    buf.write("index,x,y\n")
    for i, (x, y) in enumerate(np.asarray(field, dtype=float), start=1):
        buf.write(f"{i},{x:.17g},{y:.17g}\n")
    return buf.getvalue()


@lru_cache(maxsize=64)
def _mean_zero_scalar_basis(N: int) -> np.ndarray:
    """Orthonormal (N, N-1) basis of scalar mean-zero periodic fields."""
    return null_space(np.ones((1, N)))


class SubspaceOperators:
    """Compressed operators on the mean-zero displacement subspace.

    The basis matrix has shape (2N, m) with Euclidean-orthonormal columns,
    m = 2(N-1) for planar fields or N-1 when transverse motion is constrained
    away. Compression of a full-coordinate bilinear form H is B^T H B.
    """

    def __init__(self, N: int, constrained: bool = False):
        if N < 4:
            raise ArgumentError(f"need N >= 4, got {N}")
        self.N = int(N)
        self.eps = 1.0 / N
        self.constrained = bool(constrained)
        q = _mean_zero_scalar_basis(self.N)
        m = q.shape[1]
        if constrained:
            basis = np.zeros((2 * N, m))
            basis[0::2, :] = q
        else:
            basis = np.zeros((2 * N, 2 * m))
            basis[0::2, :m] = q
            basis[1::2, m:] = q
        self.basis = basis
        self.dim = basis.shape[1]
        # First differences of every basis column, flattened the same way.
        db = basis.reshape(N, 2, self.dim)
        db = (db - np.roll(db, 1, axis=0)) / self.eps
        self._dbasis = db.reshape(2 * N, self.dim)
        self.strain_gram = self.eps * (self._dbasis.T @ self._dbasis)
        self._strain_factor = cholesky_spd(self.strain_gram)

    # -- coordinate transport -------------------------------------------------

    def compress_operator(self, h_full: np.ndarray) -> np.ndarray:
        """B^T H B for a (2N, 2N) bilinear form in full coordinates."""
        return self.basis.T @ h_full @ self.basis

    def compress_pairing(self, v: np.ndarray) -> np.ndarray:
        """Coordinates of the functional w -> <v, w> restricted to the subspace."""
        return self.eps * (self.basis.T @ np.asarray(v, float).reshape(-1))

    def coords(self, u: np.ndarray) -> np.ndarray:
        """Basis coordinates of a field already in the subspace."""
        return self.basis.T @ np.asarray(u, float).reshape(-1)

    def field(self, c: np.ndarray) -> np.ndarray:
        """Field represented by basis coordinates c."""
        return (self.basis @ np.asarray(c, float)).reshape(self.N, 2)

    # -- norms ----------------------------------------------------------------

    def strain_norm_sq(self, c: np.ndarray) -> float:
        return float(c @ self.strain_gram @ c)

    def dual_norm(self, v: np.ndarray) -> float:
        """sup over mean-zero w of <v, w> / |w'|, via the strain Gram inverse.

        Any mean component of v is invisible to the pairing and drops out.
        """
        b = self.compress_pairing(v)
        x = solve_spd(self.strain_gram, b, factor=self._strain_factor)
        return math.sqrt(max(float(b @ x), 0.0))

    def solve_strain_gram(self, b: np.ndarray) -> np.ndarray:
        return solve_spd(self.strain_gram, b, factor=self._strain_factor)
