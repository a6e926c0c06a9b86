"""Dense multilinear algebra on a fixed chart dimension.

Conventions used across the package:

* tensor components are dense ``numpy`` arrays, one axis per slot, all axes
  of equal length (the chart dimension n);
* variance is a string over {'d', 'u'}: 'd' marks a covariant slot, 'u' a
  contravariant one, in slot order;
* the alternation of a rank-k covariant tensor carries the 1/k! factor, so
  it is a projection (idempotent on alternating input);
* the wedge product of m 2-forms is evaluated on the canonical basis tuple
  via the pairing sum over perfect matchings of {0, ..., 2m-1}, which equals
  the full signed permutation sum divided by 2^m.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

# Desk scale: every example lives in dimension 4..8, so dense n^4 storage is
# cheap.  The cap guards against accidentally feeding a mesh-sized problem in.
MAX_DIM = 12

# A fibre metric counts as degenerate when its smallest eigenvalue magnitude
# falls below this fraction of the largest.
DEGENERACY_RTOL = 1e-12

_SYMMETRY_TOL = 1e-12


def permutation_sign(perm) -> int:
    """Sign of a permutation given as a sequence of distinct integers."""
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def signed_permutations(k: int):
    """All permutations of range(k) with their signs, as integer arrays."""
    perms = np.array(list(itertools.permutations(range(k))), dtype=np.intp)
    signs = np.array([permutation_sign(p) for p in perms], dtype=np.int8)
    return perms, signs


@lru_cache(maxsize=None)
def assigned_matchings(r: int):
    """Permutations of range(r) that are increasing within consecutive pairs.

    For even r = 2m these enumerate the ordered perfect matchings
    ((p_1,q_1), ..., (p_m,q_m)) with p_j < q_j; there are r!/2^m of them.
    Summing sgn(tau) * prod_j Z_j[tau(2j), tau(2j+1)] over this set equals
    the same sum over all of S_r divided by 2^m whenever every Z_j is
    antisymmetric.
    """
    if r % 2 != 0:
        raise ValueError("assigned_matchings requires an even size")
    perms, signs = signed_permutations(r)
    keep = np.ones(len(perms), dtype=bool)
    for j in range(0, r, 2):
        keep &= perms[:, j] < perms[:, j + 1]
    return perms[keep], signs[keep]


# --------------------------------------------------------------------------
# Core types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Tensor:
    """A dense tensor with an explicit per-slot variance signature.

    ``variance`` is a string of 'd' (covariant) and 'u' (contravariant)
    characters, one per slot in storage order.
    """

    variance: str
    components: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.components, dtype=float)
        object.__setattr__(self, "components", arr)
        if any(ch not in "du" for ch in self.variance):
            raise ValueError("variance must consist of 'd' and 'u' only")
        if arr.ndim != len(self.variance):
            raise ValueError(
                f"rank mismatch: variance {self.variance!r} vs array of rank {arr.ndim}"
            )
        if arr.ndim > 0:
            dims = set(arr.shape)
            if len(dims) != 1:
                raise ValueError("all tensor axes must have equal length")
            if arr.shape[0] > MAX_DIM:
                raise ValueError(f"dimension {arr.shape[0]} exceeds the cap {MAX_DIM}")

    @property
    def rank(self) -> int:
        return len(self.variance)

    @property
    def dim(self) -> int:
        if self.components.ndim == 0:
            return 0
        return self.components.shape[0]


@dataclass(frozen=True)
class FibreMetric:
    """A nondegenerate symmetric bilinear form on a finite-dimensional fibre."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("fibre metric must be a square matrix")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > _SYMMETRY_TOL * scale:
            raise ValueError("fibre metric must be symmetric")
        eig = np.linalg.eigvalsh(m)
        if np.min(np.abs(eig)) <= DEGENERACY_RTOL * np.max(np.abs(eig)):
            raise ValueError("fibre metric is degenerate")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def signature(self) -> tuple:
        """(number of negative, number of positive) eigenvalues."""
        eig = np.linalg.eigvalsh(self.matrix)
        return int(np.sum(eig < 0)), int(np.sum(eig > 0))

    def inner(self, x, y) -> float:
        return float(np.asarray(x) @ self.matrix @ np.asarray(y))


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------


def contract(t: Tensor, slot_a: int, slot_b: int, metric=None) -> Tensor:
    """Contract two slots of a tensor, inserting a metric when needed.

    Slots of opposite variance are traced directly.  Slots of equal variance
    require ``metric``: the inverse metric for two covariant slots, the
    metric itself for two contravariant slots.
    """
    k = t.rank
    if not (0 <= slot_a < k and 0 <= slot_b < k) or slot_a == slot_b:
        raise ValueError("contraction slots out of range or equal")
    va, vb = t.variance[slot_a], t.variance[slot_b]
    remaining = "".join(
        ch for i, ch in enumerate(t.variance) if i not in (slot_a, slot_b)
    )
    if va != vb:
        out = np.trace(t.components, axis1=slot_a, axis2=slot_b)
        return Tensor(remaining, out)
    if metric is None:
        raise ValueError("a metric is required to contract slots of equal variance")
    m = metric.components if isinstance(metric, Tensor) else np.asarray(metric, float)
    out = np.tensordot(t.components, m, axes=([slot_a, slot_b], [0, 1]))
    return Tensor(remaining, out)


def alternate(t: Tensor) -> Tensor:
    """Full antisymmetrization with the 1/k! normalization."""
    if "u" in t.variance:
        raise ValueError("alternation is defined for all-covariant tensors")
    k = t.rank
    if k <= 1:
        return t
    out = np.zeros_like(t.components)
    for perm in itertools.permutations(range(k)):
        out += permutation_sign(perm) * np.transpose(t.components, perm)
    return Tensor(t.variance, out / math.factorial(k))


def wedge_eval_basis(mats: Sequence[np.ndarray]) -> float:
    """Value of zeta_1 ^ ... ^ zeta_m on (e_0, ..., e_{2m-1}).

    Each ``mats[j]`` holds the components zeta_j(e_a, e_b).  Computed as the
    signed sum over ordered perfect matchings (the full S_{2m} permutation
    sum collapsed by the antisymmetry of each factor).
    """
    m = len(mats)
    perms, signs = assigned_matchings(2 * m)
    prod = np.ones(len(perms))
    for j, z in enumerate(mats):
        prod *= np.asarray(z)[perms[:, 2 * j], perms[:, 2 * j + 1]]
    return float(signs @ prod)


def wedge_power_coefficient(zetas: Sequence[Tensor], orientation_form: Tensor) -> float:
    """The scalar s with zeta_1 ^ ... ^ zeta_m = s * Theta in dimension 2m.

    Both sides are top-degree forms, so s is fixed by evaluating them on the
    canonical basis tuple.
    """
    m = len(zetas)
    if m == 0:
        raise ValueError("need at least one 2-form")
    dim = zetas[0].dim
    if dim != 2 * m:
        raise ValueError(f"ambient dimension {dim} must equal 2m = {2 * m}")
    for z in zetas:
        if z.variance != "dd" or z.dim != dim:
            raise ValueError("each zeta must be a (0,2) tensor of the ambient dimension")
    if orientation_form.rank != 2 * m or orientation_form.dim != dim:
        raise ValueError("orientation form must be a (0,2m) tensor")
    theta = float(orientation_form.components[tuple(range(2 * m))])
    if theta == 0.0:
        raise ValueError("orientation form vanishes on the canonical basis")
    return wedge_eval_basis([z.components for z in zetas]) / theta
