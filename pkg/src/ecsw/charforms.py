"""Pfaffians of skew-adjoint operator tuples and curvature n-forms.

For skew-adjoint operators S_1, ..., S_m on a 2m-dimensional fibre (g(S x, y)
= -g(x, S y)) each 2-form omega_j(x, y) = g(S_j x, y) has component matrix
Z_j = S_j' G, and

    pf(S_1, ..., S_m) = (omega_1 ^ ... ^ omega_m)(e) / Theta(e),

with Theta the canonical volume (Theta(e) = orientation * sqrt|det G| on the
chart basis).  The Euler integrand contracts curvature operators pairwise,

    e(v_1, ..., v_n) = (1/n!) sum_sigma sgn(sigma)
                       pf(R(v_s1, v_s2), ..., R(v_s(n-1), v_sn)),

and the degree-4i generating integrand replaces the Pfaffian with the trace
of the composed operators.  Both are computed by the literal permutation
sums; the inner Pfaffian is evaluated over ordered matchings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curvature import CurvaturePack
from .tensors import FibreMetric, signed_permutations, wedge_eval_basis

MAX_EULER_DIM = 8
SKEW_INPUT_TOL = 1e-10
SKEW_CURVATURE_TOL = 1e-8
INDEPENDENCE_TOL = 1e-12


@dataclass(frozen=True)
class SkewTuple:
    """m skew-adjoint operators on a 2m-dimensional oriented fibre."""

    fibre: FibreMetric
    operators: tuple
    orientation: float = 1.0

    def __post_init__(self):
        ops = tuple(np.asarray(s, dtype=float) for s in self.operators)
        object.__setattr__(self, "operators", ops)
        dim = self.fibre.dim
        if dim % 2 != 0:
            raise ValueError("the fibre dimension must be even")
        if len(ops) != dim // 2:
            raise ValueError(
                f"expected {dim // 2} operators for dimension {dim}, got {len(ops)}"
            )
        G = self.fibre.matrix
        for k, s in enumerate(ops):
            if s.shape != (dim, dim):
                raise ValueError(f"operator {k} has shape {s.shape}")
            z = s.T @ G
            scale = max(1.0, float(np.max(np.abs(z))))
            if np.max(np.abs(z + z.T)) > SKEW_INPUT_TOL * scale:
                raise ValueError(f"operator {k} is not skew-adjoint")
        if self.orientation == 0.0:
            raise ValueError("orientation must be nonzero")


def pfaffian(st: SkewTuple) -> float:
    """The polarized Pfaffian of the tuple against the canonical volume."""
    G = st.fibre.matrix
    zs = [s.T @ G for s in st.operators]
    theta = st.orientation * math.sqrt(abs(np.linalg.det(G)))
    return wedge_eval_basis(zs) / theta


def random_skew_tuple(fibre: FibreMetric, rng, common_kernel=None) -> SkewTuple:
    """A random tuple S_j = G^{-1} B_j, B_j antisymmetric.

    With ``common_kernel`` set, every B_j is corrected to annihilate that
    vector while staying antisymmetric, so all operators share the kernel
    direction and the Pfaffian vanishes.
    """
    dim = fibre.dim
    g_inv = np.linalg.inv(fibre.matrix)
    ops = []
    for _ in range(dim // 2):
        raw = rng.uniform(-1.0, 1.0, size=(dim, dim))
        b = raw - raw.T
        if common_kernel is not None:
            k = np.asarray(common_kernel, dtype=float)
            bk = b @ k
            kk = float(k @ k)
            b = b - np.outer(bk, k) / kk + np.outer(k, bk) / kk
        ops.append(g_inv @ b)
    return SkewTuple(fibre, tuple(ops))


def curvature_operator(pack: CurvaturePack, u, v) -> np.ndarray:
    """The matrix of R(u, v) acting on tangent vectors."""
    s = np.einsum("lijk,i,j->lk", pack.riemann13, np.asarray(u, float),
                  np.asarray(v, float))
    z = s.T @ pack.g
    scale = max(1.0, float(np.max(np.abs(z))))
    if np.max(np.abs(z + z.T)) > SKEW_CURVATURE_TOL * scale:
        raise ValueError("curvature operator failed the skew-adjointness check")
    return s


def _operator_form_matrices(pack: CurvaturePack, vectors) -> np.ndarray:
    """z4[i, j] = component matrix of the 2-form of R(v_i, v_j)."""
    V = np.asarray(vectors, dtype=float)
    n = pack.dim
    if V.shape != (n, n):
        raise ValueError(f"need {n} column vectors of dimension {n}")
    if abs(np.linalg.det(V)) <= INDEPENDENCE_TOL:
        raise ValueError("the basis vectors are linearly dependent")
    return np.einsum("lpqk,pi,qj,lb->ijkb", pack.riemann13, V, V, pack.g)


def euler_form_at(pack: CurvaturePack, vectors) -> float:
    """The Euler integrand on the given vectors (columns of ``vectors``).

    Dimension must be even and at most MAX_EULER_DIM; the sum over the full
    permutation group is taken literally, with the canonical volume of g at
    the point as normalization.
    """
    n = pack.dim
    if n % 2 != 0:
        raise ValueError("the Euler integrand needs an even dimension")
    if n > MAX_EULER_DIM:
        raise ValueError(f"dimension {n} exceeds the supported cap {MAX_EULER_DIM}")
    z4 = _operator_form_matrices(pack, vectors)
    m = n // 2
    theta = math.sqrt(abs(np.linalg.det(pack.g)))
    perms, signs = signed_permutations(n)
    total = 0.0
    for perm, sign in zip(perms, signs):
        mats = [z4[perm[2 * j], perm[2 * j + 1]] for j in range(m)]
        total += sign * wedge_eval_basis(mats)
    return total / (math.factorial(n) * theta)


def generating_form_at(pack: CurvaturePack, i: int, vectors) -> float:
    """The degree-4i trace form on 4i vectors (columns of ``vectors``).

    (1/(4i)!) sum over sigma of sgn(sigma) tr(S_{s1 s2} ... S_{s(4i-1) s4i})
    with S_{ab} = R(v_a, v_b); no volume normalization.
    """
    if i < 1:
        raise ValueError("the form index i must be at least 1")
    r = 4 * i
    n = pack.dim
    if r > n:
        raise ValueError(f"degree 4i = {r} exceeds the dimension {n}")
    V = np.asarray(vectors, dtype=float)
    if V.shape != (n, r):
        raise ValueError(f"need {r} column vectors of dimension {n}")
    # s4[a, b] = matrix of R(v_a, v_b)
    s4 = np.einsum("lpqk,pa,qb->ablk", pack.riemann13, V, V)
    perms, signs = signed_permutations(r)
    total = 0.0
    for perm, sign in zip(perms, signs):
        prod = s4[perm[0], perm[1]]
        for j in range(1, r // 2):
            prod = prod @ s4[perm[2 * j], perm[2 * j + 1]]
        total += sign * np.trace(prod)
    return total / math.factorial(r)
