"""Slow reference implementations used to cross-check the fast routes.

Everything here is written with explicit Python loops or textbook recursions
and no shared code with the production paths, so agreement between the two
is meaningful.  These run on small dimensions only.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .metrics import MetricJet
from .tensors import permutation_sign


# --------------------------------------------------------------------------
# Multilinear algebra
# --------------------------------------------------------------------------


def loop_contract(components, variance, slot_a, slot_b, metric=None):
    """Explicit-loop contraction of two slots (metric for equal variance)."""
    comp = np.asarray(components, dtype=float)
    n = comp.shape[0]
    k = comp.ndim
    lo, hi = min(slot_a, slot_b), max(slot_a, slot_b)
    out_rank = k - 2
    out = np.zeros((n,) * out_rank)
    same = variance[slot_a] == variance[slot_b]
    for idx in itertools.product(range(n), repeat=out_rank):
        total = 0.0
        for a in range(n):
            for b in range(n):
                if not same and a != b:
                    continue
                full = list(idx)
                full.insert(lo, a if slot_a == lo else b)
                full.insert(hi, b if slot_b == hi else a)
                w = 1.0 if not same else float(np.asarray(metric)[a, b])
                total += w * comp[tuple(full)]
        out[idx] = total
    return out


def loop_alternate(components):
    """Explicit-loop antisymmetrization with 1/k! normalization."""
    comp = np.asarray(components, dtype=float)
    k = comp.ndim
    n = comp.shape[0]
    out = np.zeros_like(comp)
    for idx in itertools.product(range(n), repeat=k):
        total = 0.0
        for perm in itertools.permutations(range(k)):
            total += permutation_sign(perm) * comp[tuple(idx[p] for p in perm)]
        out[idx] = total / math.factorial(k)
    return out


def wedge_eval_full_permutations(mats) -> float:
    """(zeta_1 ^ ... ^ zeta_m)(e) as the full S_{2m} sum with the 1/2^m
    collapse factor kept explicit."""
    m = len(mats)
    r = 2 * m
    total = 0.0
    for perm in itertools.permutations(range(r)):
        term = permutation_sign(perm)
        for j, z in enumerate(mats):
            term *= np.asarray(z)[perm[2 * j], perm[2 * j + 1]]
        total += term
    return total / 2**m


def pfaffian_cofactor(b) -> float:
    """Pfaffian of one antisymmetric matrix by cofactor expansion."""
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    if n % 2 != 0:
        raise ValueError("Pfaffian needs an even dimension")
    if n == 0:
        return 1.0
    total = 0.0
    for k in range(1, n):
        if b[0, k] == 0.0:
            continue
        keep = [i for i in range(n) if i not in (0, k)]
        minor = b[np.ix_(keep, keep)]
        total += (-1.0) ** (k - 1) * b[0, k] * pfaffian_cofactor(minor)
    return total


# --------------------------------------------------------------------------
# Curvature by loops
# --------------------------------------------------------------------------


def christoffel_loops(jet: MetricJet) -> np.ndarray:
    n = jet.dim
    g_inv = np.linalg.inv(jet.g)
    dg = jet.dg
    gamma = np.zeros((n, n, n))
    for l in range(n):
        for i in range(n):
            for j in range(n):
                total = 0.0
                for m in range(n):
                    total += g_inv[l, m] * (
                        dg[i, m, j] + dg[j, m, i] - dg[m, i, j]
                    )
                gamma[l, i, j] = 0.5 * total
    return gamma


def _dchristoffel_loops(jet: MetricJet) -> np.ndarray:
    n = jet.dim
    g_inv = np.linalg.inv(jet.g)
    dg, d2g = jet.dg, jet.d2g
    dg_inv = np.zeros((n, n, n))
    for k in range(n):
        dg_inv[k] = -g_inv @ dg[k] @ g_inv
    dgamma = np.zeros((n, n, n, n))
    for k in range(n):
        for l in range(n):
            for i in range(n):
                for j in range(n):
                    total = 0.0
                    for m in range(n):
                        s = dg[i, m, j] + dg[j, m, i] - dg[m, i, j]
                        ds = d2g[k, i, m, j] + d2g[k, j, m, i] - d2g[k, m, i, j]
                        total += dg_inv[k, l, m] * s + g_inv[l, m] * ds
                    dgamma[k, l, i, j] = 0.5 * total
    return dgamma


def riemann13_loops(jet: MetricJet) -> np.ndarray:
    """R^l_{ijk} = d_j Gamma^l_{ik} - d_i Gamma^l_{jk} + quadratic terms."""
    n = jet.dim
    gamma = christoffel_loops(jet)
    dgamma = _dchristoffel_loops(jet)
    rm = np.zeros((n, n, n, n))
    for l in range(n):
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    val = dgamma[j, l, i, k] - dgamma[i, l, j, k]
                    for m in range(n):
                        val += gamma[m, i, k] * gamma[l, j, m]
                        val -= gamma[m, j, k] * gamma[l, i, m]
                    rm[l, i, j, k] = val
    return rm


def covariant_derivative_loops(components, variance, gamma, d_components):
    """Explicit-loop covariant derivative (derivative axis first)."""
    comp = np.asarray(components, dtype=float)
    n = comp.shape[0] if comp.ndim else gamma.shape[0]
    rank = comp.ndim
    out = np.array(d_components, dtype=float, copy=True)
    for idx in itertools.product(range(n), repeat=rank + 1):
        p, rest = idx[0], idx[1:]
        corr = 0.0
        for r in range(rank):
            for m in range(n):
                swapped = rest[:r] + (m,) + rest[r + 1 :]
                if variance[r] == "u":
                    corr += gamma[rest[r], p, m] * comp[swapped]
                else:
                    corr -= gamma[m, p, rest[r]] * comp[swapped]
        out[idx] += corr
    return out


# --------------------------------------------------------------------------
# Model fits and jet comparison
# --------------------------------------------------------------------------


def fit_constant_curvature(pack) -> tuple:
    """Least-squares K in R = (K/2) g ^ g; returns (K, relative residual)."""
    from .curvature import kulkarni_nomizu, relative_residual

    model = 0.5 * kulkarni_nomizu(pack.g, pack.g)
    num = float(np.sum(pack.riemann04 * model))
    den = float(np.sum(model * model))
    k_fit = num / den
    res = relative_residual(
        pack.riemann04 - k_fit * model, np.max(np.abs(pack.riemann04))
    )
    return k_fit, res


def jet_comparison(jet_a: MetricJet, jet_b: MetricJet) -> dict:
    """Max-abs differences per derivative order (skipping absent blocks)."""
    out = {}
    for name in ("g", "dg", "d2g", "d3g"):
        a, b = getattr(jet_a, name), getattr(jet_b, name)
        if a is None or b is None:
            continue
        out[name] = float(np.max(np.abs(a - b)))
    return out
