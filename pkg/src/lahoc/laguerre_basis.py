"""Modified Laguerre bases on [0, inf).

Provides scaled Laguerre polynomial evaluation, Gauss-Laguerre (GL) and
Gauss-Laguerre-Radau (GLR) quadrature rules, pseudo-spectral differentiation
matrices, and barycentric interpolation on the resulting grids.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal


class NodeFamily(enum.Enum):
    GL = "gauss-laguerre"
    GLR = "gauss-laguerre-radau"


class BasisConstructionError(RuntimeError):
    pass


class QuadratureOverflowWarning(RuntimeWarning):
    """Unweighted quadrature factors e^{beta t_j} are large enough to be unreliable."""


@dataclass(frozen=True)
class BasisConfig:
    """Scaling parameter beta (units 1/time), highest degree N, and node family."""

    beta: float
    n_order: int
    node_family: NodeFamily = NodeFamily.GLR

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be positive and finite, got {self.beta}")
        if self.n_order < 1:
            raise ValueError(f"n_order must be >= 1, got {self.n_order}")


def _genlaguerre(degree: int, alpha: float, x: np.ndarray) -> np.ndarray:
    """Generalized Laguerre polynomial L_degree^(alpha)(x) by three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if degree == 0:
        return p_prev
    p = 1.0 + alpha - x
    for k in range(1, degree):
        p, p_prev = ((2 * k + alpha + 1 - x) * p - (k + alpha) * p_prev) / (k + 1), p
    return p


def eval_laguerre(beta: float, degree: int, t):
    """Evaluate the scaled Laguerre polynomial of the given degree at t >= 0.

    The family is orthogonal on [0, inf) with weight e^{-beta t} and is
    normalized so every member equals 1 at t = 0.
    """
    if not (beta > 0):
        raise ValueError(f"beta must be positive, got {beta}")
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    out = _genlaguerre(degree, 0.0, beta * np.asarray(t, dtype=float))
    return float(out) if np.isscalar(t) else out


def _golub_welsch_nodes(degree: int, alpha: float) -> np.ndarray:
    """Roots of L_degree^(alpha) via the symmetric Jacobi-matrix eigenproblem."""
    k = np.arange(degree)
    diag = 2 * k + alpha + 1
    off = np.sqrt((k[:-1] + 1) * (k[:-1] + 1 + alpha))
    vals, _ = eigh_tridiagonal(diag, off)
    return vals


def _golub_welsch_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the classical degree-point Gauss-Laguerre rule (alpha=0)."""
    k = np.arange(degree)
    diag = 2.0 * k + 1
    off = np.sqrt((k[:-1] + 1) * (k[:-1] + 1.0))
    vals, vecs = eigh_tridiagonal(diag, off)
    # total mass of e^{-x} on [0, inf) is 1
    return vals, vecs[0, :] ** 2


def _barycentric_log_weights(nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric weights as (sign, log magnitude); log form avoids overflow
    for Laguerre nodes spread over [0, ~4N/beta]."""
    diffs = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diffs, 1.0)
    sign = np.prod(np.sign(diffs), axis=1)
    logw = -np.sum(np.log(np.abs(diffs)), axis=1)
    logw -= logw.max()
    return sign, logw


@dataclass(frozen=True, eq=False)
class BasisRule:
    """One discretization: nodes, Christoffel weights, and differentiation matrix.

    Immutable after construction; safe to share across concurrent solver runs.
    """

    config: BasisConfig
    nodes: np.ndarray
    weights: np.ndarray
    diff: np.ndarray
    bary_sign: np.ndarray = field(repr=False)
    bary_log: np.ndarray = field(repr=False)

    @property
    def n_points(self) -> int:
        return len(self.nodes)

    def diff_condition(self) -> float:
        """2-norm condition estimate of the differentiation matrix.

        In double precision this degrades the last digits for N above ~150.
        """
        return float(np.linalg.cond(self.diff))


def build_rule(config: BasisConfig) -> BasisRule:
    """Construct the GL or GLR rule for the given configuration.

    GLR: node 0 is pinned at t=0, interior nodes are the zeros of the
    derivative of the degree-(N+1) polynomial (equivalently the order-1
    generalized Laguerre roots of degree N), located by a symmetric
    tridiagonal eigensolve and polished by one Newton step.
    """
    beta, n = config.beta, config.n_order
    try:
        if config.node_family is NodeFamily.GLR:
            x = _golub_welsch_nodes(n, alpha=1.0)
            # one Newton step on f(x) = L_n^(1)(x); f'(x) = -L_{n-1}^(2)(x)
            fx = _genlaguerre(n, 1.0, x)
            dfx = -_genlaguerre(n - 1, 2.0, x) if n >= 1 else np.zeros_like(x)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(dfx != 0, fx / dfx, 0.0)
            x = x - step
            nodes = np.concatenate(([0.0], x / beta))
            ln = _genlaguerre(n, 0.0, beta * nodes[1:])
            ln1 = _genlaguerre(n + 1, 0.0, beta * nodes[1:])
            weights = np.empty(n + 1)
            weights[0] = 1.0 / (beta * (n + 1))
            weights[1:] = 1.0 / (beta * (n + 1) * ln * ln1)
        else:
            x, w = _golub_welsch_rule(n + 1)
            nodes = x / beta
            weights = w / beta
    except np.linalg.LinAlgError as exc:
        raise BasisConstructionError(
            f"eigen-solve failed for N={n}, beta={beta}: {exc}"
        ) from exc

    if np.any(np.diff(nodes) <= 0):
        raise BasisConstructionError(f"non-distinct nodes for N={n}, beta={beta}")
    if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
        raise BasisConstructionError(f"invalid weights for N={n}, beta={beta}")

    diff = build_diff_matrix(nodes, config)
    sign, logw = _barycentric_log_weights(nodes)
    return BasisRule(config, nodes, weights, diff, sign, logw)


def build_diff_matrix(nodes: np.ndarray, config: BasisConfig) -> np.ndarray:
    """Differentiation matrix mapping grid values of a degree-N polynomial to
    grid values of its derivative.

    GLR uses the closed-form entries in terms of the degree-(N+1) polynomial;
    GL uses the barycentric construction (with diagonals from exact row sums),
    which is algebraically exact for the Lagrange basis.
    """
    nodes = np.asarray(nodes, dtype=float)
    if np.any(np.diff(np.sort(nodes)) == 0):
        raise BasisConstructionError("duplicate nodes")
    beta, n = config.beta, config.n_order
    m = len(nodes)
    if config.node_family is NodeFamily.GLR:
        ln1 = _genlaguerre(n + 1, 0.0, beta * nodes)
        dt = nodes[:, None] - nodes[None, :]
        np.fill_diagonal(dt, 1.0)
        d = (ln1[:, None] / ln1[None, :]) / dt
        np.fill_diagonal(d, beta / 2.0)
        d[0, 0] = -beta * n / 2.0
        return d
    sign, logw = _barycentric_log_weights(nodes)
    dt = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(dt, 1.0)
    ratio = (sign[None, :] * sign[:, None]) * np.exp(logw[None, :] - logw[:, None])
    d = ratio / dt
    np.fill_diagonal(d, 0.0)
    d[np.arange(m), np.arange(m)] = -d.sum(axis=1)
    return d


def quadrature_weighted(rule: BasisRule, samples: np.ndarray) -> float:
    """Sum of samples against the Christoffel weights: the integral of the
    sampled function against e^{-beta t}, exact for polynomials of degree <= 2N."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape != rule.nodes.shape:
        raise ValueError(f"expected {rule.nodes.shape} samples, got {samples.shape}")
    return float(rule.weights @ samples)


def quadrature_unweighted(rule: BasisRule, samples: np.ndarray) -> float:
    """Approximate the plain integral of a decaying function from its node samples.

    Divides out the Laguerre weight: sum of samples * omega_j * e^{beta t_j}.
    Warns when the largest exponential factor exceeds 1e15 (overflow-prone).
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape != rule.nodes.shape:
        raise ValueError(f"expected {rule.nodes.shape} samples, got {samples.shape}")
    beta = rule.config.beta
    if beta * rule.nodes[-1] > math.log(1e15):
        warnings.warn(
            f"e^(beta t_N) = e^{beta * rule.nodes[-1]:.1f} exceeds 1e15; "
            "unweighted quadrature weights are overflow-prone",
            QuadratureOverflowWarning,
            stacklevel=2,
        )
    return float((rule.weights * np.exp(beta * rule.nodes)) @ samples)


def interpolate(rule: BasisRule, samples: np.ndarray, t_query) -> float | np.ndarray:
    """Barycentric Lagrange evaluation of the degree-N interpolant at t_query.

    Queries coinciding with a node return the node sample exactly.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape != rule.nodes.shape:
        raise ValueError(f"expected {rule.nodes.shape} samples, got {samples.shape}")
    tq = np.atleast_1d(np.asarray(t_query, dtype=float))
    w = rule.bary_sign * np.exp(rule.bary_log)
    out = np.empty_like(tq)
    for i, t in enumerate(tq):
        dt = t - rule.nodes
        hit = np.nonzero(dt == 0)[0]
        if hit.size:
            out[i] = samples[hit[0]]
            continue
        terms = w / dt
        out[i] = (terms @ samples) / terms.sum()
    return float(out[0]) if np.isscalar(t_query) else out


def dump_rule_csv(rule: BasisRule, path) -> None:
    """Debug dump: one row per node with index, node, and weight."""
    with open(path, "w") as fh:
        fh.write("index,node,weight\n")
        for j, (t, w) in enumerate(zip(rule.nodes, rule.weights)):
            fh.write(f"{j},{t:.8e},{w:.8e}\n")
