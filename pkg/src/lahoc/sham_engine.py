"""Spectral homotopy iteration for first-order systems with polynomial nonlinearities.

Discretizes n-component systems of the form

    dz_r/dt + sum_k sigma_{r,k} z_k + g_r(z) = phi_r(t)

on a Laguerre-Radau grid and solves them by the homotopy deformation
recurrence: a single block collocation operator is factorized once, the order-0
term solves the linear part, and each higher order is one linear solve against
a right-hand side built by convolving the previous orders.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve

# Relative singular-value cutoff for the operator pseudo-inverse.  Singular
# values below this fraction of the largest one correspond to directions the
# collocation matrix cannot resolve in double precision; including them only
# injects noise at the large nodes.
PINV_RCOND = 1e-8

# Condition-number threshold (after row equilibration) deciding between a
# plain LU solve and the truncated pseudo-inverse.  Below it the matrix is
# numerically nonsingular and LU is both backward stable and self-consistent
# (repeated solves against residuals of earlier solves stay at round-off);
# above it the near-null directions must be cut or they flood the large
# nodes with noise that the nonlinear terms then amplify.
COND_SWITCH = 1e15

from .laguerre_basis import BasisConfig, BasisRule, build_rule, interpolate


class DivergenceError(RuntimeError):
    def __init__(self, order: int, magnitude: float):
        super().__init__(
            f"homotopy series diverged at order {order} (max magnitude {magnitude:.3e})"
        )
        self.order = order
        self.magnitude = magnitude


class OperatorSingularError(RuntimeError):
    pass


@dataclass(frozen=True)
class MonomialTerm:
    """coefficient * prod_c z_c^exponents[c]; degree-0 terms belong to the forcing."""

    coefficient: float
    exponents: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(e) for e in self.exponents))
        if any(e < 0 for e in self.exponents):
            raise ValueError(f"negative exponent in {self.exponents}")
        if sum(self.exponents) < 1:
            raise ValueError("monomial total degree must be >= 1")

    @property
    def degree(self) -> int:
        return sum(self.exponents)


@dataclass(frozen=True)
class InitialValue:
    value: float


@dataclass(frozen=True)
class DecayAtInfinity:
    pass


BoundaryTag = InitialValue | DecayAtInfinity


@dataclass(frozen=True)
class SystemSpec:
    """Linear coupling sigma, per-equation monomial lists, optional forcing,
    and one boundary tag per component."""

    dim: int
    sigma: np.ndarray
    nonlinear: tuple[tuple[MonomialTerm, ...], ...]
    bc: tuple[BoundaryTag, ...]
    forcing: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "nonlinear", tuple(tuple(eq) for eq in self.nonlinear))
        object.__setattr__(self, "bc", tuple(self.bc))
        if sigma.shape != (self.dim, self.dim):
            raise ValueError(f"sigma must be {self.dim}x{self.dim}, got {sigma.shape}")
        if len(self.nonlinear) != self.dim or len(self.bc) != self.dim:
            raise ValueError("nonlinear and bc must have one entry per component")
        for eq in self.nonlinear:
            for term in eq:
                if len(term.exponents) != self.dim:
                    raise ValueError(
                        f"monomial exponents length {len(term.exponents)} != dim {self.dim}"
                    )
        if not any(isinstance(tag, InitialValue) for tag in self.bc):
            raise ValueError("at least one component needs an InitialValue tag")

    def is_linear(self) -> bool:
        return all(len(eq) == 0 for eq in self.nonlinear)


@dataclass(frozen=True)
class SolverConfig:
    hbar: float
    basis: BasisConfig
    max_order: int = 20
    tail_tol: float = 1e-12
    aux_h: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.hbar == 0:
            raise ValueError("hbar = 0 freezes the homotopy")
        if self.tail_tol <= 0:
            raise ValueError("tail_tol must be positive")
        if self.max_order < 1:
            raise ValueError("max_order must be >= 1")


@dataclass
class HomotopySeries:
    """Per-order grid matrices Z_m (n x N+1 each) and their weighted tail norms."""

    orders: list[np.ndarray] = field(default_factory=list)
    tail_norms: list[float] = field(default_factory=list)

    def partial_sum(self, up_to: int | None = None) -> np.ndarray:
        take = self.orders if up_to is None else self.orders[: up_to + 1]
        return np.sum(take, axis=0)


class Termination(enum.Enum):
    CONVERGED = "Converged"
    MAX_ORDER = "MaxOrder"
    DIVERGED = "Diverged"


@dataclass
class BlockOperator:
    """Dense block collocation matrix with boundary rows replaced, plus the
    raw (pre-replacement) matrix and a cached pseudo-inverse factorization
    reused for every deformation order.

    The differentiation-matrix entries grow like the Laguerre-polynomial
    extrema (roughly e^{beta t / 2} at the largest nodes), so the assembled
    operator is extremely ill conditioned in the absolute sense even though
    the discrete solution itself is tame.  A plain LU solve contaminates the
    large-node values with enormous components along near-null directions,
    which then explode under the nonlinear convolution terms.  Row
    equilibration followed by a truncated-SVD pseudo-inverse keeps the
    solution in the numerically determined subspace and restores the tiny
    tail values of the true collocation solution.  When the equilibrated
    matrix is numerically nonsingular (condition below COND_SWITCH) a plain
    LU factorization is used instead: it is backward stable and, unlike the
    truncated pseudo-inverse, keeps repeated solves against residuals of its
    own solutions at round-off level."""

    matrix: np.ndarray
    raw: np.ndarray
    row_scale: np.ndarray
    boundary_rows: np.ndarray
    boundary_values: np.ndarray
    lu: tuple | None = None
    pinv: np.ndarray | None = None

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        scaled = rhs / self.row_scale
        if self.lu is not None:
            return lu_solve(self.lu, scaled)
        return self.pinv @ scaled


def assemble_operator(spec: SystemSpec, rule: BasisRule) -> BlockOperator:
    """Build the n(N+1) square operator with blocks D + sigma_pp I on the
    diagonal and sigma_pq I off it, then overwrite one row per component with
    the boundary condition: the t_0 row for initial values, the t_N row for
    decay at infinity."""
    n, npts = spec.dim, rule.n_points
    size = n * npts
    raw = np.zeros((size, size))
    for p in range(n):
        rows = slice(p * npts, (p + 1) * npts)
        for q in range(n):
            cols = slice(q * npts, (q + 1) * npts)
            if p == q:
                raw[rows, cols] = rule.diff + spec.sigma[p, q] * np.eye(npts)
            elif spec.sigma[p, q] != 0.0:
                raw[rows, cols] = spec.sigma[p, q] * np.eye(npts)

    matrix = raw.copy()
    brows = np.empty(n, dtype=int)
    bvals = np.empty(n)
    for r, tag in enumerate(spec.bc):
        if isinstance(tag, InitialValue):
            row = r * npts
            bvals[r] = tag.value
        else:
            row = r * npts + (npts - 1)
            bvals[r] = 0.0
        matrix[row, :] = 0.0
        matrix[row, row] = 1.0
        brows[r] = row

    row_scale = np.abs(matrix).max(axis=1)
    if row_scale.min() == 0.0 or not np.all(np.isfinite(row_scale)):
        raise OperatorSingularError(
            f"operator has a zero or non-finite row for n={spec.dim}, "
            f"grid={rule.n_points}"
        )
    equilibrated = matrix / row_scale[:, None]
    try:
        u, s, vt = np.linalg.svd(equilibrated)
    except np.linalg.LinAlgError as exc:
        raise OperatorSingularError(str(exc)) from exc
    if s[-1] <= 0.0 or not np.all(np.isfinite(s)):
        raise OperatorSingularError(
            f"singular operator for n={spec.dim}, grid={rule.n_points}"
        )
    if s[0] / s[-1] <= COND_SWITCH:
        return BlockOperator(
            matrix, raw, row_scale, brows, bvals, lu=lu_factor(equilibrated)
        )
    keep = s > PINV_RCOND * s[0]
    pinv = (vt[keep].T / s[keep]) @ u[:, keep].T
    return BlockOperator(matrix, raw, row_scale, brows, bvals, pinv=pinv)


def _forcing_grid(spec: SystemSpec, rule: BasisRule) -> np.ndarray:
    if spec.forcing is None:
        return np.zeros((spec.dim, rule.n_points))
    phi = np.asarray(spec.forcing(rule.nodes), dtype=float)
    if phi.shape != (spec.dim, rule.n_points):
        raise ValueError(f"forcing must return shape {(spec.dim, rule.n_points)}")
    return phi


def initial_guess(spec: SystemSpec, rule: BasisRule, operator: BlockOperator) -> np.ndarray:
    """Order-0 term: solve the linear part against the forcing with
    inhomogeneous boundary rows."""
    rhs = _forcing_grid(spec, rule).ravel()
    rhs[operator.boundary_rows] = operator.boundary_values
    return operator.solve(rhs).reshape(spec.dim, rule.n_points)


def _convolve_trunc(a: list[np.ndarray], b: list[np.ndarray], up_to: int) -> list[np.ndarray]:
    out = [np.zeros_like(a[0]) for _ in range(up_to + 1)]
    for i, ai in enumerate(a):
        if i > up_to:
            break
        for j, bj in enumerate(b):
            if i + j > up_to:
                break
            out[i + j] += ai * bj
    return out


def cauchy_order_term(series: HomotopySeries, term: MonomialTerm, order: int) -> np.ndarray:
    """Coefficient of q^(order-1) in the monomial applied to the series,
    node-wise, by folding truncated discrete convolutions one factor at a time."""
    if order < 1 or order > len(series.orders):
        raise ValueError(f"order {order} out of range for {len(series.orders)} stored orders")
    target = order - 1
    prod: list[np.ndarray] | None = None
    for comp, exp in enumerate(term.exponents):
        if exp == 0:
            continue
        factor = [series.orders[j][comp] for j in range(min(len(series.orders), target + 1))]
        for _ in range(exp):
            prod = factor if prod is None else _convolve_trunc(prod, factor, target)
    if prod is None or len(prod) <= target:
        return np.zeros_like(series.orders[0][0])
    return term.coefficient * prod[target]


def deformation_step(
    spec: SystemSpec,
    rule: BasisRule,
    operator: BlockOperator,
    series: HomotopySeries,
    config: SolverConfig,
    order: int,
) -> np.ndarray:
    """One order of the deformation recurrence.

    Solves L[z_m - chi_m z_{m-1}] = hbar H (L[z_{m-1}] + Q_{m-1} - (1-chi_m) phi)
    with homogeneous boundary rows, against the cached factorization. For
    m >= 2 this reduces to z_m = (1 + hbar) z_{m-1} + hbar A^{-1} Q_{m-1}; at
    m = 1 the carried L[z_0] cancels the forcing because z_0 solved the
    linear part exactly on this grid.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    n, npts = spec.dim, rule.n_points
    chi = 0.0 if order == 1 else 1.0

    q_grid = np.zeros((n, npts))
    for r, terms in enumerate(spec.nonlinear):
        for term in terms:
            q_grid[r] += cauchy_order_term(series, term, order)
    if not np.all(np.isfinite(q_grid)):
        raise DivergenceError(order, float(np.nanmax(np.abs(q_grid))))

    z_prev = series.orders[order - 1].ravel()
    lz_prev = operator.raw @ z_prev
    resid = lz_prev + q_grid.ravel()
    if chi == 0.0:
        resid -= _forcing_grid(spec, rule).ravel()

    h_vals = 1.0 if config.aux_h is None else np.tile(config.aux_h(rule.nodes), n)
    rhs = chi * lz_prev + config.hbar * h_vals * resid
    rhs[operator.boundary_rows] = 0.0
    if not np.all(np.isfinite(rhs)):
        raise DivergenceError(order, float(np.nanmax(np.abs(rhs))))
    return operator.solve(rhs).reshape(n, npts)


def tail_norm(rule: BasisRule, z: np.ndarray) -> float:
    """Discrete weighted norm of one order term over all components."""
    return math.sqrt(float(np.sum(rule.weights * np.sum(z * z, axis=0))))


@dataclass
class ShamResult:
    series: HomotopySeries
    rule: BasisRule
    operator: BlockOperator
    solution: np.ndarray  # partial sum at nodes, shape (n, N+1)
    termination: Termination

    @property
    def tail_norms(self) -> list[float]:
        return self.series.tail_norms

    def at(self, times) -> np.ndarray:
        """Interpolate the converged partial sums at arbitrary times."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        out = np.empty((self.solution.shape[0], len(times)))
        for r in range(self.solution.shape[0]):
            out[r] = interpolate(self.rule, self.solution[r], times)
        return out


def run_sham(spec: SystemSpec, config: SolverConfig) -> ShamResult:
    """Build the rule and operator, take the linear initial guess, and iterate
    deformation orders until the weighted tail norm drops below tail_tol."""
    rule = build_rule(config.basis)
    operator = assemble_operator(spec, rule)
    series = HomotopySeries()
    z0 = initial_guess(spec, rule, operator)
    series.orders.append(z0)
    series.tail_norms.append(tail_norm(rule, z0))

    termination = Termination.MAX_ORDER
    best_order = 0
    best_tail = series.tail_norms[0]
    for m in range(1, config.max_order + 1):
        try:
            zm = deformation_step(spec, rule, operator, series, config, m)
        except DivergenceError:
            termination = Termination.DIVERGED
            break
        norm = tail_norm(rule, zm)
        series.orders.append(zm)
        series.tail_norms.append(norm)
        if not math.isfinite(norm) or (best_tail > 0 and norm > 1e6 * best_tail):
            termination = Termination.DIVERGED
            break
        if norm < best_tail:
            best_tail = norm
            best_order = m
        if norm < config.tail_tol:
            termination = Termination.CONVERGED
            break

    if termination is Termination.DIVERGED:
        # keep the best partial sum reached before the blow-up so callers can
        # still inspect the (possibly useful) low-order result
        del series.orders[best_order + 1 :]
        del series.tail_norms[best_order + 1 :]

    return ShamResult(series, rule, operator, series.partial_sum(), termination)


def gamma_diagnostic(
    spec: SystemSpec,
    config: SolverConfig,
    lipschitz_estimate: float,
    alpha_min: float | None = None,
    alpha_max: float | None = None,
    h_max: float = 1.0,
) -> float:
    """Contraction-ratio diagnostic (N|1 + hbar H| + a1 + |hbar| H L) / (beta/2 + a0).

    Purely informational: the solver never gates on it. When the bounds a0, a1
    are not supplied they are taken from the diagonal of sigma. Returns NaN
    when beta/2 + a0 <= 0 (the ratio is undefined there).
    """
    diag = np.diag(spec.sigma)
    a0 = float(np.min(diag)) if alpha_min is None else alpha_min
    a1 = float(np.max(np.abs(diag))) if alpha_max is None else alpha_max
    beta = config.basis.beta
    n = config.basis.n_order
    denom = beta / 2.0 + a0
    if denom <= 0:
        return math.nan
    num = n * abs(1.0 + config.hbar * h_max) + a1 + abs(config.hbar) * h_max * lipschitz_estimate
    return num / denom
