"""Interconnected optimal control problems and their Pontryagin boundary value form.

A problem is a list of subsystems (A_i, B_i, Q_i, R_i, polynomial coupling
f_i over the full stacked state, initial state). `derive_tpbvp` produces the
2n-dimensional state/costate system, `optimal_control` applies
u* = -R^{-1} B^T lambda, and `evaluate_cost` integrates the quadratic cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .laguerre_basis import BasisRule, interpolate, quadrature_unweighted
from .sham_engine import (
    DecayAtInfinity,
    InitialValue,
    MonomialTerm,
    SolverConfig,
    SystemSpec,
    Termination,
    gamma_diagnostic,
    run_sham,
)


class ProblemFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _check_symmetric_psd(mat: np.ndarray, name: str, strict: bool) -> None:
    if not np.allclose(mat, mat.T, atol=1e-12):
        raise ValueError(f"{name} must be symmetric")
    eigs = np.linalg.eigvalsh(mat)
    if strict and eigs.min() <= 0:
        raise ValueError(f"{name} must be positive definite, min eigenvalue {eigs.min():.3e}")
    if not strict and eigs.min() < -1e-10:
        raise ValueError(f"{name} must be positive semidefinite, min eigenvalue {eigs.min():.3e}")


@dataclass(frozen=True)
class SubsystemSpec:
    """One subsystem: linear dynamics, quadratic cost blocks, polynomial
    coupling over the full stacked state, and its initial state."""

    a_mat: np.ndarray
    b_mat: np.ndarray
    q_mat: np.ndarray
    r_mat: np.ndarray
    f_terms: tuple[tuple[MonomialTerm, ...], ...]  # one list per state row, over the stacked x
    x0: np.ndarray

    def __post_init__(self):
        for name in ("a_mat", "b_mat", "q_mat", "r_mat"):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
        object.__setattr__(self, "x0", np.atleast_1d(np.asarray(self.x0, dtype=float)))
        object.__setattr__(self, "f_terms", tuple(tuple(row) for row in self.f_terms))
        ni = self.a_mat.shape[0]
        if self.a_mat.shape != (ni, ni):
            raise ValueError("a_mat must be square")
        if self.b_mat.shape[0] != ni:
            raise ValueError("b_mat row count must match a_mat")
        mi = self.b_mat.shape[1]
        if self.q_mat.shape != (ni, ni) or self.r_mat.shape != (mi, mi):
            raise ValueError("q_mat/r_mat dimensions inconsistent with a_mat/b_mat")
        if self.x0.shape != (ni,):
            raise ValueError("x0 length must match subsystem dimension")
        _check_symmetric_psd(self.q_mat, "q_mat", strict=False)
        _check_symmetric_psd(self.r_mat, "r_mat", strict=True)
        if len(self.f_terms) != ni:
            raise ValueError("f_terms must have one monomial list per state row")

    @property
    def n_states(self) -> int:
        return self.a_mat.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.b_mat.shape[1]


@dataclass(frozen=True)
class OCProblem:
    subsystems: tuple[SubsystemSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "subsystems", tuple(self.subsystems))
        n = self.n_states
        for sub in self.subsystems:
            for row in sub.f_terms:
                for term in row:
                    if len(term.exponents) != n:
                        raise ValueError(
                            f"f monomial exponents length {len(term.exponents)} != stacked dim {n}"
                        )

    @property
    def n_states(self) -> int:
        return sum(s.n_states for s in self.subsystems)

    @property
    def n_inputs(self) -> int:
        return sum(s.n_inputs for s in self.subsystems)

    def stacked_x0(self) -> np.ndarray:
        return np.concatenate([s.x0 for s in self.subsystems])


def _block_diag(mats: list[np.ndarray]) -> np.ndarray:
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols))
    r = c = 0
    for m in mats:
        out[r : r + m.shape[0], c : c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def _extend_exponents(exps: tuple[int, ...], total: int) -> tuple[int, ...]:
    return exps + (0,) * (total - len(exps))


def derive_tpbvp(problem: OCProblem) -> SystemSpec:
    """Pontryagin optimality system as a 2n-component SystemSpec.

    The stacked unknown is (x, lambda); the linear matrix moves the Hamiltonian
    dynamics to the left-hand side, states carry the coupling terms f and the
    costates carry the chain-rule interaction sum_j (df_j/dx_k) lambda_j,
    differentiated monomial-by-monomial.
    """
    n = problem.n_states
    a = _block_diag([s.a_mat for s in problem.subsystems])
    b = _block_diag([s.b_mat for s in problem.subsystems])
    q = _block_diag([s.q_mat for s in problem.subsystems])
    rinv = _block_diag([np.linalg.inv(s.r_mat) for s in problem.subsystems])
    s_mat = b @ rinv @ b.T

    sigma = np.zeros((2 * n, 2 * n))
    sigma[:n, :n] = -a
    sigma[:n, n:] = s_mat
    sigma[n:, :n] = q
    sigma[n:, n:] = a.T

    # flatten per-row monomial lists over the stacked state
    f_flat: list[tuple[MonomialTerm, ...]] = []
    for sub in problem.subsystems:
        f_flat.extend(sub.f_terms)

    nonlinear: list[tuple[MonomialTerm, ...]] = []
    for row in f_flat:
        nonlinear.append(
            tuple(
                MonomialTerm(-t.coefficient, _extend_exponents(t.exponents, 2 * n)) for t in row
            )
        )
    for k in range(n):
        psi_terms: list[MonomialTerm] = []
        for l, row in enumerate(f_flat):
            for t in row:
                e_k = t.exponents[k]
                if e_k == 0:
                    continue
                new = list(_extend_exponents(t.exponents, 2 * n))
                new[k] -= 1
                new[n + l] += 1
                psi_terms.append(MonomialTerm(t.coefficient * e_k, tuple(new)))
        nonlinear.append(tuple(psi_terms))

    bc = tuple(InitialValue(v) for v in problem.stacked_x0()) + tuple(
        DecayAtInfinity() for _ in range(n)
    )
    return SystemSpec(dim=2 * n, sigma=sigma, nonlinear=tuple(nonlinear), bc=bc)


def optimal_control(problem: OCProblem, costates: np.ndarray) -> np.ndarray:
    """u_i = -R_i^{-1} B_i^T lambda_i per subsystem at every column of costates."""
    costates = np.atleast_2d(np.asarray(costates, dtype=float))
    if costates.shape[0] != problem.n_states:
        raise ValueError(f"expected {problem.n_states} costate rows, got {costates.shape[0]}")
    out = np.empty((problem.n_inputs, costates.shape[1]))
    r = c = 0
    for sub in problem.subsystems:
        lam = costates[r : r + sub.n_states]
        out[c : c + sub.n_inputs] = -np.linalg.solve(sub.r_mat, sub.b_mat.T @ lam)
        r += sub.n_states
        c += sub.n_inputs
    return out


def evaluate_cost(
    problem: OCProblem, states: np.ndarray, controls: np.ndarray, rule: BasisRule
) -> float:
    """Quadratic cost 1/2 integral of (x^T Q x + u^T R u), evaluated with the
    unweighted node quadrature; trajectories must be sampled at rule nodes."""
    states = np.atleast_2d(states)
    controls = np.atleast_2d(controls)
    integrand = np.zeros(states.shape[1])
    r = c = 0
    for sub in problem.subsystems:
        x = states[r : r + sub.n_states]
        u = controls[c : c + sub.n_inputs]
        integrand += np.einsum("it,ij,jt->t", x, sub.q_mat, x)
        integrand += np.einsum("it,ij,jt->t", u, sub.r_mat, u)
        r += sub.n_states
        c += sub.n_inputs
    return 0.5 * quadrature_unweighted(rule, integrand)


@dataclass
class SolutionBundle:
    """Trajectories at report times plus cost and convergence diagnostics."""

    times: np.ndarray
    states: np.ndarray
    costates: np.ndarray
    controls: np.ndarray
    cost: float
    per_order_costs: list[float]
    tail_norms: list[float]
    termination: Termination
    gamma: float | None = None
    node_times: np.ndarray | None = None
    node_states: np.ndarray | None = None
    node_costates: np.ndarray | None = None
    rule: BasisRule | None = None

    def at(self, times) -> np.ndarray:
        """Interpolated (states; costates) stack at arbitrary times >= 0."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        z = np.vstack([self.node_states, self.node_costates])
        out = np.empty((z.shape[0], len(times)))
        for r in range(z.shape[0]):
            out[r] = interpolate(self.rule, z[r], times)
        return out


def solve_ocp(
    problem: OCProblem,
    config: SolverConfig,
    report_times: Sequence[float] | None = None,
    lipschitz_estimate: float | None = None,
) -> SolutionBundle:
    """Run the homotopy solver on the derived optimality system and package
    trajectories, controls, and cost."""
    spec = derive_tpbvp(problem)
    result = run_sham(spec, config)
    n = problem.n_states
    node_states = result.solution[:n]
    node_costates = result.solution[n:]
    node_controls = optimal_control(problem, node_costates)
    cost = evaluate_cost(problem, node_states, node_controls, result.rule)

    per_order_costs = []
    for m in range(len(result.series.orders)):
        z = result.series.partial_sum(m)
        u = optimal_control(problem, z[n:])
        per_order_costs.append(evaluate_cost(problem, z[:n], u, result.rule))

    if report_times is None:
        report_times = result.rule.nodes
    times = np.asarray(report_times, dtype=float)
    traj = result.at(times)
    states = traj[:n]
    costates = traj[n:]
    controls = optimal_control(problem, costates)

    gamma = None
    if lipschitz_estimate is not None:
        gamma = gamma_diagnostic(spec, config, lipschitz_estimate)

    return SolutionBundle(
        times=times,
        states=states,
        costates=costates,
        controls=controls,
        cost=cost,
        per_order_costs=per_order_costs,
        tail_norms=list(result.tail_norms),
        termination=result.termination,
        gamma=gamma,
        node_times=result.rule.nodes,
        node_states=node_states,
        node_costates=node_costates,
        rule=result.rule,
    )


def builtin_problem_31() -> OCProblem:
    """Two coupled scalar subsystems with cubic/quadratic interconnections."""
    sub1 = SubsystemSpec(
        a_mat=[[1.0]], b_mat=[[1.0]], q_mat=[[1.0]], r_mat=[[1.0]],
        f_terms=((MonomialTerm(-1.0, (3, 0)), MonomialTerm(1.0, (0, 2))),),
        x0=[0.0],
    )
    sub2 = SubsystemSpec(
        a_mat=[[-1.0]], b_mat=[[1.0]], q_mat=[[1.0]], r_mat=[[1.0]],
        f_terms=((MonomialTerm(1.0, (1, 1)), MonomialTerm(1.0, (0, 3))),),
        x0=[0.8],
    )
    return OCProblem(subsystems=(sub1, sub2))


def builtin_problem_32() -> OCProblem:
    """Rigid-body attitude regulation: Rodrigues kinematics plus Euler dynamics.

    State ordering (rho_1, rho_2, rho_3, omega_1, omega_2, omega_3); inertia
    diag(10, 6.3, 8.5); identity state and control weights.
    """
    j1, j2, j3 = 10.0, 6.3, 8.5
    a = np.zeros((6, 6))
    a[0:3, 3:6] = 0.5 * np.eye(3)
    b = np.zeros((6, 3))
    b[3:6, :] = np.diag([1.0 / j1, 1.0 / j2, 1.0 / j3])
    q = np.eye(6)
    r = np.eye(3)
    x0 = np.array([0.3735, 0.4115, 0.2521, 0.0, 0.0, 0.0])

    def mono(c, rho=(0, 0, 0), omega=(0, 0, 0)):
        return MonomialTerm(c, tuple(rho) + tuple(omega))

    # kinematics: d(rho_i)/dt = 1/2 omega_i (linear) + 1/2 rho_i (rho . omega)
    f_rho = (
        (mono(0.5, (2, 0, 0), (1, 0, 0)), mono(0.5, (1, 1, 0), (0, 1, 0)), mono(0.5, (1, 0, 1), (0, 0, 1))),
        (mono(0.5, (0, 2, 0), (0, 1, 0)), mono(0.5, (1, 1, 0), (1, 0, 0)), mono(0.5, (0, 1, 1), (0, 0, 1))),
        (mono(0.5, (0, 0, 2), (0, 0, 1)), mono(0.5, (1, 0, 1), (1, 0, 0)), mono(0.5, (0, 1, 1), (0, 1, 0))),
    )
    # dynamics: gyroscopic couplings (J2-J3)/J1 etc.
    f_omega = (
        (mono((j2 - j3) / j1, omega=(0, 1, 1)),),   # -11/50 omega_2 omega_3
        (mono((j3 - j1) / j2, omega=(1, 0, 1)),),   # -5/21  omega_1 omega_3
        (mono((j1 - j2) / j3, omega=(1, 1, 0)),),   # 37/85  omega_1 omega_2
    )
    sub = SubsystemSpec(a_mat=a, b_mat=b, q_mat=q, r_mat=r,
                        f_terms=f_rho + f_omega, x0=x0)
    return OCProblem(subsystems=(sub,))


BUILTIN_PROBLEMS = {
    "tp31": builtin_problem_31,
    "tp32": builtin_problem_32,
}

# report times matching the published comparison tables
BUILTIN_REPORT_TIMES = {
    "tp31": (0.113, 0.494, 1.152, 2.107, 3.389, 5.047),
    "tp32": (0.409, 1.950, 4.663, 8.597, 20.488, 38.855),
}


def _parse_matrix(value: str, line: int) -> np.ndarray:
    try:
        return np.array([float(v) for v in value.split()])
    except ValueError as exc:
        raise ProblemFormatError(line, f"bad numeric list: {value!r}") from exc


def parse_problem(text: str) -> OCProblem:
    """Parse the `lahoc-problem v1` key-value format.

    Per subsystem: `dim`, `inputs`, row-major `A`, `B`, `Q`, `R`, `x0`, and
    zero or more `f <row> <coefficient> : <exponent list over stacked state>`.
    """
    lines = text.splitlines()
    if not lines or lines[0].strip() != "lahoc-problem v1":
        raise ProblemFormatError(1, "missing 'lahoc-problem v1' header")

    raw_subs: list[dict] = []
    cur: dict | None = None
    for idx, line in enumerate(lines[1:], start=2):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped == "subsystem":
            cur = {"f": [], "line": idx}
            raw_subs.append(cur)
            continue
        if cur is None:
            raise ProblemFormatError(idx, "expected 'subsystem' before fields")
        key, _, value = stripped.partition(" ")
        if key in ("dim", "inputs"):
            try:
                cur[key] = int(value)
            except ValueError as exc:
                raise ProblemFormatError(idx, f"bad integer for {key}: {value!r}") from exc
        elif key in ("A", "B", "Q", "R", "x0"):
            cur[key] = (_parse_matrix(value, idx), idx)
        elif key == "f":
            head, sep, tail = value.partition(":")
            if not sep:
                raise ProblemFormatError(idx, "f record needs 'row coeff : exponents'")
            parts = head.split()
            if len(parts) != 2:
                raise ProblemFormatError(idx, "f record needs 'row coeff : exponents'")
            try:
                row = int(parts[0])
                coeff = float(parts[1])
                exps = tuple(int(v) for v in tail.split())
            except ValueError as exc:
                raise ProblemFormatError(idx, f"bad f record: {value!r}") from exc
            cur["f"].append((row, coeff, exps, idx))
        else:
            raise ProblemFormatError(idx, f"unknown key {key!r}")

    if not raw_subs:
        raise ProblemFormatError(len(lines), "no subsystems defined")

    n_total = 0
    for sub in raw_subs:
        if "dim" not in sub:
            raise ProblemFormatError(sub["line"], "subsystem missing 'dim'")
        n_total += sub["dim"]

    subs = []
    for sub in raw_subs:
        ni = sub["dim"]
        mi = sub.get("inputs", ni)
        mats = {}
        shapes = {"A": (ni, ni), "B": (ni, mi), "Q": (ni, ni), "R": (mi, mi), "x0": (ni,)}
        for key, shape in shapes.items():
            if key not in sub:
                raise ProblemFormatError(sub["line"], f"subsystem missing {key!r}")
            flat, lineno = sub[key]
            if flat.size != int(np.prod(shape)):
                raise ProblemFormatError(
                    lineno, f"{key} needs {int(np.prod(shape))} entries, got {flat.size}"
                )
            mats[key] = flat.reshape(shape)
        rows: list[list[MonomialTerm]] = [[] for _ in range(ni)]
        for row, coeff, exps, lineno in sub["f"]:
            if not (0 <= row < ni):
                raise ProblemFormatError(lineno, f"f row {row} out of range for dim {ni}")
            if len(exps) != n_total:
                raise ProblemFormatError(
                    lineno, f"f exponents need {n_total} entries, got {len(exps)}"
                )
            try:
                rows[row].append(MonomialTerm(coeff, exps))
            except ValueError as exc:
                raise ProblemFormatError(lineno, str(exc)) from exc
        try:
            subs.append(
                SubsystemSpec(
                    a_mat=mats["A"], b_mat=mats["B"], q_mat=mats["Q"], r_mat=mats["R"],
                    f_terms=tuple(tuple(r) for r in rows), x0=mats["x0"],
                )
            )
        except ValueError as exc:
            raise ProblemFormatError(sub["line"], str(exc)) from exc

    return OCProblem(subsystems=tuple(subs))


def load_problem(path) -> OCProblem:
    with open(path) as fh:
        return parse_problem(fh.read())
