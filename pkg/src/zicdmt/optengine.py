"""Piecewise-linear convex programs and two independent solvers for them.

Programs handled here minimize

    sum_v w_v x_v  +  sum_t (T_t - sum_{v in S_t} x_v)^+
                   -  sum_c K_c (T_c - x_c)^+  +  offset

subject to selected coordinates being nondecreasing along ordering chains,
pairwise coupling lower bounds x_a + x_b >= L, one hinge budget
sum_b (T_b - x_b)^+ <= limit, and the box 0 <= x_v <= cap.

Two solution routes are provided and kept deliberately independent so each
can certify the other:

* :func:`solve_lp` -- exact optimum via hinge linearization and a dense
  two-phase simplex with Bland's anti-cycling rule.
* :func:`solve_grid_oracle` -- brute-force minimum of the *original* hinge
  objective over a uniform lattice; shares no solver code with solve_lp.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BudgetConstraint",
    "PlProgram",
    "PlSolution",
    "solve_lp",
    "solve_grid_oracle",
    "oracle_gap_bound",
]

_PIVOT_TOL = 1e-9
_FEAS_TOL = 1e-8


# ---------------------------------------------------------------------------
# Program and solution containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BudgetConstraint:
    """sum over terms (threshold, variable) of (threshold - x_var)^+ <= limit."""

    terms: tuple[tuple[float, int], ...]
    limit: float

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "terms", tuple((float(t), int(i)) for t, i in self.terms)
        )
        object.__setattr__(self, "limit", float(self.limit))


@dataclass(frozen=True)
class PlProgram:
    """A piecewise-linear convex minimization instance.

    Attributes:
        variables: names of the nonnegative decision variables.
        linear_weights: nonnegative objective coefficient per variable.
        constant_offset: additive objective constant (may be negative).
        plus_objective_terms: (threshold, index subset) hinge terms
            (threshold - sum of the subset)^+ added to the objective with
            weight +1.
        budget_constraint: hinge budget; see :class:`BudgetConstraint`.
        ordering_chains: index sequences whose values must be nondecreasing.
        coupling_bounds: ((a, b), L) meaning x_a + x_b >= L.
        box_upper_bound: common upper cap on all variables; must dominate
            every threshold and coupling bound so the box never cuts off the
            optimum.
        concave_plus_terms: optional (threshold, index, weight) entries, each
            subtracting weight * (threshold - x_index)^+ from the objective.
            These make the objective piecewise linear but nonconvex;
            solve_lp handles them exactly by sign-cell enumeration.
        beyond_capacity: metadata flag set by program builders when the
            budget exceeds what the hinge terms can consume; has no effect
            on solving.
    """

    variables: tuple[str, ...]
    linear_weights: tuple[float, ...]
    constant_offset: float
    plus_objective_terms: tuple[tuple[float, tuple[int, ...]], ...]
    budget_constraint: BudgetConstraint
    ordering_chains: tuple[tuple[int, ...], ...]
    coupling_bounds: tuple[tuple[tuple[int, int], float], ...]
    box_upper_bound: float
    concave_plus_terms: tuple[tuple[float, int, float], ...] = ()
    beyond_capacity: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(str(v) for v in self.variables))
        object.__setattr__(
            self, "linear_weights", tuple(float(w) for w in self.linear_weights)
        )
        object.__setattr__(self, "constant_offset", float(self.constant_offset))
        object.__setattr__(
            self,
            "plus_objective_terms",
            tuple(
                (float(t), tuple(int(i) for i in idxs))
                for t, idxs in self.plus_objective_terms
            ),
        )
        object.__setattr__(
            self,
            "ordering_chains",
            tuple(tuple(int(i) for i in ch) for ch in self.ordering_chains),
        )
        object.__setattr__(
            self,
            "coupling_bounds",
            tuple(
                ((int(a), int(b)), float(lo)) for (a, b), lo in self.coupling_bounds
            ),
        )
        object.__setattr__(self, "box_upper_bound", float(self.box_upper_bound))
        object.__setattr__(
            self,
            "concave_plus_terms",
            tuple((float(t), int(i), float(k)) for t, i, k in self.concave_plus_terms),
        )
        self._validate()

    def _validate(self) -> None:
        n = len(self.variables)
        if n == 0:
            raise ValueError("program needs at least one variable")
        if len(set(self.variables)) != n:
            raise ValueError("variable names must be unique")
        if len(self.linear_weights) != n:
            raise ValueError("one linear weight per variable required")
        if not all(math.isfinite(w) and w >= 0 for w in self.linear_weights):
            raise ValueError("linear weights must be finite and nonnegative")
        if not math.isfinite(self.constant_offset):
            raise ValueError("constant offset must be finite")
        thresholds: list[float] = []
        for t, idxs in self.plus_objective_terms:
            if not (math.isfinite(t) and t >= 0):
                raise ValueError("hinge thresholds must be finite and nonnegative")
            if not idxs or len(set(idxs)) != len(idxs):
                raise ValueError("hinge index subsets must be nonempty without repeats")
            if not all(0 <= i < n for i in idxs):
                raise ValueError("hinge index out of range")
            thresholds.append(t)
        for t, i in self.budget_constraint.terms:
            if not (math.isfinite(t) and t >= 0) or not 0 <= i < n:
                raise ValueError("invalid budget term")
            thresholds.append(t)
        if not (math.isfinite(self.budget_constraint.limit) and self.budget_constraint.limit >= 0):
            raise ValueError("budget limit must be finite and nonnegative")
        seen: set[int] = set()
        for ch in self.ordering_chains:
            if len(set(ch)) != len(ch):
                raise ValueError("ordering chain repeats an index")
            if not all(0 <= i < n for i in ch):
                raise ValueError("ordering chain index out of range")
            if seen & set(ch):
                raise ValueError("a variable may belong to at most one ordering chain")
            seen |= set(ch)
        for (a, b), lo in self.coupling_bounds:
            if a == b or not (0 <= a < n and 0 <= b < n):
                raise ValueError("coupling must join two distinct variables")
            if not (math.isfinite(lo) and lo >= 0):
                raise ValueError("coupling bounds must be finite and nonnegative")
            thresholds.append(lo)
        for t, i, k in self.concave_plus_terms:
            if not (math.isfinite(t) and t >= 0) or not 0 <= i < n:
                raise ValueError("invalid concave hinge term")
            if not (math.isfinite(k) and k >= 0):
                raise ValueError("concave hinge weights must be finite and nonnegative")
            thresholds.append(t)
        if not math.isfinite(self.box_upper_bound) or self.box_upper_bound < 0:
            raise ValueError("box upper bound must be finite and nonnegative")
        if thresholds and self.box_upper_bound < max(thresholds) - 1e-12:
            raise ValueError("box upper bound must dominate every threshold and bound")

    # -- evaluation helpers -------------------------------------------------

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    def objective_value(self, assignment) -> float:
        """The true hinge objective (not a linearization) at `assignment`."""
        x = [float(v) for v in assignment]
        total = self.constant_offset
        total += sum(w * xi for w, xi in zip(self.linear_weights, x))
        for t, idxs in self.plus_objective_terms:
            total += max(0.0, t - sum(x[i] for i in idxs))
        for t, i, k in self.concave_plus_terms:
            total -= k * max(0.0, t - x[i])
        return total

    def budget_value(self, assignment) -> float:
        x = [float(v) for v in assignment]
        return sum(max(0.0, t - x[i]) for t, i in self.budget_constraint.terms)

    def constraint_violation(self, assignment) -> float:
        """Largest amount by which `assignment` violates any constraint."""
        x = np.asarray(assignment, dtype=float)
        if x.shape != (self.n_variables,):
            raise ValueError("assignment length mismatch")
        worst = max(0.0, float(np.max(-x, initial=0.0)))
        worst = max(worst, float(np.max(x - self.box_upper_bound, initial=0.0)))
        for ch in self.ordering_chains:
            for a, b in zip(ch, ch[1:]):
                worst = max(worst, x[a] - x[b])
        for (a, b), lo in self.coupling_bounds:
            worst = max(worst, lo - x[a] - x[b])
        worst = max(worst, self.budget_value(x) - self.budget_constraint.limit)
        return worst

    # -- debugging serialization -------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "variables": list(self.variables),
            "linear_weights": list(self.linear_weights),
            "constant_offset": self.constant_offset,
            "plus_objective_terms": [
                [t, list(idxs)] for t, idxs in self.plus_objective_terms
            ],
            "budget_constraint": {
                "terms": [[t, i] for t, i in self.budget_constraint.terms],
                "limit": self.budget_constraint.limit,
            },
            "ordering_chains": [list(ch) for ch in self.ordering_chains],
            "coupling_bounds": [[[a, b], lo] for (a, b), lo in self.coupling_bounds],
            "box_upper_bound": self.box_upper_bound,
            "concave_plus_terms": [list(t) for t in self.concave_plus_terms],
            "beyond_capacity": self.beyond_capacity,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, data: dict) -> "PlProgram":
        return cls(
            variables=tuple(data["variables"]),
            linear_weights=tuple(data["linear_weights"]),
            constant_offset=data["constant_offset"],
            plus_objective_terms=tuple(
                (t, tuple(idxs)) for t, idxs in data["plus_objective_terms"]
            ),
            budget_constraint=BudgetConstraint(
                terms=tuple((t, i) for t, i in data["budget_constraint"]["terms"]),
                limit=data["budget_constraint"]["limit"],
            ),
            ordering_chains=tuple(tuple(ch) for ch in data["ordering_chains"]),
            coupling_bounds=tuple(
                ((a, b), lo) for (a, b), lo in data["coupling_bounds"]
            ),
            box_upper_bound=data["box_upper_bound"],
            concave_plus_terms=tuple(
                (t, i, k) for t, i, k in data.get("concave_plus_terms", [])
            ),
            beyond_capacity=bool(data.get("beyond_capacity", False)),
        )

    @classmethod
    def from_json(cls, text: str) -> "PlProgram":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class PlSolution:
    """Solver output: optimum value, minimizing assignment, and status."""

    optimal_value: float
    assignment: tuple[float, ...]
    status: str  # "optimal" | "infeasible"


# ---------------------------------------------------------------------------
# Route 1: dense two-phase simplex on the exact linearization
# ---------------------------------------------------------------------------


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])


def _run_phase(tableau, basis, cost, n_scan, max_iter=50_000) -> str:
    """Simplex iterations under Bland's anti-cycling rule.

    Entering variable: smallest column index (< n_scan) with reduced cost
    below -_PIVOT_TOL.  Leaving row: minimum ratio, ties broken by smallest
    basic-variable index.  Returns "optimal" or "unbounded".
    """
    m = tableau.shape[0]
    for _ in range(max_iter):
        reduced = cost[:n_scan] - cost[basis] @ tableau[:, :n_scan]
        candidates = np.flatnonzero(reduced < -_PIVOT_TOL)
        if candidates.size == 0:
            return "optimal"
        col = int(candidates[0])
        direction = tableau[:, col]
        positive = direction > _PIVOT_TOL
        if not positive.any():
            return "unbounded"
        ratios = np.full(m, np.inf)
        ratios[positive] = tableau[positive, -1] / direction[positive]
        tie_rows = np.flatnonzero(ratios <= ratios.min() + _PIVOT_TOL)
        row = int(tie_rows[np.argmin(basis[tie_rows])])
        _pivot(tableau, row, col)
        basis[row] = col
    raise RuntimeError("simplex iteration limit exceeded")


def _simplex_min(c: np.ndarray, a_ub: np.ndarray, b_ub: np.ndarray):
    """Minimize c.z subject to a_ub z <= b_ub, z >= 0.

    Dense two-phase tableau simplex.  Returns (status, z) with status in
    {"optimal", "infeasible", "unbounded"}.
    """
    a_ub = np.asarray(a_ub, dtype=float)
    b_ub = np.asarray(b_ub, dtype=float)
    m, n = a_ub.shape
    tableau = np.hstack([a_ub, np.eye(m), b_ub[:, None]])
    negative = b_ub < 0
    tableau[negative] *= -1.0
    art_rows = np.flatnonzero(negative)
    n_art = art_rows.size
    if n_art:
        block = np.zeros((m, n_art))
        block[art_rows, np.arange(n_art)] = 1.0
        tableau = np.hstack([tableau[:, :-1], block, tableau[:, -1:]])
    basis = np.empty(m, dtype=np.int64)
    basis[~negative] = n + np.flatnonzero(~negative)
    basis[negative] = n + m + np.arange(n_art)

    if n_art:
        cost1 = np.zeros(n + m + n_art)
        cost1[n + m :] = 1.0
        if _run_phase(tableau, basis, cost1, n + m + n_art) != "optimal":
            raise RuntimeError("phase-1 simplex cannot be unbounded")
        if cost1[basis] @ tableau[:, -1] > 1e-7:
            return "infeasible", None
        # Pivot residual zero-valued artificials out; drop redundant rows.
        redundant = []
        for i in range(m):
            if basis[i] >= n + m:
                usable = np.flatnonzero(np.abs(tableau[i, : n + m]) > _PIVOT_TOL)
                if usable.size:
                    col = int(usable[np.argmax(np.abs(tableau[i, usable]))])
                    _pivot(tableau, i, col)
                    basis[i] = col
                else:
                    redundant.append(i)
        if redundant:
            keep = np.setdiff1d(np.arange(m), redundant)
            tableau = tableau[keep]
            basis = basis[keep]
        tableau = np.hstack([tableau[:, : n + m], tableau[:, -1:]])

    cost2 = np.zeros(n + m)
    cost2[:n] = c
    status = _run_phase(tableau, basis, cost2, n + m)
    if status != "optimal":
        return status, None
    z = np.zeros(n + m)
    z[basis] = tableau[:, -1]
    return "optimal", z[:n]


def _solve_cell(program: PlProgram, engaged: tuple[bool, ...]):
    """Solve one linearity cell of the program; returns an assignment or None.

    The cell fixes the sign of each concave hinge: engaged means the
    variable is held at or below the hinge threshold (where the hinge is
    linear with slope +weight), otherwise at or above it (hinge identically
    zero).
    """
    n = program.n_variables
    plus = program.plus_objective_terms
    budget = program.budget_constraint.terms
    nt, ns = len(plus), len(budget)
    width = n + nt + ns
    cost = np.zeros(width)
    cost[:n] = program.linear_weights
    cost[n : n + nt] = 1.0

    rows: list[np.ndarray] = []
    rhs: list[float] = []

    def add(coeffs: dict[int, float], bound: float) -> None:
        row = np.zeros(width)
        for j, v in coeffs.items():
            row[j] = v
        rows.append(row)
        rhs.append(bound)

    for ch in program.ordering_chains:
        for a, b in zip(ch, ch[1:]):
            add({a: 1.0, b: -1.0}, 0.0)
    for (a, b), lo in program.coupling_bounds:
        add({a: -1.0, b: -1.0}, -lo)
    for i in range(n):
        add({i: 1.0}, program.box_upper_bound)
    # Exact linearization: (T - sum x)^+ -> aux t >= T - sum x, t >= 0, with
    # objective weight +1, tight at any optimum because it is minimized.
    for k, (t, idxs) in enumerate(plus):
        coeffs = {i: -1.0 for i in idxs}
        coeffs[n + k] = -1.0
        add(coeffs, -t)
    # Budget hinge (T - x)^+ -> aux s >= T - x, s >= 0, sum s <= limit; exact
    # because s may always be set to the positive part.
    for l, (t, i) in enumerate(budget):
        add({i: -1.0, n + nt + l: -1.0}, -t)
    if ns:
        add({n + nt + l: 1.0 for l in range(ns)}, program.budget_constraint.limit)
    for on, (t, i, k) in zip(engaged, program.concave_plus_terms):
        if on:
            cost[i] += k
            add({i: 1.0}, t)
        else:
            add({i: -1.0}, -t)

    status, z = _simplex_min(cost, np.array(rows), np.array(rhs))
    if status == "infeasible":
        return None
    if status != "optimal":  # pragma: no cover - box rows preclude rays
        raise RuntimeError("linearized program reported " + status)
    x = np.clip(z[:n], 0.0, program.box_upper_bound)
    return x


def solve_lp(program: PlProgram) -> PlSolution:
    """Exact global minimum of `program` via linearization + simplex.

    Convex hinge terms are linearized exactly (see :func:`_solve_cell`).
    Concave hinge terms are handled by enumerating all sign cells of their
    variables; the objective is linear on each cell, the cells cover the
    feasible set, and the least feasible cell optimum is the global optimum.
    """
    n_cells = len(program.concave_plus_terms)
    if n_cells > 16:
        raise ValueError("too many concave hinge terms for cell enumeration")
    best_x = None
    best_val = math.inf
    for engaged in itertools.product((True, False), repeat=n_cells):
        x = _solve_cell(program, engaged)
        if x is None:
            continue
        val = program.objective_value(x)
        if val < best_val:
            best_val, best_x = val, x
    if best_x is None:
        return PlSolution(math.nan, (), "infeasible")
    violation = program.constraint_violation(best_x)
    if violation > _FEAS_TOL:  # pragma: no cover - internal consistency guard
        raise RuntimeError(f"solver produced an infeasible point ({violation:.2e})")
    return PlSolution(best_val, tuple(float(v) for v in best_x), "optimal")


# ---------------------------------------------------------------------------
# Route 2: brute-force lattice oracle
# ---------------------------------------------------------------------------

_MAX_CHAIN_ROWS = 2_000_000
_MAX_SCAN = 300_000_000
_MAX_SLOW_POINTS = 200_000
_RANK_SPAN = 1 << 22  # satellite rank packed beside integer scores
_INT_INF = np.iinfo(np.int64).max // 4


def oracle_gap_bound(program: PlProgram, step: float) -> float:
    """Worst-case excess of the lattice minimum over the true optimum.

    Rounding the true optimizer up to the lattice keeps every constraint
    satisfied (chains and couplings are monotone, budget hinges shrink) and
    raises the objective by at most step per unit of linear weight, per
    convex hinge, and per unit of concave hinge weight.
    """
    total = sum(program.linear_weights)
    total += len(program.plus_objective_terms)
    total += sum(k for _, _, k in program.concave_plus_terms)
    return total * step


@dataclass
class _LatticeMode:
    integer: bool
    step: float
    weights: np.ndarray
    limit: int | float
    tol: float


def _lattice_mode(program: PlProgram, step: float) -> _LatticeMode:
    def exact_units(value: float):
        u = round(value / step)
        return u if abs(u * step - value) <= 1e-9 * max(1.0, abs(value)) else None

    values = [t for t, _ in program.plus_objective_terms]
    values += [t for t, _ in program.budget_constraint.terms]
    values += [lo for _, lo in program.coupling_bounds]
    values += [t for t, _, _ in program.concave_plus_terms]
    weights = list(program.linear_weights) + [
        k for _, _, k in program.concave_plus_terms
    ]
    integer = all(exact_units(v) is not None for v in values) and all(
        abs(w - round(w)) <= 1e-9 for w in weights
    )
    if integer:
        # Exact arithmetic in step units; the budget limit need not be a
        # multiple of step because hinge sums always are: floor is exact.
        return _LatticeMode(
            integer=True,
            step=step,
            weights=np.rint(program.linear_weights).astype(np.int64),
            limit=int(math.floor(program.budget_constraint.limit / step + 1e-9)),
            tol=0.0,
        )
    return _LatticeMode(
        integer=False,
        step=step,
        weights=np.asarray(program.linear_weights, dtype=float),
        limit=float(program.budget_constraint.limit),
        tol=1e-9,
    )


def _conv(mode: _LatticeMode, value: float):
    if mode.integer:
        return int(round(value / mode.step))
    return float(value)


@dataclass
class _ChainTable:
    chain: tuple[int, ...]
    rows: np.ndarray  # lattice units, lex-ordered nondecreasing tuples
    vals: np.ndarray  # units (integer mode) or absolute values (float mode)
    lin: np.ndarray  # chain-local objective contribution
    budget: np.ndarray  # chain-local budget consumption
    mask: np.ndarray  # chain-local feasibility


def _lattice_rows(length: int, nsteps: int) -> np.ndarray:
    rows = np.array(
        list(itertools.combinations_with_replacement(range(nsteps + 1), length)),
        dtype=np.int64,
    ).reshape(-1, length)
    if rows.shape[0] > _MAX_CHAIN_ROWS:
        raise ValueError("lattice too large for the brute-force oracle")
    return rows


def _chain_table(program, chain, nsteps, mode, owner) -> _ChainTable:
    rows = _lattice_rows(len(chain), nsteps)
    cid = owner[chain[0]]
    col = {v: j for j, v in enumerate(chain)}
    if mode.integer:
        vals = rows
        lin = vals @ mode.weights[list(chain)]
    else:
        vals = rows * mode.step
        lin = vals @ mode.weights[list(chain)]
    zero = np.zeros(rows.shape[0], dtype=vals.dtype)
    budget = zero.copy()
    for t, i in program.budget_constraint.terms:
        if owner[i] == cid:
            budget = budget + np.maximum(_conv(mode, t) - vals[:, col[i]], 0)
    for t, idxs in program.plus_objective_terms:
        if all(owner[i] == cid for i in idxs):
            lin = lin + np.maximum(
                _conv(mode, t) - vals[:, [col[i] for i in idxs]].sum(axis=1), 0
            )
    for t, i, k in program.concave_plus_terms:
        if owner[i] == cid:
            kk = int(round(k)) if mode.integer else k
            lin = lin - kk * np.maximum(_conv(mode, t) - vals[:, col[i]], 0)
    mask = np.ones(rows.shape[0], dtype=bool)
    for (a, b), lo in program.coupling_bounds:
        if owner[a] == cid and owner[b] == cid:
            mask &= vals[:, col[a]] + vals[:, col[b]] >= _conv(mode, lo) - mode.tol
    return _ChainTable(tuple(chain), rows, vals, lin, budget, mask)


def _partition_chains(program: PlProgram):
    chains = [tuple(ch) for ch in program.ordering_chains if ch]
    covered = {i for ch in chains for i in ch}
    chains += [(i,) for i in range(program.n_variables) if i not in covered]
    chains.sort(key=min)
    flat = [i for ch in chains for i in ch]
    canonical = flat == list(range(program.n_variables)) and all(
        ch == tuple(sorted(ch)) for ch in chains
    )
    owner = {}
    for cid, ch in enumerate(chains):
        for i in ch:
            owner[i] = cid
    return chains, owner, canonical


def _is_star(program, chains, owner) -> bool:
    """True when every cross-chain item links the first chain to one other."""
    if len(chains) != 3:
        return False
    for _, idxs in program.plus_objective_terms:
        cids = {owner[i] for i in idxs}
        if len(cids) > 2 or (len(cids) == 2 and 0 not in cids):
            return False
    for (a, b), _ in program.coupling_bounds:
        cids = {owner[a], owner[b]}
        if len(cids) == 2 and 0 not in cids:
            return False
    return True


def _finish(program: PlProgram, assignment: np.ndarray) -> PlSolution:
    value = program.objective_value(assignment)
    return PlSolution(value, tuple(float(v) for v in assignment), "optimal")


def solve_grid_oracle(program: PlProgram, step: float) -> PlSolution:
    """Exhaustive minimum of `program` over the lattice {0, step, ..., cap}^n.

    The original hinge objective is evaluated directly (no linearization) at
    every ordering-, coupling- and budget-feasible lattice point, with
    candidates generated per ordering chain so only nondecreasing tuples are
    visited.  Exact ties are broken by the lexicographically smallest
    assignment; when the instance data are multiples of `step` with integer
    weights the scan runs in exact integer arithmetic, so tie-breaking is
    exact too (otherwise it is subject to float rounding).

    Guards: at most 8 variables, and `step` must divide the box cap.
    """
    n = program.n_variables
    if n > 8:
        raise ValueError("grid oracle restricted to programs with at most 8 variables")
    if not (isinstance(step, (int, float)) and step > 0 and math.isfinite(step)):
        raise ValueError("step must be a positive real")
    cap = program.box_upper_bound
    nsteps = round(cap / step)
    if nsteps < 1 or abs(nsteps * step - cap) > 1e-9 * max(1.0, cap):
        raise ValueError("step must divide box_upper_bound")

    chains, owner, canonical = _partition_chains(program)
    if not canonical:
        return _oracle_slow(program, chains, step, nsteps)
    mode = _lattice_mode(program, step)
    tables = [_chain_table(program, ch, nsteps, mode, owner) for ch in chains]
    if mode.integer and _is_star(program, chains, owner):
        return _oracle_star(program, tables, mode, owner)
    return _oracle_factored(program, tables, mode, owner)


def _cross_items(program, owner, target_cid, col_of_target, hub_col):
    """Cross hinge terms and couplings between the hub chain and one satellite.

    Returns (plus_items, coupling_items) where plus_items are
    (hub_cols, sat_cols, threshold) and coupling_items (hub_col, sat_col,
    bound), all in chain-local columns.
    """
    plus_items = []
    for t, idxs in program.plus_objective_terms:
        cids = {owner[i] for i in idxs}
        if cids == {0, target_cid}:
            hub_cols = [hub_col[i] for i in idxs if owner[i] == 0]
            sat_cols = [col_of_target[i] for i in idxs if owner[i] == target_cid]
            plus_items.append((hub_cols, sat_cols, t))
    coupling_items = []
    for (a, b), lo in program.coupling_bounds:
        cids = {owner[a], owner[b]}
        if cids == {0, target_cid}:
            h, s = (a, b) if owner[a] == 0 else (b, a)
            coupling_items.append((hub_col[h], col_of_target[s], lo))
    return plus_items, coupling_items


def _oracle_star(program, tables, mode, owner) -> PlSolution:
    """Hub-and-satellites scan: exact integer arithmetic, one pass per hub row.

    For each hub assignment the two satellite chains decouple except for the
    shared budget; the second satellite is pre-sorted by budget so the best
    compatible row for any residual budget is a prefix minimum, found by one
    binary search per first-satellite row.
    """
    hub, s1, s2 = tables
    hub_col = {v: j for j, v in enumerate(hub.chain)}
    col1 = {v: j for j, v in enumerate(s1.chain)}
    col2 = {v: j for j, v in enumerate(s2.chain)}
    plus1, cpl1 = _cross_items(program, owner, 1, col1, hub_col)
    plus2, cpl2 = _cross_items(program, owner, 2, col2, hub_col)

    def prep(table, plus_items):
        sums = [
            (hc, table.vals[:, sc].sum(axis=1), _conv(mode, t))
            for hc, sc, t in plus_items
        ]
        return sums

    sums1 = prep(s1, plus1)
    sums2 = prep(s2, plus2)
    col_vec1 = {j: s1.vals[:, j] for j in range(len(s1.chain))}
    col_vec2 = {j: s2.vals[:, j] for j in range(len(s2.chain))}
    order2 = np.argsort(s2.budget, kind="stable")
    b2_sorted = s2.budget[order2]
    rank2 = np.arange(s2.rows.shape[0], dtype=np.int64)

    best_total = None
    best = None
    for h in range(hub.rows.shape[0]):
        if not hub.mask[h]:
            continue
        remaining = mode.limit - int(hub.budget[h])
        if remaining < 0:
            continue
        u = hub.vals[h]

        score2 = s2.lin
        for hub_cols, sat_sum, t in sums2:
            score2 = score2 + np.maximum(t - int(u[hub_cols].sum()) - sat_sum, 0)
        feasible2 = s2.mask
        for hc, sc, lo in cpl2:
            feasible2 = feasible2 & (col_vec2[sc] >= _conv(mode, lo) - int(u[hc]))
        key2 = np.where(feasible2, score2 * _RANK_SPAN + rank2, _INT_INF)
        prefix2 = np.minimum.accumulate(key2[order2])

        score1 = s1.lin
        for hub_cols, sat_sum, t in sums1:
            score1 = score1 + np.maximum(t - int(u[hub_cols].sum()) - sat_sum, 0)
        feasible1 = s1.mask
        for hc, sc, lo in cpl1:
            feasible1 = feasible1 & (col_vec1[sc] >= _conv(mode, lo) - int(u[hc]))
        cut = np.searchsorted(b2_sorted, remaining - s1.budget, side="right") - 1
        usable = feasible1 & (cut >= 0)
        partner = prefix2[np.maximum(cut, 0)]
        total = np.where(
            usable & (partner < _INT_INF), score1 + partner // _RANK_SPAN, _INT_INF
        )
        j = int(np.argmin(total))
        if total[j] >= _INT_INF:
            continue
        candidate = int(hub.lin[h]) + int(total[j])
        if best_total is None or candidate < best_total:
            best_total = candidate
            best = (h, j, int(partner[j] % _RANK_SPAN))

    if best is None:
        return PlSolution(math.nan, (), "infeasible")
    h, j, r2 = best
    assignment = np.zeros(program.n_variables)
    assignment[list(hub.chain)] = hub.rows[h] * mode.step
    assignment[list(s1.chain)] = s1.rows[j] * mode.step
    assignment[list(s2.chain)] = s2.rows[r2] * mode.step
    return _finish(program, assignment)


def _oracle_factored(program, tables, mode, owner) -> PlSolution:
    """Generic scan: loop lattice tuples of all chains but the last (in lex
    order), vectorize over the last chain, and take first-occurrence argmins
    so exact ties resolve to the lexicographically smallest assignment."""
    last = tables[-1]
    prefix = tables[:-1]
    combos = 1
    for t in prefix:
        combos *= t.rows.shape[0]
    if combos * last.rows.shape[0] > _MAX_SCAN:
        raise ValueError("lattice too large for the brute-force oracle")
    last_cid = len(tables) - 1
    last_col = {v: j for j, v in enumerate(last.chain)}

    # Items spanning several chains, split by whether they touch the last one.
    cross_plus = []  # (prefix var ids, last column sum vector, threshold)
    pre_plus = []  # (var ids, threshold)
    for t, idxs in program.plus_objective_terms:
        cids = {owner[i] for i in idxs}
        if len(cids) == 1:
            continue  # chain-local, already folded into a table
        pre_vars = [i for i in idxs if owner[i] != last_cid]
        last_vars = [i for i in idxs if owner[i] == last_cid]
        if last_vars:
            vec = last.vals[:, [last_col[i] for i in last_vars]].sum(axis=1)
            cross_plus.append((pre_vars, vec, _conv(mode, t)))
        else:
            pre_plus.append((list(idxs), _conv(mode, t)))
    cross_cpl = []  # (prefix var id, last column vector, bound)
    pre_cpl = []  # ((a, b), bound)
    for (a, b), lo in program.coupling_bounds:
        ca, cb = owner[a], owner[b]
        if ca == cb:
            continue
        if cb == last_cid:
            cross_cpl.append((a, last.vals[:, last_col[b]], _conv(mode, lo)))
        elif ca == last_cid:
            cross_cpl.append((b, last.vals[:, last_col[a]], _conv(mode, lo)))
        else:
            pre_cpl.append(((a, b), _conv(mode, lo)))

    inf = _INT_INF if mode.integer else np.inf
    value_at = np.zeros(program.n_variables, dtype=last.vals.dtype)
    best_total = None
    best = None
    for combo in itertools.product(*[range(t.rows.shape[0]) for t in prefix]):
        score = 0
        budget = 0
        ok = True
        for table, row in zip(prefix, combo):
            if not table.mask[row]:
                ok = False
                break
            score = score + table.lin[row]
            budget = budget + table.budget[row]
            value_at[list(table.chain)] = table.vals[row]
        if not ok:
            continue
        remaining = mode.limit - budget
        if remaining < -mode.tol:
            continue
        for (a, b), lo in pre_cpl:
            if value_at[a] + value_at[b] < lo - mode.tol:
                ok = False
                break
        if not ok:
            continue
        for pre_vars, t in pre_plus:
            score = score + max(0, t - value_at[pre_vars].sum())

        total = last.lin + score
        feasible = last.mask & (last.budget <= remaining + mode.tol)
        for pre_vars, vec, t in cross_plus:
            total = total + np.maximum(t - value_at[pre_vars].sum() - vec, 0)
        for a, vec, lo in cross_cpl:
            feasible = feasible & (vec >= lo - value_at[a] - mode.tol)
        total = np.where(feasible, total, inf)
        j = int(np.argmin(total))
        if total[j] >= inf:
            continue
        if best_total is None or total[j] < best_total:
            best_total = total[j]
            best = (combo, j)

    if best is None:
        return PlSolution(math.nan, (), "infeasible")
    combo, j = best
    assignment = np.zeros(program.n_variables)
    for table, row in zip(prefix, combo):
        assignment[list(table.chain)] = table.rows[row] * mode.step
    assignment[list(last.chain)] = last.rows[j] * mode.step
    return _finish(program, assignment)


def _oracle_slow(program, chains, step, nsteps) -> PlSolution:
    """Fallback for non-canonical chain layouts: full product scan with
    explicit lexicographic tie-breaking on the assembled assignment."""
    per_chain = [list(itertools.combinations_with_replacement(range(nsteps + 1), len(ch))) for ch in chains]
    total = 1
    for rows in per_chain:
        total *= len(rows)
    if total > _MAX_SLOW_POINTS:
        raise ValueError("lattice too large for the brute-force oracle")
    best = None
    for pick in itertools.product(*per_chain):
        assignment = np.zeros(program.n_variables)
        for ch, values in zip(chains, pick):
            assignment[list(ch)] = np.asarray(values, dtype=float) * step
        if program.constraint_violation(assignment) > 1e-9:
            continue
        value = program.objective_value(assignment)
        key = (value, tuple(assignment))
        if best is None or key < best:
            best = key
    if best is None:
        return PlSolution(math.nan, (), "infeasible")
    return PlSolution(best[0], best[1], "optimal")
