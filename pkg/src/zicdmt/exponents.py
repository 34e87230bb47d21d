"""Sum-rate outage-exponent programs for the two-user Z interference channel.

At high SNR the probability that the channel cannot support a sum rate
``r_s * log2(rho)`` decays like ``rho ** -d(r_s)``.  With full transmitter
side information, ``d(r_s)`` is the optimum of a piecewise-linear convex
program over the eigenvalue scaling exponents of the three constituent
links: ``upsilon`` for the cross link, ``beta`` for the direct link of the
interfered receiver, ``gamma`` for the interference-free receiver.  This
module builds those programs (plus the integrated-interference variant used
without transmitter side information) in the conventions of
:mod:`zicdmt.optengine`, and exposes the per-receiver exponent pieces so the
assembled objective can be cross-checked term by term.

Vectors are indexed from 1 in docstrings (matching the usual linear-algebra
convention for ordered eigenvalues); element ``i`` lives at Python index
``i - 1`` throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .optengine import BudgetConstraint, PlProgram

__all__ = [
    "AntennaConfig",
    "ScalingExponents",
    "ExponentVariables",
    "MultiplexingGainPair",
    "OutsideSupportError",
    "build_fcsit_sum_program",
    "build_fcsit_presimplified_program",
    "build_iml_sum_program",
    "eval_E1",
    "eval_E2",
    "f_w3_exponent",
]

_SUPPORT_TOL = 1e-9


class OutsideSupportError(ValueError):
    """Raised when exponent variables fall outside their support set."""


@dataclass(frozen=True)
class AntennaConfig:
    """Antenna counts (M1, N1, M2, N2) of the Z interference channel.

    Transmitter 1 -> receiver 1 is the interfered direct link, transmitter
    2 -> receiver 1 the cross link, transmitter 2 -> receiver 2 the
    interference-free link.
    """

    m1: int
    n1: int
    m2: int
    n2: int

    def __post_init__(self) -> None:
        for label, count in (
            ("m1", self.m1),
            ("n1", self.n1),
            ("m2", self.m2),
            ("n2", self.n2),
        ):
            if not isinstance(count, int) or count < 1:
                raise ValueError(f"{label} must be a positive integer")

    @property
    def p(self) -> int:
        """Rank of the cross link: min(M2, N1)."""
        return min(self.m2, self.n1)

    @property
    def q1(self) -> int:
        """Rank of the first direct link: min(M1, N1)."""
        return min(self.m1, self.n1)

    @property
    def q2(self) -> int:
        """Rank of the second direct link: min(M2, N2)."""
        return min(self.m2, self.n2)


@dataclass(frozen=True)
class ScalingExponents:
    """SNR scaling exponents (alpha11, alpha21, alpha22) of the three links.

    ``alpha_ij`` is the ratio log(link SNR) / log(rho) held fixed as the
    nominal SNR rho grows.
    """

    alpha11: float
    alpha21: float
    alpha22: float

    def __post_init__(self) -> None:
        for label, value in (
            ("alpha11", self.alpha11),
            ("alpha21", self.alpha21),
            ("alpha22", self.alpha22),
        ):
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{label} must be a positive finite real")
        object.__setattr__(self, "alpha11", float(self.alpha11))
        object.__setattr__(self, "alpha21", float(self.alpha21))
        object.__setattr__(self, "alpha22", float(self.alpha22))


@dataclass(frozen=True)
class MultiplexingGainPair:
    """Per-user multiplexing gains (r1, r2); the sum gain is their total."""

    r1: float
    r2: float

    def __post_init__(self) -> None:
        for label, value in (("r1", self.r1), ("r2", self.r2)):
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{label} must be a finite nonnegative real")
        object.__setattr__(self, "r1", float(self.r1))
        object.__setattr__(self, "r2", float(self.r2))

    @property
    def r_sum(self) -> float:
        return self.r1 + self.r2


@dataclass(frozen=True)
class ExponentVariables:
    """Eigenvalue scaling exponents grouped per link (upsilon, beta, gamma)."""

    upsilon: tuple[float, ...]
    beta: tuple[float, ...]
    gamma: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "upsilon", tuple(float(v) for v in self.upsilon))
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        object.__setattr__(self, "gamma", tuple(float(v) for v in self.gamma))

    @classmethod
    def from_assignment(
        cls, cfg: AntennaConfig, assignment, *, with_gamma: bool = True
    ) -> "ExponentVariables":
        """Split a solver assignment laid out as (upsilon, beta[, gamma])."""
        values = tuple(float(v) for v in assignment)
        p, q1 = cfg.p, cfg.q1
        q2 = cfg.q2 if with_gamma else 0
        if len(values) != p + q1 + q2:
            raise ValueError("assignment length does not match the configuration")
        return cls(values[:p], values[p : p + q1], values[p + q1 :])


# ---------------------------------------------------------------------------
# Program builders
# ---------------------------------------------------------------------------


def _assemble_sum_program(
    m1: int,
    n1: int,
    m2: int,
    n2: int,
    alphas: ScalingExponents,
    r_s: float,
    *,
    presimplified: bool,
) -> PlProgram:
    """Shared assembler for the sum-outage exponent programs.

    With ``n2 == 0`` the gamma block and its terms vanish and the cross-link
    spectator weight drops from M1+N2 to M1, which is exactly the
    integrated-interference program.
    """
    if not (math.isfinite(r_s) and r_s >= 0):
        raise ValueError("r_s must be a finite nonnegative real")
    a11, a21, a22 = alphas.alpha11, alphas.alpha21, alphas.alpha22
    p = min(m2, n1)
    q1 = min(m1, n1)
    q2 = min(m2, n2)
    spectators = m1 + n2  # receive antennas that see the cross link only

    names: list[str] = []
    weights: list[float] = []
    for i in range(1, p + 1):
        names.append(f"upsilon_{i}")
        if presimplified:
            weights.append(float(m2 + n1 + 1 - 2 * i))
        else:
            weights.append(float(m2 + n1 + spectators + 1 - 2 * i))
    for j in range(1, q1 + 1):
        names.append(f"beta_{j}")
        weights.append(float(m1 + n1 + 1 - 2 * j))
    for k in range(1, q2 + 1):
        names.append(f"gamma_{k}")
        weights.append(float(m2 + n2 + 1 - 2 * k))

    def upsilon(i: int) -> int:
        return i - 1

    def beta(j: int) -> int:
        return p + j - 1

    def gamma(k: int) -> int:
        return p + q1 + k - 1

    # The cross-hinge sums run over existing cross-link exponents only: the
    # cross link has exactly p nonzero eigenvalues, and a zero eigenvalue
    # means an infinite exponent whose hinge contributes nothing.
    plus_terms: list[tuple[float, tuple[int, ...]]] = []
    for k in range(1, q2 + 1):
        for i in range(1, min(m2 - k, n2, p) + 1):
            plus_terms.append((a21, (upsilon(i), gamma(k))))
    for j in range(1, q1 + 1):
        for i in range(1, min(n1 - j, m1, p) + 1):
            plus_terms.append((a21, (upsilon(i), beta(j))))

    budget_terms: list[tuple[float, int]] = []
    budget_terms += [(a21, upsilon(i)) for i in range(1, p + 1)]
    budget_terms += [(a11, beta(j)) for j in range(1, q1 + 1)]
    budget_terms += [(a22, gamma(k)) for k in range(1, q2 + 1)]

    chains: list[tuple[int, ...]] = []
    for block in (
        tuple(upsilon(i) for i in range(1, p + 1)),
        tuple(beta(j) for j in range(1, q1 + 1)),
        tuple(gamma(k) for k in range(1, q2 + 1)),
    ):
        if len(block) >= 2:
            chains.append(block)

    couplings: list[tuple[tuple[int, int], float]] = []
    for i in range(1, p + 1):
        for j in range(1, q1 + 1):
            if i + j >= n1 + 1:
                couplings.append(((upsilon(i), beta(j)), a21))
    for i in range(1, p + 1):
        for k in range(1, q2 + 1):
            if i + k >= m2 + 1:
                couplings.append(((upsilon(i), gamma(k)), a21))

    concave: tuple[tuple[float, int, float], ...] = ()
    if presimplified:
        concave = tuple(
            (a21, upsilon(i), float(spectators)) for i in range(1, p + 1)
        )
        constant = 0.0
    else:
        constant = -float(spectators) * p * a21

    # At max(alpha11, alpha21, alpha22) every hinge is zero and every
    # coupling is satisfiable, and the objective is nondecreasing beyond it,
    # so the optimum always lies inside this box.
    cap = max(a11, a21, a22)
    capacity = p * a21 + q1 * a11 + q2 * a22
    return PlProgram(
        variables=tuple(names),
        linear_weights=tuple(weights),
        constant_offset=constant,
        plus_objective_terms=tuple(plus_terms),
        budget_constraint=BudgetConstraint(terms=tuple(budget_terms), limit=r_s),
        ordering_chains=tuple(chains),
        coupling_bounds=tuple(couplings),
        box_upper_bound=cap,
        concave_plus_terms=concave,
        beyond_capacity=r_s > capacity + 1e-12,
    )


def build_fcsit_sum_program(
    cfg: AntennaConfig, alphas: ScalingExponents, r_s: float
) -> PlProgram:
    """Sum-outage exponent program under full transmitter side information.

    The optimum over the returned program equals the sum-rate diversity
    order d(r_s).  When ``r_s`` exceeds the total hinge budget
    p*a21 + q1*a11 + q2*a22 the budget constraint is vacuous, the optimum is
    0, and the program's ``beyond_capacity`` flag is set.
    """
    return _assemble_sum_program(
        cfg.m1, cfg.n1, cfg.m2, cfg.n2, alphas, r_s, presimplified=False
    )


def build_fcsit_presimplified_program(
    cfg: AntennaConfig, alphas: ScalingExponents, r_s: float
) -> PlProgram:
    """Independent assembly of the same optimum from the per-receiver pieces.

    The objective is E1 + E2 + the cross-link eigenvalue exponent, keeping
    the -(M1+N2) * sum (a21 - upsilon_i)^+ correction as an explicit concave
    hinge instead of folding it into the linear weights.  Its optimum must
    match :func:`build_fcsit_sum_program`; the two assemblies share no
    simplification steps, which makes the equality a meaningful regression
    check.
    """
    return _assemble_sum_program(
        cfg.m1, cfg.n1, cfg.m2, cfg.n2, alphas, r_s, presimplified=True
    )


def build_iml_sum_program(
    cfg: AntennaConfig, alphas: ScalingExponents, r_s: float
) -> PlProgram:
    """Sum-outage exponent program when receiver 1 integrates the
    interference into the noise floor (the no-side-information strategy).

    Only the cross and first direct links appear; ``alphas.alpha22`` is
    unused.  Structurally this is the full-information program of a channel
    whose second receiver has no antennas.
    """
    return _assemble_sum_program(
        cfg.m1, cfg.n1, cfg.m2, 0, alphas, r_s, presimplified=False
    )


# ---------------------------------------------------------------------------
# Per-receiver exponent pieces
# ---------------------------------------------------------------------------


def _check_block(name: str, values: tuple[float, ...], expected: int) -> None:
    if len(values) != expected:
        raise ValueError(f"{name} must have length {expected}")
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} entries must be finite")
        if v < -_SUPPORT_TOL:
            raise OutsideSupportError("outside support")
    for a, b in zip(values, values[1:]):
        if a > b + _SUPPORT_TOL:
            raise OutsideSupportError("outside support")


def eval_E1(cfg: AntennaConfig, alphas: ScalingExponents, beta, upsilon) -> float:
    """Outage exponent contribution of receiver 1's direct link.

    Evaluates, for nondecreasing nonnegative ``beta`` (length q1) and
    ``upsilon`` (length p) with upsilon_i + beta_j >= alpha21 whenever
    i + j >= N1 + 1:

        sum_j [ (M1+N1+1-2j) beta_j + sum_{i <= min(N1-j, M1, p)}
                (alpha21 - upsilon_i - beta_j)^+ ]
        - M1 * sum_{i <= p} (alpha21 - upsilon_i)^+

    Raises OutsideSupportError when the arguments violate the orderings or
    couplings (configurations of exponentially vanishing probability).
    """
    beta = tuple(float(v) for v in beta)
    upsilon = tuple(float(v) for v in upsilon)
    _check_block("beta", beta, cfg.q1)
    _check_block("upsilon", upsilon, cfg.p)
    a21 = alphas.alpha21
    for i, u in enumerate(upsilon, start=1):
        for j, b in enumerate(beta, start=1):
            if i + j >= cfg.n1 + 1 and u + b < a21 - _SUPPORT_TOL:
                raise OutsideSupportError("outside support")
    total = 0.0
    for j, b in enumerate(beta, start=1):
        total += (cfg.m1 + cfg.n1 + 1 - 2 * j) * b
        # only the p existing cross-link exponents contribute hinges
        for i in range(1, min(cfg.n1 - j, cfg.m1, cfg.p) + 1):
            total += max(0.0, a21 - upsilon[i - 1] - b)
    total -= cfg.m1 * sum(max(0.0, a21 - u) for u in upsilon)
    return total


def eval_E2(cfg: AntennaConfig, alphas: ScalingExponents, gamma, upsilon) -> float:
    """Outage exponent contribution of receiver 2's link.

    Mirror image of :func:`eval_E1` with ``gamma`` (length q2) in place of
    ``beta``, inner range i <= min(M2-k, N2, p), correction weight N2, and
    couplings upsilon_i + gamma_k >= alpha21 whenever i + k >= M2 + 1.
    """
    gamma = tuple(float(v) for v in gamma)
    upsilon = tuple(float(v) for v in upsilon)
    _check_block("gamma", gamma, cfg.q2)
    _check_block("upsilon", upsilon, cfg.p)
    a21 = alphas.alpha21
    for i, u in enumerate(upsilon, start=1):
        for k, g in enumerate(gamma, start=1):
            if i + k >= cfg.m2 + 1 and u + g < a21 - _SUPPORT_TOL:
                raise OutsideSupportError("outside support")
    total = 0.0
    for k, g in enumerate(gamma, start=1):
        total += (cfg.m2 + cfg.n2 + 1 - 2 * k) * g
        # only the p existing cross-link exponents contribute hinges
        for i in range(1, min(cfg.m2 - k, cfg.n2, cfg.p) + 1):
            total += max(0.0, a21 - upsilon[i - 1] - g)
    total -= cfg.n2 * sum(max(0.0, a21 - u) for u in upsilon)
    return total


def f_w3_exponent(cfg: AntennaConfig, alphas: ScalingExponents, upsilon) -> float:
    """Eigenvalue density exponent of the cross link's Wishart spectrum:
    sum_i (M2+N1+1-2i) upsilon_i over nondecreasing nonnegative upsilon."""
    upsilon = tuple(float(v) for v in upsilon)
    _check_block("upsilon", upsilon, cfg.p)
    return sum(
        (cfg.m2 + cfg.n1 + 1 - 2 * i) * u for i, u in enumerate(upsilon, start=1)
    )
