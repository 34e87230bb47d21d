"""Closed-form diversity-multiplexing results for the Z interference channel.

Channel classes with proven closed forms are evaluated directly from
point-to-point DMT curves; everything else routes to the exact
piecewise-linear programs in :mod:`zicdmt.exponents`.  The composition rule
is the same in both regimes: the two-user diversity order at multiplexing
gains (r1, r2) is the minimum of the two single-link exponents and the
sum-rate exponent at r1 + r2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exponents import (
    AntennaConfig,
    MultiplexingGainPair,
    ScalingExponents,
    build_fcsit_sum_program,
    build_iml_sum_program,
)
from .optengine import solve_lp
from .ptp import DomainError, ptp_dmt, single_user_exponent

__all__ = [
    "DmtQuery",
    "DmtPoint",
    "compose_dmt",
    "fcsit_symmetric_sum",
    "fcsit_femto_sum",
    "fcsit_asymmetric_sum",
    "iml_symmetric_sum",
    "iml_asymmetric_sum",
    "nocsit_threshold_symmetric",
    "nocsit_threshold_antennas",
    "sum_exponent",
    "full_dmt",
]

_TOL = 1e-9
_UNIT_TOL = 1e-12  # exact-hypothesis match for closed-form dispatch


@dataclass(frozen=True)
class DmtQuery:
    """A DMT evaluation request: channel, scaling exponents, gains, regime."""

    cfg: AntennaConfig
    alphas: ScalingExponents
    gains: MultiplexingGainPair
    csit: str = "full"

    def __post_init__(self) -> None:
        if self.csit not in ("full", "none"):
            raise ValueError("csit must be 'full' or 'none'")
        cap1 = min(self.cfg.m1, self.cfg.n1) * self.alphas.alpha11
        cap2 = min(self.cfg.m2, self.cfg.n2) * self.alphas.alpha22
        if self.gains.r1 > cap1 + _TOL:
            raise DomainError(f"r1={self.gains.r1} exceeds the link maximum {cap1}")
        if self.gains.r2 > cap2 + _TOL:
            raise DomainError(f"r2={self.gains.r2} exceeds the link maximum {cap2}")


@dataclass(frozen=True)
class DmtPoint:
    """Composed DMT at one gain pair, with the three constituent exponents."""

    r1: float
    r2: float
    d1: float
    d2: float
    ds: float
    d: float


def compose_dmt(d1: float, d2: float, ds: float) -> float:
    """Two-user diversity order from the three outage exponents: their min."""
    for v in (d1, d2, ds):
        if not (math.isfinite(v) and v >= 0):
            raise ValueError("exponents must be finite and nonnegative")
    return min(d1, d2, ds)


def _validate_n(n: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise DomainError("antenna count must be a positive integer")


def _check_range(r_s: float, end: float) -> float:
    if not math.isfinite(r_s):
        raise DomainError("r_s must be finite")
    if r_s < -_TOL or r_s > end + _TOL:
        raise DomainError(f"r_s={r_s} outside [0, {end}]")
    return min(max(r_s, 0.0), end)


def _two_piece_sum(n: int, alpha: float, r_s: float, inner_rx: int) -> float:
    """Shared alpha >= 1 shape: a shifted n x inner_rx curve up to r_s = n,
    then a stretched n x n tail over the interference headroom."""
    r_s = _check_range(r_s, n * alpha)
    if r_s <= n:
        return ptp_dmt(n, inner_rx, r_s) + n * n * (alpha - 1)
    width = alpha - 1
    if width <= _UNIT_TOL:
        # Degenerate tail: the second piece's domain [n, n*alpha] has
        # collapsed to the single point where the curve is 0.
        return 0.0
    return width * ptp_dmt(n, n, (r_s - n) / width)


def fcsit_symmetric_sum(n: int, alpha: float, r_s: float) -> float:
    """Sum-rate exponent, full side information, all links n antennas,
    direct-link exponents 1 and interference exponent ``alpha``.

    For alpha <= 1 the curve is the stretched n x 3n tradeoff plus the
    constant 2 n^2 (1 - alpha) until r_s = n * alpha, then a stretched n x n
    tail out to n * (2 - alpha).  For alpha >= 1 it is the n x 3n tradeoff
    plus n^2 (alpha - 1) until r_s = n, then the tail out to n * alpha.
    Both branches coincide at alpha = 1; that value is routed through the
    alpha <= 1 branch so no (alpha - 1) division occurs.
    """
    _validate_n(n)
    if not (math.isfinite(alpha) and alpha > 0):
        raise DomainError("alpha must be a positive real")
    if alpha > 1:
        return _two_piece_sum(n, alpha, r_s, 3 * n)
    r_s = _check_range(r_s, n * (2 - alpha))
    if r_s <= n * alpha:
        return alpha * ptp_dmt(n, 3 * n, r_s / alpha) + 2 * n * n * (1 - alpha)
    width = 2 * (1 - alpha)
    if width <= _UNIT_TOL:  # pragma: no cover - excluded by the range check
        return 0.0
    return width * ptp_dmt(n, n, (r_s - n * alpha) / width)


def fcsit_femto_sum(n: int, alpha: float, r_s: float) -> float:
    """Sum-rate exponent, full side information, when only the
    interference-free link is boosted (its exponent ``alpha`` >= 1, the other
    two at 1): the n x 3n tradeoff raised by n^2 (alpha - 1) until r_s = n,
    then the stretched n x n tail."""
    _validate_n(n)
    if not (math.isfinite(alpha) and alpha >= 1):
        raise DomainError("alpha must be at least 1")
    return _two_piece_sum(n, alpha, r_s, 3 * n)


def fcsit_asymmetric_sum(m: int, n1: int, n2: int, r_s: float) -> float:
    """Sum-rate exponent, full side information, equal scaling on all links,
    both transmitters with m antennas, receivers n1 and n2 >= m.

    The curve is the m x (m + n1 + n2) tradeoff plus m (n1 - m) until
    r_s = m, then the 2m x n1 tradeoff out to min(n1, 2m)."""
    for n in (m, n1, n2):
        _validate_n(n)
    if m > min(n1, n2):
        raise DomainError("requires m <= min(n1, n2)")
    r_s = _check_range(r_s, min(n1, 2 * m))
    if r_s <= m:
        return ptp_dmt(m, m + n1 + n2, r_s) + m * (n1 - m)
    return ptp_dmt(2 * m, n1, r_s)


def iml_symmetric_sum(n: int, alpha: float, r_s: float) -> float:
    """Sum-rate exponent when receiver 1 treats interference as noise, all
    links n antennas, interference exponent ``alpha`` >= 1: the n x 2n
    tradeoff raised by n^2 (alpha - 1) until r_s = n, then the stretched
    n x n tail out to n * alpha."""
    _validate_n(n)
    if not (math.isfinite(alpha) and alpha >= 1):
        raise DomainError("alpha must be at least 1")
    return _two_piece_sum(n, alpha, r_s, 2 * n)


def iml_asymmetric_sum(m: int, n1: int, n2: int, r_s: float) -> float:
    """Sum-rate exponent when receiver 1 treats interference as noise, equal
    scaling, both transmitters with m antennas, receivers n1 and n2 >= m:
    the 2m x n1 tradeoff (equivalently n1 x 2m) out to min(2m, n1)."""
    for n in (m, n1, n2):
        _validate_n(n)
    if m > min(n1, n2):
        raise DomainError("requires m <= min(n1, n2)")
    r_s = _check_range(r_s, min(2 * m, n1))
    return ptp_dmt(2 * m, n1, r_s)


def nocsit_threshold_symmetric(n: int) -> float:
    """Smallest interference exponent at which foregoing transmitter side
    information costs no diversity on the all-n symmetric channel:
    1 + d_{n,n}(n/2) / n^2."""
    _validate_n(n)
    return 1.0 + ptp_dmt(n, n, n / 2) / (n * n)


def nocsit_threshold_antennas(m: int, n1: int, n2: int) -> tuple[float, bool]:
    """Interfered-receiver antenna count at which side information stops
    mattering under equal scaling: m + d_{m,min(n1,n2)}(m/2) / m.

    Returns (threshold, whether n1 meets it).
    """
    for n in (m, n1, n2):
        _validate_n(n)
    if m > min(n1, n2):
        raise DomainError("requires m <= min(n1, n2)")
    threshold = m + ptp_dmt(m, min(n1, n2), m / 2) / m
    return threshold, n1 >= threshold - _TOL


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def _is_one(x: float) -> bool:
    return abs(x - 1.0) <= _UNIT_TOL


def _closed_form_sum(
    cfg: AntennaConfig, alphas: ScalingExponents, r_s: float, csit: str
):
    """Closed-form sum exponent when a proven special case applies, else None.

    Queries past a curve's terminal gain return 0: the exponent is
    nonincreasing, nonnegative, and already 0 at the domain end.
    """
    a11, a21, a22 = alphas.alpha11, alphas.alpha21, alphas.alpha22
    square = cfg.m1 == cfg.n1 == cfg.m2 == cfg.n2
    n = cfg.m1
    if csit == "full":
        if square and _is_one(a11) and _is_one(a22):
            end = n * (2 - a21) if a21 <= 1 else n * a21
            return 0.0 if r_s > end else fcsit_symmetric_sum(n, a21, r_s)
        if square and _is_one(a11) and _is_one(a21) and a22 >= 1:
            return 0.0 if r_s > n * a22 else fcsit_femto_sum(n, a22, r_s)
        if (
            cfg.m1 == cfg.m2
            and cfg.m1 <= min(cfg.n1, cfg.n2)
            and _is_one(a11)
            and _is_one(a21)
            and _is_one(a22)
        ):
            end = min(cfg.n1, 2 * cfg.m1)
            return (
                0.0
                if r_s > end
                else fcsit_asymmetric_sum(cfg.m1, cfg.n1, cfg.n2, r_s)
            )
    else:
        if square and _is_one(a11) and a21 >= 1:
            end = n * a21
            return 0.0 if r_s > end else iml_symmetric_sum(n, a21, r_s)
        if (
            cfg.m1 == cfg.m2
            and cfg.m1 <= min(cfg.n1, cfg.n2)
            and _is_one(a11)
            and _is_one(a21)
        ):
            end = min(2 * cfg.m1, cfg.n1)
            return (
                0.0
                if r_s > end
                else iml_asymmetric_sum(cfg.m1, cfg.n1, cfg.n2, r_s)
            )
    return None


def sum_exponent(
    cfg: AntennaConfig,
    alphas: ScalingExponents,
    r_s: float,
    csit: str = "full",
    *,
    force_lp: bool = False,
) -> float:
    """Sum-rate outage exponent at total gain ``r_s``.

    Closed forms are preferred when the configuration matches a proven
    special case; ``force_lp`` bypasses them so the two routes can be
    compared.  The LP route always applies.
    """
    if not force_lp:
        value = _closed_form_sum(cfg, alphas, r_s, csit)
        if value is not None:
            return value
    builder = build_fcsit_sum_program if csit == "full" else build_iml_sum_program
    solution = solve_lp(builder(cfg, alphas, r_s))
    if solution.status != "optimal":  # pragma: no cover - always feasible
        raise RuntimeError("sum-exponent program unexpectedly infeasible")
    return max(0.0, solution.optimal_value)


def full_dmt(query: DmtQuery, *, force_lp: bool = False) -> DmtPoint:
    """Composed DMT of the channel at one gain pair.

    The two single-link exponents are the stretched point-to-point curves of
    their links (receiver 2 is interference-free; receiver 1's bound, and
    the rate region of the interference-as-noise strategy, leave the
    single-link curves unchanged, so these hold with or without transmitter
    side information).  The sum exponent follows the query's regime.
    """
    d1 = single_user_exponent(
        query.cfg.m1, query.cfg.n1, query.alphas.alpha11, query.gains.r1
    )
    d2 = single_user_exponent(
        query.cfg.m2, query.cfg.n2, query.alphas.alpha22, query.gains.r2
    )
    ds = sum_exponent(
        query.cfg, query.alphas, query.gains.r_sum, query.csit, force_lp=force_lp
    )
    return DmtPoint(
        r1=query.gains.r1,
        r2=query.gains.r2,
        d1=d1,
        d2=d2,
        ds=ds,
        d=compose_dmt(d1, d2, ds),
    )
