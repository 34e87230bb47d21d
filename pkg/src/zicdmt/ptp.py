"""Point-to-point MIMO diversity-multiplexing tradeoff primitives.

The outage exponent of an M x N Rayleigh link at multiplexing gain r is the
piecewise-linear function d_{M,N}(r) through the corner points
(k, (M-k)(N-k)) for k = 0..min(M,N).  When the link gain scales as rho^alpha
the curve becomes alpha * d_{M,N}(r/alpha).  Every exponent computed by this
package eventually reduces to these two evaluations.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import lru_cache

__all__ = [
    "DomainError",
    "PtpDmt",
    "DmtCurve",
    "ptp_dmt",
    "scaled_ptp_dmt",
    "single_user_exponent",
]

# Fractional overshoot tolerated at domain boundaries before raising
# DomainError: grid generators routinely produce endpoints like
# 1.5000000000000002, which are boundary points, not caller bugs.
_EDGE_TOL = 1e-9


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an evaluator."""


def _snap_to_interval(x: float, lo: float, hi: float, what: str) -> float:
    """Return x clamped to [lo, hi]; raise DomainError beyond _EDGE_TOL slop."""
    tol = _EDGE_TOL * max(1.0, abs(lo), abs(hi))
    if not math.isfinite(x) or x < lo - tol or x > hi + tol:
        raise DomainError(f"{what} = {x!r} outside [{lo}, {hi}]")
    return min(max(x, lo), hi)


@dataclass(frozen=True)
class PtpDmt:
    """Tradeoff curve of an M x N point-to-point link.

    Attributes:
        tx_antennas: transmit antenna count M.
        rx_antennas: receive antenna count N.
        breakpoints: the corner points (k, (M-k)(N-k)), k = 0..min(M,N).
            Diversity strictly decreases along them, reaching 0 at the end.
    """

    tx_antennas: int
    rx_antennas: int
    breakpoints: tuple[tuple[float, float], ...] = field(init=False)

    def __post_init__(self) -> None:
        m, n = self.tx_antennas, self.rx_antennas
        if not (isinstance(m, int) and isinstance(n, int)) or m < 1 or n < 1:
            raise DomainError(f"antenna counts must be positive integers, got ({m}, {n})")
        pts = tuple((float(k), float((m - k) * (n - k))) for k in range(min(m, n) + 1))
        object.__setattr__(self, "breakpoints", pts)

    @property
    def max_gain(self) -> float:
        """Largest admissible multiplexing gain, min(M, N)."""
        return self.breakpoints[-1][0]

    def evaluate(self, r: float) -> float:
        """Diversity at multiplexing gain r by interpolation of the corner points.

        Domain violations are hard errors, not clamps, so caller bugs surface.
        """
        r = _snap_to_interval(float(r), 0.0, self.max_gain, "multiplexing gain")
        xs = [bp[0] for bp in self.breakpoints]
        i = bisect_right(xs, r) - 1
        if i >= len(xs) - 1:
            return self.breakpoints[-1][1]
        x0, y0 = self.breakpoints[i]
        x1, y1 = self.breakpoints[i + 1]
        return y0 + (r - x0) / (x1 - x0) * (y1 - y0)


@dataclass(frozen=True)
class DmtCurve:
    """Sampled diversity-order curve d(r).

    Sample gains must be strictly increasing and (for every curve this
    package produces, each being a min of nonincreasing convex piecewise
    linear functions) the diversity values nonincreasing.
    """

    samples: tuple[tuple[float, float], ...]
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple((float(r), float(d)) for r, d in self.samples))
        rs = [s[0] for s in self.samples]
        ds = [s[1] for s in self.samples]
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ValueError("sample gains must be strictly increasing")
        if any(d < 0 for d in ds):
            raise ValueError("diversity values must be nonnegative")
        if any(b > a + 1e-9 for a, b in zip(ds, ds[1:])):
            raise ValueError("diversity values must be nonincreasing")


@lru_cache(maxsize=None)
def _curve(tx_antennas: int, rx_antennas: int) -> PtpDmt:
    return PtpDmt(tx_antennas, rx_antennas)


def ptp_dmt(tx_antennas: int, rx_antennas: int, r: float) -> float:
    """d_{M,N}(r): outage exponent of an M x N link at multiplexing gain r.

    Piecewise linear through (k, (M-k)(N-k)); r must lie in [0, min(M,N)].
    """
    return _curve(tx_antennas, rx_antennas).evaluate(r)


def scaled_ptp_dmt(tx_antennas: int, rx_antennas: int, alpha: float, r: float) -> float:
    """alpha * d_{M,N}(r/alpha): tradeoff of a link whose gain scales as rho^alpha.

    Args:
        tx_antennas: transmit antenna count M.
        rx_antennas: receive antenna count N.
        alpha: positive scale exponent of the link gain.
        r: multiplexing gain in [0, min(M,N) * alpha].

    Returns:
        The scaled diversity order.

    Raises:
        DomainError: if alpha <= 0 or r is outside its interval.
    """
    if not alpha > 0:
        raise DomainError(f"scale exponent must be positive, got {alpha!r}")
    curve = _curve(tx_antennas, rx_antennas)
    r = _snap_to_interval(float(r), 0.0, curve.max_gain * alpha, "multiplexing gain")
    return alpha * curve.evaluate(r / alpha)


def single_user_exponent(m_i: int, n_i: int, alpha_ii: float, r_i: float) -> float:
    """Outage exponent of direct link i on its own: alias of scaled_ptp_dmt.

    Exists so each per-user diversity order d_{O_i} has a named home.
    """
    return scaled_ptp_dmt(m_i, n_i, alpha_ii, r_i)
