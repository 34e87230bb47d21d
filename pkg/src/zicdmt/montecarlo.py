"""Monte-Carlo outage validation for the Z interference channel.

Samples Rayleigh channel triples, evaluates the achievable-region bounds on
the three mutual informations (per-user and sum), counts outages against
multiplexing-gain rate targets across an SNR sweep, and regresses the decay
slope of the outage probability for comparison with the analytic exponents.

All rates are in bits per channel use (log base 2).  Sampling is naive
Monte-Carlo: reliable only for exponents up to roughly 1.5 at desk-scale
sample counts; importance sampling would be the natural extension for
steeper curves but is deliberately out of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exponents import AntennaConfig, MultiplexingGainPair, ScalingExponents

__all__ = [
    "ChannelRealization",
    "SnrPoint",
    "OutageEstimate",
    "InsufficientOutageError",
    "draw_realization",
    "mutual_info_upper",
    "mutual_info_lower",
    "mutual_info_iml",
    "mutual_info_iml_sum_unsplit",
    "estimate_outage_slope",
]

_LN2 = math.log(2.0)
_EVENTS = ("1", "2", "s", "union")
_BATCH = 65_536
_RESAMPLE_ROUNDS = 100


class InsufficientOutageError(RuntimeError):
    """Raised when too few SNR points collected enough outage events to fit
    a slope; lower the SNR range or raise the sample count."""


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the three channel matrices.

    h11: N1 x M1 (interfered direct link), h21: N1 x M2 (cross link),
    h22: N2 x M2 (interference-free link); i.i.d. entries of unit variance,
    independent real and imaginary parts of variance 1/2.
    """

    h11: np.ndarray
    h21: np.ndarray
    h22: np.ndarray

    def __post_init__(self) -> None:
        h11 = np.asarray(self.h11, dtype=complex)
        h21 = np.asarray(self.h21, dtype=complex)
        h22 = np.asarray(self.h22, dtype=complex)
        if h11.ndim != 2 or h21.ndim != 2 or h22.ndim != 2:
            raise ValueError("channel matrices must be two-dimensional")
        if h11.shape[0] != h21.shape[0]:
            raise ValueError("h11 and h21 must agree on the receiver dimension")
        if h21.shape[1] != h22.shape[1]:
            raise ValueError("h21 and h22 must agree on the transmitter dimension")
        for h in (h11, h21, h22):
            if not np.all(np.isfinite(h.view(float))):
                raise ValueError("channel entries must be finite")
        object.__setattr__(self, "h11", h11)
        object.__setattr__(self, "h21", h21)
        object.__setattr__(self, "h22", h22)

    @property
    def w1(self) -> np.ndarray:
        """Gram matrix of the interfered direct link: H11 H11^H."""
        return self.h11 @ self.h11.conj().T

    @property
    def w2(self) -> np.ndarray:
        """Gram matrix of the interference-free link: H22 H22^H."""
        return self.h22 @ self.h22.conj().T

    @property
    def w3(self) -> np.ndarray:
        """Gram matrix of the cross link: H21 H21^H."""
        return self.h21 @ self.h21.conj().T


@dataclass(frozen=True)
class SnrPoint:
    """Nominal SNR in dB plus the per-link scaling exponents."""

    rho_db: float
    alphas: ScalingExponents

    def __post_init__(self) -> None:
        if not math.isfinite(self.rho_db):
            raise ValueError("rho_db must be finite")
        object.__setattr__(self, "rho_db", float(self.rho_db))

    @property
    def rho(self) -> float:
        return 10.0 ** (self.rho_db / 10.0)

    @property
    def rho11(self) -> float:
        return self.rho**self.alphas.alpha11

    @property
    def rho21(self) -> float:
        return self.rho**self.alphas.alpha21

    @property
    def rho22(self) -> float:
        return self.rho**self.alphas.alpha22

    @property
    def log2_rho(self) -> float:
        return self.rho_db / 10.0 * math.log2(10.0)


def draw_realization(cfg: AntennaConfig, rng: np.random.Generator) -> ChannelRealization:
    """Draw one realization with i.i.d. unit-variance complex Gaussian entries."""
    h11, h21, h22 = _draw_batch(cfg, rng, 1)
    return ChannelRealization(h11[0], h21[0], h22[0])


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    real = rng.standard_normal(shape)
    imag = rng.standard_normal(shape)
    return (real + 1j * imag) * math.sqrt(0.5)


def _draw_batch(cfg: AntennaConfig, rng: np.random.Generator, count: int):
    h11 = _complex_normal(rng, (count, cfg.n1, cfg.m1))
    h21 = _complex_normal(rng, (count, cfg.n1, cfg.m2))
    h22 = _complex_normal(rng, (count, cfg.n2, cfg.m2))
    return h11, h21, h22


def _gram(h: np.ndarray) -> np.ndarray:
    return h @ h.conj().swapaxes(-1, -2)


def _logdet2(a: np.ndarray) -> np.ndarray:
    """log2 det of a batch of (Hermitian positive definite) matrices."""
    _, logdet = np.linalg.slogdet(a)
    return logdet / _LN2


def _eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def _info_upper_batch(h11, h21, h22, snr: SnrPoint):
    """Per-user and sum mutual-information upper bounds, batched.

    The sum bound is evaluated in its two-term form: the interfered
    receiver decodes both streams jointly, the interference-free receiver
    sees its own link whitened by the cross link's residual covariance.
    """
    n1 = h11.shape[1]
    n2 = h22.shape[1]
    m2 = h21.shape[2]
    g11 = snr.rho11 * _gram(h11)
    g21 = snr.rho21 * _gram(h21)
    i_b1 = _logdet2(_eye(n1) + g11)
    i_b2 = _logdet2(_eye(n2) + snr.rho22 * _gram(h22))
    first = _logdet2(_eye(n1) + g21 + g11)
    inner = _eye(m2) + snr.rho21 * (h21.conj().swapaxes(-1, -2) @ h21)
    whitened = h22 @ np.linalg.solve(inner, h22.conj().swapaxes(-1, -2))
    second = _logdet2(_eye(n2) + snr.rho22 * whitened)
    return i_b1, i_b2, first + second


def _info_iml_batch(h11, h21, h22, snr: SnrPoint, m1: int, m2: int):
    """Achievable rates when receiver 1 decodes only its own stream and
    treats the cross link as noise; power is split evenly across transmit
    antennas."""
    n1 = h11.shape[1]
    n2 = h22.shape[1]
    g11 = (snr.rho11 / m1) * _gram(h11)
    i_c1 = _logdet2(_eye(n1) + g11)
    i_c2 = _logdet2(_eye(n2) + (snr.rho22 / m2) * _gram(h22))
    i_cs = _logdet2(_eye(n1) + g11 + (snr.rho21 / m2) * _gram(h21))
    return i_c1, i_c2, i_cs


def mutual_info_upper(real: ChannelRealization, snr: SnrPoint):
    """Mutual-information upper bounds (I_b1, I_b2, I_bs) in bits/use."""
    i1, i2, isum = _info_upper_batch(
        real.h11[None], real.h21[None], real.h22[None], snr
    )
    return float(i1[0]), float(i2[0]), float(isum[0])


def mutual_info_lower(real: ChannelRealization, snr: SnrPoint):
    """Achievable counterparts: the upper bounds shifted down by the
    constant gaps 2 N1, 2 N2 and 2 (N1 + N2)."""
    n1 = real.h11.shape[0]
    n2 = real.h22.shape[0]
    i1, i2, isum = mutual_info_upper(real, snr)
    return i1 - 2 * n1, i2 - 2 * n2, isum - 2 * (n1 + n2)


def mutual_info_iml(real: ChannelRealization, snr: SnrPoint):
    """Rates (I_c1, I_c2, I_cs) of the interference-as-noise strategy."""
    m1 = real.h11.shape[1]
    m2 = real.h21.shape[1]
    i1, i2, isum = _info_iml_batch(
        real.h11[None], real.h21[None], real.h22[None], snr, m1, m2
    )
    return float(i1[0]), float(i2[0]), float(isum[0])


def mutual_info_iml_sum_unsplit(real: ChannelRealization, snr: SnrPoint) -> float:
    """The sum-rate log-det without the per-transmitter power split.

    Brackets the split version: subtracting N1 * log2(max(M1, M2)) from this
    value lower-bounds I_cs, which never exceeds it; the constant washes out
    of any SNR-exponent argument.
    """
    n1 = real.h11.shape[0]
    value = _logdet2(
        _eye(n1)[None]
        + snr.rho11 * _gram(real.h11[None])
        + snr.rho21 * _gram(real.h21[None])
    )
    return float(value[0])


# ---------------------------------------------------------------------------
# Outage estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OutageEstimate:
    """Outage counts per SNR point and fitted decay slopes.

    outages maps each event ("1", "2", "s", "union") to per-SNR counts;
    slopes/halfwidths hold the fitted decay exponent of each event's outage
    probability and its 95% confidence half-width (NaN when fewer than 3
    SNR points reached min_hits outages).  resampled counts redraws forced
    by non-finite log-dets.
    """

    rho_db: tuple[float, ...]
    samples: tuple[int, ...]
    outages: dict[str, tuple[int, ...]]
    slopes: dict[str, float]
    halfwidths: dict[str, float]
    min_hits: int
    resampled: int = 0

    @property
    def probabilities(self) -> dict[str, tuple[float, ...]]:
        return {
            event: tuple(c / s for c, s in zip(counts, self.samples))
            for event, counts in self.outages.items()
        }

    @property
    def composed_slope(self) -> float:
        return self.slopes["union"]

    @property
    def composed_halfwidth(self) -> float:
        return self.halfwidths["union"]

    def csv_lines(self) -> list[str]:
        """Raw counts as CSV rows: rho_db,event,outages,samples."""
        lines = ["rho_db,event,outages,samples"]
        for g, db in enumerate(self.rho_db):
            for event in _EVENTS:
                lines.append(
                    f"{db:.9g},{event},{self.outages[event][g]},{self.samples[g]}"
                )
        return lines


def _fit_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope of y on x with a 95% half-width from the
    residual variance (requires len >= 3)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    residuals = y - (intercept + slope * x)
    sigma2 = float(residuals @ residuals) / (n - 2)
    half = 1.96 * math.sqrt(max(sigma2, 0.0) / sxx)
    return slope, half


def _count_batch(cfg, snr, targets, csit, rng, count, counters):
    """Draw `count` triples, count outages per event; returns redraw total."""
    h11, h21, h22 = _draw_batch(cfg, rng, count)
    if csit == "full":
        i1, i2, isum = _info_upper_batch(h11, h21, h22, snr)
    else:
        i1, i2, isum = _info_iml_batch(h11, h21, h22, snr, cfg.m1, cfg.m2)
    resampled = 0
    bad = ~(np.isfinite(i1) & np.isfinite(i2) & np.isfinite(isum))
    rounds = 0
    while bad.any():
        rounds += 1
        if rounds > _RESAMPLE_ROUNDS:
            raise RuntimeError("persistent non-finite mutual information")
        resampled += int(bad.sum())
        idx = np.flatnonzero(bad)
        r11, r21, r22 = _draw_batch(cfg, rng, len(idx))
        h11[idx], h21[idx], h22[idx] = r11, r21, r22
        if csit == "full":
            j1, j2, jsum = _info_upper_batch(r11, r21, r22, snr)
        else:
            j1, j2, jsum = _info_iml_batch(r11, r21, r22, snr, cfg.m1, cfg.m2)
        i1[idx], i2[idx], isum[idx] = j1, j2, jsum
        bad = ~(np.isfinite(i1) & np.isfinite(i2) & np.isfinite(isum))
    t1, t2, ts = targets
    out1 = i1 < t1
    out2 = i2 < t2
    outs = isum < ts
    counters["1"] += int(out1.sum())
    counters["2"] += int(out2.sum())
    counters["s"] += int(outs.sum())
    counters["union"] += int((out1 | out2 | outs).sum())
    return resampled


def estimate_outage_slope(
    cfg: AntennaConfig,
    alphas: ScalingExponents,
    gains: MultiplexingGainPair,
    csit: str,
    snr_grid_db,
    samples_per_point: int,
    seed: int,
    *,
    workers: int = 1,
    min_hits: int = 50,
) -> OutageEstimate:
    """Estimate outage probabilities over an SNR sweep and fit decay slopes.

    Rate targets scale with SNR as R_i = r_i * log2(rho), so the slope of
    -log10 P_out against log10 rho estimates the outage exponent.  Each
    (SNR point, worker) pair draws from its own substream spawned from the
    master seed, and worker chunks are merged in worker order, so results
    are bit-identical for fixed (seed, workers) regardless of scheduling.

    Only SNR points with at least min_hits outages enter a fit; events with
    fewer than 3 such points get NaN slopes, and if the union event is that
    starved the whole estimate raises InsufficientOutageError.
    """
    grid = [float(db) for db in snr_grid_db]
    if len(grid) < 3:
        raise ValueError("need at least 3 SNR points")
    if samples_per_point < 1:
        raise ValueError("samples_per_point must be positive")
    if csit not in ("full", "none"):
        raise ValueError("csit must be 'full' or 'none'")
    if workers < 1:
        raise ValueError("workers must be positive")
    if min_hits < 1:
        raise ValueError("min_hits must be positive")

    streams = np.random.SeedSequence(seed).spawn(len(grid) * workers)
    base, extra = divmod(samples_per_point, workers)
    chunk_sizes = [base + (1 if w < extra else 0) for w in range(workers)]

    outages: dict[str, list[int]] = {event: [] for event in _EVENTS}
    resampled = 0
    for g, rho_db in enumerate(grid):
        snr = SnrPoint(rho_db, alphas)
        targets = (
            gains.r1 * snr.log2_rho,
            gains.r2 * snr.log2_rho,
            gains.r_sum * snr.log2_rho,
        )
        counters = {event: 0 for event in _EVENTS}
        for w, chunk in enumerate(chunk_sizes):
            rng = np.random.default_rng(streams[g * workers + w])
            done = 0
            while done < chunk:
                count = min(_BATCH, chunk - done)
                resampled += _count_batch(
                    cfg, snr, targets, csit, rng, count, counters
                )
                done += count
        for event in _EVENTS:
            outages[event].append(counters[event])

    slopes: dict[str, float] = {}
    halfwidths: dict[str, float] = {}
    for event in _EVENTS:
        usable = [g for g, c in enumerate(outages[event]) if c >= min_hits]
        if len(usable) < 3:
            if event == "union":
                raise InsufficientOutageError(
                    "insufficient outage events: fewer than 3 SNR points "
                    f"reached {min_hits} hits for the union event"
                )
            slopes[event] = math.nan
            halfwidths[event] = math.nan
            continue
        x = np.array([grid[g] / 10.0 for g in usable])
        y = np.array(
            [
                -(math.log10(outages[event][g]) - math.log10(samples_per_point))
                for g in usable
            ]
        )
        slopes[event], halfwidths[event] = _fit_slope(x, y)

    return OutageEstimate(
        rho_db=tuple(grid),
        samples=tuple(samples_per_point for _ in grid),
        outages={event: tuple(counts) for event, counts in outages.items()},
        slopes=slopes,
        halfwidths=halfwidths,
        min_hits=min_hits,
        resampled=resampled,
    )
