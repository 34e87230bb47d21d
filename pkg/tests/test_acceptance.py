"""End-to-end acceptance checks, one test per criterion.

Each test is self-contained: it enumerates its own instance set, computes
both routes (closed form, LP, lattice oracle, or Monte-Carlo), and asserts
the pinned tolerance.  Run with -v to get one pass/fail line per criterion.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from zicdmt import (
    AntennaConfig,
    DmtQuery,
    MultiplexingGainPair,
    ScalingExponents,
    build_fcsit_presimplified_program,
    build_fcsit_sum_program,
    build_iml_sum_program,
    draw_realization,
    estimate_outage_slope,
    fcsit_asymmetric_sum,
    fcsit_femto_sum,
    fcsit_symmetric_sum,
    full_dmt,
    iml_asymmetric_sum,
    iml_symmetric_sum,
    mutual_info_lower,
    mutual_info_upper,
    nocsit_threshold_antennas,
    nocsit_threshold_symmetric,
    oracle_gap_bound,
    ptp_dmt,
    solve_grid_oracle,
    solve_lp,
    SnrPoint,
)

SEED = 20260815


def _grid(end: float, step: float = 0.1) -> list[float]:
    return [i * step for i in range(int(round(end / step)) + 1)]


def _symmetric_instances():
    for n in (1, 2):
        for alpha in (0.5, 1.0, 1.5, 2.0):
            cfg = AntennaConfig(n, n, n, n)
            alphas = ScalingExponents(1.0, alpha, 1.0)
            end = n * (2 - alpha) if alpha <= 1 else n * alpha
            for rs in _grid(end):
                yield cfg, alphas, rs, fcsit_symmetric_sum(n, alpha, rs)


def _femto_instances():
    for n in (1, 2):
        for alpha in (1.0, 1.5, 2.0):
            cfg = AntennaConfig(n, n, n, n)
            alphas = ScalingExponents(1.0, 1.0, alpha)
            for rs in _grid(n * alpha):
                yield cfg, alphas, rs, fcsit_femto_sum(n, alpha, rs)


def _asymmetric_instances():
    for m, n1, n2 in ((1, 2, 2), (2, 3, 3), (3, 4, 3)):
        cfg = AntennaConfig(m, n1, m, n2)
        alphas = ScalingExponents(1.0, 1.0, 1.0)
        for rs in _grid(min(n1, 2 * m)):
            yield cfg, alphas, rs, fcsit_asymmetric_sum(m, n1, n2, rs)


def _iml_instances():
    for n in (1, 2):
        for alpha in (1.0, 1.5, 2.0):
            cfg = AntennaConfig(n, n, n, n)
            alphas = ScalingExponents(1.0, alpha, 1.0)
            for rs in _grid(n * alpha):
                yield cfg, alphas, rs, iml_symmetric_sum(n, alpha, rs)
    for m, n1, n2 in ((1, 2, 2), (3, 4, 3)):
        cfg = AntennaConfig(m, n1, m, n2)
        alphas = ScalingExponents(1.0, 1.0, 1.0)
        for rs in _grid(min(2 * m, n1)):
            yield cfg, alphas, rs, iml_asymmetric_sum(m, n1, n2, rs)


def _assert_lp_matches(instances, builder, expected_count, budget_s=None):
    start = time.monotonic()
    count = 0
    for cfg, alphas, rs, want in instances:
        got = solve_lp(builder(cfg, alphas, rs)).optimal_value
        got = max(got, 0.0)
        assert got == pytest.approx(want, abs=1e-6), (
            f"{cfg} {alphas} r_s={rs}: lp={got}, closed={want}"
        )
        count += 1
    elapsed = time.monotonic() - start
    assert count == expected_count
    if budget_s is not None:
        assert elapsed < budget_s, f"{elapsed:.1f}s exceeds the {budget_s}s budget"


def test_criterion_01_symmetric_closed_form_matches_lp():
    _assert_lp_matches(_symmetric_instances(), build_fcsit_sum_program, 188, 10.0)


def test_criterion_02_femto_closed_form_matches_lp():
    _assert_lp_matches(_femto_instances(), build_fcsit_sum_program, 141, 10.0)


def test_criterion_03_asymmetric_closed_form_matches_lp():
    _assert_lp_matches(_asymmetric_instances(), build_fcsit_sum_program, 93, 10.0)


def test_criterion_04_iml_closed_form_matches_lp():
    _assert_lp_matches(_iml_instances(), build_iml_sum_program, 203)


def test_criterion_05_presimplified_program_is_equivalent():
    rng = np.random.default_rng(SEED)
    for _ in range(200):
        cfg = AntennaConfig(*(int(v) for v in rng.integers(1, 3, size=4)))
        alphas = ScalingExponents(*(float(v) for v in rng.uniform(0.25, 2.5, 3)))
        capacity = (
            cfg.p * alphas.alpha21
            + cfg.q1 * alphas.alpha11
            + cfg.q2 * alphas.alpha22
        )
        rs = float(rng.uniform(0.0, capacity))
        simplified = solve_lp(build_fcsit_sum_program(cfg, alphas, rs)).optimal_value
        presimplified = solve_lp(
            build_fcsit_presimplified_program(cfg, alphas, rs)
        ).optimal_value
        assert abs(simplified - presimplified) <= 1e-7, (
            f"{cfg} {alphas} r_s={rs}: {simplified} vs {presimplified}"
        )


def test_criterion_06_lattice_oracle_brackets_every_lp_solve():
    step = 0.05
    checked = 0
    for kind, instances in (
        ("fcsit", _symmetric_instances()),
        ("fcsit", _femto_instances()),
        ("fcsit", _asymmetric_instances()),
        ("iml", _iml_instances()),
    ):
        builder = build_fcsit_sum_program if kind == "fcsit" else build_iml_sum_program
        for cfg, alphas, rs, _ in instances:
            prog = builder(cfg, alphas, rs)
            if prog.n_variables > 8:
                continue
            lp = solve_lp(prog).optimal_value
            oracle = solve_grid_oracle(prog, step).optimal_value
            bound = oracle_gap_bound(prog, step)
            assert lp - 1e-7 <= oracle <= lp + bound + 1e-7, (
                f"{kind} {cfg} {alphas} r_s={rs}: lp={lp}, oracle={oracle}, "
                f"bound={bound}"
            )
            checked += 1
    assert checked == 584


THRESHOLD_CONTROLS = [
    # (antennas, alphas, threshold met?)
    ((1, 1, 1, 1), (1.0, 1.5, 1.0), True),
    ((2, 2, 2, 2), (1.0, 1.25, 1.0), True),
    ((3, 4, 3, 3), (1.0, 1.0, 1.0), True),
    ((1, 1, 1, 1), (1.0, 1.2, 1.0), False),
    ((2, 2, 2, 2), (1.0, 1.0, 1.0), False),
    ((3, 3, 3, 3), (1.0, 1.0, 1.0), False),
]


def test_criterion_07_side_information_thresholds():
    assert nocsit_threshold_symmetric(1) == pytest.approx(1.5, abs=1e-12)
    assert nocsit_threshold_symmetric(2) == pytest.approx(1.25, abs=1e-12)
    assert nocsit_threshold_antennas(3, 4, 3)[1] is True
    assert nocsit_threshold_antennas(3, 3, 3)[1] is False

    # curve-level consequence: the two regimes coincide on the diagonal
    # exactly when the threshold is met
    for antennas, alphas, met in THRESHOLD_CONTROLS:
        cfg = AntennaConfig(*antennas)
        scal = ScalingExponents(*alphas)
        cap = min(
            min(cfg.m1, cfg.n1) * scal.alpha11, min(cfg.m2, cfg.n2) * scal.alpha22
        )
        worst = 0.0
        for r in _grid(cap, 0.05):
            gains = MultiplexingGainPair(r, r)
            d_full = full_dmt(DmtQuery(cfg, scal, gains, csit="full")).d
            d_none = full_dmt(DmtQuery(cfg, scal, gains, csit="none")).d
            worst = max(worst, abs(d_full - d_none))
        if met:
            assert worst <= 1e-6, f"{antennas} {alphas}: curves split by {worst}"
        else:
            assert worst > 1e-6, f"{antennas} {alphas}: curves never split"


def test_criterion_08_unit_scaling_composition_is_the_three_curve_minimum():
    for n in (1, 2):
        cfg = AntennaConfig(n, n, n, n)
        alphas = ScalingExponents(1.0, 1.0, 1.0)
        grid = _grid(float(n), 0.25)
        for r1 in grid:
            for r2 in grid:
                got = full_dmt(
                    DmtQuery(cfg, alphas, MultiplexingGainPair(r1, r2), csit="full")
                ).d
                rs = r1 + r2
                sum_part = ptp_dmt(n, 3 * n, rs) if rs <= n + 1e-12 else 0.0
                want = min(ptp_dmt(n, n, r1), ptp_dmt(n, n, r2), sum_part)
                assert got == pytest.approx(want, abs=1e-6), f"n={n} r=({r1},{r2})"


def test_criterion_09_monte_carlo_slope_recovers_the_composed_exponent():
    start = time.monotonic()
    estimate = estimate_outage_slope(
        AntennaConfig(1, 1, 1, 1),
        ScalingExponents(1.0, 1.0, 1.0),
        MultiplexingGainPair(0.25, 0.25),
        "full",
        snr_grid_db=(15.0, 20.0, 25.0, 30.0, 35.0, 40.0),
        samples_per_point=2_000_000,
        seed=SEED,
        workers=1,
    )
    elapsed = time.monotonic() - start
    assert abs(estimate.composed_slope - 0.75) <= 0.15, (
        f"slope {estimate.composed_slope:.4f} +/- {estimate.composed_halfwidth:.4f}"
    )
    assert elapsed < 300.0, f"{elapsed:.0f}s exceeds the five-minute budget"


def test_criterion_10_property_suites_hold_over_a_thousand_draws():
    rng = np.random.default_rng(SEED)
    ones = ScalingExponents(1.0, 1.0, 1.0)

    # achievable-rate gap constants (250 draws)
    for _ in range(250):
        cfg = AntennaConfig(*(int(v) for v in rng.integers(1, 4, size=4)))
        real = draw_realization(cfg, rng)
        snr = SnrPoint(float(rng.uniform(-5, 35)), ones)
        up = mutual_info_upper(real, snr)
        low = mutual_info_lower(real, snr)
        want = (2.0 * cfg.n1, 2.0 * cfg.n2, 2.0 * (cfg.n1 + cfg.n2))
        for u, l, w in zip(up, low, want):
            assert u - l == pytest.approx(w, abs=1e-9)

    # sum-bound decomposition identity (250 draws)
    for _ in range(250):
        cfg = AntennaConfig(*(int(v) for v in rng.integers(1, 4, size=4)))
        alphas = ScalingExponents(*(float(v) for v in rng.uniform(0.3, 2.0, 3)))
        real = draw_realization(cfg, rng)
        snr = SnrPoint(float(rng.uniform(-5, 35)), alphas)
        _, _, ibs = mutual_info_upper(real, snr)
        w3 = real.h21 @ real.h21.conj().T
        eye1 = np.eye(cfg.n1)
        cross = math.log2(np.linalg.det(eye1 + snr.rho21 * w3).real)
        direct = math.log2(
            np.linalg.det(
                np.eye(cfg.m1)
                + snr.rho11
                * real.h11.conj().T
                @ np.linalg.solve(eye1 + snr.rho21 * w3, real.h11)
            ).real
        )
        second = math.log2(
            np.linalg.det(
                np.eye(cfg.n2)
                + snr.rho22
                * real.h22
                @ np.linalg.solve(
                    np.eye(cfg.m2) + snr.rho21 * real.h21.conj().T @ real.h21,
                    real.h22.conj().T,
                )
            ).real
        )
        assert ibs == pytest.approx(cross + direct + second, abs=1e-6)

    # closed-form branch continuity at a random knee (250 draws)
    eps = 1e-12
    for _ in range(250):
        family = int(rng.integers(5))
        n = int(rng.integers(1, 4))
        if family == 0:
            alpha = float(rng.uniform(0.3, 2.2))
            knees = [n * alpha, n * (2 - alpha)] if alpha <= 1 else [n, n * alpha]
            fn = lambda r: fcsit_symmetric_sum(n, alpha, r)
        elif family == 1:
            alpha = float(rng.uniform(1.0, 2.2))
            knees = [n, n * alpha]
            fn = lambda r: fcsit_femto_sum(n, alpha, r)
        elif family == 2:
            alpha = float(rng.uniform(1.0, 2.2))
            knees = [n, n * alpha]
            fn = lambda r: iml_symmetric_sum(n, alpha, r)
        elif family == 3:
            n1 = n + int(rng.integers(0, 3))
            n2 = n + int(rng.integers(0, 3))
            knees = [float(n), float(min(n1, 2 * n))]
            fn = lambda r: fcsit_asymmetric_sum(n, n1, n2, r)
        else:
            n1 = n + int(rng.integers(0, 3))
            n2 = n + int(rng.integers(0, 3))
            knees = [float(n), float(min(2 * n, n1))]
            fn = lambda r: iml_asymmetric_sum(n, n1, n2, r)
        knee = knees[int(rng.integers(len(knees)))]
        assert abs(fn(knee - eps) - fn(knee + eps)) <= 1e-9

    # side information can only help (250 draws)
    for _ in range(250):
        cfg = AntennaConfig(*(int(v) for v in rng.integers(1, 3, size=4)))
        alphas = ScalingExponents(*(float(v) for v in rng.uniform(0.5, 2.2, 3)))
        r1 = float(rng.uniform(0, min(cfg.m1, cfg.n1) * alphas.alpha11))
        r2 = float(rng.uniform(0, min(cfg.m2, cfg.n2) * alphas.alpha22))
        gains = MultiplexingGainPair(r1, r2)
        d_full = full_dmt(DmtQuery(cfg, alphas, gains, csit="full")).d
        d_none = full_dmt(DmtQuery(cfg, alphas, gains, csit="none")).d
        assert d_full >= d_none - 1e-9

    # determinism: a fixed seed reproduces the estimator exactly
    kwargs = dict(
        snr_grid_db=(5.0, 10.0, 15.0),
        samples_per_point=20_000,
        seed=SEED,
        min_hits=20,
    )
    first = estimate_outage_slope(
        AntennaConfig(1, 1, 1, 1), ones, MultiplexingGainPair(0.3, 0.3), "full", **kwargs
    )
    second = estimate_outage_slope(
        AntennaConfig(1, 1, 1, 1), ones, MultiplexingGainPair(0.3, 0.3), "full", **kwargs
    )
    assert first == second
