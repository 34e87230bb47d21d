"""Program assembly for the sum-rate outage exponent, and the split evaluators."""

from __future__ import annotations

import numpy as np
import pytest

from zicdmt import (
    AntennaConfig,
    ExponentVariables,
    MultiplexingGainPair,
    OutsideSupportError,
    ScalingExponents,
    build_fcsit_presimplified_program,
    build_fcsit_sum_program,
    build_iml_sum_program,
    eval_E1,
    eval_E2,
    f_w3_exponent,
    solve_lp,
)

ONES = ScalingExponents(1.0, 1.0, 1.0)


def test_antenna_config_derived_counts():
    cfg = AntennaConfig(1, 2, 2, 1)
    assert (cfg.p, cfg.q1, cfg.q2) == (2, 1, 1)
    with pytest.raises(ValueError):
        AntennaConfig(0, 1, 1, 1)


def test_multiplexing_pair_sums():
    pair = MultiplexingGainPair(0.25, 0.5)
    assert pair.r_sum == pytest.approx(0.75)
    with pytest.raises(ValueError):
        MultiplexingGainPair(-0.1, 0.0)


def test_program_structure_square_two_antenna_case():
    cfg = AntennaConfig(2, 2, 2, 2)
    alphas = ScalingExponents(1.0, 1.3, 0.8)
    prog = build_fcsit_sum_program(cfg, alphas, 0.5)
    assert prog.variables == (
        "upsilon_1",
        "upsilon_2",
        "beta_1",
        "beta_2",
        "gamma_1",
        "gamma_2",
    )
    assert prog.linear_weights == (7.0, 5.0, 3.0, 1.0, 3.0, 1.0)
    assert prog.constant_offset == pytest.approx(-8 * 1.3)
    # one cross hinge survives per interferer index: (i, k) = (1, 1) against
    # the second receiver, (i, j) = (1, 1) against the first
    assert set(prog.plus_objective_terms) == {(1.3, (0, 4)), (1.3, (0, 2))}
    assert prog.budget_constraint.terms == (
        (1.3, 0),
        (1.3, 1),
        (1.0, 2),
        (1.0, 3),
        (0.8, 4),
        (0.8, 5),
    )
    assert prog.budget_constraint.limit == 0.5
    assert prog.ordering_chains == ((0, 1), (2, 3), (4, 5))
    assert set(prog.coupling_bounds) == {
        ((0, 3), 1.3),
        ((1, 2), 1.3),
        ((1, 3), 1.3),
        ((0, 5), 1.3),
        ((1, 4), 1.3),
        ((1, 5), 1.3),
    }
    assert prog.box_upper_bound == pytest.approx(1.3)


def test_program_structure_mixed_antenna_case():
    cfg = AntennaConfig(1, 2, 2, 1)
    prog = build_fcsit_sum_program(cfg, ONES, 1.0)
    assert prog.variables == ("upsilon_1", "upsilon_2", "beta_1", "gamma_1")
    assert prog.linear_weights == (5.0, 3.0, 2.0, 2.0)
    assert prog.constant_offset == pytest.approx(-4.0)
    assert set(prog.plus_objective_terms) == {(1.0, (0, 3)), (1.0, (0, 2))}
    assert prog.ordering_chains == ((0, 1),)
    assert set(prog.coupling_bounds) == {((1, 2), 1.0), ((1, 3), 1.0)}


def test_single_antenna_couplings_include_the_corner():
    # With one receive antenna on the interfered side, the pairing constraint
    # already binds the first variables of each block.
    prog = build_fcsit_sum_program(AntennaConfig(1, 1, 1, 1), ONES, 0.0)
    assert prog.variables == ("upsilon_1", "beta_1", "gamma_1")
    assert prog.plus_objective_terms == ()
    assert set(prog.coupling_bounds) == {((0, 1), 1.0), ((0, 2), 1.0)}


def test_iml_program_is_the_degenerate_assembly():
    cfg = AntennaConfig(1, 1, 1, 1)
    alphas = ScalingExponents(1.0, 2.0, 1.0)
    prog = build_iml_sum_program(cfg, alphas, 0.0)
    assert prog.variables == ("upsilon_1", "beta_1")
    # spectator count drops to M1 and the third block disappears entirely
    assert prog.linear_weights == (2.0, 1.0)
    assert prog.constant_offset == pytest.approx(-2.0)
    assert prog.plus_objective_terms == ()
    assert set(prog.coupling_bounds) == {((0, 1), 2.0)}
    # the cap still covers every scaling exponent, including the unused one
    tall = build_iml_sum_program(cfg, ScalingExponents(1.0, 1.0, 3.0), 0.0)
    assert tall.box_upper_bound == pytest.approx(3.0)


def test_presimplified_keeps_the_spectator_hinge_explicit():
    cfg = AntennaConfig(2, 2, 2, 2)
    alphas = ScalingExponents(1.0, 1.3, 0.8)
    prog = build_fcsit_presimplified_program(cfg, alphas, 0.5)
    assert prog.linear_weights == (3.0, 1.0, 3.0, 1.0, 3.0, 1.0)
    assert prog.constant_offset == 0.0
    assert prog.concave_plus_terms == ((1.3, 0, 4.0), (1.3, 1, 4.0))


def test_objective_at_the_cap_is_pure_linear_cost():
    rng = np.random.default_rng(5)
    builders = (
        build_fcsit_sum_program,
        build_fcsit_presimplified_program,
        build_iml_sum_program,
    )
    for _ in range(20):
        cfg = AntennaConfig(*(int(v) for v in rng.integers(1, 4, size=4)))
        alphas = ScalingExponents(*(float(v) for v in rng.uniform(0.25, 2.5, 3)))
        for build in builders:
            prog = build(cfg, alphas, 0.5)
            cap = prog.box_upper_bound
            at_cap = prog.objective_value((cap,) * prog.n_variables)
            want = sum(prog.linear_weights) * cap + prog.constant_offset
            assert at_cap == pytest.approx(want, abs=1e-9)


def test_capacity_flag_marks_unreachable_budgets():
    cfg = AntennaConfig(2, 2, 2, 2)
    capacity = 2 * 1.0 + 2 * 1.0 + 2 * 1.0
    assert not build_fcsit_sum_program(cfg, ONES, capacity).beyond_capacity
    assert build_fcsit_sum_program(cfg, ONES, capacity + 0.1).beyond_capacity


FROZEN_OPTIMA = [
    # (antennas, alphas, r_s, builder, value)
    ((1, 1, 1, 1), (1.0, 1.0, 1.0), 0.0, "fcsit", 3.0),
    ((1, 1, 1, 1), (1.0, 1.0, 1.0), 0.5, "fcsit", 1.5),
    ((1, 1, 1, 1), (1.0, 1.0, 1.0), 1.0, "fcsit", 0.0),
    ((1, 1, 1, 1), (1.0, 2.0, 1.0), 0.0, "fcsit", 4.0),
    ((1, 1, 1, 1), (1.0, 2.0, 1.0), 1.5, "fcsit", 0.5),
    ((1, 1, 1, 1), (1.0, 0.5, 1.0), 0.0, "fcsit", 2.5),
    ((1, 1, 1, 1), (1.0, 0.5, 1.0), 0.75, "fcsit", 0.75),
    ((2, 2, 2, 2), (1.0, 1.0, 1.0), 0.0, "fcsit", 12.0),
    ((1, 1, 1, 1), (1.0, 2.0, 1.0), 0.0, "iml", 3.0),
    ((1, 1, 1, 1), (1.0, 1.0, 1.0), 1.0, "iml", 0.0),
    ((1, 2, 1, 2), (1.0, 1.0, 1.0), 1.0, "iml", 1.0),
]


@pytest.mark.parametrize("antennas,alphas,rs,kind,value", FROZEN_OPTIMA)
def test_frozen_lp_optima(antennas, alphas, rs, kind, value):
    cfg = AntennaConfig(*antennas)
    scal = ScalingExponents(*alphas)
    build = build_fcsit_sum_program if kind == "fcsit" else build_iml_sum_program
    sol = solve_lp(build(cfg, scal, rs))
    assert sol.status == "optimal"
    assert sol.optimal_value == pytest.approx(value, abs=1e-9)


# ---------------------------------------------------------------------------
# Split evaluators
# ---------------------------------------------------------------------------


def test_eval_e1_single_antenna_values():
    cfg = AntennaConfig(1, 1, 1, 1)
    assert eval_E1(cfg, ONES, beta=(1.0,), upsilon=(1.0,)) == pytest.approx(1.0)
    assert eval_E1(cfg, ONES, beta=(1.0,), upsilon=(0.0,)) == pytest.approx(0.0)
    assert eval_E2(cfg, ONES, gamma=(1.0,), upsilon=(1.0,)) == pytest.approx(1.0)
    assert f_w3_exponent(cfg, ONES, upsilon=(0.5,)) == pytest.approx(0.5)


def test_eval_e1_rejects_points_outside_the_support():
    cfg = AntennaConfig(1, 1, 1, 1)
    with pytest.raises(OutsideSupportError):
        eval_E1(cfg, ONES, beta=(0.5,), upsilon=(0.0,))
    with pytest.raises(OutsideSupportError):
        eval_E1(cfg, ONES, beta=(1.0,), upsilon=(-0.2,))
    with pytest.raises(OutsideSupportError):
        eval_E2(cfg, ONES, gamma=(0.3,), upsilon=(0.1,))
    with pytest.raises(ValueError):
        eval_E1(cfg, ONES, beta=(1.0, 1.0), upsilon=(1.0,))
    # decreasing within a block breaks the ordering assumption
    cfg2 = AntennaConfig(2, 2, 2, 2)
    with pytest.raises(OutsideSupportError):
        f_w3_exponent(cfg2, ONES, upsilon=(0.8, 0.2))


def _random_support_point(rng, cfg, alphas):
    """Draw (upsilon, beta, gamma) inside the support: ascending blocks with
    the pairing lower bounds respected."""
    a21 = alphas.alpha21
    ups = np.sort(rng.uniform(0.0, 2.0 * a21, cfg.p))

    def block(size, zone_start):
        vals = np.empty(size)
        for j in range(1, size + 1):
            lo = 0.0
            i_min = zone_start + 1 - j
            if i_min <= cfg.p:  # some pairing applies to this entry
                anchor = ups[max(i_min, 1) - 1]
                lo = max(0.0, a21 - anchor)
            vals[j - 1] = lo + rng.uniform(0.0, 1.0)
        return np.maximum.accumulate(vals)

    beta = block(cfg.q1, cfg.n1)
    gamma = block(cfg.q2, cfg.m2)
    return ups, beta, gamma


def test_split_evaluators_sum_to_the_program_objective():
    rng = np.random.default_rng(17)
    for _ in range(100):
        cfg = AntennaConfig(*(int(v) for v in rng.integers(1, 3, size=4)))
        alphas = ScalingExponents(*(float(v) for v in rng.uniform(0.25, 2.5, 3)))
        ups, beta, gamma = _random_support_point(rng, cfg, alphas)
        total = (
            eval_E1(cfg, alphas, beta=tuple(beta), upsilon=tuple(ups))
            + eval_E2(cfg, alphas, gamma=tuple(gamma), upsilon=tuple(ups))
            + f_w3_exponent(cfg, alphas, upsilon=tuple(ups))
        )
        prog = build_fcsit_presimplified_program(cfg, alphas, 0.0)
        point = tuple(np.concatenate([ups, beta, gamma]))
        assert total == pytest.approx(prog.objective_value(point), abs=1e-9)


def test_variable_splitter_round_trips():
    cfg = AntennaConfig(1, 2, 2, 1)
    assignment = (0.1, 0.2, 0.3, 0.4)
    split = ExponentVariables.from_assignment(cfg, assignment)
    assert split.upsilon == (0.1, 0.2)
    assert split.beta == (0.3,)
    assert split.gamma == (0.4,)
    no_gamma = ExponentVariables.from_assignment(cfg, (0.1, 0.2, 0.3), with_gamma=False)
    assert no_gamma.gamma == ()
    with pytest.raises(ValueError):
        ExponentVariables.from_assignment(cfg, (0.1, 0.2))
