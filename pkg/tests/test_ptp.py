"""Point-to-point tradeoff curve: breakpoints, interpolation, scaling."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zicdmt import DomainError, ptp_dmt, scaled_ptp_dmt, single_user_exponent


@pytest.mark.parametrize("tx,rx", [(1, 1), (2, 2), (1, 3), (3, 1), (2, 4), (3, 9), (4, 4)])
def test_integer_breakpoints(tx, rx):
    for k in range(min(tx, rx) + 1):
        assert ptp_dmt(tx, rx, float(k)) == (tx - k) * (rx - k)


def test_linear_between_breakpoints():
    assert ptp_dmt(2, 2, 0.5) == pytest.approx(2.5, abs=1e-12)
    assert ptp_dmt(1, 3, 0.5) == pytest.approx(1.5, abs=1e-12)
    assert ptp_dmt(3, 9, 2.5) == pytest.approx(3.5, abs=1e-12)
    assert ptp_dmt(2, 6, 1.25) == pytest.approx(3.75, abs=1e-12)


def test_symmetric_in_antenna_roles():
    for tx in range(1, 5):
        for rx in range(1, 5):
            cap = min(tx, rx)
            for i in range(9):
                r = cap * i / 8
                assert ptp_dmt(tx, rx, r) == pytest.approx(ptp_dmt(rx, tx, r), abs=1e-12)


def test_rejects_rates_outside_support():
    with pytest.raises(DomainError):
        ptp_dmt(2, 3, 2.1)
    with pytest.raises(DomainError):
        ptp_dmt(2, 3, -0.1)
    with pytest.raises(DomainError):
        ptp_dmt(1, 1, math.nan)


def test_snaps_tiny_overshoot_at_the_endpoint():
    assert ptp_dmt(2, 2, 2.0 + 1e-10) == 0.0
    assert ptp_dmt(2, 2, -1e-10) == 4.0


def test_scaled_curve_matches_unscaled():
    for alpha in (0.5, 1.0, 1.5, 2.0):
        for i in range(11):
            r = 2 * alpha * i / 10
            want = alpha * ptp_dmt(2, 3, r / alpha)
            assert scaled_ptp_dmt(2, 3, alpha, r) == pytest.approx(want, abs=1e-12)


def test_scaled_domain_stretches_with_alpha():
    assert scaled_ptp_dmt(1, 1, 0.5, 0.5) == 0.0
    with pytest.raises(DomainError):
        scaled_ptp_dmt(1, 1, 0.5, 0.6)


def test_single_user_alias():
    assert single_user_exponent is scaled_ptp_dmt or (
        single_user_exponent(2, 2, 1.0, 0.5) == scaled_ptp_dmt(2, 2, 1.0, 0.5)
    )


@given(
    tx=st.integers(1, 4),
    rx=st.integers(1, 4),
    u=st.floats(0, 1),
    v=st.floats(0, 1),
    lam=st.floats(0, 1),
)
@settings(max_examples=200, deadline=None)
def test_curve_is_convex(tx, rx, u, v, lam):
    cap = min(tx, rx)
    r1, r2 = cap * u, cap * v
    mid = lam * r1 + (1 - lam) * r2
    lhs = ptp_dmt(tx, rx, mid)
    rhs = lam * ptp_dmt(tx, rx, r1) + (1 - lam) * ptp_dmt(tx, rx, r2)
    assert lhs <= rhs + 1e-9


@given(tx=st.integers(1, 4), rx=st.integers(1, 4), u=st.floats(0, 1), v=st.floats(0, 1))
@settings(max_examples=200, deadline=None)
def test_curve_is_nonincreasing(tx, rx, u, v):
    cap = min(tx, rx)
    lo, hi = sorted((cap * u, cap * v))
    assert ptp_dmt(tx, rx, lo) >= ptp_dmt(tx, rx, hi) - 1e-12
