import math

import pytest
from hypothesis import given, strategies as st

from kinex import ClearingInput, DomainError, TradeDraw, cc_trade, ccm_trade, clearing_prices

APPROX = dict(rel=1e-12, abs=1e-12)

money = st.floats(min_value=0.0, max_value=1e12, allow_nan=False)
unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestCcTrade:
    def test_symmetric_equal_split(self):
        assert cc_trade(1.0, 1.0, 0.0, 0.5) == pytest.approx((1.0, 1.0), **APPROX)

    def test_direct_substitution(self):
        assert cc_trade(2.0, 0.0, 0.2, 0.25) == pytest.approx((0.8, 1.2), **APPROX)
        assert cc_trade(1.0, 1.0, 0.5, 1.0) == pytest.approx((1.5, 0.5), **APPROX)

    @pytest.mark.parametrize(
        "args",
        [
            (-1.0, 1.0, 0.5, 0.5),
            (1.0, -1.0, 0.5, 0.5),
            (1.0, 1.0, -0.1, 0.5),
            (1.0, 1.0, 1.1, 0.5),
            (1.0, 1.0, 0.5, -0.1),
            (1.0, 1.0, 0.5, 1.5),
            (float("nan"), 1.0, 0.5, 0.5),
        ],
    )
    def test_domain_errors(self, args):
        with pytest.raises(DomainError):
            cc_trade(*args)

    @given(m_i=money, m_j=money, lam=unit, eps=unit)
    def test_conservation(self, m_i, m_j, lam, eps):
        out_i, out_j = cc_trade(m_i, m_j, lam, eps)
        assert out_i >= 0.0 and out_j >= 0.0
        assert math.isclose(out_i + out_j, m_i + m_j, rel_tol=1e-12, abs_tol=1e-300)

    @given(
        m_i=st.floats(0.0, 1e6),
        m_j=st.floats(0.0, 1e6),
        lam=unit,
        eps=unit,
        k=st.floats(1e-6, 1e6),
    )
    def test_homogeneity(self, m_i, m_j, lam, eps, k):
        base_i, base_j = cc_trade(m_i, m_j, lam, eps)
        scaled_i, scaled_j = cc_trade(k * m_i, k * m_j, lam, eps)
        assert scaled_i == pytest.approx(k * base_i, rel=1e-12, abs=1e-250)
        assert scaled_j == pytest.approx(k * base_j, rel=1e-12, abs=1e-250)

    @given(m_i=money, m_j=money, eps=unit)
    def test_zero_lambda_is_random_sharing(self, m_i, m_j, eps):
        total = m_i + m_j
        assert cc_trade(m_i, m_j, 0.0, eps) == (eps * total, (1.0 - eps) * total)


class TestCcmTrade:
    def test_full_symmetry(self):
        assert ccm_trade(1.0, 1.0, 0.5, 0.5, 0.5) == pytest.approx((1.0, 1.0), **APPROX)

    def test_direct_substitution(self):
        assert ccm_trade(1.0, 2.0, 0.2, 0.8, 1.0) == pytest.approx((1.4, 1.6), **APPROX)

    def test_lambda_one_freezes_money(self):
        assert ccm_trade(3.0, 5.0, 1.0, 1.0, 0.7) == (3.0, 5.0)

    @given(m_i=money, m_j=money, lam_i=unit, lam_j=unit, eps=unit)
    def test_conservation(self, m_i, m_j, lam_i, lam_j, eps):
        out_i, out_j = ccm_trade(m_i, m_j, lam_i, lam_j, eps)
        assert out_i >= 0.0 and out_j >= 0.0
        assert math.isclose(out_i + out_j, m_i + m_j, rel_tol=1e-12, abs_tol=1e-300)

    @given(m_i=money, m_j=money, lam_i=unit, lam_j=unit)
    def test_epsilon_one_boundary(self, m_i, m_j, lam_i, lam_j):
        _, out_j = ccm_trade(m_i, m_j, lam_i, lam_j, 1.0)
        assert out_j == lam_j * m_j

    @given(
        m_i=st.floats(0.0, 1e6),
        m_j=st.floats(0.0, 1e6),
        lam_i=unit,
        lam_j=unit,
        eps=unit,
        k=st.floats(1e-6, 1e6),
    )
    def test_homogeneity(self, m_i, m_j, lam_i, lam_j, eps, k):
        base_i, base_j = ccm_trade(m_i, m_j, lam_i, lam_j, eps)
        scaled_i, scaled_j = ccm_trade(k * m_i, k * m_j, lam_i, lam_j, eps)
        assert scaled_i == pytest.approx(k * base_i, rel=1e-12, abs=1e-250)
        assert scaled_j == pytest.approx(k * base_j, rel=1e-12, abs=1e-250)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            ccm_trade(1.0, 1.0, -0.5, 0.5, 0.5)
        with pytest.raises(DomainError):
            ccm_trade(1.0, 1.0, 0.5, 0.5, 2.0)


class TestClearingPrices:
    def test_symmetric_unit_economy(self):
        c = ClearingInput(1, 1, 1, 1, 0.25, 0.25, 0.5)
        assert clearing_prices(c) == pytest.approx((1.0, 1.0), **APPROX)

    def test_doubling_supply_halves_price(self):
        c = ClearingInput(1, 1, 2, 1, 0.25, 0.25, 0.5)
        assert clearing_prices(c) == pytest.approx((0.5, 1.0), **APPROX)

    def test_direct_substitution(self):
        c = ClearingInput(2, 2, 1, 1, 0.4, 0.2, 0.4)
        assert clearing_prices(c) == pytest.approx((4.0, 2.0), **APPROX)

    def test_prices_positive(self):
        c = ClearingInput(0.1, 5.0, 3.0, 0.7, 0.1, 0.3, 0.6)
        p_i, p_j = clearing_prices(c)
        assert p_i > 0 and p_j > 0

    def test_zero_lambda_rejected(self):
        with pytest.raises(DomainError):
            ClearingInput(1, 1, 1, 1, 0.5, 0.5, 0.0)

    def test_nonpositive_quantity_rejected(self):
        with pytest.raises(DomainError):
            ClearingInput(1, 1, 0.0, 1, 0.25, 0.25, 0.5)

    def test_exponent_sum_enforced(self):
        with pytest.raises(DomainError):
            ClearingInput(1, 1, 1, 1, 0.3, 0.3, 0.5)
        # within 1e-12 is accepted
        ClearingInput(1, 1, 1, 1, 0.25, 0.25, 0.5 + 1e-13)


class TestTradeDraw:
    def test_rejects_self_trade(self):
        with pytest.raises(DomainError):
            TradeDraw(i=3, j=3, epsilon=0.5)

    def test_rejects_bad_epsilon(self):
        with pytest.raises(DomainError):
            TradeDraw(i=0, j=1, epsilon=1.5)
