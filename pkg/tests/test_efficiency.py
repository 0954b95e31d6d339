import math

import numpy as np
import pytest
from scipy.optimize import brentq

from qdkd import efficiency as ef
from qdkd.efficiency import ChannelModel, Protocol


class TestTransmission:
    def test_three_db(self):
        assert ef.transmission_prob(ChannelModel(0.2, 15)) == pytest.approx(10**-0.3, rel=1e-15)
        assert ef.transmission_prob(ChannelModel(0.2, 15)) == pytest.approx(0.5, abs=0.002)

    def test_lossless(self):
        assert ef.transmission_prob(ChannelModel(0.2, 0)) == 1
        assert ef.transmission_prob(ChannelModel(0, 1e6)) == 1

    def test_invalid_channel(self):
        with pytest.raises(ValueError):
            ChannelModel(-0.1, 10)
        with pytest.raises(ValueError):
            ChannelModel(0.2, float("inf"))


class TestEta:
    def test_theoretical_efficiencies(self):
        assert ef.PROTOCOLS[Protocol.QDKD].theoretical_e == 1
        assert ef.PROTOCOLS[Protocol.BB84].theoretical_e == 0.25
        assert ef.PROTOCOLS[Protocol.BB84_OPTIMIZED].theoretical_e == 0.5

    def test_values(self):
        assert ef.eta(Protocol.QDKD, 1.0) == 1
        assert ef.eta(Protocol.BB84, 1.0) == 0.25
        assert ef.eta("HCCP", 0.5) == ef.eta("QDKD", 0.5) == 0.5**4
        assert ef.eta(Protocol.BB84_OPTIMIZED, 0.5) == 0.125

    def test_errors(self):
        with pytest.raises(ValueError):
            ef.eta("E91", 0.5)
        with pytest.raises(ValueError):
            ef.eta(Protocol.HCLLP, 0.5)
        with pytest.raises(ValueError):
            ef.eta(Protocol.QDKD, 0.0)

    def test_monotone(self):
        grid = np.linspace(1e-6, 1, 5001)
        for proto in ef.COMPARED:
            vals = [ef.eta(proto, p) for p in grid]
            assert np.all(np.diff(vals) >= 0)


class TestThresholds:
    def test_against_root_finding(self):
        p_low, p_high = ef.switch_thresholds()
        root_high = brentq(lambda p: p**4 - 0.5 * p**2, 0.3, 0.99, xtol=1e-15)
        root_low = brentq(lambda p: 0.5 * p**2 - 0.25 * p, 0.1, 0.9, xtol=1e-15)
        assert p_high == pytest.approx(root_high, abs=1e-12)
        assert p_low == pytest.approx(root_low, abs=1e-12)
        assert abs(p_high - 2**-0.5) < 1e-12 and abs(p_low - 0.5) < 1e-12

    @pytest.mark.parametrize("p, best", [(0.9, "QDKD"), (0.6, "BB84Optimized"), (0.3, "BB84"),
                                         (2**-0.5, "QDKD"), (0.5, "BB84Optimized")])
    def test_regions(self, p, best):
        assert ef.best_protocol(p).value == best

    def test_best_is_argmax(self):
        g = np.random.default_rng(0)
        for p in g.uniform(1e-9, 1, 10_000):
            etas = [ef.eta(proto, p) for proto in ef.COMPARED]
            assert ef.best_protocol(p) is ef.COMPARED[int(np.argmax(etas))]


class TestCrossover:
    def test_standard_fibre(self):
        l1, l2 = ef.crossover_distances(0.2)
        assert l1 == pytest.approx(7.53, abs=0.05)
        assert l1 == pytest.approx(7.4, abs=0.2)
        assert l2 == pytest.approx(15.05, abs=0.1)

    @pytest.mark.parametrize("alpha, expected, tol", [(1e-2, 150, 1), (1e-4, 15000, 100)])
    def test_future_fibres(self, alpha, expected, tol):
        assert ef.crossover_distances(alpha)[0] == pytest.approx(expected, abs=tol)

    def test_exact_roots(self):
        for alpha in (0.2, 1e-2, 1e-4, 3.0):
            l1, l2 = ef.crossover_distances(alpha)
            p1 = ef.transmission_prob(ChannelModel(alpha, l1))
            p2 = ef.transmission_prob(ChannelModel(alpha, l2))
            assert abs(ef.eta("QDKD", p1) - ef.eta("BB84Optimized", p1)) < 1e-12
            assert abs(ef.eta("BB84Optimized", p2) - ef.eta("BB84", p2)) < 1e-12

    def test_lossless(self):
        assert ef.crossover_distances(0) == (math.inf, math.inf)


class TestStorage:
    def test_values(self):
        ch = ChannelModel(0.2, 10, light_speed_km_s=2e5)
        assert ef.storage_requirement(Protocol.QDKD, ch) == pytest.approx(1e-4, rel=1e-15)
        ratio = ef.storage_requirement(Protocol.HCLLP, ch) / ef.storage_requirement(Protocol.QDKD, ch)
        assert ratio == pytest.approx(1.5)
        assert ef.storage_requirement("HCCP", ch) == ef.storage_requirement("QDKD", ch)
        assert ef.storage_requirement(Protocol.QDKD, ChannelModel(0.2, 0)) == 0


class TestTable:
    def test_single_row(self):
        (row,) = ef.efficiency_table(0.2, [0])
        assert row["p"] == 1 and row["best"] == "QDKD"

    def test_regions(self):
        rows = ef.efficiency_table(0.2, [5, 10, 20])
        assert [r["best"] for r in rows] == ["QDKD", "BB84Optimized", "BB84"]
        for r in rows:
            for proto in ef.COMPARED:
                assert 0 < r[f"eta_{proto.value}"] <= 1

    def test_monotone_p_and_errors(self):
        rows = ef.efficiency_table(0.2, np.linspace(0, 40, 81))
        assert np.all(np.diff([r["p"] for r in rows]) <= 0)
        with pytest.raises(ValueError):
            ef.efficiency_table(0.2, [])

    def test_csv_and_summary(self):
        text = ef.efficiency_csv(ef.efficiency_table(0.2, [1, 2]))
        assert text.splitlines()[0] == "length_km,p,eta_QDKD,eta_BB84Optimized,eta_BB84,best"
        s = ef.efficiency_summary(0.2)
        assert s["thresholds_P"] == pytest.approx([0.5, 2**-0.5], abs=1e-12)
        assert ef.efficiency_summary(0)["crossover_km"] == [None, None]
