import math

import numpy as np
import pytest

from hcplab.config import Boundary
from hcplab.laws import (DiracLaw, ExponentialLaw, GeometricLaw, ParetoHalfLaw,
                         SamplingContractError, two_point_law)
from hcplab.sampling import (ContainsOrigin, ExchangeableMixture, LeftBounded,
                             PeriodicRenewal, replica_rng, sample_exchangeable,
                             sample_left_bounded, sample_lattice_stationary,
                             sample_spec, sample_stationary)
from hcplab.stats import independence_test, ks_two_sample


class TestReplicaStreams:
    def test_reproducible_and_distinct(self):
        a1 = replica_rng(7, 0).random(5)
        a2 = replica_rng(7, 0).random(5)
        b = replica_rng(7, 1).random(5)
        assert np.array_equal(a1, a2)
        assert not np.array_equal(a1, b)


class TestLeftBounded:
    def test_deterministic_laws(self, rng):
        cfg = sample_left_bounded(0.0, DiracLaw(1.0), 3, rng)
        assert cfg.boundary is Boundary.LEFT_BOUNDED
        assert cfg.first_point == 0.0
        assert np.allclose(cfg.lengths, [1.0, 1.0, 1.0])

    def test_geometric_mean(self, rng):
        n = 100_000
        cfg = sample_left_bounded(None, GeometricLaw(0.5), n, rng)
        mean = cfg.lengths.mean()
        se = cfg.lengths.std() / math.sqrt(n)
        assert abs(mean - 2.0) < 3 * se

    def test_single_interval(self, rng):
        cfg = sample_left_bounded(None, ExponentialLaw(), 1, rng)
        assert cfg.n_intervals == 1

    def test_consecutive_intervals_independent(self):
        d1, d2 = [], []
        for r in range(4000):
            cfg = sample_left_bounded(None, GeometricLaw(0.4), 2, replica_rng(13, r))
            d1.append(cfg.lengths[0])
            d2.append(cfg.lengths[1])
        res = independence_test(np.array(d1), np.array(d2), bins=3)
        assert res.p_value > 0.01

    def test_bad_law_rejected(self, rng):
        class ZeroLaw:
            def sample(self, rng, size):
                return np.zeros(size)

        with pytest.raises(SamplingContractError):
            sample_left_bounded(None, ZeroLaw(), 4, rng)


class TestStationary:
    def test_point_mass_straddle(self):
        offs = []
        for r in range(3000):
            cfg = sample_stationary(DiracLaw(2.0), 1, replica_rng(5, r))
            assert cfg.lengths[0] == 2.0
            assert -2.0 < cfg.first_point <= 0.0
            offs.append(-cfg.first_point)
        # origin offset uniform on (0, 2]
        offs = np.array(offs)
        u = ks_two_sample(offs, 2.0 * replica_rng(6).random(3000))
        assert u.p_value > 0.01

    def test_exponential_straddle_is_gamma2(self):
        vals = np.array([sample_stationary(ExponentialLaw(1.0), 1,
                                           replica_rng(8, r)).lengths[0]
                         for r in range(20_000)])
        se = vals.std() / math.sqrt(vals.size)
        assert abs(vals.mean() - 2.0) < 3 * se

    def test_two_point_size_bias(self):
        law = two_point_law(1.0, 2.0, 0.5)
        hits = 0
        n = 30_000
        draws = law.sample_size_biased(replica_rng(9), n)
        hits = np.mean(draws == 2.0)
        se = math.sqrt((2 / 3) * (1 / 3) / n)
        assert abs(hits - 2.0 / 3.0) < 3 * se

    def test_infinite_mean_rejected(self, rng):
        with pytest.raises(SamplingContractError, match="infinite mean"):
            sample_stationary(ParetoHalfLaw(), 10, rng)

    def test_periodic_mode(self, rng):
        cfg = sample_stationary(ExponentialLaw(), 50, rng, periodic=True)
        assert cfg.boundary is Boundary.PERIODIC
        assert cfg.n_intervals == 50


class TestLatticeStationary:
    def test_unit_law_occupies_everything(self, rng):
        cfg = sample_lattice_stationary(DiracLaw(1.0), 10, rng)
        assert np.allclose(cfg.lengths, 1.0)
        assert cfg.first_point == 0.0  # straddle 1 forces offset 0

    def test_geometric_density(self):
        p = 0.3
        occupied = total = 0
        for r in range(300):
            cfg = sample_lattice_stationary(GeometricLaw(p), 200, replica_rng(21, r))
            pts = cfg.points()
            window = pts[-1] - pts[0]
            occupied += cfg.n_points
            total += window + 1
        density = occupied / total
        se = math.sqrt(p * (1 - p) / total)
        assert abs(density - p) < 3 * se

    def test_two_lattice_law_has_density_half(self):
        at_zero = 0
        n = 4000
        for r in range(n):
            cfg = sample_lattice_stationary(DiracLaw(2.0), 3, replica_rng(31, r))
            assert cfg.first_point in (0.0, -1.0)  # random parity
            at_zero += cfg.first_point == 0.0
        se = math.sqrt(0.25 / n)
        assert abs(at_zero / n - 0.5) < 3 * se


class TestExchangeable:
    def test_single_component_matches_left_bounded(self, rng):
        cfg = sample_exchangeable([(1.0, DiracLaw(3.0))], 5, rng)
        assert cfg.first_point == 0.0
        assert np.allclose(cfg.lengths, 3.0)

    def test_two_point_mixture(self):
        all_equal = True
        ones = 0
        n = 2000
        for r in range(n):
            cfg = sample_exchangeable([(0.5, DiracLaw(1.0)), (0.5, DiracLaw(2.0))],
                                      4, replica_rng(41, r))
            vals = set(cfg.lengths)
            all_equal &= len(vals) == 1
            ones += cfg.lengths[0] == 1.0
        assert all_equal
        assert abs(ones / n - 0.5) < 3 * math.sqrt(0.25 / n)

    def test_degenerate_weights(self, rng):
        cfg = sample_exchangeable([(1.0, DiracLaw(1.0)), (0.0, DiracLaw(9.0))], 6, rng)
        assert np.allclose(cfg.lengths, 1.0)

    def test_empty_mixture_rejected(self, rng):
        with pytest.raises(SamplingContractError):
            sample_exchangeable([], 3, rng)

    def test_output_is_exchangeable(self):
        # coordinates of (d1, d2, d3) keep their joint law under permutation
        trips = np.array([
            sample_exchangeable([(0.5, GeometricLaw(0.8)), (0.5, GeometricLaw(0.25))],
                                3, replica_rng(51, r)).lengths
            for r in range(5000)])
        stat = ks_two_sample(trips[:, 0], trips[:, 2])
        assert stat.p_value > 0.01
        # and the coordinates are correlated through the shared component,
        # unlike a plain renewal draw
        res = independence_test(trips[:, 0], trips[:, 1], bins=2)
        assert res.p_value < 1e-6


class TestSampleSpec:
    def test_contains_origin_marks_origin(self, rng):
        cfg, marked = sample_spec(ContainsOrigin(GeometricLaw(0.5)), 9, rng)
        assert cfg.boundary is Boundary.WINDOW
        assert cfg.points()[marked] == 0.0

    def test_periodic_variant(self, rng):
        cfg, marked = sample_spec(PeriodicRenewal(DiracLaw(1.0)), 11, rng)
        assert cfg.boundary is Boundary.PERIODIC
        assert marked == 0

    def test_left_bounded_variant(self, rng):
        cfg, marked = sample_spec(LeftBounded(DiracLaw(2.0)), 4, rng)
        assert cfg.first_point == 0.0 and marked == 0

    def test_mixture_spec_validation(self):
        with pytest.raises(SamplingContractError):
            ExchangeableMixture(((0.7, DiracLaw(1.0)), (0.7, DiracLaw(2.0))))


class TestConfigCsv:
    def test_round_trip(self, tmp_path, rng):
        cfg = sample_left_bounded(DiracLaw(0.5), ExponentialLaw(), 7, rng)
        path = tmp_path / "cfg.csv"
        cfg.to_csv(path)
        from hcplab.config import IntervalConfiguration
        back = IntervalConfiguration.from_csv(path)
        assert back.boundary == cfg.boundary
        assert back.first_point == cfg.first_point
        assert np.array_equal(back.lengths, cfg.lengths)
