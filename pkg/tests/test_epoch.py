import math

import numpy as np
import pytest

from hcplab.config import Boundary, IntervalConfiguration
from hcplab.epoch import (CoreRegionEmptyError, StateSpaceError, _kernel_py,
                          epoch_observables, run_epoch)
from hcplab.measures import dirac, epoch_pushforward
from hcplab.rates import (constant_rates, east_rates, linear_rates,
                          paste_all_rates, validate_rates, west_rates)
from hcplab.sampling import replica_rng
from hcplab.stats import ks_test_discrete, ks_two_sample


class TestValidateRates:
    def test_valid_family(self):
        assert validate_rates(constant_rates(1.0, 2.0, 1.0, 1.0)).ok

    def test_a2_violation(self):
        report = validate_rates(constant_rates(1.0, 3.0, 1.0, 1.0))
        assert not report.ok
        assert any("(A2)" in v for v in report.violations)

    def test_a1_violation_zero_rate_inside(self):
        from hcplab.rates import RateFamily
        dead = RateFamily(1.0, 2.0, lambda d: np.zeros_like(np.asarray(d, float)),
                          lambda d: np.zeros_like(np.asarray(d, float)), 1.0)
        report = validate_rates(dead)
        assert not report.ok
        assert any("(A1)" in v for v in report.violations)

    def test_a1_violation_active_beyond_range(self):
        from hcplab.rates import RateFamily
        leaky = RateFamily(1.0, 2.0,
                           lambda d: np.ones_like(np.asarray(d, float)),
                           lambda d: np.ones_like(np.asarray(d, float)), 1.0)
        report = validate_rates(leaky)
        assert not report.ok


class TestRunEpoch:
    def test_blocked_configuration_is_frozen(self, rng):
        cfg = IntervalConfiguration(0.0, np.array([5.0, 5.0, 5.0]), Boundary.LEFT_BOUNDED)
        res = run_epoch(cfg, east_rates(1.0, 2.0), rng)
        assert res.log.n_merges == 0
        assert np.array_equal(res.final.lengths, cfg.lengths)

    def test_single_active_merges_once(self, rng):
        cfg = IntervalConfiguration(0.0, np.array([5.0, 1.5, 5.0]), Boundary.LEFT_BOUNDED)
        res = run_epoch(cfg, paste_all_rates(1.0, 2.0), rng)
        assert res.log.n_merges == 1
        assert res.final.n_intervals == 2

    def test_two_interval_race_probabilities(self):
        # east rates on (1,1): both domains ring erase-left; the order decides
        # whether the first point survives, each order with probability 1/2
        kept = 0
        trials = 30_000
        for r in range(trials):
            cfg = IntervalConfiguration(0.0, np.array([1.0, 1.0]), Boundary.LEFT_BOUNDED)
            res = run_epoch(cfg, east_rates(1.0, 2.0), replica_rng(17, r), validate=False)
            pts = res.surviving_points
            if pts.size == 2:
                assert np.array_equal(pts, [0.0, 2.0])
                kept += 1
            else:
                assert np.array_equal(pts, [2.0])
        assert abs(kept / trials - 0.5) < 3 * math.sqrt(0.25 / trials)

    def test_periodic_final_pmf(self):
        cfg = IntervalConfiguration(0.0, np.ones(30_000), Boundary.PERIODIC)
        res = run_epoch(cfg, constant_rates(1.0, 2.0, 0.5, 0.5), replica_rng(23))
        oracle = epoch_pushforward(dirac(1.0, 64.0), 1.0, 2.0)
        ks = ks_test_discrete(res.final.lengths, oracle, n_bootstrap=100, seed=3)
        assert ks.p_value > 0.01

    def test_state_space_rejection(self, rng):
        cfg = IntervalConfiguration(0.0, np.array([0.5, 1.5]), Boundary.LEFT_BOUNDED)
        with pytest.raises(StateSpaceError):
            run_epoch(cfg, east_rates(1.0, 2.0), rng)

    def test_point_set_shrinks_and_log_is_ordered(self, rng):
        cfg = IntervalConfiguration(0.0, np.ones(500), Boundary.LEFT_BOUNDED)
        res = run_epoch(cfg, paste_all_rates(1.0, 2.0), rng)
        initial_points = set(cfg.points())
        assert set(res.surviving_points) <= initial_points
        assert set(res.log.positions) <= initial_points
        assert np.all(np.diff(res.log.times) >= 0)
        assert res.clock == (res.log.times[-1] if res.log.n_merges else 0.0)

    def test_final_lengths_reach_d_max(self, rng):
        cfg = IntervalConfiguration(0.0, 1.0 + rng.random(2000) * 0.9,
                                    Boundary.WINDOW)
        res = run_epoch(cfg, linear_rates(1.0, 2.0, 0.5, 1.0), rng)
        assert res.final.lengths.min() >= 2.0 * (1 - 1e-9)

    def test_length_conservation(self, rng):
        lengths = 1.0 + rng.random(1000)
        cfg = IntervalConfiguration(0.0, lengths.copy(), Boundary.PERIODIC)
        res = run_epoch(cfg, constant_rates(1.0, 2.0, 1.0, 1.0), rng)
        assert res.final.lengths.sum() == pytest.approx(lengths.sum(), rel=1e-12)

    def test_first_point_immobile_without_right_rate(self):
        for r in range(300):
            cfg = IntervalConfiguration(0.0, np.ones(40), Boundary.LEFT_BOUNDED)
            res = run_epoch(cfg, west_rates(1.0, 2.0), replica_rng(29, r), validate=False)
            assert res.final.first_point == 0.0

    def test_rate_scaling_only_changes_clock(self):
        cfg = IntervalConfiguration(0.0, np.ones(5000), Boundary.PERIODIC)
        res_a = run_epoch(cfg, constant_rates(1.0, 2.0, 0.4, 0.6), replica_rng(37))
        res_b = run_epoch(cfg, constant_rates(1.0, 2.0, 2.0, 3.0), replica_rng(37))
        assert np.array_equal(res_a.final.lengths, res_b.final.lengths)
        assert res_a.clock == pytest.approx(5.0 * res_b.clock, rel=1e-12)
        # and across seeds the law itself is unchanged
        res_c = run_epoch(cfg, constant_rates(1.0, 2.0, 2.0, 3.0), replica_rng(38))
        assert ks_two_sample(res_a.final.lengths, res_c.final.lengths).p_value > 0.01

    def test_kernel_implementations_agree(self):
        from hcplab import epoch as epoch_mod
        if not epoch_mod._USE_NUMBA:
            pytest.skip("numba not active")
        rng = replica_rng(91)
        n = 400
        order = rng.permutation(n - 1).astype(np.int64)
        erase_left = rng.random(n - 1) < 0.5
        times = np.sort(rng.random(n - 1))
        pts = np.cumsum(rng.random(n))
        args = lambda: (order, erase_left.copy(), np.ones(n, dtype=np.bool_), pts,
                        False, n, times, np.empty(n - 1), np.empty(n - 1),
                        np.empty(n - 1, dtype=np.int64))
        a_alive = args()
        n_log_a, t_a = _kernel_py(*a_alive)
        b_alive = args()
        n_log_b, t_b = epoch_mod._kernel_nb(*b_alive)
        assert n_log_a == n_log_b and t_a == t_b
        assert np.array_equal(a_alive[2], b_alive[2])

    def test_merge_log_csv(self, tmp_path, rng):
        cfg = IntervalConfiguration(0.0, np.ones(50), Boundary.PERIODIC)
        res = run_epoch(cfg, east_rates(1.0, 2.0), rng)
        path = tmp_path / "log.csv"
        res.log.to_csv(path)
        rows = path.read_text().strip().splitlines()
        assert rows[0] == "time,position,direction"
        assert len(rows) == res.log.n_merges + 1


class TestEpochObservables:
    def test_identity_epoch(self, rng):
        cfg = IntervalConfiguration(0.0, np.array([5.0, 6.0]), Boundary.LEFT_BOUNDED)
        res = run_epoch(cfg, east_rates(1.0, 2.0), rng)
        obs = epoch_observables(cfg, res.final)
        assert obs.first_point_displacement == 0.0
        assert obs.origin_survived is True

    def test_race_survival_frequency(self):
        survived = 0
        trials = 20_000
        for r in range(trials):
            cfg = IntervalConfiguration(0.0, np.array([1.0, 1.0]), Boundary.LEFT_BOUNDED)
            res = run_epoch(cfg, east_rates(1.0, 2.0), replica_rng(43, r), validate=False)
            survived += epoch_observables(cfg, res.final).origin_survived
        assert abs(survived / trials - 0.5) < 3 * math.sqrt(0.25 / trials)

    def test_buffer_swallowing_window_errors(self, rng):
        cfg = IntervalConfiguration(0.0, np.array([5.0, 6.0]), Boundary.WINDOW)
        res = run_epoch(cfg, east_rates(1.0, 2.0), rng)
        with pytest.raises(CoreRegionEmptyError):
            epoch_observables(cfg, res.final, buffer_length=100.0)
