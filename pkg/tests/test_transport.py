import math

import numpy as np
import pytest
from scipy.special import erfc

from hcplab.laws import GeometricLaw, ParetoHalfLaw
from hcplab.measures import (dirac, epoch_pushforward, exp_geometric_law,
                             from_pmf, iterate_hcp_measures)
from hcplab.transport import (C0Estimate, TransformPair, TransportRangeError,
                              c0_estimate, deconvolve_m, default_c0_grid,
                              reassemble_z_law, u1_from_m, u1_on_lattice,
                              un_transport)

EAST = lambda n: 2.0 ** (n - 1)


class TestDeconvolve:
    def test_support_below_two_is_identity(self):
        p = from_pmf([1.0, 1.5, 1.9], [0.4, 0.4, 0.2], l_max=10.0)
        m = deconvolve_m(p, 8.0)
        below = m.restricted(1.0, 2.0)
        assert np.allclose(below.positions, p.positions)
        assert np.allclose(below.masses, p.masses)

    def test_unit_law_gives_harmonic_masses(self):
        m = deconvolve_m(dirac(1.0, 16.0), 16.0)
        assert np.allclose(m.positions, np.arange(1, 16))
        assert np.allclose(m.masses, 1.0 / np.arange(1, 16))

    def test_unit_law_transform_inversion_oracle(self):
        # independent oracle for the series inversion: exp(-m_hat(s)) must
        # reproduce 1 - g(s), which for the unit law is 1 - e^{-s}
        m = deconvolve_m(dirac(1.0, 40.0), 40.0)
        for s in (0.8, 1.3, 2.1):
            assert math.exp(-m.transform(s)) == pytest.approx(-math.expm1(-s), rel=1e-10)

    def test_round_trip(self):
        z1 = epoch_pushforward(dirac(1.0, 48.0), 1.0, 2.0).rescaled(0.5)
        m = deconvolve_m(z1, 24.0)
        back = reassemble_z_law(m, 24.0)
        grid = np.arange(1.0, 23.5, 0.25)
        assert np.max(np.abs(back.cdf(grid) - z1.cdf(grid))) < 1e-10

    def test_rejects_support_below_one(self):
        from hcplab.measures import MeasureError
        with pytest.raises(MeasureError):
            deconvolve_m(from_pmf([0.5], [1.0], l_max=5.0), 5.0)


class TestStepFunctionAndTransport:
    def test_unit_mass_step(self):
        u = u1_from_m(dirac(1.0, 10.0))
        assert u(-0.5) == 0.0
        assert u(0.0) == 1.0
        assert u(3.7) == 1.0

    def test_jump_weighting(self):
        u = u1_from_m(from_pmf([2.0], [0.5], l_max=10.0))
        assert u(0.999) == 0.0
        assert u(1.0) == pytest.approx(1.0)  # weight y * mass = 2 * 0.5

    def test_total_variation_is_first_moment(self):
        m = from_pmf([1.0, 2.0, 3.5], [0.5, 0.25, 0.25], l_max=10.0)
        u = u1_from_m(m)
        assert u(10.0) == pytest.approx(float(m.positions @ m.masses))

    def test_linear_fixed_point(self):
        # a linear primitive is invariant under the epoch transport, up to
        # the staircase discretization bias O(step / d)
        from hcplab.transport import StepFunction
        step = 1.0 / 1024.0
        xs = np.arange(0.0, 150.0, step)
        u_lin = StepFunction(xs, 0.7 * (xs + step), domain_max=150.0)
        for d in (1.0, 2.0, 8.0, 64.0):
            val = un_transport(u_lin, d, 1.2)
            assert val == pytest.approx(0.7 * 1.2, abs=0.8 * step / d + 1e-12)

    def test_identity_at_unit_scale(self):
        m = deconvolve_m(dirac(1.0, 16.0), 16.0)
        u = u1_from_m(m)
        for x in (0.2, 1.7, 3.3):
            assert un_transport(u, 1.0, x) == pytest.approx(u(x))

    def test_out_of_range_names_required_extent(self):
        u = u1_from_m(dirac(1.0, 10.0))
        with pytest.raises(TransportRangeError, match="j_max"):
            un_transport(u, 8.0, 10.0)

    def test_two_route_agreement(self):
        mu1 = dirac(1.0, 64.0)
        u1 = u1_from_m(deconvolve_m(mu1, 64.0))
        laws, _ = iterate_hcp_measures(mu1, EAST, 4)
        for n in (2, 3, 4):
            d = EAST(n)
            direct = u1_from_m(deconvolve_m(laws[n - 1].rescaled(1.0 / d), 64.0 / d))
            for x in (0.05, 0.3, 0.7, 1.2, 2.6):
                assert abs(direct(x) - un_transport(u1, d, x)) < 1e-8


class TestLatticeRoute:
    def test_agrees_with_interval_recursion(self):
        p = epoch_pushforward(dirac(1.0, 32.0), 1.0, 2.0).rescaled(0.5)
        u_atomic = u1_from_m(deconvolve_m(p, 16.0))
        u_lattice = u1_on_lattice(p, 0.5, 16.0)
        for x in np.linspace(0.0, 14.0, 57):
            assert u_lattice(x) == pytest.approx(u_atomic(x), abs=1e-12)

    def test_oscillating_law_ratio_sequence(self):
        # geometric-exponent law: finite-mean parameter converges to 1, the
        # infinite-mean parameters keep oscillating
        horizon, x = 12, 10.0
        j_max = 2.0 ** (horizon - 1) * (1 + x) + 2
        ratios = {}
        for q in (0.1, 0.8):
            law = exp_geometric_law(1 - q, 12, l_max=float("inf"))
            u1 = u1_on_lattice(law, 1 / 16, j_max)
            ratios[q] = [un_transport(u1, 2.0 ** (n - 1), x) / x
                         for n in range(1, horizon + 1)]
        assert all(abs(v - 1) < 0.02 for v in ratios[0.1][-4:])
        window = ratios[0.8][-8:]
        assert max(window) - min(window) > 0.02


class TestC0Estimate:
    def test_unit_law(self):
        est = c0_estimate(dirac(1.0, 5.0), default_c0_grid())
        assert est.converged and abs(est.estimate - 1.0) < 1e-6

    def test_geometric_law(self):
        est = c0_estimate(GeometricLaw(0.3).atomic(256.0), default_c0_grid())
        assert est.converged and abs(est.estimate - 1.0) < 1e-3

    def test_pareto_half_tail(self):
        est = c0_estimate(ParetoHalfLaw(), default_c0_grid())
        assert est.converged
        assert abs(est.estimate - 0.5) < 0.02

    def test_pareto_matches_closed_form_ratio(self):
        # r(s) = (1/2) sqrt(pi s) erfc(sqrt(s)) / (1 - e^-s + sqrt(pi s) erfc(sqrt(s)))
        law = ParetoHalfLaw()
        s = 1e-4
        r = -s * law.transform_derivative(s)[0] / (1 - law.transform(s)[0])
        num = 0.5 * math.sqrt(math.pi * s) * erfc(math.sqrt(s))
        den = -math.expm1(-s) + math.sqrt(math.pi * s) * erfc(math.sqrt(s))
        assert r == pytest.approx(num / den, rel=1e-9)

    def test_oscillating_law_flagged(self):
        law = exp_geometric_law(1.0 - math.exp(-0.5), 120, l_max=float("inf"))
        est = c0_estimate(law, default_c0_grid())
        assert not est.converged

    def test_callable_pair_adapter(self):
        pair = TransformPair(lambda s: math.exp(-s), lambda s: -math.exp(-s))
        est = c0_estimate(pair, default_c0_grid())
        assert est.converged and abs(est.estimate - 1.0) < 1e-6

    def test_rejects_zero_in_grid(self):
        with pytest.raises(ValueError):
            c0_estimate(dirac(1.0, 5.0), np.array([0.1, 0.0]))

    def test_estimates_stay_in_unit_interval(self):
        for law in (dirac(1.0, 5.0), GeometricLaw(0.5).atomic(128.0),
                    exp_geometric_law(0.5, 60, l_max=1e40)):
            est = c0_estimate(law, default_c0_grid())
            assert 0.0 <= est.estimate <= 1.0
