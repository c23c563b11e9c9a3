"""QFI/CFI formula tests and optimal-quadrature search."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omfisher.errors import DerivativeUndefinedError, DomainError
from omfisher.fisher import (cfi_bhd, cfi_ideal, dsigma_dg, qfi_gaussian,
                             qfi_gaussian_long_form, sld_coefficients, theta_max)

pd_sigma = st.builds(
    lambda a, b, c: np.array([[0.55 + a, c * math.sqrt((0.55 + a) * (0.55 + b))],
                              [c * math.sqrt((0.55 + a) * (0.55 + b)), 0.55 + b]]),
    st.floats(min_value=0.0, max_value=4.0),
    st.floats(min_value=0.0, max_value=4.0),
    st.floats(min_value=-0.7, max_value=0.7),
)
sym_mat = st.builds(
    lambda a, b, c: np.array([[a, c], [c, b]]),
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
)


class TestQfi:
    def test_zero_derivative(self):
        assert qfi_gaussian(np.eye(2), np.zeros((2, 2))) == 0.0

    def test_thermal_algebraic_value(self):
        for nu, dnu in ((1.5, 1.0), (4.0, 0.3)):
            h = qfi_gaussian(nu * np.eye(2), dnu * np.eye(2))
            expected = (dnu / nu) ** 2 * (1.0 - 1.0 / (8.0 * nu * nu))
            assert h == pytest.approx(expected, rel=1e-13)

    @given(pd_sigma, sym_mat)
    @settings(max_examples=60, deadline=None)
    def test_long_form_identity(self, sigma, dsigma):
        short = qfi_gaussian(sigma, dsigma)
        long = qfi_gaussian_long_form(sigma, dsigma)
        assert abs(short - long) <= 1e-12 * max(abs(short), abs(long), 1e-30)

    @given(pd_sigma, sym_mat)
    @settings(max_examples=60, deadline=None)
    def test_non_negative_for_physical_states(self, sigma, dsigma):
        if np.linalg.det(sigma) < 0.25:
            return
        assert qfi_gaussian(sigma, dsigma) >= 0.0

    def test_sld_coefficients_consistency(self):
        sigma = np.array([[1.7, -0.2], [-0.2, 1.1]])
        dsigma = np.array([[0.3, 0.1], [0.1, -0.2]])
        co = sld_coefficients(sigma, dsigma)
        si = np.linalg.inv(sigma)
        assert np.allclose(co.phi, 0.5 * si @ dsigma @ si, rtol=1e-12)
        assert co.nu == pytest.approx(float(np.trace(co.phi @ sigma)), rel=1e-12)

    def test_singular_sigma_rejected(self):
        with pytest.raises(DomainError):
            qfi_gaussian(np.zeros((2, 2)), np.eye(2))


class TestCfi:
    def test_zero_derivative(self):
        assert cfi_bhd(np.eye(2), np.zeros((2, 2)), 0.3, 0.9) == 0.0

    def test_isotropic_theta_independence(self):
        s, d, eta = 1.3, 0.4, 0.7
        vals = [cfi_bhd(s * np.eye(2), d * np.eye(2), t, eta)
                for t in np.linspace(0, math.pi, 7)]
        expected = 2.0 * (eta * d / (1.0 - eta + 2.0 * eta * s)) ** 2
        assert np.allclose(vals, expected, rtol=1e-13)

    @given(pd_sigma, sym_mat, st.floats(min_value=0.0, max_value=math.pi))
    @settings(max_examples=50, deadline=None)
    def test_ideal_is_twice_bhd_limit(self, sigma, dsigma, theta):
        lhs = cfi_ideal(sigma, dsigma, theta)
        rhs = 2.0 * cfi_bhd(sigma, dsigma, theta, 1.0)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)

    @given(pd_sigma, sym_mat, st.floats(min_value=0.0, max_value=math.pi))
    @settings(max_examples=50, deadline=None)
    def test_pi_periodicity(self, sigma, dsigma, theta):
        a = cfi_bhd(sigma, dsigma, theta, 0.8)
        b = cfi_bhd(sigma, dsigma, theta + math.pi, 0.8)
        scale = max(abs(float(np.max(np.abs(dsigma)))), 1e-30) ** 2
        assert abs(a - b) <= 1e-10 * max(a, b, scale)

    def test_monotone_in_eta(self):
        sigma = np.array([[1.72, -0.06], [-0.06, 1.51]])
        dsigma = np.array([[5.6e-4, -1.4e-4], [-1.4e-4, 3.5e-5]])
        for theta in (0.0, 0.8, 2.2):
            vals = [cfi_bhd(sigma, dsigma, theta, e)
                    for e in np.linspace(0.05, 1.0, 30)]
            assert all(a <= b * (1 + 1e-12) for a, b in zip(vals, vals[1:]))

    def test_eta_domain(self):
        with pytest.raises(DomainError):
            cfi_bhd(np.eye(2), np.eye(2), 0.0, 0.0)
        with pytest.raises(DomainError):
            cfi_bhd(np.eye(2), np.eye(2), 0.0, 1.5)


class TestThetaMax:
    def test_diagonal_dominant(self):
        res = theta_max(np.diag([1.0, 2.0]), np.diag([1.5, 0.3]))
        assert res.theta == pytest.approx(0.0, abs=1e-12)
        assert res.lambda_max == pytest.approx(1.5, rel=1e-12)

    def test_rotated_eigenvector(self):
        d = np.array([[1.0, 1.0], [1.0, 1.0]])  # eigenvector at 45 deg
        res = theta_max(0.5 * np.eye(2), d)
        assert res.theta == pytest.approx(math.pi / 4.0, abs=1e-12)

    def test_negative_branch_selected_by_magnitude(self):
        """dsigma indefinite: the largest |f(theta)| wins because CFI ~ f^2."""
        sigma = np.diag([1.0, 1.0])
        dsigma = np.diag([-3.0, 1.0])
        res = theta_max(sigma, dsigma)
        assert res.lambda_max == pytest.approx(-3.0, rel=1e-12)
        assert res.theta == pytest.approx(0.0, abs=1e-12)

    @given(pd_sigma, sym_mat)
    @settings(max_examples=30, deadline=None)
    def test_eigen_route_matches_grid_maximizer(self, sigma, dsigma):
        if np.linalg.norm(dsigma) < 1e-6:
            return
        res = theta_max(sigma, dsigma, eta=1.0)
        if res.degenerate:
            return
        grid = np.linspace(0.0, math.pi, 3600, endpoint=False)
        vals = [cfi_bhd(sigma, dsigma, t, 1.0) for t in grid]
        best = grid[int(np.argmax(vals))]
        target = cfi_bhd(sigma, dsigma, res.theta, 1.0)
        assert target >= max(vals) * (1.0 - 1e-9)
        # the angle itself is only well-determined away from |lambda| ties
        evals = np.linalg.eigvals(np.linalg.solve(sigma, dsigma))
        spread = abs(abs(evals[0]) - abs(evals[1]))
        if spread > 1e-3 * max(np.abs(evals)):
            assert min(abs(res.theta - best), math.pi - abs(res.theta - best)) < 2e-3

    def test_eigen_theta_matches_refined_maximizer_to_1e6_rad(self):
        """Non-degenerate cases: eigen route equals the grid + golden-section
        maximizer of the eta=1 CFI to 1e-6 rad (mod pi)."""
        cases = [
            (np.array([[1.72, -0.06], [-0.06, 1.51]]),
             np.array([[5.6e-4, -1.4e-4], [-1.4e-4, 3.5e-5]])),
            (np.array([[2.3, 0.4], [0.4, 0.9]]),
             np.array([[0.2, -0.5], [-0.5, -0.1]])),
            (np.array([[0.8, 0.1], [0.1, 1.9]]),
             np.array([[-0.4, 0.2], [0.2, 0.3]])),
        ]
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        for sigma, dsigma in cases:
            res = theta_max(sigma, dsigma, eta=1.0)
            grid = np.linspace(0.0, math.pi, 7200, endpoint=False)
            vals = [cfi_bhd(sigma, dsigma, t, 1.0) for t in grid]
            lo = grid[int(np.argmax(vals))] - math.pi / 7200.0
            hi = grid[int(np.argmax(vals))] + math.pi / 7200.0
            while hi - lo > 1e-12:
                x1 = hi - invphi * (hi - lo)
                x2 = lo + invphi * (hi - lo)
                if cfi_bhd(sigma, dsigma, x1, 1.0) < cfi_bhd(sigma, dsigma, x2, 1.0):
                    lo = x1
                else:
                    hi = x2
            best = 0.5 * (lo + hi) % math.pi
            delta = abs(res.theta - best)
            assert min(delta, math.pi - delta) < 1e-6

    def test_golden_section_for_imperfect_detector(self):
        sigma = np.array([[1.72, -0.06], [-0.06, 1.51]])
        dsigma = np.array([[5.6e-4, -1.4e-4], [-1.4e-4, 3.5e-5]])
        res = theta_max(sigma, dsigma, eta=0.8)
        grid = np.linspace(0.0, math.pi, 100000, endpoint=False)
        vals = [cfi_bhd(sigma, dsigma, t, 0.8) for t in grid]
        assert cfi_bhd(sigma, dsigma, res.theta, 0.8) >= max(vals) * (1 - 1e-10)

    def test_degenerate_flag(self):
        res = theta_max(np.eye(2), np.eye(2))
        assert res.degenerate


class TestDsigmaDg:
    def test_constant_pipeline(self):
        d = dsigma_dg(lambda g: np.eye(2), 1.0)
        assert np.array_equal(d, np.zeros((2, 2)))

    def test_linear_pipeline_exact(self):
        s = np.array([[0.4, -0.1], [-0.1, 0.9]])
        d = dsigma_dg(lambda g: np.eye(2) + g * s, 2.0)
        assert np.allclose(d, s, rtol=1e-9)

    def test_richardson_beats_plain_central(self):
        f = lambda g: np.array([[math.exp(g)]])
        d = dsigma_dg(f, 0.5, h=1e-3)
        assert d[0, 0] == pytest.approx(math.exp(0.5), rel=1e-11)

    def test_branch_boundary_raises(self):
        from omfisher.errors import AmbiguousBranchError

        def pipeline(g):
            raise AmbiguousBranchError("window")

        with pytest.raises(DerivativeUndefinedError):
            dsigma_dg(pipeline, 1.0)

    def test_unknown_method(self):
        with pytest.raises(DomainError):
            dsigma_dg(lambda g: np.eye(2), 1.0, method="spectral")
