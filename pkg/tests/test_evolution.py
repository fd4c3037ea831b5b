import numpy as np
import pytest

from quditphase import evolution, matcore, qstate, sud
from quditphase.errors import (
    BadAngleRange,
    DimensionMismatch,
    GridTooCoarse,
    InadmissibleConcurrence,
    NonCyclicZeta,
    NotUnitary,
    OpenPath,
    OrthogonalState,
)

TWO_PI = 2 * np.pi


def maxent(d):
    return qstate.make_state(d, "max_entangled")


class TestPathConstruction:
    def test_grid_contract(self):
        with pytest.raises(GridTooCoarse):
            evolution.vn_path(3, n=100)
        with pytest.raises(GridTooCoarse):
            evolution.vn_path(3, n=99)

    @pytest.mark.parametrize(
        "path",
        [
            evolution.vn_path(3, n=101),
            evolution.qutrit_piecewise_path(n=101),
            evolution.qubit_euler_path(0.3, 0.2, TWO_PI, n=101),
            evolution.random_su_path(3, np.random.default_rng(5), n=101),
        ],
    )
    def test_samples_are_special_unitary(self, path):
        gram = np.einsum("nki,nkj->nij", path.ua.conj(), path.ua) - np.eye(path.dim)
        assert np.sqrt(np.einsum("nij,nij->n", gram, gram.conj()).real).max() <= 1e-10
        assert np.abs(np.linalg.det(path.ua) - 1.0).max() <= 1e-9

    def test_identity_start(self):
        assert evolution.vn_path(4, n=101).starts_at_identity
        assert evolution.qubit_euler_path(0.0, 0.0, TWO_PI, n=101).starts_at_identity
        assert not evolution.qubit_euler_path(0.5, 0.0, TWO_PI, n=101).starts_at_identity

    def test_angle_domains(self):
        with pytest.raises(BadAngleRange):
            evolution.qubit_euler_path(np.pi, 0.0, TWO_PI, n=101)
        with pytest.raises(BadAngleRange):
            evolution.qubit_euler_path(0.1, 0.0, lambda t: 1.0 + t, n=101)  # chi(0) != 0

    def test_qubit_vn_equals_euler_v3(self):
        vn = evolution.vn_path(2, chi=TWO_PI, n=101)
        euler = evolution.qubit_euler_path(0.0, 0.0, TWO_PI, n=101)
        assert np.abs(vn.ua - euler.ua).max() <= 1e-12

    def test_zeta_warning(self):
        with pytest.warns(NonCyclicZeta):
            evolution.qutrit_piecewise_path(zeta=np.pi / 3, n=101)
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("error")
            evolution.qutrit_piecewise_path(zeta=TWO_PI, n=101)
            evolution.qutrit_piecewise_path(zeta=TWO_PI + 3 * np.pi, n=101)


class TestEvolve:
    def test_start_is_initial_state(self, rng):
        psi = qstate.random_state(3, rng)
        path = evolution.random_su_path(3, rng, n=101)
        assert matcore.frobenius(evolution.evolve(psi, path, 0).alpha - psi.alpha) <= 1e-12

    def test_vn_cycle_is_global_phase(self, rng):
        psi = qstate.random_state(3, rng)
        path = evolution.vn_path(3, chi=TWO_PI, n=101)
        evolved = evolution.evolve(psi, path, 100)
        assert matcore.frobenius(evolved.alpha - np.exp(2j * np.pi / 3) * psi.alpha) <= 1e-12

    def test_concurrence_preserved(self, rng):
        psi = qstate.random_state(3, rng)
        path = evolution.random_su_path(3, rng, n=101)
        before = qstate.concurrence(psi)
        for k in (13, 57, 100):
            assert abs(qstate.concurrence(evolution.evolve(psi, path, k)) - before) <= 1e-10

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            evolution.evolve(qstate.random_state(2, rng), evolution.vn_path(3, n=101), 5)


class TestTotalPhase:
    def test_constant_path(self, rng):
        psi = qstate.random_state(3, rng)
        assert abs(evolution.total_phase(psi, evolution.identity_path(3), 100)) <= 1e-12

    @pytest.mark.parametrize("d", (2, 3, 5))
    def test_vn_cycle_fraction(self, rng, d):
        psi = qstate.random_state(d, rng, min_det=1e-6)
        path = evolution.vn_path(d, chi=TWO_PI, n=101)
        assert abs(evolution.total_phase(psi, path, 100) - TWO_PI / d) <= 1e-10

    def test_qubit_maxent_half_turn(self):
        path = evolution.qubit_euler_path(0.0, 0.0, TWO_PI, n=2001)
        assert abs(evolution.total_phase(maxent(2), path, 2000) - np.pi) <= 1e-10

    def test_orthogonal_sample_raises(self):
        path = evolution.qubit_euler_path(0.0, 0.0, TWO_PI, n=2001)
        with pytest.raises(OrthogonalState):
            evolution.total_phase(maxent(2), path, 1000)  # chi = pi


class TestDynamicalPhase:
    def test_maxent_vanishes_for_any_local_path(self, rng):
        for d in (2, 3):
            psi = qstate.apply_local(
                maxent(d), matcore.haar_special_unitary(d, rng), np.eye(d)
            )
            path = evolution.random_su_path(d, rng, n=501)
            trace = evolution.compute_phase_trace(psi, path)
            assert np.abs(trace.phi_dyn).max() <= 1e-9

    def test_qubit_linear_rate(self):
        c = 0.6
        psi = qstate.make_state(2, "concurrence_target", target=c)
        path = evolution.vn_path(2, chi=TWO_PI, n=2001)
        trace = evolution.compute_phase_trace(psi, path)
        expected = np.sqrt(1 - c * c) * trace.chi / 2.0
        assert np.abs(trace.phi_dyn - expected).max() <= 1e-9

    def test_qutrit_aligned_rate(self):
        c = 1.05
        psi = qstate.vn_aligned_state(3, c)
        path = evolution.vn_path(3, chi=TWO_PI, n=2001)
        trace = evolution.compute_phase_trace(psi, path)
        c_max = qstate.max_concurrence(3)
        expected = 0.5 * c_max * np.sqrt(c_max**2 - c * c) * trace.chi
        assert np.abs(trace.phi_dyn - expected).max() <= 1e-9

    def test_quadrature_convergence(self):
        psi = qstate.vn_aligned_state(3, 1.05)
        coarse = evolution.compute_phase_trace(psi, evolution.vn_path(3, n=2001))
        fine = evolution.compute_phase_trace(psi, evolution.vn_path(3, n=4001))
        assert abs(coarse.phi_dyn[-1] - fine.phi_dyn[-1]) <= 1e-8
        c = 0.6
        psi2 = qstate.make_state(2, "concurrence_target", target=c)
        coarse2 = evolution.compute_phase_trace(
            psi2, evolution.qubit_euler_path(0.4, 0.0, TWO_PI, n=2001)
        )
        fine2 = evolution.compute_phase_trace(
            psi2, evolution.qubit_euler_path(0.4, 0.0, TWO_PI, n=4001)
        )
        assert abs(coarse2.phi_dyn[-1] - fine2.phi_dyn[-1]) <= 1e-8


class TestDynTermIntegrand:
    def test_maxent_pointwise_zero(self, rng):
        path = evolution.random_su_path(3, rng, n=501)
        for k in (0, 100, 250, 500):
            assert abs(evolution.dyn_term_integrand(maxent(3), path, k)) <= 1e-12

    def test_product_state_qubit_rate(self):
        psi = qstate.make_state(2, "product")
        path = evolution.vn_path(2, chi=TWO_PI, tau=1.0, n=101)
        # generator expectation is chi_dot / 2 for the (1, 0) Schmidt state
        assert abs(evolution.dyn_term_integrand(psi, path, 50) - np.pi) <= 1e-12

    def test_constant_path(self, rng):
        psi = qstate.random_state(3, rng)
        assert abs(evolution.dyn_term_integrand(psi, evolution.identity_path(3), 42)) <= 1e-15


class TestGeometricPhase:
    def test_product_state_loop_half_solid_angle(self):
        theta0 = np.pi / 3
        psi = qstate.make_state(2, "product")
        omega = 2 * np.pi * (1 - np.cos(theta0))
        loop = evolution.qubit_euler_path(theta0, lambda t: TWO_PI * t, 0.0, n=2001)
        value = evolution.geometric_phase(psi, loop, 2000)
        # increasing-azimuth circuit: the phase is minus half the enclosed cap
        assert abs(value + omega / 2) <= 1e-6
        reverse = evolution.qubit_euler_path(theta0, lambda t: TWO_PI * (1 - t), 0.0, n=2001)
        assert abs(evolution.geometric_phase(psi, reverse, 2000) - omega / 2) <= 1e-6

    def test_loop_matches_frame_functional(self):
        theta0, c = 1.1, 0.35
        psi = qstate.make_state(2, "concurrence_target", target=c)
        loop = evolution.qubit_euler_path(theta0, lambda t: TWO_PI * t, 0.0, n=2001)
        phi_fun = evolution.solid_angle(theta0, lambda t: TWO_PI * t, n=2001)
        x = np.sqrt(1 - c * c)
        assert abs(evolution.geometric_phase(psi, loop, 2000) + 0.5 * x * phi_fun) <= 1e-6

    def test_maxent_qubit_step(self):
        path = evolution.qubit_euler_path(0.0, 0.0, TWO_PI, n=2001)
        trace = evolution.compute_phase_trace(maxent(2), path)
        assert np.abs(trace.phi_g_unwrapped[:1000]).max() <= 1e-10
        assert np.abs(trace.phi_g_unwrapped[1001:] - np.pi).max() <= 1e-10

    def test_qutrit_maxent_fraction(self):
        path = evolution.vn_path(3, chi=TWO_PI, n=2001)
        assert abs(evolution.geometric_phase(maxent(3), path, 2000) - TWO_PI / 3) <= 1e-9

    def test_gauge_invariance(self, rng):
        for d in (2, 3):
            psi = qstate.random_state(d, rng)
            path = evolution.random_su_path(d, rng, n=501)
            bare = evolution.compute_phase_trace(psi, path)
            gauged_path = evolution.with_u1_phases(
                path,
                phi_a=lambda t: 0.8 * np.sin(2.2 * t) + 0.3 * t,
                phi_b=lambda t: -0.5 * np.sin(1.3 * t),
            )
            gauged = evolution.compute_phase_trace(psi, gauged_path)
            mask = ~bare.orthogonal
            assert np.abs(gauged.phi_g_unwrapped[mask] - bare.phi_g_unwrapped[mask]).max() <= 1e-9
            assert np.abs(gauged.phi_tot[mask] - bare.phi_tot[mask]).max() > 1e-3
            assert np.abs(gauged.phi_dyn - bare.phi_dyn).max() > 1e-3

    def test_reparametrization_invariance(self):
        psi = qstate.vn_aligned_state(3, 1.05)
        linear = evolution.vn_path(3, chi=TWO_PI, n=2001)
        quadratic = evolution.vn_path(
            3, chi=(lambda t: TWO_PI * t * t, lambda t: 2 * TWO_PI * t), n=2001
        )
        a = evolution.geometric_phase(psi, linear, 2000)
        b = evolution.geometric_phase(psi, quadratic, 2000)
        assert abs(a - b) <= 1e-6

    def test_pancharatnam_estimator_agrees(self):
        c = 0.6
        psi = qstate.make_state(2, "concurrence_target", target=c)
        path = evolution.qubit_euler_path(np.pi / 4, 0.0, TWO_PI, n=4001)
        trace = evolution.compute_phase_trace(psi, path)
        for k in (1000, 2500, 4000):
            est = evolution.pancharatnam_phase(psi, path, k)
            assert abs(evolution.principal_angle(est - trace.phi_g_unwrapped[k])) <= 1e-6
        psi3 = qstate.vn_aligned_state(3, 1.05)
        path3 = evolution.vn_path(3, chi=TWO_PI, n=4001)
        trace3 = evolution.compute_phase_trace(psi3, path3)
        est3 = evolution.pancharatnam_phase(psi3, path3, 4000)
        assert abs(evolution.principal_angle(est3 - trace3.phi_g_unwrapped[4000])) <= 1e-6


class TestPhaseTraceInvariants:
    def test_difference_convention(self, rng):
        psi = qstate.random_state(3, rng)
        path = evolution.random_su_path(3, rng, n=501)
        trace = evolution.compute_phase_trace(psi, path)
        mask = ~trace.orthogonal
        gap = trace.phi_g[mask] - (trace.phi_tot[mask] - trace.phi_dyn[mask])
        assert np.abs(evolution.principal_angle(gap)).max() <= 1e-8

    def test_concurrence_column_constant(self, rng):
        psi = qstate.random_state(4, rng)
        path = evolution.random_su_path(4, rng, n=501)
        trace = evolution.compute_phase_trace(psi, path)
        assert np.abs(trace.concurrence - qstate.concurrence(psi)).max() <= 1e-10


class TestQubitClosedForms:
    def test_product_state_circle(self):
        vals = evolution.qubit_overlap_closed_form(0.0, 0.0, np.linspace(0, TWO_PI, 7), phi_a=0.4)
        assert np.abs(np.abs(vals) - 1.0).max() <= 1e-14
        assert abs(vals[3] - np.exp(1j * (0.4 + np.pi / 2))) <= 1e-12

    def test_maxent_real_segment(self):
        vals = evolution.qubit_overlap_closed_form(1.0, np.pi / 5, np.linspace(0, TWO_PI, 9))
        assert np.abs(vals.imag).max() <= 1e-14

    def test_matches_pipeline_pointwise(self):
        c, theta = 0.6, np.pi / 3
        psi = qstate.make_state(2, "concurrence_target", target=c)
        path = evolution.qubit_euler_path(theta, 0.8, TWO_PI, n=2001)
        trace = evolution.compute_phase_trace(psi, path)
        closed = evolution.qubit_overlap_closed_form(c, theta, trace.chi)
        assert np.abs(trace.overlap - closed).max() <= 1e-10

    def test_geometric_phase_values(self):
        # frame term passes straight through at C = 0
        assert abs(evolution.qubit_geometric_phase_closed_form(0.0, 0.0, frame_term=1.7) - 0.85) <= 1e-14
        # maximally entangled sweep ends at pi
        assert abs(evolution.qubit_geometric_phase_closed_form(1.0, TWO_PI) - np.pi) <= 1e-12
        expected = np.arctan(0.8) - 0.2 * np.pi
        assert abs(evolution.qubit_geometric_phase_closed_form(0.6, np.pi / 2) - expected) <= 1e-14

    def test_geometric_phase_matches_quadrature(self):
        c, theta = 0.6, np.pi / 4
        psi = qstate.make_state(2, "concurrence_target", target=c)
        path = evolution.qubit_euler_path(theta, 0.0, TWO_PI, n=4001)
        trace = evolution.compute_phase_trace(psi, path)
        closed = evolution.qubit_geometric_phase_closed_form(c, trace.chi)
        mask = ~trace.orthogonal
        assert np.abs(trace.phi_g_unwrapped[mask] - closed[mask]).max() <= 1e-6

    def test_tracked_arctan_step(self):
        chi = np.array([0.0, np.pi - 1e-9, np.pi + 1e-9, TWO_PI])
        vals = evolution.tracked_two_frequency_arg(0.0, chi)
        assert np.abs(vals - np.array([0.0, 0.0, np.pi, np.pi])).max() <= 1e-12


class TestVnClosedForms:
    def test_maxent_weights(self):
        a, b = evolution.vn_coefficients(3, qstate.max_concurrence(3))
        assert abs(a - 2 / 3) <= 1e-12 and abs(b - 1 / 3) <= 1e-12

    def test_unit_at_zero(self):
        assert abs(evolution.vn_overlap_closed_form(5, 1.25, 0.0) - 1.0) <= 1e-12

    def test_qutrit_maxent_midpoint(self):
        val = evolution.vn_overlap_closed_form(3, qstate.max_concurrence(3), np.pi)
        assert abs(val - np.exp(1j * np.pi / 3) / 3.0) <= 1e-12

    @pytest.mark.parametrize("d", (3, 4, 5, 6))
    def test_cycle_endpoint_and_minimum(self, d):
        lo, hi = qstate.vn_admissible_range(d)
        for c in np.linspace(lo + 1e-6, hi, 4):
            end = evolution.vn_overlap_closed_form(d, c, TWO_PI)
            assert abs(end - np.exp(2j * np.pi / d)) <= 1e-12
            a, b = evolution.vn_coefficients(d, c)
            chi = np.linspace(0, TWO_PI, 4001)
            mags = np.abs(evolution.vn_overlap_closed_form(d, c, chi))
            assert abs(mags.min() - abs(a - b)) <= 1e-9

    def test_matches_pipeline(self):
        c = 1.1
        psi = qstate.vn_aligned_state(3, c)
        path = evolution.vn_path(3, chi=TWO_PI, n=2001)
        trace = evolution.compute_phase_trace(psi, path)
        closed = evolution.vn_overlap_closed_form(3, c, trace.chi)
        assert np.abs(trace.overlap - closed).max() <= 1e-10

    def test_inadmissible(self):
        with pytest.raises(InadmissibleConcurrence):
            evolution.vn_overlap_closed_form(3, 0.4, 1.0)


class TestQutritPiecewise:
    def test_branch_formula_against_direct_sum(self, rng):
        # oracle: (1/3) sum_alpha e^(i phi_alpha) with the printed phases
        for chi in rng.uniform(0, TWO_PI, size=32):
            p1 = 2 * chi / 3 + (2 * (np.pi - TWO_PI) / 3) * (1.0 if chi > np.pi else 0.0)
            p2 = -2 * chi / 3
            p3 = -(p1 + p2)
            direct = (np.exp(1j * p1) + np.exp(1j * p2) + np.exp(1j * p3)) / 3.0
            assert abs(evolution.qutrit_piecewise_overlap_maxent(chi) - direct) <= 1e-12

    def test_orthogonal_at_pi(self):
        assert abs(evolution.qutrit_piecewise_overlap_maxent(np.pi)) <= 1e-12

    def test_endpoint_unitary(self):
        path = evolution.qutrit_piecewise_path(n=2001)
        target = np.exp(2j * np.pi / 3) * np.eye(3)
        assert matcore.frobenius(path.ua[-1] - target) <= 1e-12

    def test_pipeline_matches_formula(self):
        path = evolution.qutrit_piecewise_path(n=2001)
        trace = evolution.compute_phase_trace(maxent(3), path)
        closed = evolution.qutrit_piecewise_overlap_maxent(trace.chi)
        assert np.abs(trace.overlap - closed).max() <= 1e-9

    def test_two_cycle_phases(self):
        path = evolution.qutrit_piecewise_path(chi=2 * TWO_PI, n=4001)
        trace = evolution.compute_phase_trace(maxent(3), path)
        assert abs(trace.phi_g_unwrapped[-1] - 2 * TWO_PI / 3) <= 1e-9


class TestSolidAngle:
    @pytest.mark.parametrize("theta0", (np.pi / 6, np.pi / 3, np.pi / 2))
    def test_spherical_caps(self, theta0):
        value = evolution.solid_angle(theta0, lambda t: TWO_PI * t, n=2001)
        assert abs(value - TWO_PI * (1 - np.cos(theta0))) <= 1e-6

    def test_point_path(self):
        assert abs(evolution.solid_angle(0.7, 0.3, n=101)) <= 1e-12

    def test_open_path_rejected(self):
        with pytest.raises(OpenPath):
            evolution.solid_angle(0.5, lambda t: np.pi * t, n=101)


class TestTraceSerialization:
    def test_header_and_round_trip(self, rng, tmp_path):
        psi = qstate.make_state(2, "concurrence_target", target=0.6)
        path = evolution.qubit_euler_path(np.pi / 4, 0.0, TWO_PI, n=101)
        trace = evolution.compute_phase_trace(psi, path)
        dest = tmp_path / "trace.csv"
        evolution.write_phase_trace_csv(trace, dest)
        first = dest.read_text().splitlines()[0]
        assert first == evolution.CSV_HEADER
        back = evolution.read_phase_trace_csv(dest)
        assert back.n == trace.n
        for name in ("times", "chi", "phi_tot", "phi_dyn", "phi_g", "phi_g_unwrapped", "concurrence"):
            a, b = getattr(trace, name), getattr(back, name)
            assert np.allclose(a, b, rtol=1e-11, atol=1e-13, equal_nan=True)
        assert np.allclose(trace.overlap, back.overlap, rtol=1e-11, atol=1e-13)

    def test_round_trip_with_orthogonal_samples(self, tmp_path):
        path = evolution.qubit_euler_path(0.0, 0.0, TWO_PI, n=101)
        trace = evolution.compute_phase_trace(maxent(2), path)
        assert trace.orthogonal.any()
        dest = tmp_path / "trace.csv"
        evolution.write_phase_trace_csv(trace, dest)
        back = evolution.read_phase_trace_csv(dest)
        assert (back.orthogonal == trace.orthogonal).all()
