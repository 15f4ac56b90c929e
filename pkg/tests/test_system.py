import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modcw.system import (GAMMA_C13, GAMMA_E, HBAR, KHZ_X2PI, MHZ_X2PI, MU0,
                          ModelError, NVParams, Nucleus, SystemModel,
                          hyperfine_from_position, internuclear_g,
                          nuclear_frame, resonance_frequency_approx)
from conftest import A1_KHZ, nucleus_from_khz

NV = NVParams(B_z=1.0)


def dipole_prefactor(r):
    return MU0 * HBAR * GAMMA_E * GAMMA_C13 / (4 * np.pi * r**3)


class TestHyperfineFromPosition:
    def test_axial(self):
        r = np.array([0.0, 0.0, 0.5e-9])
        a = hyperfine_from_position(r, GAMMA_E, GAMMA_C13)
        assert np.allclose(a, [0, 0, -2 * dipole_prefactor(0.5e-9)])

    def test_equatorial(self):
        r = np.array([0.5e-9, 0.0, 0.0])
        a = hyperfine_from_position(r, GAMMA_E, GAMMA_C13)
        assert np.allclose(a, [0, 0, dipole_prefactor(0.5e-9)])

    def test_magic_angle(self):
        # z . r^ = 1/sqrt(3) kills the axial component
        r_hat = np.array([np.sqrt(2.0 / 3.0), 0.0, 1.0 / np.sqrt(3.0)])
        a = hyperfine_from_position(r_hat * 1e-9, GAMMA_E, GAMMA_C13)
        assert abs(a[2]) < 1e-9 * np.linalg.norm(a)

    def test_traceless_over_axes(self):
        r = 0.7e-9
        z_components = [
            hyperfine_from_position(r * np.array(e), GAMMA_E, GAMMA_C13)[2]
            for e in ([1, 0, 0], [0, 1, 0], [0, 0, 1])
        ]
        assert abs(sum(z_components)) < 1e-9 * max(abs(z) for z in z_components)

    def test_zero_vector(self):
        with pytest.raises(ModelError):
            hyperfine_from_position(np.zeros(3), GAMMA_E, GAMMA_C13)

    def test_nucleus_from_position_consistent(self):
        nuc = Nucleus.from_position([0.4e-9, 0.2e-9, 0.6e-9])
        assert nuc.position is not None  # validated in the constructor

    def test_inconsistent_hyperfine_rejected(self):
        with pytest.raises(ModelError):
            Nucleus(hyperfine=np.array([1e4, 0, 0]), position=np.array([0, 0, 1e-9]))


class TestInternuclearG:
    def test_axial_sign(self):
        g = internuclear_g([0, 0, 0], [0, 0, 1e-9])
        assert g < 0

    def test_equatorial_value(self):
        r = 1e-9
        g = internuclear_g([0, 0, 0], [r, 0, 0])
        assert g == pytest.approx(MU0 * HBAR * GAMMA_C13**2 / (4 * np.pi * r**3) / 4)

    def test_axial_is_minus_twice_equatorial(self):
        g_ax = internuclear_g([0, 0, 0], [0, 0, 1e-9])
        g_eq = internuclear_g([0, 0, 0], [1e-9, 0, 0])
        assert g_ax == pytest.approx(-2 * g_eq)

    def test_coincident(self):
        with pytest.raises(ModelError):
            internuclear_g([1e-9, 0, 0], [1e-9, 0, 0])


class TestNuclearFrame:
    def test_bare_larmor(self):
        frame = nuclear_frame(Nucleus(hyperfine=np.zeros(3)), NV)
        assert frame.omega_n == pytest.approx(10.705 * MHZ_X2PI, rel=1e-12)
        assert frame.no_coupling  # zero hyperfine has no perpendicular part

    def test_fig1_resonance_frequency(self):
        frame = nuclear_frame(nucleus_from_khz(A1_KHZ), NV)
        assert frame.omega_n == pytest.approx(10.71 * MHZ_X2PI, rel=5e-4)

    def test_fig1_a_perp(self):
        nuc = nucleus_from_khz(A1_KHZ)
        frame = nuclear_frame(nuc, NV)
        # independent oracle: direct 3-vector arithmetic
        a = nuc.hyperfine
        omega_vec = np.array([-a[0] / 2, -a[1] / 2, GAMMA_C13 * 1.0 - a[2] / 2])
        omega_hat = omega_vec / np.linalg.norm(omega_vec)
        a_perp = np.linalg.norm(a - (a @ omega_hat) * omega_hat)
        assert frame.a_perp_x == pytest.approx(a_perp, rel=1e-12)
        assert frame.a_perp_x == pytest.approx(13.42 * KHZ_X2PI, rel=2e-3)

    def test_a_perp_equals_cross_norm(self):
        frame = nuclear_frame(nucleus_from_khz(A1_KHZ), NV)
        assert frame.a_perp_x == pytest.approx(frame.a_perp_y, rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_frame_orthonormal(self, seed):
        rng = np.random.default_rng(seed)
        nuc = Nucleus(hyperfine=rng.standard_normal(3) * 30 * KHZ_X2PI)
        frame = nuclear_frame(nuc, NV)
        basis = np.stack([frame.x_hat, frame.y_hat, frame.z_hat])
        assert np.max(np.abs(basis @ basis.T - np.eye(3))) < 1e-12
        assert frame.omega_n == pytest.approx(np.linalg.norm(frame.omega_vec), rel=1e-14)

    def test_degenerate_parallel_hyperfine(self):
        # A parallel to omega_hat: both along z
        frame = nuclear_frame(Nucleus(hyperfine=np.array([0.0, 0.0, 20 * KHZ_X2PI])), NV)
        assert frame.no_coupling
        assert frame.a_perp_x == 0.0


class TestResonanceApprox:
    def test_fig1_value(self):
        val = resonance_frequency_approx(nucleus_from_khz(A1_KHZ), NV)
        assert val == pytest.approx(10.7135 * MHZ_X2PI, rel=1e-5)

    def test_zero_hyperfine(self):
        val = resonance_frequency_approx(Nucleus(hyperfine=np.zeros(3)), NV)
        assert val == pytest.approx(GAMMA_C13, rel=1e-15)

    def test_agrees_with_exact(self):
        nuc = nucleus_from_khz(A1_KHZ)
        exact = nuclear_frame(nuc, NV).omega_n
        approx = resonance_frequency_approx(nuc, NV)
        assert abs(exact - approx) / exact < 1e-5

    def test_error_scales_quadratically_in_a_perp(self):
        def err(scale):
            nuc = Nucleus(hyperfine=np.array([scale * 10, scale * 14, -17.0]) * KHZ_X2PI)
            return abs(nuclear_frame(nuc, NV).omega_n - resonance_frequency_approx(nuc, NV))

        ratio = err(2.0) / err(1.0)
        assert ratio == pytest.approx(4.0, rel=0.2)


class TestSystemModel:
    def test_couplings_symmetrized(self, cluster_system):
        assert cluster_system.coupling(1, 0) == cluster_system.coupling(0, 1)
        assert cluster_system.coupling(0, 1) == pytest.approx(-472.0 * 2 * np.pi)

    def test_rejects_diagonal_coupling(self):
        with pytest.raises(ModelError):
            SystemModel(nv=NV, nuclei=(nucleus_from_khz(A1_KHZ),) * 2,
                        couplings={(1, 1): 5.0})

    def test_rejects_out_of_range_coupling(self):
        with pytest.raises(ModelError):
            SystemModel(nv=NV, nuclei=(nucleus_from_khz(A1_KHZ),),
                        couplings={(0, 1): 5.0})

    def test_config_round_trip(self, cluster_system):
        rebuilt = SystemModel.from_config(cluster_system.to_config())
        assert rebuilt.n_nuclei == cluster_system.n_nuclei
        for a, b in zip(rebuilt.nuclei, cluster_system.nuclei):
            assert np.allclose(a.hyperfine, b.hyperfine, rtol=1e-12)
            assert a.gamma == pytest.approx(b.gamma, rel=1e-12)
        assert rebuilt.couplings.keys() == cluster_system.couplings.keys()
        for k in rebuilt.couplings:
            assert rebuilt.couplings[k] == pytest.approx(cluster_system.couplings[k], rel=1e-12)

    def test_single_spin_subsystem(self, cluster_system):
        sub = cluster_system.single_spin_subsystem(1)
        assert sub.n_nuclei == 1
        assert not sub.couplings
        assert np.array_equal(sub.nuclei[0].hyperfine, cluster_system.nuclei[1].hyperfine)
