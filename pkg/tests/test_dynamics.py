import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_plant
from quadcable.dynamics import (ControlInput, PlantParams, SystemState, accelerations,
                                build_inertia_table, generalized_momentum, kinetic_energy,
                                link_positions, mass_matrix_omega_form, mass_matrix_qddot_form,
                                potential_energy, qddot_form_accelerations, rhs_omega_form,
                                total_energy)
from quadcable.errors import SingularMassMatrix, ValidationError
from quadcable.manifold import E1, E3, cross, hat
from quadcable.oracle import oracle_accelerations
from quadcable.verify import (cross_form_error, nonsingular_single_link_states, oracle_error,
                              random_input, random_state)

G = 9.81


def hover_input(table):
    return ControlInput(f=table.M00 * G, M=np.zeros(3))


def brute_table(masses, lengths):
    n = len(masses)
    M0 = [sum(masses[a] for a in range(n) if a >= i) * lengths[i] for i in range(n)]
    Mij = [[sum(masses[a] for a in range(n) if a >= max(i, j)) * lengths[i] * lengths[j]
            for j in range(n)] for i in range(n)]
    return np.array(M0), np.array(Mij)


class TestPlantParams:
    def test_defaults(self, plant):
        assert plant.n == 5
        assert plant.g == 9.81

    def test_vector_inertia_becomes_diagonal(self):
        p = PlantParams(m=1.0, J=[1.0, 2.0, 3.0], link_masses=[0.1], link_lengths=[0.2])
        assert np.array_equal(p.J, np.diag([1.0, 2.0, 3.0]))

    @pytest.mark.parametrize("kwargs", [
        dict(m=0.0), dict(m=-1.0), dict(J=np.diag([1.0, -1.0, 1.0])),
        dict(J=np.array([[1.0, 0.5, 0], [0, 1.0, 0], [0, 0, 1.0]])),
        dict(link_masses=[0.1, 0.0]), dict(link_lengths=[0.1, -0.1]),
        dict(link_masses=[], link_lengths=[]), dict(link_masses=[0.1]),
    ])
    def test_invalid(self, kwargs):
        base = dict(m=0.5, J=np.eye(3) * 1e-2, link_masses=[0.1, 0.1], link_lengths=[0.1, 0.1])
        base.update(kwargs)
        with pytest.raises(ValidationError):
            PlantParams(**base)


class TestInertiaTable:
    def test_reference_values(self, table):
        assert table.M00 == pytest.approx(1.0)
        assert table.M0[0] == pytest.approx(0.05)
        assert table.M0[4] == pytest.approx(0.01)
        assert table.Mij[0, 0] == pytest.approx(0.005)
        assert table.Mij[1, 4] == pytest.approx(0.001)
        assert table.Mij[4, 1] == pytest.approx(0.001)

    def test_matches_brute_force(self, rng):
        for n in (1, 2, 4, 7):
            masses, lengths = rng.uniform(0.05, 1, n), rng.uniform(0.05, 1, n)
            t = build_inertia_table(PlantParams(m=0.7, J=np.eye(3), link_masses=masses,
                                                link_lengths=lengths))
            M0, Mij = brute_table(masses, lengths)
            assert t.M00 == pytest.approx(0.7 + masses.sum())
            assert np.allclose(t.M0, M0, rtol=1e-14)
            assert np.allclose(t.Mij, Mij, rtol=1e-14)
            assert np.array_equal(t.Mij, t.Mij.T)
            assert np.all(t.Mij > 0)


class TestOmegaForm:
    def test_block_layout_n1(self):
        p = make_plant(1)
        t = build_inertia_table(p)
        A = mass_matrix_omega_form(t, SystemState.hanging(1))
        assert np.allclose(A[:3, 3:], -t.M0[0] * hat(E3))
        assert np.allclose(A[3:, :3], t.M0[0] * hat(E3))
        assert np.allclose(A[3:, 3:], t.Mij[0, 0] * np.eye(3))

    def test_leading_block(self, table):
        A = mass_matrix_omega_form(table, SystemState.hanging(5))
        assert np.allclose(A[:3, :3], np.eye(3))

    def test_off_diagonal_link_block(self, table, rng):
        s = random_state(rng, 5)
        A = mass_matrix_omega_form(table, s)
        blk = A[3 + 3 * 1:3 + 3 * 2, 3 + 3 * 3:3 + 3 * 4]
        assert np.allclose(blk, -table.Mij[1, 3] * hat(s.q[1]) @ hat(s.q[3]))

    def test_symmetric_and_positive_on_tangent_space(self, table, rng):
        for _ in range(100):
            s = random_state(rng, 5)
            A = mass_matrix_omega_form(table, s)
            assert np.max(np.abs(A - A.T)) <= 1e-12
            # orthonormal tangent basis for each link block
            P = np.zeros((18, 13))
            P[:3, :3] = np.eye(3)
            for i, q in enumerate(s.q):
                basis = np.linalg.svd(q[None, :])[2][1:].T
                P[3 + 3 * i:6 + 3 * i, 3 + 2 * i:5 + 2 * i] = basis
            assert np.linalg.eigvalsh(P.T @ A @ P)[0] > 0

    def test_rhs_zero_at_hover(self, table):
        b = rhs_omega_form(table, SystemState.hanging(5), hover_input(table))
        assert np.allclose(b, 0, atol=1e-14)

    def test_rhs_free_fall_at_rest(self, table):
        b = rhs_omega_form(table, SystemState.hanging(5), ControlInput())
        assert np.allclose(b[:3], table.M00 * G * E3)
        assert np.allclose(b[3:], 0)

    def test_rhs_link_rows_orthogonal_to_q(self, table, rng):
        for _ in range(50):
            s = random_state(rng, 5)
            b = rhs_omega_form(table, s, random_input(rng)).reshape(-1, 3)[1:]
            assert np.allclose(np.einsum("ij,ij->i", s.q, b), 0, atol=1e-12)

    def test_rhs_formula(self, table, rng):
        s = random_state(rng, 5)
        u = random_input(rng)
        b = rhs_omega_form(table, s, u).reshape(-1, 3)
        w2 = np.sum(s.omega ** 2, axis=1)
        row0 = (table.M0 * w2) @ s.q - u.f * s.R[:, 2] + table.M00 * G * E3
        assert np.allclose(b[0], row0, atol=1e-12)
        for i in range(5):
            acc = sum(table.Mij[i, j] * w2[j] * hat(s.q[i]) @ s.q[j] for j in range(5) if j != i)
            acc = acc + table.gravity[i] * hat(s.q[i]) @ E3
            assert np.allclose(b[1 + i], acc, atol=1e-12)


class TestAccelerations:
    def test_equilibrium(self, plant, table):
        a = accelerations(plant, table, SystemState.hanging(5), hover_input(table))
        for arr in (a.xddot, a.omegadot, a.Omegadot):
            assert np.allclose(arr, 0, atol=1e-14)

    def test_tangency(self, plant, table, rng):
        for _ in range(50):
            s = random_state(rng, 5)
            a = accelerations(plant, table, s, random_input(rng))
            assert np.max(np.abs(np.einsum("ij,ij->i", s.q, a.omegadot))) <= 1e-9

    def test_solves_linear_system(self, plant, table, rng):
        s = random_state(rng, 5)
        u = random_input(rng)
        a = accelerations(plant, table, s, u)
        A = mass_matrix_omega_form(table, s)
        b = rhs_omega_form(table, s, u)
        z = np.concatenate([a.xddot, a.omegadot.ravel()])
        assert np.allclose(A @ z, b, atol=1e-10)

    def test_attitude_is_euler_equation(self, plant, table, rng):
        s = random_state(rng, 5)
        u = random_input(rng)
        a = accelerations(plant, table, s, u)
        J = plant.J
        assert np.allclose(J @ a.Omegadot + np.cross(s.Omega, J @ s.Omega), u.M, atol=1e-12)

    def test_attitude_decoupled_from_chain(self, plant, table, rng):
        s, u = random_state(rng, 5), random_input(rng)
        s2 = s.copy()
        s2.q = random_state(rng, 5).q
        s2 = s2.projected()
        a1, a2 = accelerations(plant, table, s, u), accelerations(plant, table, s2, u)
        assert np.array_equal(a1.Omegadot, a2.Omegadot)

    def test_horizontal_momentum_rate_vanishes_without_thrust(self, plant, table, rng):
        # d/dt (M00 v + sum M0i qdot_i) with qddot_i = -q_i x omegadot_i - |w_i|^2 q_i
        for _ in range(20):
            s = random_state(rng, 5)
            a = accelerations(plant, table, s, ControlInput())
            w2 = np.sum(s.omega ** 2, axis=1)
            qdd = -cross(s.q, a.omegadot) - w2[:, None] * s.q
            pdot = table.M00 * a.xddot + table.M0 @ qdd
            assert np.allclose(pdot, [0, 0, table.M00 * G], atol=1e-10)

    def test_singular_mass_matrix(self):
        # a massive quadrotor with a feather-light link leaves the link rows
        # near zero, beyond the conditioning limit
        p = PlantParams(m=1e12, J=np.eye(3), link_masses=[1e-9], link_lengths=[1e-9])
        t = build_inertia_table(p)
        with pytest.raises(SingularMassMatrix):
            accelerations(p, t, SystemState.hanging(1), ControlInput())

    def test_single_link_oracle(self, rng):
        p = make_plant(1)
        states = nonsingular_single_link_states(rng, 50)
        inputs = [random_input(rng) for _ in range(50)]
        assert oracle_error(p, states, inputs) <= 1e-8

    def test_oracle_other_parameters(self, rng):
        p = PlantParams(m=1.3, J=np.eye(3), link_masses=[0.7], link_lengths=[0.45], g=3.7)
        states = nonsingular_single_link_states(rng, 20)
        inputs = [random_input(rng) for _ in range(20)]
        assert oracle_error(p, states, inputs) <= 1e-8

    def test_oracle_rejects_multiple_links(self, plant, rng):
        with pytest.raises(ValueError):
            oracle_accelerations(plant, random_state(rng, 5), ControlInput())


class TestQddotForm:
    def test_equilibrium(self, table):
        xdd, qdd = qddot_form_accelerations(table, SystemState.hanging(5), hover_input(table))
        assert np.allclose(xdd, 0, atol=1e-14)
        assert np.allclose(qdd, 0, atol=1e-14)

    def test_cross_form_equivalence(self, plant, rng):
        states = [random_state(rng, 5) for _ in range(100)]
        inputs = [random_input(rng) for _ in range(100)]
        ex, eq = cross_form_error(plant, states, inputs)
        assert ex <= 1e-10
        assert eq <= 1e-10

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
    def test_cross_form_any_chain(self, n, seed):
        r = np.random.default_rng(seed)
        p = PlantParams(m=r.uniform(0.2, 2), J=np.eye(3), link_masses=r.uniform(0.05, 0.5, n),
                        link_lengths=r.uniform(0.05, 0.5, n))
        ex, eq = cross_form_error(p, [random_state(r, n)], [random_input(r)])
        assert max(ex, eq) <= 1e-9

    def test_mass_matrix_shape(self, table):
        assert mass_matrix_qddot_form(table, SystemState.hanging(5)).shape == (18, 18)


class TestEnergyAndMomentum:
    def test_hanging_energy(self, plant, table):
        assert total_energy(plant, table, SystemState.hanging(5)) == pytest.approx(-1.4715, abs=1e-12)

    def test_vertical_displacement_lowers_energy(self, plant, table):
        d = 0.37
        E0 = total_energy(plant, table, SystemState.hanging(5))
        E1_ = total_energy(plant, table, SystemState.hanging(5, x=(0, 0, d)))
        assert E0 - E1_ == pytest.approx(table.M00 * G * d, rel=1e-12)

    def test_spin_kinetic_energy(self, plant, table):
        s = SystemState.hanging(5)
        s.Omega = E3.copy()
        assert kinetic_energy(plant, table, s) == pytest.approx(0.5 * 1.05e-2)

    def test_energy_split(self, plant, table, rng):
        s = random_state(rng, 5)
        assert total_energy(plant, table, s) == pytest.approx(
            kinetic_energy(plant, table, s) + potential_energy(plant, table, s))

    def test_kinetic_energy_matches_point_masses(self, plant, table, rng):
        s = random_state(rng, 5)
        qd = s.qdot()
        vel = s.v + np.cumsum(plant.link_lengths[:, None] * qd, axis=0)
        T = 0.5 * plant.m * s.v @ s.v + 0.5 * np.sum(plant.link_masses * np.sum(vel ** 2, axis=1))
        T += 0.5 * s.Omega @ plant.J @ s.Omega
        assert kinetic_energy(plant, table, s) == pytest.approx(T, rel=1e-12)

    def test_momentum(self, table, rng):
        s = SystemState.hanging(5)
        assert np.array_equal(generalized_momentum(table, s), np.zeros(3))
        s.v = E1.copy()
        assert np.allclose(generalized_momentum(table, s), table.M00 * E1)
        r = random_state(rng, 5)
        expected = table.M00 * r.v + table.M0 @ np.cross(r.omega, r.q)
        assert np.allclose(generalized_momentum(table, r), expected)


class TestLinkPositions:
    def test_hanging_chain(self, plant):
        pos = link_positions(SystemState.hanging(5), plant)
        assert np.allclose(pos[-1], [0, 0, 0.5])
        assert len(pos) == 5

    def test_single_link(self):
        p = make_plant(1)
        s = SystemState.hanging(1, x=(1.0, 2.0, 3.0))
        s.q = E1[None, :].copy()
        assert np.allclose(link_positions(s, p)[0], [1.1, 2.0, 3.0])

    def test_payload_under_target(self, plant):
        x_d = np.array([0.3, -0.2, -1.0])
        pos = link_positions(SystemState.hanging(5, x=x_d), plant)
        assert np.allclose(pos[-1], x_d + plant.link_lengths.sum() * E3)


def test_state_check(rng):
    s = random_state(rng, 3)
    s.check()
    bad = s.copy()
    bad.q = bad.q * 1.01
    with pytest.raises(ValidationError):
        bad.check()
    bad = s.copy()
    bad.omega = bad.omega + bad.q
    with pytest.raises(ValidationError):
        bad.check()
    bad = s.copy()
    bad.R = -bad.R
    with pytest.raises(ValidationError):
        bad.check()
