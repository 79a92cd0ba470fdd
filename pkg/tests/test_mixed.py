import numpy as np
import pytest

from blochmap import kernels
from blochmap.mixed import (
    BallExitError,
    BlochState,
    density_matrix,
    mixed_step,
    mixed_step_ensemble,
    mixed_step_lattes,
    purity,
    selection_map,
    state_from_density,
    unitary_from_angles,
    unitary_from_p,
)
from blochmap.sampling import SeededSampler, ball_states
from blochmap.sphere import apply_map, bloch_from_point, chordal_distance, point_from_bloch


def rand_states(seed, n):
    return ball_states(SeededSampler(seed), n)


class TestBlochState:
    def test_ball_check(self):
        BlochState(0.6, 0.0, 0.8)
        with pytest.raises(BallExitError):
            BlochState(1.0, 1.0, 0.0)

    def test_density_roundtrip(self):
        for u, v, w in rand_states(1, 100):
            st = BlochState(u, v, w)
            back = state_from_density(density_matrix(st))
            assert (back.u, back.v, back.w) == pytest.approx((u, v, w), abs=1e-14)

    def test_density_matrix_properties(self):
        for u, v, w in rand_states(2, 50):
            m = density_matrix(BlochState(u, v, w))
            assert np.trace(m) == pytest.approx(1.0)
            assert np.allclose(m, m.conj().T)
            assert np.all(np.linalg.eigvalsh(m) > -1e-14)


class TestSelectionMap:
    def test_maximally_mixed_is_fixed(self):
        st = selection_map(BlochState(0.0, 0.0, 0.0))
        assert (st.u, st.v, st.w) == (0.0, 0.0, 0.0)

    def test_poles_are_fixed(self):
        for w in (1.0, -1.0):
            st = selection_map(BlochState(0.0, 0.0, w))
            assert (st.u, st.v, st.w) == pytest.approx((0.0, 0.0, w))

    def test_never_leaves_ball(self):
        for u, v, w in rand_states(3, 500):
            st = selection_map(BlochState(u, v, w))
            assert st.norm <= 1.0 + 1e-12

    def test_purity_of_pure_states_preserved(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            d = rng.normal(size=3)
            d /= np.linalg.norm(d)
            st = selection_map(BlochState(*d))
            assert purity(st) == pytest.approx(1.0, abs=1e-12)


class TestUnitaries:
    def test_unitary_from_p_is_unitary(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            u = unitary_from_p(complex(*rng.normal(size=2)))
            assert np.allclose(u @ u.conj().T, np.eye(2), atol=1e-14)

    def test_unitary_from_angles_is_unitary(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            u = unitary_from_angles(*rng.uniform(-np.pi, np.pi, size=3))
            assert np.allclose(u @ u.conj().T, np.eye(2), atol=1e-14)

    def test_angles_reduce_to_p_form(self):
        # omega = 0 gives unitary_from_p with p = tan(xi) exp(-i phi),
        # up to a global phase
        import math

        rng = np.random.default_rng(7)
        for _ in range(50):
            xi = rng.uniform(-1.4, 1.4)
            phi = rng.uniform(-np.pi, np.pi)
            ua = unitary_from_angles(xi, phi, 0.0)
            up = unitary_from_p(math.tan(xi) * np.exp(-1j * phi))
            ratio = ua / up
            assert np.abs(ratio - ratio[0, 0]).max() < 1e-12


class TestMixedStep:
    def test_pure_states_track_sphere_map(self):
        # mixed_step restricted to the sphere is the rational map
        rng = np.random.default_rng(8)
        for _ in range(1000):
            p = complex(*rng.normal(size=2))
            d = rng.normal(size=3)
            d /= np.linalg.norm(d)
            s = point_from_bloch(*d)
            st = BlochState(*d)
            for _ in range(100):
                s = apply_map(p, s)
                st = mixed_step(p, st)
                n = st.norm
                projected = point_from_bloch(st.u / n, st.v / n, st.w / n)
                assert chordal_distance(s, projected) < 1e-9
                s, st = projected, BlochState(*bloch_from_point(projected))

    def test_lattes_closed_form(self):
        for u, v, w in rand_states(9, 100_000):
            st = BlochState(u, v, w)
            a = mixed_step(1j, st)
            b = mixed_step_lattes(st)
            assert abs(a.u - b.u) < 1e-12
            assert abs(a.v - b.v) < 1e-12
            assert abs(a.w - b.w) < 1e-12

    def test_conjugation_symmetries(self):
        # F = diag flip (u, -v, -w) intertwines p and -conj(p);
        # G = (u, -v, w) intertwines p and conj(p)
        rng = np.random.default_rng(10)
        states = rand_states(11, 10_000)
        for u, v, w in states:
            p = complex(*rng.normal(size=2))
            st = BlochState(u, v, w)
            ref = mixed_step(p, st)

            a = mixed_step(-p.conjugate(), BlochState(u, -v, -w))
            assert (a.u, a.v, a.w) == pytest.approx((ref.u, -ref.v, -ref.w), abs=1e-12)

            b = mixed_step(p.conjugate(), BlochState(u, -v, w))
            assert (b.u, b.v, b.w) == pytest.approx((ref.u, -ref.v, ref.w), abs=1e-12)

    def test_purity_never_exceeds_one(self):
        for u, v, w in rand_states(12, 200):
            st = BlochState(u, v, w)
            for _ in range(50):
                st = mixed_step(0.3 - 0.9j, st)
                assert purity(st) <= 1.0 + 1e-12


class TestEnsembleStep:
    def test_matches_scalar_reference(self):
        uvw = rand_states(13, 2000)
        rng = np.random.default_rng(14)
        p = complex(*rng.normal(size=2))
        uu, vv, ww = mixed_step_ensemble(p, uvw[:, 0], uvw[:, 1], uvw[:, 2])
        for k in range(0, 2000, 37):
            ref = mixed_step(p, BlochState(*uvw[k]))
            assert (uu[k], vv[k], ww[k]) == pytest.approx((ref.u, ref.v, ref.w), abs=1e-12)

    def test_kernel_matches_vectorized(self):
        # the compiled in-place kernel and the numpy path are independent
        # implementations of the same step
        uvw = rand_states(15, 5000)
        p = 0.4 + 1.2j
        uu, vv, ww = mixed_step_ensemble(p, uvw[:, 0], uvw[:, 1], uvw[:, 2])
        ku = np.ascontiguousarray(uvw[:, 0])
        kv = np.ascontiguousarray(uvw[:, 1])
        kw = np.ascontiguousarray(uvw[:, 2])
        kernels.mixed_ensemble_step(ku, kv, kw, p)
        assert np.abs(ku - uu).max() < 1e-12
        assert np.abs(kv - vv).max() < 1e-12
        assert np.abs(kw - ww).max() < 1e-12


def test_purity_bounds():
    assert purity(BlochState(0, 0, 0)) == 0.5
    assert purity(BlochState(0, 0, 1)) == 1.0
    assert purity(BlochState(0.6, 0, 0)) == pytest.approx(0.68)
