import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holodual.geometry import (
    DomainSpec,
    GeometryError,
    dual_domain,
    from_real,
    grad_minkowski,
    hessian_min_eig,
    minkowski,
    pairing,
    rho,
    support,
    tmap,
    tmap_jacobian,
    to_real,
)

BALL = DomainSpec.ball()
E12 = DomainSpec.ellipsoid(1, 2)
ALL = [BALL, E12, DomainSpec.ellipsoid(0.5, 3.0), DomainSpec.diamond(), DomainSpec.polydisc()]
SMOOTH = [BALL, E12, DomainSpec.ellipsoid(1, 0.7)]

coord = st.floats(-2, 2, allow_nan=False)
points = st.tuples(coord, coord, coord, coord).map(lambda t: np.array([t[0] + 1j * t[1], t[2] + 1j * t[3]]))
nonzero = points.filter(lambda p: np.linalg.norm(p) > 1e-3)


def inside(d, p, frac=0.95):
    m = minkowski(d, p)
    return p * (frac / m) if m >= frac else p


def fd_wirtinger(d, p, h=1e-6):
    """d/dzeta_j = (d/dx_j - i d/dy_j) / 2 by central differences."""
    x = to_real(p)
    out = np.zeros(2, dtype=complex)
    for j in range(2):
        g = []
        for k in (2 * j, 2 * j + 1):
            e = np.zeros(4)
            e[k] = h
            g.append((minkowski(d, from_real(x + e)) - minkowski(d, from_real(x - e))) / (2 * h))
        out[j] = 0.5 * (g[0] - 1j * g[1])
    return out


class TestExamples:
    def test_minkowski(self):
        assert minkowski(DomainSpec.diamond(), [0.3, 0.4j]) == pytest.approx(0.7)
        assert minkowski(BALL, [0.6, 0]) == pytest.approx(0.6)
        assert minkowski(DomainSpec.polydisc(), [0.3, -0.8j]) == pytest.approx(0.8)
        assert minkowski(E12, [0, 2]) == pytest.approx(1.0)

    def test_support(self):
        assert support(DomainSpec.diamond(), [1, 2j]) == pytest.approx(2)
        assert support(BALL, [0, 0]) == 0
        assert support(E12, [0, 1]) == pytest.approx(2)
        assert support(DomainSpec.polydisc(), [1, 2j]) == pytest.approx(3)

    def test_support_is_sup_of_pairing(self):
        # brute-force sup over boundary samples of each domain
        rng = np.random.default_rng(1)
        z = np.array([0.7 - 0.2j, 0.4 + 0.9j])
        for d in ALL:
            g = rng.standard_normal((200_000, 4))
            pts = from_real(g)
            pts = pts / minkowski(d, pts)[:, None]
            brute = np.max((pts @ z).real)
            assert brute <= support(d, z) + 1e-12
            assert brute == pytest.approx(support(d, z), rel=2e-2)

    def test_grad_examples(self):
        np.testing.assert_allclose(grad_minkowski(BALL, [1, 0]), [0.5, 0], atol=1e-15)
        p = np.array([1, 0])
        assert (2 * pairing(grad_minkowski(BALL, p), p)).real == pytest.approx(minkowski(BALL, p))

    def test_grad_ellipsoid_axis_point(self):
        # m = sqrt(|z1|^2 + |z2|^2/4); at (0,2): dm/dz2 = conj(z2)/(8 m) = 1/4
        g = grad_minkowski(E12, [0, 2])
        np.testing.assert_allclose(g, fd_wirtinger(E12, np.array([0, 2 + 0j])), atol=1e-8)
        np.testing.assert_allclose(g, [0, 0.25], atol=1e-15)

    def test_grad_origin(self):
        with pytest.raises(GeometryError, match="gradient undefined at 0"):
            grad_minkowski(BALL, [0, 0])

    def test_grad_nonsmooth_rejected(self):
        with pytest.raises(GeometryError):
            grad_minkowski(DomainSpec.diamond(), [0.1, 0.1])

    def test_rho(self):
        assert rho(BALL, [1, 0]) == pytest.approx(0)
        assert rho(BALL, [0, 0]) == -1
        assert rho(DomainSpec.ellipsoid(2, 1), [1, 0]) == pytest.approx(-0.75)

    def test_dual(self):
        assert dual_domain(DomainSpec.diamond()) == DomainSpec.polydisc()
        assert dual_domain(BALL) == BALL
        assert dual_domain(E12) == DomainSpec.ellipsoid(1, 0.5)

    def test_tmap(self):
        np.testing.assert_allclose(tmap(BALL, [0.5, 0.2j]), [0.5, -0.2j], atol=1e-15)
        np.testing.assert_array_equal(tmap(E12, [0, 0]), [0, 0])
        p = np.array([0.3 + 0.1j, -0.2j])
        np.testing.assert_allclose(tmap(BALL, tmap(BALL, p)), p, atol=1e-15)

    def test_tmap_outside(self):
        with pytest.raises(GeometryError, match="point not in domain"):
            tmap(BALL, [1.5, 0])

    def test_tmap_ellipsoid_closed_form(self):
        p = np.array([0.3 + 0.4j, 0.5 - 1.1j])
        np.testing.assert_allclose(tmap(E12, p), np.conj(p) / np.array([1.0, 4.0]), atol=1e-15)

    def test_jacobian(self):
        assert tmap_jacobian(BALL, [0.5, 0.2]) == pytest.approx(1.0, abs=1e-6)
        assert tmap_jacobian(BALL, [0.1, 0.3j]) == pytest.approx(1.0, abs=1e-6)
        p = [0.3 + 0.2j, 0.5 - 0.4j]
        j1, j2 = tmap_jacobian(E12, p, 1e-5), tmap_jacobian(E12, p, 5e-6)
        assert 0 < j1 < np.inf
        assert abs(j1 - j2) <= 1e-4 * j1
        # real determinant of zeta -> conj(zeta)/a^2 is prod a_j^-4
        assert j1 == pytest.approx(1 / 16, rel=1e-8)

    def test_jacobian_errors(self):
        with pytest.raises(GeometryError, match="step too large for point"):
            tmap_jacobian(BALL, [1e-5, 0], h=1e-5)
        with pytest.raises(ValueError):
            tmap_jacobian(BALL, [0.5, 0], h=1e-3)
        with pytest.raises(GeometryError):
            tmap_jacobian(BALL, [0.9, 0.9])

    def test_hessian(self):
        assert hessian_min_eig(BALL, [0.3, 0.4j]) == pytest.approx(2, abs=1e-4)
        assert hessian_min_eig(E12, [0, 1]) > 0
        # ellipsoid(1,2): rho = |z1|^2 + |z2|^2/4, real Hessian diag(2,2,1/2,1/2)
        assert hessian_min_eig(E12, [0, 1]) == pytest.approx(0.5, abs=1e-4)
        p = np.array([0.2 - 0.1j, 0.3j])
        assert hessian_min_eig(BALL, p) == pytest.approx(hessian_min_eig(BALL, 3 * p), abs=1e-4)
        with pytest.raises(GeometryError):
            hessian_min_eig(BALL, [0, 0])


class TestSerialization:
    @pytest.mark.parametrize("d", ALL)
    def test_roundtrip(self, d):
        assert DomainSpec.from_json(d.to_json()) == d

    def test_format(self):
        assert json.loads(E12.to_json()) == {"variant": "ellipsoid", "axes": [1.0, 2.0]}

    def test_parse(self):
        assert DomainSpec.parse("ellipsoid:1,2") == E12
        assert DomainSpec.parse("Diamond") == DomainSpec.diamond()
        for bad in ("ellipsoid:1", "ball:2", "cube"):
            with pytest.raises(ValueError):
                DomainSpec.parse(bad)

    def test_invalid(self):
        with pytest.raises(ValueError):
            DomainSpec.ellipsoid(0, 1)
        with pytest.raises(ValueError):
            DomainSpec("diamond", (2, 2))

    def test_ball_is_unit_ellipsoid(self):
        p = np.array([0.3 + 0.1j, 0.2j])
        assert minkowski(BALL, p) == pytest.approx(minkowski(DomainSpec.ellipsoid(1, 1), p))


class TestProperties:
    @settings(max_examples=200, deadline=None)
    @given(points, st.floats(0.01, 4), st.sampled_from(ALL))
    def test_homogeneity(self, p, t, d):
        assert abs(minkowski(d, t * p) - t * minkowski(d, p)) <= 1e-12 * t * max(minkowski(d, p), 1e-300)

    def test_euler_identity_batch(self):
        rng = np.random.default_rng(0)
        p = from_real(rng.standard_normal((1000, 4)))
        for d in SMOOTH:
            lhs = (2 * np.sum(grad_minkowski(d, p) * p, axis=-1)).real
            assert np.max(np.abs(lhs - minkowski(d, p))) <= 1e-9

    @settings(max_examples=50, deadline=None)
    @given(nonzero, st.sampled_from(SMOOTH))
    def test_grad_matches_finite_differences(self, p, d):
        np.testing.assert_allclose(grad_minkowski(d, p), fd_wirtinger(d, p), atol=1e-6)

    @pytest.mark.parametrize("d", ALL)
    def test_involution(self, d):
        assert dual_domain(dual_domain(d)) == d

    def test_roundtrip_and_range(self):
        rng = np.random.default_rng(3)
        for d in SMOOTH:
            p = from_real(rng.standard_normal((100, 4)))
            p *= (rng.random(100) / minkowski(d, p))[:, None]
            img = tmap(d, p)
            assert np.max(np.linalg.norm(tmap(dual_domain(d), img) - p, axis=-1)) <= 1e-9
            assert np.all(minkowski(dual_domain(d), img) < 1)

    def test_strong_convexity(self):
        rng = np.random.default_rng(4)
        for d in SMOOTH:
            for p in from_real(rng.standard_normal((100, 4))):
                assert hessian_min_eig(d, p) > 0

    @settings(max_examples=30, deadline=None)
    @given(nonzero, st.sampled_from(SMOOTH))
    def test_jacobian_constant_on_ellipsoids(self, p, d):
        p = inside(d, p)
        a1, a2 = d.axes
        assert tmap_jacobian(d, p, 1e-6) == pytest.approx((a1 * a2) ** -4, rel=1e-5)
