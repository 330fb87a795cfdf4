"""Volume integration over the model domains.

Every domain is complete Reinhardt, so the integration variable is written
as ``(r1 e^{i t1}, r2 e^{i t2})`` and the modulus pair is parametrized over a
box:

* diamond   ``(r, s) -> (r s, r (1 - s))``, density ``r^3 s (1 - s)``
* polydisc  ``(r1, r2)``, density ``r1 r2``
* ellipsoid ``(u, s) -> (a1 sqrt(u s), a2 sqrt(u (1 - s)))``, density ``(a1 a2)^2 u / 4``

With these maps ``|zeta^m|^2`` times the density is a polynomial in the box
variables, so Gauss-Legendre is exact on monomial moments.  Angles use the
equispaced periodic rule, which is exact for trigonometric polynomials of
degree below the node count.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import betaln, gammaln

from .geometry import DomainSpec, _minkowski, as_points

CHUNK_NODES = 1 << 20
MC_CHUNK = 1 << 16


class IntegrandError(ValueError):
    """The integrand returned a non-finite value; ``node`` is the offending point."""

    def __init__(self, node):
        self.node = np.asarray(node)
        super().__init__(f"non-finite integrand value at node {self.node.tolist()}")


class MultiIndex(NamedTuple):
    m1: int
    m2: int

    @property
    def total(self) -> int:
        return self.m1 + self.m2


@dataclass(frozen=True)
class QuadratureSpec:
    """Integration settings.

    ``gauss_orders`` are node counts for (radial, simplex, angle 1, angle 2).
    """

    mode: str = "gauss"
    gauss_orders: tuple[int, int, int, int] = (24, 24, 24, 24)
    mc_samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("gauss", "montecarlo"):
            raise ValueError(f"mode must be 'gauss' or 'montecarlo', got {self.mode!r}")
        orders = tuple(int(n) for n in self.gauss_orders)
        if len(orders) != 4 or min(orders) < 2:
            raise ValueError(f"gauss_orders must be four node counts >= 2, got {self.gauss_orders!r}")
        object.__setattr__(self, "gauss_orders", orders)
        if int(self.mc_samples) < 1000:
            raise ValueError("mc_samples must be >= 1000")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def with_orders(self, *orders: int) -> QuadratureSpec:
        return QuadratureSpec(self.mode, tuple(orders), self.mc_samples, self.seed)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "gauss_orders": list(self.gauss_orders),
            "mc_samples": int(self.mc_samples),
            "seed": int(self.seed),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> QuadratureSpec:
        return cls(
            mode=data.get("mode", "gauss"),
            gauss_orders=tuple(data.get("gauss_orders", (24, 24, 24, 24))),
            mc_samples=data.get("mc_samples", 100_000),
            seed=data.get("seed", 0),
        )


def gauss_legendre_01(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def periodic_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    return 2.0 * np.pi * np.arange(n) / n, np.full(n, 2.0 * np.pi / n)


def angular_order(rate: float, tol: float = 1e-14, floor: int = 2, cap: int = 8192, growth: float = 0.0) -> int:
    """Periodic nodes resolving Fourier coefficients ``~ j**growth * rate**j`` below ``tol``.

    The aliasing error of the N-point rule is the coefficient at ``j = N``.
    """
    if rate <= 0.0:
        return floor
    if rate >= 1.0:
        return cap
    log_rate = math.log(rate)
    n = max(floor, math.ceil(math.log(tol) / log_rate))
    while n < cap and growth * math.log(n) + n * log_rate > math.log(tol):
        n += 1
    return int(min(cap, n + 4))


def _moduli_nodes(d: DomainSpec, n_a: int, n_b: int):
    """Moduli (r1, r2) and weights of the radial/simplex product rule for ``d``."""
    xa, wa = gauss_legendre_01(n_a)
    xb, wb = gauss_legendre_01(n_b)
    A, B = np.meshgrid(xa, xb, indexing="ij")
    W = np.outer(wa, wb)
    if d.variant == "diamond":
        r1, r2 = A * B, A * (1.0 - B)
        W = W * A**3 * B * (1.0 - B)
    elif d.variant == "polydisc":
        r1, r2 = A, B
        W = W * A * B
    else:
        a1, a2 = d.axes
        r1, r2 = a1 * np.sqrt(A * B), a2 * np.sqrt(A * (1.0 - B))
        W = W * (a1 * a2) ** 2 * A / 4.0
    return r1.ravel(), r2.ravel(), W.ravel()


def alignment_map(d: DomainSpec, z) -> tuple[np.ndarray, float]:
    """Linear map ``L`` and Jacobian ``J`` with ``int_d g = J int_ball g(L w) dV(w)``.

    ``L`` is chosen so that ``<L w, z> = c * w_1``: the pairing with ``z``
    depends on the first coordinate only, which confines the kernel's angular
    structure to one axis.  Only ellipsoids admit such a map.
    """
    if not d.is_ellipsoidal:
        raise ValueError(f"alignment needs a unitarily invariant model (ball/ellipsoid), got {d}")
    z = as_points(z)
    A = np.diag(np.asarray(d.axes, dtype=complex))
    jac = float(np.prod(d.axes) ** 2)
    v = A @ z
    nv = np.linalg.norm(v)
    if nv < 1e-300:
        return A, jac
    U = np.array([[np.conj(v[0]), -v[1]], [np.conj(v[1]), v[0]]]) / nv
    return A @ U, jac


def _check_finite(vals: np.ndarray, pts: np.ndarray):
    bad = ~np.isfinite(vals)
    if bad.ndim == 2:
        bad = bad.any(axis=1)
    if np.any(bad):
        raise IntegrandError(pts[np.argmax(bad)])


def _integrate_gauss(d: DomainSpec, f, orders, align) -> complex:
    n_a, n_b, n_1, n_2 = orders
    L, jac = np.eye(2, dtype=complex), 1.0
    grid_domain = d
    if align is not None:
        L, jac = alignment_map(d, align)
        grid_domain = DomainSpec.ball()
    r1, r2, w_rad = _moduli_nodes(grid_domain, n_a, n_b)
    t1, w1 = periodic_rule(n_1)
    t2, w2 = periodic_rule(n_2)
    e1 = np.repeat(np.exp(1j * t1), n_2)
    e2 = np.tile(np.exp(1j * t2), n_1)
    w_ang = np.repeat(w1, n_2) * np.tile(w2, n_1)
    n_ang = e1.size
    step = max(1, CHUNK_NODES // n_ang)
    total = None
    vector = False
    for lo in range(0, r1.size, step):
        sl = slice(lo, lo + step)
        pts = np.stack(
            [(r1[sl, None] * e1[None, :]).ravel(), (r2[sl, None] * e2[None, :]).ravel()], axis=-1
        )
        if align is not None:
            pts = pts @ L.T
        vals = np.asarray(f(pts), dtype=complex)
        vector = vals.ndim == 2
        vals = vals.reshape(pts.shape[0], -1)
        _check_finite(vals, pts)
        weights = (w_rad[sl, None] * w_ang[None, :]).ravel()
        # contiguous last axis keeps numpy's pairwise summation
        part = np.sum(np.ascontiguousarray(vals.T) * weights, axis=1)
        total = part if total is None else total + part
    if vector:
        return total * jac
    return complex(total[0] * jac)


def bounding_radii(d: DomainSpec) -> tuple[float, float]:
    return d.axes if d.is_ellipsoidal else (1.0, 1.0)


def mc_generator(seed: int, chunk: int) -> np.random.Generator:
    """Counter-based stream for chunk ``chunk``; chunks are independent of worker layout."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(chunk)])))


def monte_carlo_estimate(d: DomainSpec, f, q: QuadratureSpec) -> tuple[complex, float]:
    """Rejection sampling from the bounding polydisc; returns (estimate, standard error)."""
    R1, R2 = bounding_radii(d)
    box = np.pi**2 * (R1 * R2) ** 2
    n_total = int(q.mc_samples)
    s1 = 0.0 + 0.0j
    s2 = 0.0
    for chunk, lo in enumerate(range(0, n_total, MC_CHUNK)):
        n = min(MC_CHUNK, n_total - lo)
        rng = mc_generator(q.seed, chunk)
        u = rng.random((n, 4))
        pts = np.stack(
            [
                R1 * np.sqrt(u[:, 0]) * np.exp(2j * np.pi * u[:, 1]),
                R2 * np.sqrt(u[:, 2]) * np.exp(2j * np.pi * u[:, 3]),
            ],
            axis=-1,
        )
        inside = _minkowski(d, pts) < 1.0
        vals = np.zeros(n, dtype=complex)
        if np.any(inside):
            v = np.asarray(f(pts[inside]), dtype=complex).reshape(-1)
            _check_finite(v, pts[inside])
            vals[inside] = v
        s1 += np.sum(vals)
        s2 += float(np.sum(np.abs(vals) ** 2))
    mean = s1 / n_total
    var = max(s2 / n_total - abs(mean) ** 2, 0.0)
    return complex(box * mean), float(box * math.sqrt(var / n_total))


def integrate_volume(d: DomainSpec, f: Callable, q: QuadratureSpec | None = None, align=None) -> complex:
    """Approximate ``int_d f dV``.

    ``f`` maps an ``(N, 2)`` complex array of points to ``N`` values (or an
    ``(N, K)`` array, in which case ``K`` integrals are returned).  With
    ``align=z`` (ellipsoids only, Gauss mode) the integration variable is
    rotated so that ``<zeta, z>`` depends on the first angle alone; angle 1
    then carries the kernel and angle 2 only the polynomial part of ``f``.
    """
    q = q or QuadratureSpec()
    if q.mode == "montecarlo":
        return monte_carlo_estimate(d, f, q)[0]
    return _integrate_gauss(d, f, q.gauss_orders, align)


def log_monomial_norm2(d: DomainSpec, m) -> float:
    """``log int_d |zeta^m|^2 dV`` in closed form."""
    m1, m2 = int(m[0]), int(m[1])
    if min(m1, m2) < 0:
        raise ValueError("multi-index entries must be nonnegative")
    n = m1 + m2
    if d.variant == "diamond":
        return float(
            math.log(4.0 * np.pi**2) + betaln(2 * m1 + 2, 2 * m2 + 2) - math.log(2 * n + 4)
        )
    if d.variant == "polydisc":
        return float(2.0 * math.log(np.pi) - math.log(m1 + 1) - math.log(m2 + 1))
    a1, a2 = d.axes
    return float(
        2.0 * math.log(np.pi)
        + gammaln(m1 + 1)
        + gammaln(m2 + 1)
        - gammaln(n + 3)
        + (2 * m1 + 2) * math.log(a1)
        + (2 * m2 + 2) * math.log(a2)
    )


def monomial_inner_product(d: DomainSpec, m, k) -> float:
    """Exact ``int_d conj(zeta^m) zeta^k dV``; zero off the diagonal by rotation invariance."""
    if tuple(m) != tuple(k):
        return 0.0
    return math.exp(log_monomial_norm2(d, m))


def pw_monomial_weight(m) -> float:
    """Log of the Paley-Wiener weight ``(2 pi)^2 Gamma(2|m| + 7/2) / 2^(2|m| + 7/2)``.

    This is ``int |z^m|^2 e^{-2 max|z_j|} r^{5/2}`` over ``{|z1| = |z2| = r}``
    against ``dr dpsi1 dpsi2``.
    """
    n = int(m[0]) + int(m[1])
    a = 2 * n + 3.5
    return float(2.0 * math.log(2.0 * np.pi) + gammaln(a) - a * math.log(2.0))
