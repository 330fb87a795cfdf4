"""Fantappie, Laplace and Borel transforms.

Each transform has a quadrature realization (any model domain, any point)
and, for the diamond/polydisc pair, an exact coefficient map.  In two
variables with ``f = sum a_m zeta^m`` on the diamond,

* ``F_3 f    = sum t_m z^m``,  ``t_m = conj(a_m) (|m|+2)! ||zeta^m||^2 / (pi^2 m1! m2!)``
* ``L f      = sum l_m z^m``,  ``l_m = conj(a_m) ||zeta^m||^2 / (m1! m2!)``
* ``B_n z^m  = (|m|+n)! z^m``

from expanding the kernels ``(1 - <zeta,z>)^-3`` and ``exp<zeta,z>`` and
integrating against the orthogonal monomials.  Consequently
``B_2 (L f) = pi^2 F_3 f`` holds coefficientwise, exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc, gammainccinv, gammaln

from .geometry import DomainSpec, as_points, dual_domain, minkowski, support
from .quadrature import QuadratureSpec, angular_order, integrate_volume
from .report import VerificationReport
from .series import LOG_ZERO, CoefficientSeries

N_DIM = 2
FANTAPPIE_PREFACTOR = math.factorial(N_DIM) / np.pi**N_DIM
LOG_PI2 = 2.0 * math.log(np.pi)
DIAMOND = DomainSpec.diamond()
QUAD_NODE_BUDGET = 400_000_000


class TransformDomainError(ValueError):
    """Evaluation point outside the region where the transform converges."""


# ---------------------------------------------------------------- coefficient maps


def log_fantappie_factor(m1, m2):
    """``log(t_m / conj(a_m))`` for the diamond-to-polydisc Fantappie map."""
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    n = m1 + m2
    return (
        math.log(2.0)
        + gammaln(n + 2)
        + gammaln(2 * m1 + 2)
        + gammaln(2 * m2 + 2)
        - gammaln(m1 + 1)
        - gammaln(m2 + 1)
        - gammaln(2 * n + 4)
    )


def log_laplace_factor(m1, m2):
    """``log(l_m / conj(a_m))`` for the diamond Laplace map."""
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    n = m1 + m2
    return (
        math.log(2.0) + LOG_PI2
        + gammaln(2 * m1 + 2)
        + gammaln(2 * m2 + 2)
        - gammaln(m1 + 1)
        - gammaln(m2 + 1)
        - np.log(n + 2)
        - gammaln(2 * n + 4)
    )


def log_borel_factor(m1, m2, order: int):
    return gammaln(np.asarray(m1, dtype=float) + np.asarray(m2, dtype=float) + order + 1)


def _apply(s: CoefficientSeries, log_factor, conjugate: bool, invert: bool = False) -> CoefficientSeries:
    out = {}
    for (m1, m2), (la, ph) in s.log_pairs().items():
        lf = float(log_factor(m1, m2))
        if invert:
            lf = -lf
        out[(m1, m2)] = (la + lf if la > LOG_ZERO else LOG_ZERO, -ph if conjugate else ph)
    if s.log_terms is not None:
        return CoefficientSeries.from_log(out)
    terms = {
        m: (math.exp(la) * complex(math.cos(ph), math.sin(ph)) if la > LOG_ZERO else 0j)
        for m, (la, ph) in out.items()
    }
    return CoefficientSeries(terms)


def fantappie_coeff(s: CoefficientSeries) -> CoefficientSeries:
    """Coefficients of ``F_3 f`` on the polydisc from those of ``f`` on the diamond."""
    return _apply(s, log_fantappie_factor, conjugate=True)


def fantappie_coeff_inverse(t: CoefficientSeries) -> CoefficientSeries:
    """Diamond preimage of a polydisc series under :func:`fantappie_coeff`."""
    return _apply(t, log_fantappie_factor, conjugate=True, invert=True)


def laplace_coeff(s: CoefficientSeries) -> CoefficientSeries:
    return _apply(s, log_laplace_factor, conjugate=True)


def laplace_coeff_inverse(l: CoefficientSeries) -> CoefficientSeries:
    return _apply(l, log_laplace_factor, conjugate=True, invert=True)


def borel_coeff(s: CoefficientSeries, order: int = N_DIM) -> CoefficientSeries:
    """Monomial action ``z^m -> (|m| + n)! z^m`` of the order-``n`` Borel transform."""
    if order < 0:
        raise ValueError("Borel order must be >= 0")
    return _apply(s, lambda m1, m2: log_borel_factor(m1, m2, order), conjugate=False)


# ---------------------------------------------------------------- quadrature


def _as_callable(f):
    if isinstance(f, CoefficientSeries):
        return f, max(f.degree, 0)
    if callable(f):
        return f, 0
    c = complex(f)
    return (lambda p: np.full(p.shape[0], c)), 0


def exp_order(rate: float, tol: float = 1e-14, floor: int = 2, cap: int = 8192) -> int:
    """Node count resolving the Taylor tail ``sum_{j >= N} rate^j / j!`` below ``tol * e^rate``."""
    if rate <= 0.0:
        return floor
    log_rate = math.log(rate)
    target = math.log(tol) + rate
    n = max(floor, int(math.ceil(rate)))
    while n < cap and n * log_rate - math.lgamma(n + 1) > target:
        n += 1
    return min(cap, n + 4)


def _kernel_orders(d: DomainSpec, z, q: QuadratureSpec, deg: int, order_fn, tol: float, extra: int):
    # Once the angular sums are exact, only kernel terms matching the degree
    # <= deg monomials of f survive, so the radial integrand is a polynomial
    # of low degree and the radial orders need no raising with z.
    n_a, n_b, n_1, n_2 = q.gauss_orders
    if d.is_ellipsoidal:
        n_1 = max(n_1, order_fn(support(d, z), tol) + deg + extra)
        n_2 = max(n_2, deg + 2)
    else:
        z = as_points(z)
        n_1 = max(n_1, order_fn(abs(z[0]), tol) + deg + extra)
        n_2 = max(n_2, order_fn(abs(z[1]), tol) + deg + extra)
    n_a, n_b = max(n_a, deg + extra + 2), max(n_b, deg + extra + 2)
    if n_a * n_b * n_1 * n_2 > QUAD_NODE_BUDGET:
        raise ValueError(
            f"quadrature needs {n_a}x{n_b}x{n_1}x{n_2} nodes at z={np.asarray(z).tolist()}; "
            "loosen tol or move z away from the dual boundary"
        )
    return q.with_orders(n_a, n_b, n_1, n_2)


def fantappie_quad(d: DomainSpec, f, z, k: int = N_DIM + 1, q: QuadratureSpec | None = None, tol: float = 1e-12):
    """``(2/pi^2) int_d conj(f(zeta)) (1 - <zeta, z>)^-k dV`` by tensor quadrature.

    Node counts are raised above ``q.gauss_orders`` as needed so that the
    geometric Fourier tail of the kernel (ratio ``|z_j|`` per angle, or
    ``H_d(z)`` along the aligned axis) falls below ``tol``.
    """
    if k < 1:
        raise ValueError("Fantappie exponent must be >= 1")
    z = as_points(z)
    if minkowski(dual_domain(d), z) >= 1.0:
        raise TransformDomainError("evaluation point not in dual complement")
    q = q or QuadratureSpec()
    func, deg = _as_callable(f)

    def integrand(p):
        return np.conj(func(p)) / (1.0 - p @ z) ** k

    if q.mode == "montecarlo":
        return complex(FANTAPPIE_PREFACTOR * integrate_volume(d, integrand, q))
    # coefficients of (1 - w)^-k grow like j^(k-1)
    qq = _kernel_orders(d, z, q, deg, lambda r, t: angular_order(r, t, growth=k - 1), tol, k)
    align = z if d.is_ellipsoidal else None
    return complex(FANTAPPIE_PREFACTOR * integrate_volume(d, integrand, qq, align=align))


def laplace_quad(d: DomainSpec, f, z, q: QuadratureSpec | None = None, tol: float = 1e-14):
    """``int_d conj(f(zeta)) exp(<zeta, z>) dV`` by tensor quadrature."""
    z = as_points(z)
    q = q or QuadratureSpec()
    func, deg = _as_callable(f)

    def integrand(p):
        return np.conj(func(p)) * np.exp(p @ z)

    if q.mode == "montecarlo":
        return complex(integrate_volume(d, integrand, q))
    qq = _kernel_orders(d, z, q, deg, exp_order, tol, 0)
    align = z if d.is_ellipsoidal else None
    return complex(integrate_volume(d, integrand, qq, align=align))


@dataclass(frozen=True)
class BorelResult:
    value: complex
    T: float
    tail_bound: float
    growth_constant: float
    nodes: int

    def to_dict(self) -> dict:
        return {
            "re": self.value.real,
            "im": self.value.imag,
            "T": self.T,
            "tail_bound": self.tail_bound,
            "growth_constant": self.growth_constant,
            "nodes": self.nodes,
        }


def borel_truncation(H: float, order: int, tol: float) -> float:
    """Radius ``T`` with ``int_T^inf t^n e^{-(1-H)t} dt <= tol`` and ``T >= |log tol|/(1-H)``."""
    decay = 1.0 - H
    T0 = abs(math.log(tol)) / decay
    target = tol * decay ** (order + 1) / math.factorial(order)
    Tg = gammainccinv(order + 1, target) / decay if target < 1.0 else 0.0
    return float(max(T0, Tg))


def borel_quad(
    F,
    z,
    order: int = N_DIM,
    T: float | None = None,
    tol: float = 1e-12,
    domain: DomainSpec = DIAMOND,
    panel_width: float = 2.0,
    panel_nodes: int = 20,
):
    """``int_0^T F(t z) t^n e^{-t} dt`` by composite Gauss-Legendre.

    ``F`` is assumed of exponential type bounded by ``support(domain, .)``
    (the diamond by default, so the integral converges on the polydisc).
    The reported ``tail_bound`` is ``C Gamma(n+1, (1-H)T) / (1-H)^(n+1)``
    where ``C`` is the largest observed ``|F(tz)| e^{-t H(z)}`` on the nodes.
    """
    if order < 0:
        raise ValueError("Borel order must be >= 0")
    z = as_points(z)
    H = float(support(domain, z))
    if H >= 1.0:
        raise TransformDomainError(f"Borel integral divergent at z={z.tolist()}")
    if T is None:
        T = borel_truncation(H, order, tol)
    if T <= 0:
        raise ValueError("truncation radius must be positive")
    func, _ = _as_callable(F)
    panels = max(1, int(math.ceil(T / panel_width)))
    x, w = np.polynomial.legendre.leggauss(panel_nodes)
    edges = np.linspace(0.0, T, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    vals = np.asarray(func(t[:, None] * z[None, :]), dtype=complex).reshape(-1)
    log_kernel = order * np.log(t) - t
    value = complex(np.sum(vals * np.exp(log_kernel) * wt))
    C = float(np.max(np.abs(vals) * np.exp(-t * H)))
    decay = 1.0 - H
    tail = C * gammaincc(order + 1, decay * T) * math.factorial(order) / decay ** (order + 1)
    return BorelResult(value, float(T), float(tail), C, int(t.size))


# ---------------------------------------------------------------- composition


def verify_composition(s: CoefficientSeries, tol: float = 1e-12) -> VerificationReport:
    """Check ``B_2(L f) = pi^2 F_3 f`` coefficientwise in log space."""
    lhs = borel_coeff(laplace_coeff(s), N_DIM).log_pairs()
    rhs = fantappie_coeff(s).log_pairs()
    worst_mag = worst_phase = 0.0
    mismatched = 0
    for m, (la, pa) in lhs.items():
        lb, pb = rhs.get(m, (LOG_ZERO, 0.0))
        lb = lb + LOG_PI2 if lb > LOG_ZERO else LOG_ZERO
        if la == LOG_ZERO or lb == LOG_ZERO:
            if la != lb:
                mismatched += 1
            continue
        worst_mag = max(worst_mag, abs(la - lb))
        worst_phase = max(worst_phase, abs(math.remainder(pa - pb, 2 * math.pi)))
    if set(rhs) - set(lhs):
        mismatched += len(set(rhs) - set(lhs))
    dev = max(worst_mag, worst_phase)
    ok = dev <= tol and mismatched == 0
    return VerificationReport(
        "composition",
        "pass" if ok else "fail",
        metrics={
            "max_log_rel_dev": dev,
            "max_logmag_dev": worst_mag,
            "max_phase_dev": worst_phase,
            "support_mismatches": mismatched,
            "terms": len(lhs),
        },
        tolerances={"max_log_rel_dev": tol, "support_mismatches": 0},
        config={"source": "diamond", "borel_order": N_DIM, "degree": s.degree},
    )


def evaluate_coeff_path(kind: str, s: CoefficientSeries, z, order: int = N_DIM) -> complex:
    """Evaluate the coefficient-space image of ``s`` at ``z``."""
    if kind == "fantappie":
        img = fantappie_coeff(s)
    elif kind == "laplace":
        img = laplace_coeff(s)
    elif kind == "borel":
        img = borel_coeff(s, order)
    else:
        raise ValueError(f"unknown transform kind {kind!r}")
    return complex(img(as_points(z)))


__all__ = [
    "BorelResult",
    "TransformDomainError",
    "borel_coeff",
    "borel_quad",
    "borel_truncation",
    "evaluate_coeff_path",
    "exp_order",
    "fantappie_coeff",
    "fantappie_coeff_inverse",
    "fantappie_quad",
    "laplace_coeff",
    "laplace_coeff_inverse",
    "laplace_quad",
    "log_borel_factor",
    "log_fantappie_factor",
    "log_laplace_factor",
    "verify_composition",
]
