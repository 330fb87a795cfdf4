"""Singular-integral kernels on the smooth model domains and their sampled ratios.

All kernels broadcast over leading axes of ``zeta`` and ``z``.  With
``rho = m^2 - 1``,

* ``B(zeta, z)  = <d rho(zeta), zeta - z> - rho(zeta)``
* ``K(zeta, z)  = 1 - <T(zeta), z>``
* ``Kt(zeta, z) = K(zeta, z) <d rho(zeta), zeta> / (1 + rho(zeta))``

``B`` equals ``m <2 dm, zeta - z> + 1 - m^2`` since ``d rho = 2 m dm``.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    ORIGIN_TOL,
    DomainSpec,
    GeometryError,
    _minkowski,
    _require_smooth,
    _scalar,
    _tmap,
    as_points,
    grad_rho,
    levi_matrix,
)
from .quadrature import QuadratureSpec, integrate_volume

ORIGIN_MASK = 1e-3
DIAGONAL_MASK = 1e-6
SWEEP_CHUNK = 1024
RATIOS = ("B_vs_RHS", "B_vs_K", "K_vs_Ktilde")


def _pair(a, b) -> np.ndarray:
    return np.sum(a * b, axis=-1)


def _rho(d, p):
    return _minkowski(d, p) ** 2 - 1.0


def kernel_B(d: DomainSpec, zeta, z):
    """``<d rho(zeta), zeta - z> - rho(zeta)``; equals 1 at ``zeta = 0``."""
    _require_smooth(d)
    zeta, z = as_points(zeta), as_points(z)
    return _scalar(_pair(grad_rho(d, zeta), zeta - z) - _rho(d, zeta))


def kernel_K(d: DomainSpec, zeta, z):
    """``1 - <T_D(zeta), z>``; equals 1 at ``zeta = 0``."""
    _require_smooth(d)
    zeta, z = as_points(zeta), as_points(z)
    return _scalar(1.0 - _pair(_tmap(d, zeta), z))


def _check_nonzero(zeta, what):
    if np.any(np.linalg.norm(zeta, axis=-1) < ORIGIN_TOL):
        raise GeometryError(f"{what} undefined at origin")


def _levi_factor(d, zeta):
    """``<d rho(zeta), zeta> / (1 + rho(zeta))``."""
    return _pair(grad_rho(d, zeta), zeta) / (1.0 + _rho(d, zeta))


def kernel_K_tilde(d: DomainSpec, zeta, z):
    _require_smooth(d)
    zeta, z = as_points(zeta), as_points(z)
    _check_nonzero(zeta, "K-tilde")
    K = 1.0 - _pair(_tmap(d, zeta), z)
    return _scalar(K * _levi_factor(d, zeta))


def estimate_rhs(d: DomainSpec, zeta, z):
    """``|rho(zeta)| + |rho(z)| + |Im<d rho(zeta), zeta - z>| + ||zeta - z||^2``."""
    _require_smooth(d)
    zeta, z = as_points(zeta), as_points(z)
    diff = zeta - z
    out = (
        np.abs(_rho(d, zeta))
        + np.abs(_rho(d, z))
        + np.abs(_pair(grad_rho(d, zeta), diff).imag)
        + np.sum(np.abs(diff) ** 2, axis=-1)
    )
    return _scalar(out)


# ---------------------------------------------------------------- volume density


def density_matrix(d: DomainSpec, zeta) -> np.ndarray:
    """The 3x3 matrix whose determinant (times ``c_2``) is the volume density.

    Corner ``g = rho <d rho, zeta> / (1 + rho)``; first row ``d rho / d zeta_j``;
    first column ``d g / d zetabar_j``; lower block the complex Hessian of rho.
    """
    _require_smooth(d)
    zeta = as_points(zeta)
    _check_nonzero(zeta, "volume density")
    r = _rho(d, zeta)
    dr = grad_rho(d, zeta)                    # d rho / d zeta_j
    dr_bar = np.conj(dr)                      # d rho / d zetabar_j (rho real)
    Hc = levi_matrix(d)                       # d^2 rho / d zeta_j d zetabar_k
    P = _pair(dr, zeta)
    dP_bar = np.einsum("...k,kj->...j", zeta, Hc)  # d P / d zetabar_j
    g = r * P / (1.0 + r)
    dg_bar = (
        dr_bar * (P / (1.0 + r))[..., None]
        + (r / (1.0 + r))[..., None] * dP_bar
        - (r * P / (1.0 + r) ** 2)[..., None] * dr_bar
    )
    shape = zeta.shape[:-1]
    M = np.empty(shape + (3, 3), dtype=complex)
    M[..., 0, 0] = g
    M[..., 0, 1:] = dr
    M[..., 1:, 0] = dg_bar
    M[..., 1:, 1:] = Hc
    return M


def density_det(d: DomainSpec, zeta):
    """Uncalibrated determinant of :func:`density_matrix`."""
    return _scalar(np.linalg.det(density_matrix(d, zeta)))


CALIBRATION_ORDERS = (8, 8, 8, 8)


@functools.lru_cache(maxsize=None)
def calibration_constant() -> float:
    """``c_2`` fixed so that constants are reproduced on the ball at ``z = 0``.

    The reproducing integral of ``f = 1`` at ``z = 0`` is
    ``c_2 int_ball det(...) dV`` because ``K-tilde(., 0) = 1``.
    """
    ball = DomainSpec.ball()
    total = integrate_volume(ball, lambda p: density_det(ball, p), QuadratureSpec(gauss_orders=CALIBRATION_ORDERS))
    return float(1.0 / total.real)


def density_h(d: DomainSpec, zeta):
    """Calibrated volume density ``c_2 det(...)`` at ``zeta != 0``."""
    return _scalar(calibration_constant() * np.asarray(density_det(d, zeta)))


# ---------------------------------------------------------------- sampling


def sample_uniform(d: DomainSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` points uniform in the (ellipsoidal) domain: Gaussian direction, ``U^(1/4)`` radius."""
    _require_smooth(d)
    g = rng.standard_normal((n, 4))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    g *= rng.random(n)[:, None] ** 0.25
    p = np.stack([g[:, 0] + 1j * g[:, 1], g[:, 2] + 1j * g[:, 3]], axis=-1)
    return p * np.asarray(d.axes)


def sweep_generator(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0x6B65726E, int(chunk)])))


def sample_pairs(d: DomainSpec, count: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """``count`` pairs from D x D; chunk ``c`` draws from stream ``(seed, c)`` so prefixes are nested."""
    zs, ws = [], []
    for c, lo in enumerate(range(0, count, SWEEP_CHUNK)):
        n = min(SWEEP_CHUNK, count - lo)
        rng = sweep_generator(seed, c)
        zs.append(sample_uniform(d, SWEEP_CHUNK, rng)[:n])
        ws.append(sample_uniform(d, SWEEP_CHUNK, rng)[:n])
    return np.concatenate(zs), np.concatenate(ws)


def ratio_values(d: DomainSpec, which: str, zeta, z) -> np.ndarray:
    if which == "B_vs_RHS":
        return np.abs(kernel_B(d, zeta, z)) / estimate_rhs(d, zeta, z)
    if which == "B_vs_K":
        return np.abs(kernel_B(d, zeta, z)) / np.abs(kernel_K(d, zeta, z))
    if which == "K_vs_Ktilde":
        return np.abs(kernel_K(d, zeta, z)) / np.abs(kernel_K_tilde(d, zeta, z))
    raise ValueError(f"unknown ratio {which!r}; choose one of {RATIOS}")


@dataclass
class KernelSampleReport:
    domain: DomainSpec
    which: str
    sample_count: int
    min_ratio: float
    max_ratio: float
    mean_ratio: float
    seed: int
    masked: int = 0
    origin_mask: float = ORIGIN_MASK
    diagonal_mask: float = DIAGONAL_MASK
    extras: dict = field(default_factory=dict)

    @property
    def spread(self) -> float:
        return self.max_ratio / self.min_ratio

    def to_dict(self) -> dict:
        return {
            "domain": self.domain.to_dict(),
            "which": self.which,
            "sample_count": self.sample_count,
            "min_ratio": self.min_ratio,
            "max_ratio": self.max_ratio,
            "mean_ratio": self.mean_ratio,
            "spread": self.spread,
            "seed": self.seed,
            "masked": self.masked,
            "origin_mask": self.origin_mask,
            "diagonal_mask": self.diagonal_mask,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["domain", "which", "statistic", "value"])
        for key in ("sample_count", "min_ratio", "max_ratio", "mean_ratio", "spread", "masked", "seed",
                    "origin_mask", "diagonal_mask"):
            w.writerow([str(self.domain), self.which, key, getattr(self, key)])
        return buf.getvalue()


def ratio_sweep(d: DomainSpec, which: str, count: int, seed: int = 0) -> KernelSampleReport:
    """Distribution of a kernel ratio over ``count`` uniform pairs in D x D.

    Pairs with ``||zeta|| < 1e-3``, or with ``||zeta - z|| < 1e-6`` and
    ``|rho(zeta)| < 1e-6``, are masked out before the statistics are taken.
    """
    _require_smooth(d)
    if which not in RATIOS:
        raise ValueError(f"unknown ratio {which!r}; choose one of {RATIOS}")
    if count < 100:
        raise ValueError("ratio_sweep needs count >= 100")
    zeta, z = sample_pairs(d, count, seed)
    near0 = np.linalg.norm(zeta, axis=-1) < ORIGIN_MASK
    diag = (np.linalg.norm(zeta - z, axis=-1) < DIAGONAL_MASK) & (np.abs(_rho(d, zeta)) < DIAGONAL_MASK)
    keep = ~(near0 | diag)
    if np.count_nonzero(keep) < 2:
        raise ValueError("degenerate sample set: fewer than two unmasked pairs")
    vals = ratio_values(d, which, zeta[keep], z[keep])
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise ValueError("degenerate sample set: non-finite or non-positive ratio")
    return KernelSampleReport(
        domain=d,
        which=which,
        sample_count=int(count),
        min_ratio=float(vals.min()),
        max_ratio=float(vals.max()),
        mean_ratio=float(vals.mean()),
        seed=int(seed),
        masked=int(count - np.count_nonzero(keep)),
    )


def ratio_bound_ball() -> tuple[float, float]:
    """Analytic range of ``|B| / RHS`` on the closed ball: ``[1/sqrt(5), 1)``."""
    return 1.0 / math.sqrt(5.0), 1.0
