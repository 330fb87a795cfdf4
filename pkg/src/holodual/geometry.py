"""Model domains in C^2 and the convex-geometric data attached to them.

Points are complex arrays whose last axis has length 2; every scalar field
below broadcasts over the leading axes, so a single point ``(z1, z2)`` and a
batch of shape ``(N, 2)`` go through the same code.

The smooth variants (ball, ellipsoid) carry closed-form expressions for the
holomorphic gradient of the Minkowski functional, the complex Hessian of
``rho = m**2 - 1`` and the map ``T_D``.  Finite differences appear only in
:func:`tmap_jacobian` and :func:`hessian_min_eig`, which are numerical
realizations by design.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

ORIGIN_TOL = 1e-12
BOUNDARY_SLACK = 1e-12

VARIANTS = ("ball", "ellipsoid", "diamond", "polydisc")
SMOOTH_VARIANTS = ("ball", "ellipsoid")


class GeometryError(ValueError):
    """Raised when a geometric operation is evaluated outside its domain."""


@dataclass(frozen=True)
class DomainSpec:
    """A model domain in C^2.

    ``axes`` is only meaningful for the ellipsoid; the ball is the ellipsoid
    with unit semi-axes and the diamond/polydisc are fixed.
    """

    variant: str
    axes: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown domain variant {self.variant!r}")
        axes = tuple(float(a) for a in self.axes)
        if len(axes) != 2 or not all(np.isfinite(a) and a > 0 for a in axes):
            raise ValueError(f"semi-axes must be two positive reals, got {self.axes!r}")
        if self.variant != "ellipsoid" and axes != (1.0, 1.0):
            raise ValueError(f"{self.variant} takes no semi-axes")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def ball(cls) -> DomainSpec:
        return cls("ball")

    @classmethod
    def ellipsoid(cls, a1: float, a2: float) -> DomainSpec:
        return cls("ellipsoid", (a1, a2))

    @classmethod
    def diamond(cls) -> DomainSpec:
        return cls("diamond")

    @classmethod
    def polydisc(cls) -> DomainSpec:
        return cls("polydisc")

    @property
    def is_smooth(self) -> bool:
        return self.variant in SMOOTH_VARIANTS

    @property
    def is_ellipsoidal(self) -> bool:
        return self.variant in SMOOTH_VARIANTS

    def volume(self) -> float:
        """Closed-form Lebesgue volume."""
        if self.is_ellipsoidal:
            a1, a2 = self.axes
            return np.pi**2 * (a1 * a2) ** 2 / 2.0
        if self.variant == "polydisc":
            return np.pi**2
        return np.pi**2 / 6.0

    def to_dict(self) -> dict:
        if self.variant == "ellipsoid":
            return {"variant": "ellipsoid", "axes": list(self.axes)}
        return {"variant": self.variant}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> DomainSpec:
        variant = data.get("variant")
        if variant == "ellipsoid":
            return cls("ellipsoid", tuple(data["axes"]))
        return cls(variant)

    @classmethod
    def from_json(cls, text: str) -> DomainSpec:
        return cls.from_dict(json.loads(text))

    @classmethod
    def parse(cls, text: str) -> DomainSpec:
        """Parse the CLI form: ``ball``, ``diamond``, ``polydisc``, ``ellipsoid:1,2``."""
        name, _, rest = text.strip().lower().partition(":")
        if name == "ellipsoid":
            try:
                a1, a2 = (float(t) for t in rest.split(","))
            except ValueError:
                raise ValueError(f"ellipsoid needs two semi-axes, e.g. 'ellipsoid:1,2' (got {text!r})")
            return cls.ellipsoid(a1, a2)
        if rest:
            raise ValueError(f"{name} takes no parameters (got {text!r})")
        return cls(name)

    def __str__(self):
        if self.variant == "ellipsoid":
            return f"ellipsoid({self.axes[0]:g},{self.axes[1]:g})"
        return self.variant


def as_points(p) -> np.ndarray:
    arr = np.asarray(p, dtype=complex)
    if arr.ndim == 0 or arr.shape[-1] != 2:
        raise ValueError(f"points must have a trailing axis of length 2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point coordinates must be finite")
    return arr


def _scalar(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def _require_smooth(d: DomainSpec):
    if not d.is_smooth:
        raise GeometryError(f"operation requires a smooth domain (ball/ellipsoid), got {d}")


def pairing(zeta, z):
    """Bilinear pairing <zeta, z> = zeta_1 z_1 + zeta_2 z_2."""
    return _scalar(np.sum(as_points(zeta) * as_points(z), axis=-1))


def to_real(p) -> np.ndarray:
    """(z1, z2) -> (x1, y1, x2, y2)."""
    p = as_points(p)
    return np.stack([p[..., 0].real, p[..., 0].imag, p[..., 1].real, p[..., 1].imag], axis=-1)


def from_real(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.stack([x[..., 0] + 1j * x[..., 1], x[..., 2] + 1j * x[..., 3]], axis=-1)


def _minkowski(d: DomainSpec, p: np.ndarray) -> np.ndarray:
    m1, m2 = np.abs(p[..., 0]), np.abs(p[..., 1])
    if d.is_ellipsoidal:
        a1, a2 = d.axes
        return np.hypot(m1 / a1, m2 / a2)
    if d.variant == "diamond":
        return m1 + m2
    return np.maximum(m1, m2)


def minkowski(d: DomainSpec, p):
    """Gauge of ``d``: ``p`` lies in ``d`` iff the result is < 1."""
    return _scalar(_minkowski(d, as_points(p)))


def support(d: DomainSpec, z):
    """Support function ``sup_{zeta in d} Re<zeta, z>``."""
    z = as_points(z)
    m1, m2 = np.abs(z[..., 0]), np.abs(z[..., 1])
    if d.is_ellipsoidal:
        a1, a2 = d.axes
        out = np.hypot(a1 * m1, a2 * m2)
    elif d.variant == "diamond":
        out = np.maximum(m1, m2)
    else:
        out = m1 + m2
    return _scalar(out)


def dual_domain(d: DomainSpec) -> DomainSpec:
    """Interior of the dual complement, ``{z : support(d, z) < 1}``."""
    if d.variant == "ball":
        return d
    if d.variant == "ellipsoid":
        a1, a2 = d.axes
        return DomainSpec.ellipsoid(1.0 / a1, 1.0 / a2)
    if d.variant == "diamond":
        return DomainSpec.polydisc()
    return DomainSpec.diamond()


def _inv_axes2(d: DomainSpec) -> np.ndarray:
    return 1.0 / np.asarray(d.axes) ** 2


def _grad_minkowski(d: DomainSpec, p: np.ndarray) -> np.ndarray:
    m = _minkowski(d, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.conj(p) * _inv_axes2(d) / (2.0 * m[..., None])


def grad_minkowski(d: DomainSpec, p):
    """Holomorphic gradient ``(dm/dzeta_1, dm/dzeta_2)``.

    Satisfies Euler's identity ``Re<2 grad m(p), p> = m(p)``.
    """
    _require_smooth(d)
    p = as_points(p)
    if np.any(np.linalg.norm(p, axis=-1) < ORIGIN_TOL):
        raise GeometryError("gradient undefined at 0")
    return _grad_minkowski(d, p)


def grad_rho(d: DomainSpec, p) -> np.ndarray:
    """Holomorphic gradient of ``rho = m**2 - 1``; equals ``2 m grad m`` and is smooth at 0."""
    _require_smooth(d)
    return np.conj(as_points(p)) * _inv_axes2(d)


def levi_matrix(d: DomainSpec) -> np.ndarray:
    """Complex Hessian ``d^2 rho / dzeta_j dzetabar_k`` (constant for ellipsoids)."""
    _require_smooth(d)
    return np.diag(_inv_axes2(d)).astype(complex)


def rho(d: DomainSpec, p):
    """Defining function ``m**2 - 1``."""
    _require_smooth(d)
    return _scalar(_minkowski(d, as_points(p)) ** 2 - 1.0)


def _tmap(d: DomainSpec, p: np.ndarray) -> np.ndarray:
    m = _minkowski(d, p)
    grad = _grad_minkowski(d, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = np.sum(grad * p, axis=-1)
        out = (m**2 / denom)[..., None] * grad
    near0 = np.linalg.norm(p, axis=-1) < ORIGIN_TOL
    return np.where(near0[..., None], 0.0, out)


def tmap(d: DomainSpec, p):
    """The map ``T_D(p) = m^2 grad m / <grad m, p>`` from ``d`` onto its dual, with ``T_D(0) = 0``."""
    _require_smooth(d)
    p = as_points(p)
    if np.any(_minkowski(d, p) > 1.0 + BOUNDARY_SLACK):
        raise GeometryError("point not in domain")
    return _tmap(d, p)


def tmap_jacobian(d: DomainSpec, p, h: float = 1e-6):
    """Absolute determinant of the real 4x4 Jacobian of ``T_D`` by central differences.

    Broadcasts over leading axes of ``p``. This is the numerical stand-in for
    the change-of-variables density between ``d`` and its dual.
    """
    _require_smooth(d)
    if not 1e-8 <= h <= 1e-4:
        raise ValueError(f"step h={h} outside [1e-8, 1e-4]")
    p = as_points(p)
    m = _minkowski(d, p)
    if np.any(m >= 1.0) or np.any(m <= 0.0):
        raise GeometryError("point not in domain (need 0 < m_D(p) < 1)")
    if np.any(np.linalg.norm(p, axis=-1) <= 2.0 * h):
        raise GeometryError("step too large for point")
    x = to_real(p)
    cols = []
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        fwd = to_real(_tmap(d, from_real(x + e)))
        bwd = to_real(_tmap(d, from_real(x - e)))
        cols.append((fwd - bwd) / (2.0 * h))
    jac = np.stack(cols, axis=-1)
    return _scalar(np.abs(np.linalg.det(jac)))


def real_hessian_rho(d: DomainSpec, p, h: float = 1e-5) -> np.ndarray:
    """Symmetrized central-difference Hessian of ``rho`` in real coordinates (x1, y1, x2, y2)."""
    _require_smooth(d)
    x0 = to_real(as_points(p))
    if x0.ndim != 1:
        raise ValueError("real_hessian_rho takes a single point")

    def f(x):
        return _minkowski(d, from_real(x)) ** 2 - 1.0

    eye = np.eye(4) * h
    hess = np.empty((4, 4))
    f0 = f(x0)
    for i in range(4):
        hess[i, i] = (f(x0 + eye[i]) - 2.0 * f0 + f(x0 - eye[i])) / h**2
        for j in range(i + 1, 4):
            val = (
                f(x0 + eye[i] + eye[j])
                - f(x0 + eye[i] - eye[j])
                - f(x0 - eye[i] + eye[j])
                + f(x0 - eye[i] - eye[j])
            ) / (4.0 * h**2)
            hess[i, j] = hess[j, i] = val
    return 0.5 * (hess + hess.T)


def hessian_min_eig(d: DomainSpec, p) -> float:
    """Smallest eigenvalue of the real Hessian of ``rho`` at ``p != 0``."""
    p = as_points(p)
    if np.linalg.norm(p) < ORIGIN_TOL:
        raise GeometryError("Hessian of rho is not defined at 0")
    return float(np.linalg.eigvalsh(real_hessian_rho(d, p))[0])
