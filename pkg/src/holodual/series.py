"""Sparse power series in two variables and the coefficient-space Bergman norms.

Coefficients may be stored directly (``terms``) or as ``(log|c|, arg c)``
pairs (``log_terms``).  The counterexample sequences overflow double range
by k ~ 40, so they only ever live in log form, either in a
:class:`CoefficientSeries` or as a vectorized :class:`DiagonalGenerator`.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.special import betaln, gammaln, logsumexp

LOG_ZERO = -math.inf


class SeriesFormatError(ValueError):
    """Malformed series JSON; ``lineno``/``colno`` locate the problem when known."""

    def __init__(self, msg, lineno=None, colno=None):
        self.lineno, self.colno = lineno, colno
        where = f" (line {lineno}, column {colno})" if lineno is not None else ""
        super().__init__(msg + where)


def _key(m) -> tuple[int, int]:
    m1, m2 = int(m[0]), int(m[1])
    if m1 < 0 or m2 < 0 or (m1, m2) != (m[0], m[1]):
        raise ValueError(f"multi-index must be a pair of nonnegative integers, got {m!r}")
    return (m1, m2)


@dataclass(frozen=True)
class CoefficientSeries:
    """Finite sparse series ``sum c_m z1^m1 z2^m2``."""

    terms: Mapping[tuple[int, int], complex] = field(default_factory=dict)
    log_terms: Mapping[tuple[int, int], tuple[float, float]] | None = None

    def __post_init__(self):
        terms = {_key(m): complex(c) for m, c in self.terms.items()}
        object.__setattr__(self, "terms", terms)
        if self.log_terms is not None:
            logs = {_key(m): (float(a), float(p)) for m, (a, p) in self.log_terms.items()}
            object.__setattr__(self, "log_terms", logs)
            for m, c in terms.items():
                if m not in logs:
                    raise ValueError(f"log_terms missing index {m} present in terms")
                la, ph = logs[m]
                ref = math.exp(la) * complex(math.cos(ph), math.sin(ph)) if la > LOG_ZERO else 0j
                if abs(ref - c) > 1e-9 * max(1.0, abs(c)):
                    raise ValueError(f"terms and log_terms disagree at {m}")

    @classmethod
    def zero(cls) -> CoefficientSeries:
        return cls({})

    @classmethod
    def monomial(cls, m, c: complex = 1.0) -> CoefficientSeries:
        return cls({_key(m): c})

    @classmethod
    def from_log(cls, log_terms: Mapping) -> CoefficientSeries:
        """Series carried only in log form; ``terms`` is filled where the value fits a double."""
        terms = {}
        for m, (la, ph) in log_terms.items():
            if la < 700.0:
                terms[m] = (math.exp(la) * complex(math.cos(ph), math.sin(ph))) if la > LOG_ZERO else 0j
        return cls(terms, dict(log_terms))

    def support(self) -> list[tuple[int, int]]:
        keys = set(self.terms)
        if self.log_terms is not None:
            keys |= set(self.log_terms)
        return sorted(keys)

    def is_zero(self) -> bool:
        return all(la == LOG_ZERO for la, _ in self.log_pairs().values())

    @property
    def degree(self) -> int:
        sup = [m for m, (la, _) in self.log_pairs().items() if la > LOG_ZERO]
        return max((m1 + m2 for m1, m2 in sup), default=-1)

    def log_pairs(self) -> dict[tuple[int, int], tuple[float, float]]:
        """``{m: (log|c_m|, arg c_m)}`` for every stored index."""
        if self.log_terms is not None:
            return dict(self.log_terms)
        out = {}
        for m, c in self.terms.items():
            out[m] = (math.log(abs(c)), math.atan2(c.imag, c.real)) if c != 0 else (LOG_ZERO, 0.0)
        return out

    def coefficient(self, m) -> complex:
        m = _key(m)
        if m in self.terms:
            return self.terms[m]
        if self.log_terms is not None and m in self.log_terms:
            la, ph = self.log_terms[m]
            return math.exp(la) * complex(math.cos(ph), math.sin(ph))
        return 0j

    def scale(self, lam: complex) -> CoefficientSeries:
        lam = complex(lam)
        if lam == 0:
            return CoefficientSeries({m: 0j for m in self.support()})
        if self.log_terms is None:
            return CoefficientSeries({m: lam * c for m, c in self.terms.items()})
        la0, ph0 = math.log(abs(lam)), math.atan2(lam.imag, lam.real)
        return CoefficientSeries.from_log({m: (la + la0, ph + ph0) for m, (la, ph) in self.log_terms.items()})

    def __call__(self, points) -> np.ndarray:
        """Evaluate at an ``(..., 2)`` array of points."""
        pts = np.asarray(points, dtype=complex)
        out = np.zeros(pts.shape[:-1], dtype=complex)
        z1, z2 = pts[..., 0], pts[..., 1]
        for (m1, m2) in self.support():
            c = self.coefficient((m1, m2))
            if c != 0:
                out = out + c * z1**m1 * z2**m2
        return out

    def to_dict(self) -> dict:
        data = {"terms": [{"m": list(m), "re": c.real, "im": c.imag} for m, c in sorted(self.terms.items())]}
        if self.log_terms is not None:
            data["log_terms"] = [
                {"m": list(m), "logmag": la, "phase": ph} for m, (la, ph) in sorted(self.log_terms.items())
            ]
        return data

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data) -> CoefficientSeries:
        if not isinstance(data, dict):
            raise SeriesFormatError("series JSON must be an object with 'terms' and/or 'log_terms'")
        unknown = set(data) - {"terms", "log_terms"}
        if unknown:
            raise SeriesFormatError(f"unknown series fields {sorted(unknown)}")
        try:
            terms = {}
            for i, t in enumerate(data.get("terms", [])):
                m = _key(t["m"])
                terms[m] = terms.get(m, 0j) + complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))
            logs = None
            if "log_terms" in data:
                logs = {_key(t["m"]): (float(t["logmag"]), float(t.get("phase", 0.0))) for t in data["log_terms"]}
        except (KeyError, TypeError, ValueError) as exc:
            raise SeriesFormatError(f"bad series term: {exc}") from None
        if logs is not None:
            for m in terms:
                logs.setdefault(m, (LOG_ZERO, 0.0))
            return cls.from_log(logs) if not terms else cls(terms, logs)
        return cls(terms)

    @classmethod
    def from_json(cls, text: str) -> CoefficientSeries:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SeriesFormatError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
        return cls.from_dict(data)


@dataclass(frozen=True)
class DiagonalGenerator:
    """Diagonal series ``sum_k c_k (z1 z2)^k`` given by vectorized log-magnitudes."""

    ks: np.ndarray
    logmag: np.ndarray
    phase: np.ndarray | float = 0.0

    def __post_init__(self):
        ks = np.asarray(self.ks, dtype=np.int64)
        logmag = np.asarray(self.logmag, dtype=float)
        if ks.shape != logmag.shape or ks.ndim != 1:
            raise ValueError("ks and logmag must be 1-D arrays of equal length")
        if np.any(np.diff(ks) <= 0) or (ks.size and ks[0] < 0):
            raise ValueError("ks must be strictly increasing and nonnegative")
        object.__setattr__(self, "ks", ks)
        object.__setattr__(self, "logmag", logmag)
        object.__setattr__(self, "phase", np.broadcast_to(np.asarray(self.phase, dtype=float), ks.shape))

    def to_series(self) -> CoefficientSeries:
        return CoefficientSeries.from_log(
            {(int(k), int(k)): (float(a), float(p)) for k, a, p in zip(self.ks, self.logmag, self.phase)}
        )


class Space(str, enum.Enum):
    A2_DIAMOND = "a2-diamond"
    A2_POLYDISC = "a2-polydisc"
    A2_PW = "a2-pw"


def _log_w_diamond(m1, m2):
    n = m1 + m2
    return math.log(4.0 * np.pi**2) + betaln(2 * m1 + 2, 2 * m2 + 2) - np.log(2 * n + 4)


def _log_w_polydisc(m1, m2):
    return 2.0 * math.log(np.pi) - np.log1p(m1) - np.log1p(m2)


def _log_w_pw(m1, m2):
    a = 2 * (m1 + m2) + 3.5
    return 2.0 * math.log(2.0 * np.pi) + gammaln(a) - a * math.log(2.0)


_LOG_WEIGHTS = {
    Space.A2_DIAMOND: _log_w_diamond,
    Space.A2_POLYDISC: _log_w_polydisc,
    Space.A2_PW: _log_w_pw,
}


@dataclass(frozen=True)
class NormWeightTable:
    """Per-index log-weights: ``||f||^2 = sum |c_m|^2 exp(log_weight(m))``."""

    space: Space
    log_weight: Callable

    def __call__(self, m1, m2):
        return self.log_weight(np.asarray(m1, dtype=float), np.asarray(m2, dtype=float))


def weight_table(space) -> NormWeightTable:
    space = Space(space)
    return NormWeightTable(space, _LOG_WEIGHTS[space])


def _weighted_log_terms(space, s) -> np.ndarray:
    table = weight_table(space)
    if isinstance(s, DiagonalGenerator):
        return 2.0 * s.logmag + table(s.ks, s.ks)
    pairs = s.log_pairs()
    if not pairs:
        return np.empty(0)
    ms = np.array(list(pairs), dtype=float)
    la = np.array([v[0] for v in pairs.values()])
    return 2.0 * la + table(ms[:, 0], ms[:, 1])


def norm2(space, s) -> float:
    """``log ||s||^2`` in the given space; ``LOG_ZERO`` (``-inf``) for the zero series."""
    terms = _weighted_log_terms(space, s)
    terms = terms[terms > LOG_ZERO]
    if terms.size == 0:
        return LOG_ZERO
    return float(logsumexp(terms))


def doubling_grid(kmax: int, start: int = 10) -> np.ndarray:
    grid = []
    K = start
    while K < kmax:
        grid.append(K)
        K *= 2
    grid.append(kmax)
    return np.array(grid, dtype=np.int64)


@dataclass
class MembershipResult:
    status: str  # converging | diverging | inconclusive
    grid: np.ndarray
    log_partial: np.ndarray
    increment_ratios: np.ndarray
    slope: float = math.nan
    intercept: float = math.nan
    r2: float = math.nan
    fit_from: int = 0

    @property
    def partial(self) -> np.ndarray:
        return np.exp(self.log_partial)

    def partial_at(self, K: int) -> float:
        idx = np.searchsorted(self.grid, K)
        if idx >= self.grid.size or self.grid[idx] != K:
            raise KeyError(f"K={K} not on the partial-sum grid")
        return float(np.exp(self.log_partial[idx]))

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "grid": self.grid.tolist(),
            "partial_sums": self.partial.tolist(),
            "increment_ratios": self.increment_ratios.tolist(),
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "fit_from": self.fit_from,
        }


GEOMETRIC_RATIO_MAX = 0.9
LOG_FIT_R2_MIN = 0.999
FIT_FROM = 100


def log_fit(K: np.ndarray, S: np.ndarray) -> tuple[float, float, float]:
    """Least-squares ``S = a ln K + b``; returns (a, b, R^2)."""
    x = np.log(K.astype(float))
    a, b = np.polyfit(x, S, 1)
    resid = S - (a * x + b)
    ss_tot = float(np.sum((S - S.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else math.nan
    return float(a), float(b), r2


def membership(space, gen: DiagonalGenerator, kmax: int, grid: np.ndarray | None = None) -> MembershipResult:
    """Classify the weighted series ``sum |c_k|^2 w_k`` from its partial sums.

    Partial sums are taken on a doubling grid.  The series is *converging*
    when the increments ``S(2K) - S(K)`` over the upper half of the grid
    shrink by a ratio of at most 0.9 per doubling, and *diverging* when
    ``S(K) = a ln K + b`` with ``a > 0`` and ``R^2 >= 0.999`` for ``K >= 100``.
    Anything else is reported as inconclusive.
    """
    if kmax < 100:
        raise ValueError("kmax must be >= 100")
    sel = gen.ks <= kmax
    ks = gen.ks[sel]
    terms = _weighted_log_terms(space, DiagonalGenerator(ks, gen.logmag[sel], gen.phase[sel]))
    grid = doubling_grid(kmax) if grid is None else np.asarray(grid, dtype=np.int64)
    if terms.size == 0 or np.all(terms == LOG_ZERO):
        zeros = np.full(grid.size, LOG_ZERO)
        return MembershipResult("converging", grid, zeros, np.zeros(max(grid.size - 2, 0)))
    cum = np.logaddexp.accumulate(terms)
    idx = np.searchsorted(ks, grid, side="right") - 1
    log_partial = np.where(idx >= 0, cum[np.clip(idx, 0, None)], LOG_ZERO)
    S = np.exp(log_partial)
    inc = np.diff(S)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = inc[1:] / inc[:-1]
    upper = ratios[ratios.size // 2 :]
    fit_mask = grid >= FIT_FROM
    a = b = r2 = math.nan
    if np.count_nonzero(fit_mask) >= 3:
        a, b, r2 = log_fit(grid[fit_mask], S[fit_mask])
    if upper.size and np.all(np.isfinite(upper)) and np.all(upper <= GEOMETRIC_RATIO_MAX):
        status = "converging"
    elif a > 0 and r2 >= LOG_FIT_R2_MIN:
        status = "diverging"
    else:
        status = "inconclusive"
    return MembershipResult(status, grid, log_partial, ratios, a, b, r2, FIT_FROM)
