"""Interval-uncertain fractional-order plants.

An uncertain plant is described by elementwise interval bounds on its state
and input matrices.  The bounds are split into a midpoint plus a structured
radius factorization ``A = A0 + M_A F_A R_A`` with ``F_A`` diagonal and
bounded by the unit box, which is the form the synthesis LMIs consume.
Vertex enumeration and uniform sampling of the unit box support a
posteriori certification sweeps.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundViolationError,
    OutOfUnitBoxError,
    TooManyVerticesError,
)
from .linalg import as_matrix

MAX_VERTICES = 2 ** 24


@dataclass(frozen=True)
class IntervalMatrix:
    """Elementwise interval [lower, upper] over a real matrix."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_matrix(self.lower, "lower")
        hi = as_matrix(self.upper, "upper")
        if lo.shape != hi.shape:
            raise BoundViolationError(
                f"interval bound shapes differ: {lo.shape} vs {hi.shape}"
            )
        if np.any(lo > hi):
            raise BoundViolationError("interval bound: lower > upper somewhere")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def shape(self):
        return self.lower.shape

    @classmethod
    def certain(cls, m):
        """Degenerate interval containing exactly one matrix."""
        a = as_matrix(m)
        return cls(a.copy(), a.copy())


@dataclass(frozen=True)
class UncertainFoltiSystem:
    """Fractional-order plant D^alpha x = A x + B u, y = C x with interval
    A (n x n) and B (n x l) and a certain output matrix C (m x n)."""

    alpha: float
    a: IntervalMatrix
    b: IntervalMatrix
    c: np.ndarray

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        c = as_matrix(self.c, "c")
        n = self.a.shape[0]
        if self.a.shape != (n, n):
            raise ValueError(f"A interval must be square, got {self.a.shape}")
        if self.b.shape[0] != n:
            raise ValueError(
                f"B interval has {self.b.shape[0]} rows, expected {n}"
            )
        if c.shape[1] != n:
            raise ValueError(f"C has {c.shape[1]} columns, expected {n}")
        object.__setattr__(self, "c", c)

    @property
    def n(self):
        return self.a.shape[0]

    @property
    def l(self):
        return self.b.shape[1]

    @property
    def m(self):
        return self.c.shape[0]


@dataclass(frozen=True)
class UncertaintyFactors:
    """Midpoint/radius data for an uncertain plant.

    ``m_a`` is n x n^2 and ``r_a`` is n^2 x n with the (i, j) radius entries
    laid out row-major, so ``m_a @ diag(f) @ r_a`` perturbs entry (i, j) by
    ``f[(i, j)] * delta_a[i, j]``.  The B factors are analogous with shapes
    n x (n*l) and (n*l) x l.
    """

    a0: np.ndarray
    delta_a: np.ndarray
    m_a: np.ndarray
    r_a: np.ndarray
    b0: np.ndarray
    delta_b: np.ndarray
    m_b: np.ndarray
    r_b: np.ndarray

    @property
    def n(self):
        return self.a0.shape[0]

    @property
    def l(self):
        return self.b0.shape[1]

    @property
    def is_certain(self):
        return not (np.any(self.delta_a > 0) or np.any(self.delta_b > 0))


@dataclass(frozen=True)
class UncertaintyRealization:
    """Diagonal scalings in [-1, 1] picking one plant from the family."""

    f_a: np.ndarray
    f_b: np.ndarray

    def __post_init__(self):
        fa = np.asarray(self.f_a, dtype=float).reshape(-1)
        fb = np.asarray(self.f_b, dtype=float).reshape(-1)
        if (fa.size and np.abs(fa).max() > 1.0 + 1e-12) or (
            fb.size and np.abs(fb).max() > 1.0 + 1e-12
        ):
            raise OutOfUnitBoxError("realization entry outside [-1, 1]")
        object.__setattr__(self, "f_a", fa)
        object.__setattr__(self, "f_b", fb)


def _radius_factors(delta, unit_dim):
    """Build the (M, R) pair for one radius matrix.

    Columns of M are sqrt(radius) times state-space unit vectors e_i; rows
    of R are sqrt(radius) times e_j in a ``unit_dim``-dimensional space,
    both in row-major (i, j) order.  Zero radii keep their (zero) columns so
    shapes stay exactly n x (rows*cols) and (rows*cols) x unit_dim.
    """
    rows, cols = delta.shape
    m = np.zeros((rows, rows * cols))
    r = np.zeros((rows * cols, unit_dim))
    for i in range(rows):
        for j in range(cols):
            k = i * cols + j
            s = np.sqrt(delta[i, j])
            m[i, k] = s
            r[k, j] = s
    return m, r


def decompose(sys):
    """Midpoint/radius decomposition plus the structured factorization.

    Returns an :class:`UncertaintyFactors` with ``a0 = (lower+upper)/2``,
    ``delta_a = (upper-lower)/2`` and factors satisfying
    ``m_a @ r_a == delta_a`` exactly (same for B).
    """
    a0 = 0.5 * (sys.a.lower + sys.a.upper)
    delta_a = 0.5 * (sys.a.upper - sys.a.lower)
    b0 = 0.5 * (sys.b.lower + sys.b.upper)
    delta_b = 0.5 * (sys.b.upper - sys.b.lower)
    m_a, r_a = _radius_factors(delta_a, sys.n)
    m_b, r_b = _radius_factors(delta_b, sys.l)
    return UncertaintyFactors(a0, delta_a, m_a, r_a, b0, delta_b, m_b, r_b)


def realize(factors, u):
    """Plant matrices (A, B) for one realization of the unit-box scalings."""
    fa = np.asarray(u.f_a, dtype=float)
    fb = np.asarray(u.f_b, dtype=float)
    if fa.shape != (factors.m_a.shape[1],):
        raise ValueError(
            f"f_a has length {fa.size}, expected {factors.m_a.shape[1]}"
        )
    if fb.shape != (factors.m_b.shape[1],):
        raise ValueError(
            f"f_b has length {fb.size}, expected {factors.m_b.shape[1]}"
        )
    a = factors.a0 + factors.m_a @ (fa[:, None] * factors.r_a)
    b = factors.b0 + factors.m_b @ (fb[:, None] * factors.r_b)
    return a, b


def center_realization(factors):
    """The all-zero realization (midpoint plant)."""
    return UncertaintyRealization(
        np.zeros(factors.m_a.shape[1]), np.zeros(factors.m_b.shape[1])
    )


def count_vertices(factors):
    """Number of sign-pattern vertices over the strictly positive radii."""
    nnz = int(np.count_nonzero(factors.delta_a > 0)) + int(
        np.count_nonzero(factors.delta_b > 0)
    )
    return 2 ** nnz


def enumerate_vertices(factors):
    """Yield every +/-1 sign pattern over the strictly positive radii.

    Zero-radius coordinates are pinned at 0 so each vertex of the interval
    family appears exactly once.  Raises :class:`TooManyVerticesError` when
    the count would exceed 2^24.
    """
    if count_vertices(factors) > MAX_VERTICES:
        raise TooManyVerticesError(
            f"{count_vertices(factors)} vertices exceed the 2^24 cap"
        )
    fa_flat = factors.delta_a.reshape(-1)
    fb_flat = factors.delta_b.reshape(-1)
    active = [("a", k) for k in range(fa_flat.size) if fa_flat[k] > 0]
    active += [("b", k) for k in range(fb_flat.size) if fb_flat[k] > 0]
    n_active = len(active)
    for pattern in range(2 ** n_active):
        fa = np.zeros(fa_flat.size)
        fb = np.zeros(fb_flat.size)
        for bit, (which, k) in enumerate(active):
            sign = 1.0 if (pattern >> bit) & 1 else -1.0
            if which == "a":
                fa[k] = sign
            else:
                fb[k] = sign
        yield UncertaintyRealization(fa, fb)


def sample_uniform(factors, count, seed):
    """``count`` i.i.d. uniform unit-box realizations from a fixed seed."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np.random.RandomState(seed)
    na = factors.m_a.shape[1]
    nb = factors.m_b.shape[1]
    out = []
    for _ in range(count):
        fa = rng.uniform(-1.0, 1.0, size=na)
        fb = rng.uniform(-1.0, 1.0, size=nb)
        out.append(UncertaintyRealization(fa, fb))
    return out
