"""Tangent-space geometry: the low-rank space T(L), the support space
Omega(E), their orthogonal projectors, and a numerical transversality gauge.

T(L) = {U * Y' + W * V'} at the skinny t-SVD of L; its projector acts as
P_T(A) = PU * A + A * PV - PU * A * PV with PU = U * U', PV = V * V'.
Omega(E) is the set of tensors supported inside support(E); its projector
is an entrywise mask.  The gauge estimates the operator norm of the
composition P_Omega o P_T, whose being < 1 witnesses that T and Omega
intersect only at zero.
"""

from __future__ import annotations

import numpy as np

from .errors import NonConvergence, ShapeMismatch
from .tensor import Tensor3, tprod, ttranspose
from .tsvd import tsvd_skinny


class TangentBasis:
    """Frame (U, V) of a tangent space at fixed tubal rank, with cached projectors."""

    __slots__ = ("u", "v", "_pu", "_pv")

    def __init__(self, u: Tensor3, v: Tensor3):
        if u.dims[1] != v.dims[1] or u.dims[2] != v.dims[2]:
            raise ShapeMismatch(f"incompatible frame dims {u.dims} and {v.dims}")
        self.u = u
        self.v = v
        self._pu = None
        self._pv = None

    @property
    def rank(self) -> int:
        return self.u.dims[1]

    @property
    def dims(self) -> tuple[int, int, int]:
        """Dims of the ambient tensors this space lives in."""
        return (self.u.dims[0], self.v.dims[0], self.u.dims[2])

    @property
    def pu(self) -> Tensor3:
        if self._pu is None:
            self._pu = tprod(self.u, ttranspose(self.u))
        return self._pu

    @property
    def pv(self) -> Tensor3:
        if self._pv is None:
            self._pv = tprod(self.v, ttranspose(self.v))
        return self._pv


def tangent_of(l: Tensor3, rank_tol: float | None = None) -> TangentBasis:
    """Tangent basis at ``l`` from its skinny t-SVD."""
    fac = tsvd_skinny(l, rank_tol)
    return TangentBasis(fac.u, fac.v)


def _split(t: TangentBasis, a: Tensor3) -> tuple[Tensor3, Tensor3]:
    """(P_T(A), P_T_perp(A)); the two parts sum to A exactly by construction."""
    if a.dims != t.dims:
        raise ShapeMismatch(f"tensor dims {a.dims} do not match tangent dims {t.dims}")
    # (I - PU) * A * (I - PV) through the skinny factors
    rest = a - tprod(t.u, tprod(ttranspose(t.u), a))
    perp = rest - tprod(tprod(rest, t.v), ttranspose(t.v))
    return a - perp, perp


def project_T(t: TangentBasis, a: Tensor3) -> Tensor3:
    """Orthogonal projection of ``a`` onto the tangent space."""
    return _split(t, a)[0]


def project_T_perp(t: TangentBasis, a: Tensor3) -> Tensor3:
    """Orthogonal projection onto the complement: (I - PU) * A * (I - PV)."""
    return _split(t, a)[1]


class SupportMask:
    """Boolean support with cached per-slice nonzero counts."""

    __slots__ = ("mask", "horizontal_counts", "lateral_counts")

    def __init__(self, mask):
        arr = np.ascontiguousarray(mask, dtype=bool)
        if arr.ndim != 3:
            raise ShapeMismatch(f"expected a 3-way mask, got {arr.ndim} axes")
        arr.setflags(write=False)
        self.mask = arr
        self.horizontal_counts = arr.sum(axis=(1, 2))  # per n1 slice
        self.lateral_counts = arr.sum(axis=(0, 2))  # per n2 slice

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.mask.shape

    @property
    def size(self) -> int:
        """Number of entries in the support."""
        return int(self.horizontal_counts.sum())

    def is_empty(self) -> bool:
        return self.size == 0

    def indicator(self) -> Tensor3:
        """0/1 tensor carrying the support."""
        return Tensor3(self.mask.astype(np.float64), copy=False)

    def __repr__(self):
        n1, n2, n3 = self.dims
        return f"SupportMask({n1}x{n2}x{n3}, {self.size} entries)"


def support_of(e: Tensor3, tol: float = 0.0) -> SupportMask:
    """Support of ``e`` at threshold ``tol``: entries with magnitude > tol."""
    if tol < 0:
        raise ValueError(f"tol must be nonnegative, got {tol}")
    return SupportMask(np.abs(e.data) > tol)


def sign_of(e: Tensor3) -> Tensor3:
    """Entrywise sign in {-1, 0, +1}."""
    return Tensor3(np.sign(e.data), copy=False)


def project_omega(m: SupportMask, a: Tensor3) -> Tensor3:
    """Zero out entries outside the support."""
    if a.dims != m.dims:
        raise ShapeMismatch(f"tensor dims {a.dims} do not match mask dims {m.dims}")
    return Tensor3(np.where(m.mask, a.data, 0.0), copy=False)


def project_omega_comp(m: SupportMask, a: Tensor3) -> Tensor3:
    """Zero out entries inside the support; complements :func:`project_omega` exactly."""
    if a.dims != m.dims:
        raise ShapeMismatch(f"tensor dims {a.dims} do not match mask dims {m.dims}")
    return Tensor3(np.where(m.mask, 0.0, a.data), copy=False)


def transversality_gauge(
    t: TangentBasis,
    m: SupportMask,
    iters: int = 500,
    tol: float = 1e-8,
    seed: int = 0,
) -> float:
    """Power-iteration estimate of the operator norm of P_Omega o P_T.

    Iterates the self-adjoint composition P_T P_Omega P_T from a seeded
    random start and returns the square root of the Rayleigh limit, clipped
    to [0, 1].  A value below 1 certifies that the tangent and support
    spaces intersect trivially; a value near 1 signals a nontrivial or
    near-tangent intersection.

    Raises NonConvergence when the Rayleigh quotient is still moving by more
    than ``tol`` (relatively) after ``iters`` iterations.
    """
    if iters < 1:
        raise ValueError(f"iters must be >= 1, got {iters}")
    if t.dims != m.dims:
        raise ShapeMismatch(f"tangent dims {t.dims} do not match mask dims {m.dims}")
    if t.rank == 0 or m.is_empty():
        return 0.0
    rng = np.random.default_rng(seed)
    y = Tensor3(rng.standard_normal(t.dims))
    y = (1.0 / np.linalg.norm(y.data)) * y
    lam_prev = None
    for _ in range(iters):
        z = project_T(t, project_omega(m, project_T(t, y)))
        lam = float(np.vdot(y.data, z.data))
        znorm = float(np.linalg.norm(z.data))
        if znorm <= 1e-300:
            return 0.0
        if lam_prev is not None and abs(lam - lam_prev) <= tol * max(abs(lam), 1e-30):
            return min(1.0, float(np.sqrt(max(lam, 0.0))))
        lam_prev = lam
        y = (1.0 / znorm) * z
    raise NonConvergence(
        f"transversality gauge: Rayleigh quotient still moving after {iters} iterations"
    )
