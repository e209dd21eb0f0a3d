"""ADMM solver for the convex low-rank + sparse decomposition.

Minimizes  ||L||_* + gamma * ||E||_sparse  subject to X = L + E, where the
sparse penalty is entrywise l1 (the recovery-certified model), the sum of
tube l2 norms, or the sum of lateral-slice Frobenius norms.  The splitting
is the standard scaled two-block scheme: a tensor singular-value threshold
for L, a (block) soft threshold for E, dual ascent on the multiplier, and
geometric growth of the penalty up to a cap.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, MaxItersExceeded, ShapeMismatch
from .tensor import Tensor3, norm
from .tsvd import _tsvt_array, nuclear_norm, tnn_zhang, tsvt_prox

logger = logging.getLogger(__name__)

PENALTIES = ("l1", "tube_112", "slice_21")


def default_gamma(penalty: str, dims) -> float:
    """Suggested trade-off weight for each penalty.

    l1: 1/sqrt(max(N1, N2) * N3); tube_112: 1/max(N1, N2);
    slice_21: 1/log(N2) (natural log), which needs N2 >= 2.
    """
    n1, n2, n3 = (int(d) for d in dims)
    if penalty == "l1":
        return 1.0 / math.sqrt(max(n1, n2) * n3)
    if penalty == "tube_112":
        return 1.0 / max(n1, n2)
    if penalty == "slice_21":
        if n2 < 2:
            raise DomainError(f"slice_21 gamma needs N2 >= 2, got N2={n2}")
        return 1.0 / math.log(n2)
    raise DomainError(f"unknown penalty {penalty!r}; expected one of {PENALTIES}")


def _prox_l1(arr: np.ndarray, tau: float) -> np.ndarray:
    return np.sign(arr) * np.maximum(np.abs(arr) - tau, 0.0)


def _prox_tube(arr: np.ndarray, tau: float) -> np.ndarray:
    norms = np.sqrt((arr**2).sum(axis=2, keepdims=True))
    scale = np.maximum(1.0 - tau / np.where(norms > 0.0, norms, 1.0), 0.0)
    return arr * scale


def _prox_slice(arr: np.ndarray, tau: float) -> np.ndarray:
    norms = np.sqrt((arr**2).sum(axis=(0, 2), keepdims=True))
    scale = np.maximum(1.0 - tau / np.where(norms > 0.0, norms, 1.0), 0.0)
    return arr * scale


_PROX = {"l1": _prox_l1, "tube_112": _prox_tube, "slice_21": _prox_slice}


def prox_sparse(e: Tensor3, tau: float, penalty: str = "l1") -> Tensor3:
    """Proximal operator of tau times the selected sparse penalty.

    l1 soft-thresholds entries; tube_112 shrinks whole mode-3 tubes by their
    l2 norm; slice_21 shrinks whole lateral slices by their Frobenius norm.
    """
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    if penalty not in _PROX:
        raise DomainError(f"unknown penalty {penalty!r}; expected one of {PENALTIES}")
    if tau == 0.0:
        return e
    return Tensor3(_PROX[penalty](e.data, tau), copy=False)


def sparse_norm(e: Tensor3, penalty: str = "l1") -> float:
    """Value of the selected sparse penalty."""
    if penalty == "l1":
        return float(np.abs(e.data).sum())
    if penalty == "tube_112":
        return float(np.sqrt((e.data**2).sum(axis=2)).sum())
    if penalty == "slice_21":
        return float(np.sqrt((e.data**2).sum(axis=(0, 2))).sum())
    raise DomainError(f"unknown penalty {penalty!r}; expected one of {PENALTIES}")


def objective(l: Tensor3, e: Tensor3, gamma: float, penalty: str = "l1") -> float:
    """Objective of the convex program at (l, e).

    The l1 model uses the tensor nuclear norm; the tube and slice models are
    written against the slicewise-summed variant of the nuclear norm.
    """
    if l.dims != e.dims:
        raise ShapeMismatch(f"dims mismatch: {l.dims} vs {e.dims}")
    low = nuclear_norm(l) if penalty == "l1" else tnn_zhang(l)
    return low + gamma * sparse_norm(e, penalty)


@dataclass
class SolverConfig:
    """Knobs for the ADMM solve; gamma "auto" picks the suggested default."""

    gamma: float | str = "auto"
    penalty: str = "l1"
    rho0: float = 1e-3
    rho_scale: float = 1.1
    rho_max: float = 1e10
    tol: float = 1e-8
    max_iters: int = 500

    def __post_init__(self):
        if self.penalty not in PENALTIES:
            raise DomainError(f"unknown penalty {self.penalty!r}; expected one of {PENALTIES}")
        if self.gamma != "auto":
            self.gamma = float(self.gamma)
            if self.gamma <= 0:
                raise DomainError(f"gamma must be positive, got {self.gamma}")
        if self.rho0 <= 0 or self.rho_max < self.rho0:
            raise DomainError(f"need 0 < rho0 <= rho_max, got {self.rho0}, {self.rho_max}")
        if self.rho_scale <= 1.0:
            raise DomainError(f"rho_scale must exceed 1, got {self.rho_scale}")
        if self.tol <= 0:
            raise DomainError(f"tol must be positive, got {self.tol}")
        if self.max_iters < 1:
            raise DomainError(f"max_iters must be >= 1, got {self.max_iters}")

    def resolve_gamma(self, dims) -> float:
        return default_gamma(self.penalty, dims) if self.gamma == "auto" else self.gamma


@dataclass
class SolverResult:
    """Decomposition returned by :func:`rtpca`.

    ``primal_residual`` is ||X - L - E||_F / ||X||_F at exit.  The objective
    trace is informational; ADMM is not monotone, so no decrease is promised.
    """

    l: Tensor3
    e: Tensor3
    iterations: int
    primal_residual: float
    objective_trace: list[float] = field(default_factory=list)
    converged: bool = True


def rtpca(x: Tensor3, cfg: SolverConfig | None = None) -> SolverResult:
    """Split ``x`` into a low-tubal-rank part and a sparse part.

    Parameters
    ----------
    x : Tensor3
        Observed tensor X = L + E.
    cfg : SolverConfig, optional
        Solver configuration; defaults solve the l1 model at the suggested
        gamma with tolerance 1e-8.

    Returns
    -------
    SolverResult
        With L + E = X up to the reported relative primal residual.

    Raises
    ------
    MaxItersExceeded
        When the residual target is not met within ``cfg.max_iters``; the
        exception carries the partial result.
    """
    cfg = cfg or SolverConfig()
    gamma = cfg.resolve_gamma(x.dims)
    xa = x.data
    norm_x = float(np.linalg.norm(xa))

    l = np.zeros_like(xa)
    e = np.zeros_like(xa)
    y = np.zeros_like(xa)
    rho = cfg.rho0
    trace: list[float] = []
    prox = _PROX[cfg.penalty]

    res = 0.0
    iterations = 0
    for it in range(1, cfg.max_iters + 1):
        iterations = it
        l, l_nuclear = _tsvt_array(xa - e + y / rho, 1.0 / rho)
        e_prev = e
        e = prox(xa - l + y / rho, gamma / rho)
        r = xa - l - e
        y = y + rho * r

        res = float(np.linalg.norm(r))
        if norm_x > 0:
            res /= norm_x
        if cfg.penalty == "l1":
            trace.append(l_nuclear + gamma * float(np.abs(e).sum()))
        else:
            trace.append(
                tnn_zhang(Tensor3(l, copy=False))
                + gamma * sparse_norm(Tensor3(e, copy=False), cfg.penalty)
            )
        dual_res = rho * float(np.linalg.norm(e - e_prev))
        logger.debug(
            "iter %d rho %.3e primal %.3e dual %.3e obj %.6e",
            it, rho, res, dual_res, trace[-1],
        )
        rho = min(rho * cfg.rho_scale, cfg.rho_max)
        if res <= cfg.tol:
            break
    result = SolverResult(
        l=Tensor3(l, copy=False),
        e=Tensor3(e, copy=False),
        iterations=iterations,
        primal_residual=res,
        objective_trace=trace,
        converged=res <= cfg.tol,
    )
    if not result.converged:
        raise MaxItersExceeded(
            f"residual {res:.3e} above tol {cfg.tol:.1e} after {iterations} iterations",
            result,
        )
    return result
