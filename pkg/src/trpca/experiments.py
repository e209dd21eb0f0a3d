"""Synthetic instance generation and the exact-recovery sweep harness.

Instances are pairs (L0, E0) with controlled tubal rank, incoherence and
support degree.  Low-rank factors come in two flavors: plain Gaussian, and
"flat" factors whose Fourier spectra have unit-modulus entries with random
phases.  Flat factors make every row of the singular spaces carry exactly
1/N of the energy, so a rank-1 instance has incoherence exactly 1/sqrt(N);
Gaussian factors land noticeably higher (about sqrt(2 log N / N) times a
chi-square fluctuation), which matters when chasing the 1/12 certification
threshold.
"""

from __future__ import annotations

import concurrent.futures
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasiblePattern, MaxItersExceeded, RankTooLarge, TrpcaError
from .tensor import Tensor3, norm, tprod, ttranspose
from .tsvd import tubal_rank
from .certify import build_report, gamma_interp, inc
from .solver import SolverConfig, rtpca

# Recovery counts as exact below this relative error: far above the solver
# tolerance, far below any meaningful signal.
SUCCESS_TOL = 1e-5

FACTOR_MODELS = ("gaussian", "flat")
MAGNITUDE_LAWS = ("rademacher", "ones", "gauss")


@dataclass(frozen=True)
class SparsePattern:
    """Sparse support recipe: kind "random" (m entries anywhere) or
    "capped" (entries placed so no horizontal/lateral slice exceeds ``deg``)."""

    kind: str
    count: int | None = None
    deg: int | None = None

    def __post_init__(self):
        if self.kind == "random":
            if self.count is None or self.count < 0:
                raise InfeasiblePattern(f"random pattern needs a count >= 0, got {self.count}")
        elif self.kind == "capped":
            if self.deg is None or self.deg < 1:
                raise InfeasiblePattern(f"capped pattern needs deg >= 1, got {self.deg}")
            if self.count is not None and self.count < 0:
                raise InfeasiblePattern(f"count must be >= 0, got {self.count}")
        else:
            raise InfeasiblePattern(f"unknown pattern kind {self.kind!r}")


def random_entries(m: int) -> SparsePattern:
    return SparsePattern("random", count=m)


def per_slice_capped(deg: int, count: int | None = None) -> SparsePattern:
    return SparsePattern("capped", count=count, deg=deg)


@dataclass(frozen=True)
class InstanceSpec:
    """Full recipe for one synthetic (L0, E0) pair."""

    dims: tuple[int, int, int]
    rank: int
    pattern: SparsePattern
    magnitude: str = "rademacher"
    factors: str = "gaussian"
    seed: int = 0


def _flat_factor(rng, n: int, r: int, n3: int) -> np.ndarray:
    """Factor whose Fourier tubes all have unit modulus (random phases)."""
    h = n3 // 2 + 1
    spec = np.empty((n, r, h), dtype=np.complex128)
    for k in range(h):
        if k == 0 or (n3 % 2 == 0 and k == h - 1):
            spec[:, :, k] = rng.choice([-1.0, 1.0], size=(n, r))
        else:
            spec[:, :, k] = np.exp(2j * np.pi * rng.random((n, r)))
    return np.fft.irfft(spec, n=n3, axis=2) * n3


def gen_low_tubal_rank(dims, rank: int, seed: int = 0, factors: str = "gaussian") -> Tensor3:
    """Random tensor of exact tubal rank ``rank`` as a product of two factors.

    ``factors`` selects the factor law: "gaussian" (standard normal) or
    "flat" (unit-modulus Fourier spectra; maximally incoherent).  The rank
    is verified post-generation rather than trusted from construction.
    """
    n1, n2, n3 = (int(d) for d in dims)
    if rank > min(n1, n2):
        raise RankTooLarge(f"rank {rank} exceeds min(N1, N2) = {min(n1, n2)}")
    if rank < 0:
        raise RankTooLarge(f"rank must be >= 0, got {rank}")
    if factors not in FACTOR_MODELS:
        raise ValueError(f"unknown factor model {factors!r}; expected one of {FACTOR_MODELS}")
    if rank == 0:
        return Tensor3.zeros((n1, n2, n3))
    rng = np.random.default_rng(seed)
    if factors == "flat":
        p = _flat_factor(rng, n1, rank, n3)
        q = _flat_factor(rng, n2, rank, n3)
    else:
        p = rng.standard_normal((n1, rank, n3))
        q = rng.standard_normal((n2, rank, n3))
    out = tprod(Tensor3(p, copy=False), ttranspose(Tensor3(q, copy=False)))
    got = tubal_rank(out)
    if got != rank:
        raise TrpcaError(f"generated tensor has tubal rank {got}, wanted {rank}")
    return out


def _draw_values(rng, count: int, magnitude: str) -> np.ndarray:
    if magnitude == "rademacher":
        return rng.choice([-1.0, 1.0], size=count)
    if magnitude == "ones":
        return np.ones(count)
    if magnitude == "gauss":
        return rng.standard_normal(count)
    raise ValueError(f"unknown magnitude law {magnitude!r}; expected one of {MAGNITUDE_LAWS}")


def gen_sparse(dims, pattern: SparsePattern, seed: int = 0, magnitude: str = "rademacher") -> Tensor3:
    """Sparse tensor on a generated support with the requested entry law.

    "random" places exactly ``count`` entries uniformly; "capped" fills up to
    ``count`` entries (default deg * min(N1, N2)) one at a time, only into
    cells whose horizontal and lateral slices are still below ``deg``
    nonzeros, so deg_bounds().deg_max <= deg holds by construction.
    """
    n1, n2, n3 = (int(d) for d in dims)
    total = n1 * n2 * n3
    rng = np.random.default_rng(seed)
    out = np.zeros((n1, n2, n3))

    if pattern.kind == "random":
        m = pattern.count
        if m > total:
            raise InfeasiblePattern(f"cannot place {m} entries in {total} cells")
        if m:
            flat = rng.choice(total, size=m, replace=False)
            out.ravel()[flat] = _draw_values(rng, m, magnitude)
        return Tensor3(out, copy=False)

    deg = pattern.deg
    count = pattern.count if pattern.count is not None else deg * min(n1, n2)
    cap = min(deg * n1, deg * n2, total)
    if count > cap:
        raise InfeasiblePattern(
            f"cannot place {count} entries with deg cap {deg} in dims {dims} (max {cap})"
        )
    h_counts = np.zeros(n1, dtype=int)
    l_counts = np.zeros(n2, dtype=int)
    used = np.zeros((n1, n2, n3), dtype=bool)
    placed = 0
    while placed < count:
        allowed = (~used) & (h_counts[:, None, None] < deg) & (l_counts[None, :, None] < deg)
        idx_flat = np.flatnonzero(allowed)
        if idx_flat.size == 0:
            raise InfeasiblePattern(
                f"support saturated after {placed} of {count} entries at deg cap {deg}"
            )
        pick = int(rng.choice(idx_flat))
        i, j, k = np.unravel_index(pick, (n1, n2, n3))
        used[i, j, k] = True
        h_counts[i] += 1
        l_counts[j] += 1
        placed += 1
    out[used] = _draw_values(rng, placed, magnitude)
    return Tensor3(out, copy=False)


def make_instance(spec: InstanceSpec) -> tuple[Tensor3, Tensor3, Tensor3]:
    """(L0, E0, X = L0 + E0) from a spec; generation is deterministic in the seed."""
    seq = np.random.SeedSequence((spec.seed, 0xBEEF))
    low_seed, sparse_seed = (int(s) for s in seq.generate_state(2))
    l0 = gen_low_tubal_rank(spec.dims, spec.rank, low_seed, spec.factors)
    e0 = gen_sparse(spec.dims, spec.pattern, sparse_seed, spec.magnitude)
    return l0, e0, l0 + e0


def gen_certified_instance(
    n: int = 256,
    n3: int = 3,
    seed: int = 0,
    max_tries: int = 20,
    inc_limit: float = 1.0 / 12.0,
):
    """Rank-1 instance with a single +-1 corrupted entry and inc below 1/12.

    Uses flat-spectrum factors (incoherence exactly 1/sqrt(n) for rank 1)
    and retries with fresh seeds until the measured incoherence clears the
    requested limit.
    """
    for attempt in range(max_tries):
        spec = InstanceSpec(
            dims=(n, n, n3),
            rank=1,
            pattern=random_entries(1),
            magnitude="rademacher",
            factors="flat",
            seed=seed + attempt,
        )
        l0, e0, x = make_instance(spec)
        inc_value = inc(l0)
        if inc_value < inc_limit:
            return l0, e0, x, inc_value
    raise TrpcaError(
        f"could not reach inc < {inc_limit:.4g} at n={n} in {max_tries} tries"
    )


@dataclass
class SweepCell:
    """One grid cell of a sweep: instance knobs, certificate summary, recovery errors."""

    rank: int
    sparsity: int
    gamma: float
    p: float | None
    inc: float
    mu: float
    deg_max: int
    cert_ok: bool
    dual_ok: bool | None
    err_l: float
    err_e: float
    success: bool
    seconds: float
    error: str | None = None


@dataclass
class SweepResult:
    cells: list[SweepCell] = field(default_factory=list)

    CSV_HEADER = "r,sparsity,gamma,p,inc,mu,deg_max,cert_ok,dual_ok,err_L,err_E,success,seconds"

    def to_csv(self, record_timing: bool = False) -> str:
        def fnum(x):
            if x is None or (isinstance(x, float) and np.isnan(x)):
                return "nan"
            return f"{x:.9g}"

        def fbool(x):
            if x is None:
                return ""
            return "true" if x else "false"

        lines = [self.CSV_HEADER]
        for c in self.cells:
            seconds = c.seconds if record_timing else 0.0
            lines.append(
                ",".join(
                    [
                        str(c.rank),
                        str(c.sparsity),
                        fnum(c.gamma),
                        "" if c.p is None else fnum(c.p),
                        fnum(c.inc),
                        fnum(c.mu),
                        str(c.deg_max),
                        fbool(c.cert_ok),
                        fbool(c.dual_ok),
                        fnum(c.err_l),
                        fnum(c.err_e),
                        fbool(c.success),
                        f"{seconds:.3f}",
                    ]
                )
            )
        return "\n".join(lines) + "\n"


def _rel_error(got: Tensor3, want: Tensor3, fallback: Tensor3) -> float:
    denom = norm(want, "fro")
    if denom == 0.0:
        denom = max(norm(fallback, "fro"), 1.0)
    return norm(got - want, "fro") / denom


def _run_cell(args):
    (rank, sparsity, gamma_axis, dims, pattern_kind, factors, magnitude,
     config, condition, with_dual, seed, idx) = args
    start = time.perf_counter()
    kind, value = gamma_axis
    p = value if kind == "p" else None
    cell = SweepCell(
        rank=rank,
        sparsity=sparsity,
        gamma=value if kind == "gamma" else float("nan"),
        p=p,
        inc=float("nan"),
        mu=float("nan"),
        deg_max=0,
        cert_ok=False,
        dual_ok=None,
        err_l=float("nan"),
        err_e=float("nan"),
        success=False,
        seconds=0.0,
    )
    cell_seed = int(np.random.SeedSequence((seed, idx)).generate_state(1)[0])
    pattern = (
        random_entries(sparsity) if pattern_kind == "random" else per_slice_capped(sparsity)
    )
    spec = InstanceSpec(dims, rank, pattern, magnitude, factors, cell_seed)
    try:
        l0, e0, x = make_instance(spec)
        report = None
        try:
            report = build_report(
                l0, e0, condition=condition, with_dual=with_dual, seed=cell_seed
            )
        except TrpcaError as exc:
            cell.error = f"certify: {exc}"  # rank-0 L0 has no certificate; keep solving
        if report is not None:
            cell.inc = report.inc
            cell.mu = report.mu
            cell.deg_max = report.deg_max
            cell.cert_ok = report.passes()
            cell.dual_ok = report.passes("dual") if with_dual else None
        if kind == "p":
            if report is None or report.mu <= 0:
                cell.error = cell.error or "gamma interpolation undefined (mu = 0)"
                cell.seconds = time.perf_counter() - start
                return cell
            cell.gamma = gamma_interp(report.xi_upper, report.mu, value)
        cfg = SolverConfig(
            gamma=cell.gamma,
            penalty=config.penalty,
            rho0=config.rho0,
            rho_scale=config.rho_scale,
            rho_max=config.rho_max,
            tol=config.tol,
            max_iters=config.max_iters,
        )
        try:
            res = rtpca(x, cfg)
        except MaxItersExceeded as exc:
            res = exc.result
        cell.err_l = _rel_error(res.l, l0, x)
        cell.err_e = _rel_error(res.e, e0, x)
        cell.success = cell.err_l <= SUCCESS_TOL
    except TrpcaError as exc:
        cell.error = str(exc)
    cell.seconds = time.perf_counter() - start
    return cell


def _worker_count() -> int:
    env = os.environ.get("RTPCA_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return 1


def run_sweep(
    dims,
    ranks,
    sparsities,
    gammas=None,
    ps=None,
    pattern_kind: str = "random",
    factors: str = "gaussian",
    magnitude: str = "rademacher",
    config: SolverConfig | None = None,
    condition: str = "thm3",
    with_dual: bool = False,
    seed: int = 0,
    out=None,
    record_timing: bool = False,
    workers: int | None = None,
) -> SweepResult:
    """Run the full grid (ranks x sparsities x gamma axis) and collect cells.

    Exactly one of ``gammas`` (explicit weights) and ``ps`` (interpolation
    exponents, converted per cell from its certificate quantities) must be
    given.  Per-cell failures are recorded in the cell, never raised.  Cells
    are merged in grid order regardless of worker scheduling, and the CSV is
    byte-stable for a fixed (dims, grid, seed, config) unless
    ``record_timing`` is set.
    """
    if (gammas is None) == (ps is None):
        raise ValueError("exactly one of gammas/ps must be provided")
    if pattern_kind not in ("random", "capped"):
        raise ValueError(f"unknown pattern kind {pattern_kind!r}")
    axis = [("gamma", float(g)) for g in gammas] if gammas is not None else [
        ("p", float(p)) for p in ps
    ]
    config = config or SolverConfig()
    dims = tuple(int(d) for d in dims)

    grid = []
    idx = 0
    for rank in ranks:
        for sparsity in sparsities:
            for gamma_axis in axis:
                grid.append(
                    (int(rank), int(sparsity), gamma_axis, dims, pattern_kind,
                     factors, magnitude, config, condition, with_dual, seed, idx)
                )
                idx += 1
    if not grid:
        raise ValueError("empty sweep grid")

    n_workers = workers if workers is not None else _worker_count()
    result = SweepResult()
    if n_workers <= 1:
        result.cells = [_run_cell(args) for args in grid]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=n_workers) as pool:
            result.cells = list(pool.map(_run_cell, grid))

    if out is not None:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(result.to_csv(record_timing=record_timing))
    return result
