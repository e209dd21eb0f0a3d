"""Deterministic exact-recovery certificates.

Quantifies how identifiable a low-rank + sparse pair (L0, E0) is:

* ``inc``/``beta_incoherence`` measure alignment of the low-rank tensor
  spaces with the coordinate axes;
* ``mu_exact`` measures support concentration exactly (spectral norm of the
  0/1 support indicator, via the Perron-Frobenius reduction);
* the tangent-space sparsity gauge xi is not computable in closed form, so
  we ship its analytic sandwich [inc/sqrt(N3), 2*inc] plus a certified
  sampled lower bound, and let all recovery logic consume the conservative
  upper bound;
* ``gamma_range_*`` give the trade-off intervals under which the convex
  program provably recovers (L0, E0);
* ``dual_certificate`` runs the constructive two-step fixed point over
  T + Omega and verifies the strict dual feasibility margins.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NonConvergence, NotAProjector, ShapeMismatch, ZeroTensor
from .tensor import Tensor3, norm, tprod, ttranspose
from .tsvd import spectral_norm, tsvd_skinny
from .tangent import (
    SupportMask,
    TangentBasis,
    project_T,
    project_T_perp,
    project_omega,
    project_omega_comp,
    sign_of,
    support_of,
    tangent_of,
    transversality_gauge,
)

# Strict-inequality margin on both dual slacks before a certificate counts.
CERT_MARGIN = 1e-7
# Margin below 1 for the transversality gauge.
GAUGE_MARGIN = 1e-6

THM3_LIMIT = 1.0 / 6.0
COR3_LIMIT = 1.0 / 12.0


def beta_incoherence(p: Tensor3, idem_tol: float = 1e-6) -> float:
    """Coordinate alignment of a projector: max_n of ||P * e_n||_F.

    ``p`` must be an orthogonal projector (square, idempotent under the
    t-product); NotAProjector is raised when the idempotence residual
    exceeds ``idem_tol`` relative to max(1, ||P||_F).  The t-product of a
    projector with the n-th column basis is its n-th lateral slice, so the
    maximum runs over lateral-slice Frobenius norms.
    """
    n1, n2, _ = p.dims
    if n1 != n2:
        raise ShapeMismatch(f"projector must be square, got {p.dims}")
    residual = norm(tprod(p, p) - p, "fro")
    if residual > idem_tol * max(1.0, norm(p, "fro")):
        raise NotAProjector(f"idempotence residual {residual:.3e} exceeds {idem_tol:.1e}")
    if p.data.size == 0:
        return 0.0
    slice_norms = np.sqrt((p.data**2).sum(axis=(0, 2)))
    return float(slice_norms.max())


def beta_spans(l: Tensor3) -> tuple[float, float]:
    """(beta(span U), beta(span V)) from the skinny t-SVD of ``l``."""
    if norm(l, "fro") == 0.0:
        raise ZeroTensor("incoherence undefined for the zero tensor")
    fac = tsvd_skinny(l)
    pu = tprod(fac.u, ttranspose(fac.u))
    pv = tprod(fac.v, ttranspose(fac.v))
    return beta_incoherence(pu), beta_incoherence(pv)


def inc(l: Tensor3) -> float:
    """Incoherence of the low-rank tensor spaces: max of the two span betas."""
    return max(beta_spans(l))


def deg_bounds(m: SupportMask) -> tuple[int, int]:
    """(deg_min, deg_max): extremes of nonzero counts over horizontal and lateral slices."""
    counts = np.concatenate([m.horizontal_counts, m.lateral_counts])
    if counts.size == 0:
        return 0, 0
    return int(counts.min()), int(counts.max())


def mu_exact(m: SupportMask) -> float:
    """Support concentration, computed exactly as the spectral norm of the indicator."""
    return spectral_norm(m.indicator())


def xi_bounds(l: Tensor3) -> tuple[float, float]:
    """Analytic sandwich for the tangent-space sparsity: (inc/sqrt(N3), 2*inc)."""
    v = inc(l)
    return v / np.sqrt(l.dims[2]), 2.0 * v


def _normalized_column_candidate(p: Tensor3, out_dims) -> Tensor3 | None:
    """Tangent-space member achieving the analytic lower bound.

    Takes the widest lateral slice x of the projector ``p``, normalizes each
    of its Fourier slices to a unit column, and embeds the result as the
    first lateral slice of an ``out_dims`` tensor.  By construction the
    candidate lies in the span of ``p`` with spectral norm exactly 1, and a
    Cauchy-Schwarz argument shows its infinity norm is at least
    beta(p)/sqrt(N3).
    """
    n, _, n3 = p.dims
    slice_norms = np.sqrt((p.data**2).sum(axis=(0, 2)))
    if slice_norms.max(initial=0.0) <= 0.0:
        return None
    x = p.data[:, int(np.argmax(slice_norms)), :]  # (n, n3)
    fx = np.fft.fft(x, axis=1)
    col_norms = np.linalg.norm(fx, axis=0)
    nonzero = col_norms > 1e-300
    if not nonzero.any():
        return None
    fx = fx / np.where(nonzero, col_norms, 1.0)
    fx[:, ~nonzero] = 0.0
    tube = np.fft.ifft(fx, axis=1)
    out = np.zeros(out_dims)
    out[: tube.shape[0], 0, :] = tube.real
    return Tensor3(out, copy=False)


def _xi_estimate(basis: TangentBasis, samples: int, iters: int, seed: int) -> float:
    if basis.rank == 0:
        return 0.0
    dims = basis.dims
    rng = np.random.default_rng(seed)

    def feasible_value(candidate: Tensor3) -> float:
        sigma = spectral_norm(candidate)
        if sigma <= 0.0:
            return 0.0
        return norm(candidate, "linf") / sigma

    best = 0.0
    best_tensor = None

    # certified candidates: per-Fourier-slice normalized projector columns
    # reach beta/sqrt(N3) on each side, hence inc/sqrt(N3) overall
    candidates = []
    cand_u = _normalized_column_candidate(basis.pu, dims)
    if cand_u is not None:
        candidates.append(cand_u)
    cand_v = _normalized_column_candidate(basis.pv, (dims[1], dims[0], dims[2]))
    if cand_v is not None:
        candidates.append(ttranspose(cand_v))
    for cand in candidates:
        val = feasible_value(cand)
        if val > best:
            best, best_tensor = val, cand

    # random probes of the tangent space
    for _ in range(samples):
        g = Tensor3(rng.standard_normal(dims), copy=False)
        cand = project_T(basis, g)
        val = feasible_value(cand)
        if val > best:
            best, best_tensor = val, cand

    # local ascent: re-project the best coordinate direction
    for _ in range(iters):
        if best_tensor is None:
            break
        idx = np.unravel_index(np.argmax(np.abs(best_tensor.data)), dims)
        spike = np.zeros(dims)
        spike[idx] = 1.0
        cand = project_T(basis, Tensor3(spike, copy=False))
        val = feasible_value(cand)
        if val <= best + 1e-12:
            break
        best, best_tensor = val, cand
    return best


def xi_lower_estimate(l: Tensor3, samples: int = 16, iters: int = 8, seed: int = 0) -> float:
    """Sampled lower bound on the tangent-space sparsity gauge xi.

    Every candidate is an explicit member of T(l) scaled to unit spectral
    norm, so the returned value is a true lower bound; the deterministic
    projector-column candidate guarantees it is at least inc/sqrt(N3) up to
    roundoff.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    return _xi_estimate(tangent_of(l), samples, iters, seed)


def gamma_range_thm3(xi: float, mu: float) -> tuple[float, float] | None:
    """Recovery interval (lo, hi) for gamma when xi * mu < 1/6, else None."""
    if xi <= 0.0 or mu <= 0.0 or xi * mu >= THM3_LIMIT:
        return None
    return xi / (1.0 - 4.0 * xi * mu), (1.0 - 3.0 * xi * mu) / mu


def gamma_interp(xi: float, mu: float, p: float) -> float:
    """Interpolated gamma = (3*xi)^p / (2*mu)^(1-p); in the recovery range for xi*mu < 1/6."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if xi <= 0.0 or mu <= 0.0:
        raise DomainError(f"xi and mu must be positive, got xi={xi}, mu={mu}")
    return (3.0 * xi) ** p / (2.0 * mu) ** (1.0 - p)


def gamma_range_cor3(inc_value: float, deg_max: float) -> tuple[float, float] | None:
    """Recovery interval from incoherence and slice degree when inc * deg_max < 1/12."""
    if inc_value <= 0.0 or deg_max < 1 or inc_value * deg_max >= COR3_LIMIT:
        return None
    prod = inc_value * deg_max
    return 2.0 * inc_value / (1.0 - 8.0 * prod), (1.0 - prod) / deg_max


def uncertainty_audit(a: Tensor3) -> tuple[float, bool]:
    """Rank-sparsity uncertainty product for a single tensor.

    Computes 2 * inc(A) * mu(support(A)), which upper-bounds xi(A) * mu(A)
    and therefore must always be at least 1 for nonzero A.  Returns the
    product and whether it clears 1 - 1e-9.
    """
    if norm(a, "fro") == 0.0:
        raise ZeroTensor("uncertainty product undefined for the zero tensor")
    value = 2.0 * inc(a) * mu_exact(support_of(a, 0.0))
    return value, value >= 1.0 - 1e-9


@dataclass
class DualCertificate:
    """Constructed dual with its strict-feasibility margins.

    At the fixed point, the projection of q onto T equals U * V' and its
    projection onto Omega equals gamma * sign(E0) by construction; the two
    slack fields report how strictly the remaining inequality conditions
    hold (both must be positive for a certificate).
    """

    q: Tensor3
    h_t: Tensor3
    h_omega: Tensor3
    spectral_slack: float
    linf_slack: float
    iterations: int
    converged: bool

    @property
    def certified(self) -> bool:
        return (
            self.converged
            and self.spectral_slack > CERT_MARGIN
            and self.linf_slack > CERT_MARGIN
        )


def dual_certificate(
    l0: Tensor3,
    e0: Tensor3,
    gamma: float,
    max_iters: int = 200,
    tol: float = 1e-10,
) -> DualCertificate:
    """Construct and verify the dual for the pair (l0, e0) at a given gamma.

    Runs the two-step fixed point

        H_T     <- -P_T(gamma * sign(E0) + H_Omega)
        H_Omega <- -P_Omega(U * V' + H_T)

    from H_Omega = 0.  The iteration contracts geometrically whenever
    2 * xi * mu < 1; NonConvergence is raised on outright divergence or when
    the budget is exhausted with no net contraction, which is the expected
    diagnostic for 2 * xi * mu >= 1.
    """
    if gamma <= 0.0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    if l0.dims != e0.dims:
        raise ShapeMismatch(f"dims mismatch: {l0.dims} vs {e0.dims}")
    basis = tangent_of(l0)
    d = tprod(basis.u, ttranspose(basis.v))
    mask = support_of(e0, 0.0)
    gs = gamma * sign_of(e0)
    scale = max(norm(d, "fro"), norm(gs, "fro"), 1e-30)

    h_t = Tensor3.zeros(l0.dims)
    h_om = Tensor3.zeros(l0.dims)
    deltas: list[float] = []
    converged = False
    iterations = 0
    for it in range(1, max_iters + 1):
        iterations = it
        h_t_new = -project_T(basis, gs + h_om)
        h_om_new = -project_omega(mask, d + h_t_new)
        delta = max(norm(h_t_new - h_t, "fro"), norm(h_om_new - h_om, "fro"))
        h_t, h_om = h_t_new, h_om_new
        deltas.append(delta)
        if not np.isfinite(delta) or delta > 1e9 * max(deltas[0], 1e-30):
            raise NonConvergence(
                f"dual fixed point diverged at iteration {it} (delta {delta:.3e})"
            )
        if delta <= tol * scale:
            converged = True
            break
    if not converged:
        # still contracting means "raise max_iters"; a flat recent tail is the
        # no-contraction stall the proof predicts for 2*xi*mu >= 1
        recent = deltas[-5:]
        if len(recent) >= 2 and recent[-1] >= 0.999 * recent[0]:
            raise NonConvergence(
                f"dual fixed point stalled after {max_iters} iterations "
                f"(delta {deltas[-1]:.3e}); expect 2*xi*mu >= 1"
            )

    q = (d + h_t) + (gs + h_om)
    spectral_slack = 1.0 - spectral_norm(project_T_perp(basis, q))
    linf_slack = gamma - norm(project_omega_comp(mask, q), "linf")
    return DualCertificate(q, h_t, h_om, spectral_slack, linf_slack, iterations, converged)


@dataclass
class CertificateReport:
    """Bundle of identifiability quantities for a candidate pair (L0, E0)."""

    dims: tuple[int, int, int]
    condition: str
    inc: float
    beta_u: float
    beta_v: float
    xi_lower: float
    xi_estimate: float
    xi_upper: float
    mu: float
    deg_min: int
    deg_max: int
    product_condition: float  # xi_upper * mu, compare against 1/6
    cor3_condition: float  # inc * deg_max, compare against 1/12
    gamma_range: tuple[float, float] | None
    gauge: float
    gamma: float | None = None
    dual: DualCertificate | None = None
    notes: list[str] = field(default_factory=list)

    def passes(self, condition: str | None = None) -> bool:
        cond = condition or self.condition
        if cond == "thm3":
            return self.product_condition < THM3_LIMIT
        if cond == "cor3":
            return self.cor3_condition < COR3_LIMIT
        if cond == "dual":
            return (
                self.dual is not None
                and self.dual.certified
                and self.gauge < 1.0 - GAUGE_MARGIN
            )
        raise DomainError(f"unknown condition {cond!r}; expected thm3, cor3 or dual")

    def to_text(self) -> str:
        def fmt(x):
            if x is None:
                return "none"
            if isinstance(x, bool):
                return "true" if x else "false"
            if isinstance(x, float):
                return f"{x:.12g}"
            return str(x)

        lines = [
            f"dims: {self.dims[0]} {self.dims[1]} {self.dims[2]}",
            f"condition: {self.condition}",
            f"inc: {fmt(self.inc)}",
            f"beta_u: {fmt(self.beta_u)}",
            f"beta_v: {fmt(self.beta_v)}",
            f"xi_lower: {fmt(self.xi_lower)}",
            f"xi_estimate: {fmt(self.xi_estimate)}",
            f"xi_upper: {fmt(self.xi_upper)}",
            f"mu: {fmt(self.mu)}",
            f"deg_min: {self.deg_min}",
            f"deg_max: {self.deg_max}",
            f"product_condition: {fmt(self.product_condition)}",
            f"cor3_condition: {fmt(self.cor3_condition)}",
        ]
        if self.gamma_range is None:
            lines.append("gamma_range: none")
        else:
            lines.append(f"gamma_range: {fmt(self.gamma_range[0])} {fmt(self.gamma_range[1])}")
        lines.append(f"gamma: {fmt(self.gamma)}")
        lines.append(f"gauge: {fmt(self.gauge)}")
        if self.dual is None:
            lines.append("dual: none")
        else:
            lines.append(f"dual_converged: {fmt(self.dual.converged)}")
            lines.append(f"dual_iterations: {self.dual.iterations}")
            lines.append(f"spectral_slack: {fmt(self.dual.spectral_slack)}")
            lines.append(f"linf_slack: {fmt(self.dual.linf_slack)}")
            lines.append(f"dual_certified: {fmt(self.dual.certified)}")
        for note in self.notes:
            lines.append(f"note: {note}")
        lines.append(f"pass: {fmt(self.passes())}")
        return "\n".join(lines)


def build_report(
    l0: Tensor3,
    e0: Tensor3,
    condition: str = "thm3",
    gamma: float | None = None,
    p: float = 0.5,
    with_dual: bool = True,
    samples: int = 16,
    ascent_iters: int = 8,
    gauge_iters: int = 500,
    gauge_tol: float = 1e-8,
    dual_iters: int = 200,
    seed: int = 0,
) -> CertificateReport:
    """Evaluate all certificate quantities for the pair (l0, e0).

    The recovery logic consumes the conservative bound xi <= 2 * inc; when
    ``gamma`` is not given and the support is nonempty, the interpolated
    gamma at ``p`` is used for the dual construction.
    """
    if condition not in ("thm3", "cor3", "dual"):
        raise DomainError(f"unknown condition {condition!r}; expected thm3, cor3 or dual")
    if l0.dims != e0.dims:
        raise ShapeMismatch(f"dims mismatch: {l0.dims} vs {e0.dims}")
    beta_u, beta_v = beta_spans(l0)
    inc_value = max(beta_u, beta_v)
    mask = support_of(e0, 0.0)
    mu = mu_exact(mask)
    deg_min, deg_max = deg_bounds(mask)
    xi_lower, xi_upper = inc_value / np.sqrt(l0.dims[2]), 2.0 * inc_value
    basis = tangent_of(l0)
    xi_est = _xi_estimate(basis, samples, ascent_iters, seed)

    if condition == "cor3":
        grange = gamma_range_cor3(inc_value, deg_max)
    else:
        grange = gamma_range_thm3(xi_upper, mu)

    gauge = transversality_gauge(basis, mask, gauge_iters, gauge_tol, seed)

    notes: list[str] = []
    gamma_used = gamma
    if gamma_used is None and mu > 0.0:
        gamma_used = gamma_interp(xi_upper, mu, p)
    dual = None
    if with_dual and gamma_used is not None:
        try:
            dual = dual_certificate(l0, e0, gamma_used, max_iters=dual_iters)
        except NonConvergence as exc:
            notes.append(f"dual fixed point did not converge: {exc}")

    return CertificateReport(
        dims=l0.dims,
        condition=condition,
        inc=inc_value,
        beta_u=beta_u,
        beta_v=beta_v,
        xi_lower=float(xi_lower),
        xi_estimate=xi_est,
        xi_upper=xi_upper,
        mu=mu,
        deg_min=deg_min,
        deg_max=deg_max,
        product_condition=xi_upper * mu,
        cor3_condition=inc_value * deg_max,
        gamma_range=grange,
        gauge=gauge,
        gamma=gamma_used,
        dual=dual,
        notes=notes,
    )
