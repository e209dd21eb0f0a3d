"""Skinny t-SVD and the spectral quantities built on it.

All factorizations run slice-wise in the Fourier domain.  Only the
non-redundant half of the spectrum is factorized; the mirrored slices are
recovered by conjugation, which both halves the work and guarantees real
spatial factors.  Self-conjugate bins (DC, and Nyquist for even N3) are
factorized through the real SVD so the mirrored spectrum stays exactly
Hermitian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, ShapeMismatch
from .tensor import Tensor3, norm, tprod, ttranspose


@dataclass(frozen=True)
class TSvdFactors:
    """Skinny t-SVD triple (U, S, V) with tubal rank.

    U is N1 x R x N3 and V is N2 x R x N3, both t-orthonormal
    (U' * U = V' * V = identity); S is R x R x N3 and f-diagonal with a
    nonincreasing, nonnegative first-slice diagonal.
    """

    u: Tensor3
    s: Tensor3
    v: Tensor3
    rank: int

    def reconstruct(self) -> Tensor3:
        """U * S * V' as a dense tensor."""
        return tprod(tprod(self.u, self.s), ttranspose(self.v))


def _half_spectrum(arr: np.ndarray) -> np.ndarray:
    return np.fft.rfft(arr, axis=2)


def _self_conjugate(k: int, n3: int, h: int) -> bool:
    return k == 0 or (n3 % 2 == 0 and k == h - 1)


def _slice_weights(n3: int) -> np.ndarray:
    """Multiplicity of each half-spectrum slice in the full spectrum."""
    h = n3 // 2 + 1
    w = np.full(h, 2.0)
    w[0] = 1.0
    if n3 % 2 == 0:
        w[-1] = 1.0
    return w


def _slice_svd(mat: np.ndarray, real_bin: bool):
    try:
        if real_bin:
            u, s, vh = np.linalg.svd(mat.real, full_matrices=False)
            return u.astype(np.complex128), s, vh.astype(np.complex128)
        return np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"frontal-slice SVD did not converge: {exc}") from exc


def _fourier_singvals(arr: np.ndarray) -> np.ndarray:
    """Singular values per half-spectrum slice, shape (min(N1,N2), H)."""
    f = _half_spectrum(arr)
    h = f.shape[2]
    try:
        cols = [np.linalg.svd(f[:, :, k], compute_uv=False) for k in range(h)]
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"frontal-slice SVD did not converge: {exc}") from exc
    return np.stack(cols, axis=1) if cols else np.zeros((min(arr.shape[:2]), 0))


def _first_slice_diag(sigma: np.ndarray, n3: int) -> np.ndarray:
    """Diagonal of the first frontal slice of S from per-slice singular values."""
    if sigma.shape[1] == 0:
        return np.zeros(sigma.shape[0])
    return sigma @ _slice_weights(n3) / n3


def _default_rank_tol(sigma_max: float) -> float:
    # relative to the largest slice spectral norm, so rank decisions are
    # invariant under rescaling the tensor
    return 1e-10 * sigma_max


def tsvd_skinny(a: Tensor3, rank_tol: float | None = None) -> TSvdFactors:
    """Skinny t-SVD of ``a`` at the numerical tubal rank.

    Parameters
    ----------
    a : Tensor3
        Tensor to factorize.
    rank_tol : float, optional
        Absolute threshold on the first-slice diagonal of S below which a
        singular tube counts as zero.  Defaults to 1e-10 times the largest
        Fourier-slice spectral norm.

    Returns
    -------
    TSvdFactors
        Factors with U, S, V truncated to the tubal rank.  The zero tensor
        yields rank 0 and empty factors.
    """
    n1, n2, n3 = a.dims
    if rank_tol is not None and rank_tol < 0:
        raise ValueError(f"rank_tol must be nonnegative, got {rank_tol}")
    f = _half_spectrum(a.data)
    h = f.shape[2]
    us, sigmas, vhs = [], [], []
    for k in range(h):
        u, s, vh = _slice_svd(f[:, :, k], _self_conjugate(k, n3, h))
        us.append(u)
        sigmas.append(s)
        vhs.append(vh)
    sigma = np.stack(sigmas, axis=1) if h else np.zeros((min(n1, n2), 0))
    first_diag = _first_slice_diag(sigma, n3)
    tol = _default_rank_tol(float(sigma.max(initial=0.0))) if rank_tol is None else rank_tol
    r = int(np.count_nonzero(first_diag > tol))

    uf = np.stack([u[:, :r] for u in us], axis=2)
    vf = np.stack([vh[:r, :].conj().T for vh in vhs], axis=2)
    u = np.fft.irfft(uf, n=n3, axis=2)
    v = np.fft.irfft(vf, n=n3, axis=2)
    s = np.zeros((r, r, n3))
    if r:
        s[np.arange(r), np.arange(r), :] = np.fft.irfft(sigma[:r, :], n=n3, axis=1)
    return TSvdFactors(Tensor3(u, copy=False), Tensor3(s, copy=False), Tensor3(v, copy=False), r)


def tubal_rank(a: Tensor3, tol: float | None = None) -> int:
    """Number of nonzero singular tubes, read off the first-slice diagonal."""
    if tol is not None and tol < 0:
        raise ValueError(f"tol must be nonnegative, got {tol}")
    sigma = _fourier_singvals(a.data)
    first_diag = _first_slice_diag(sigma, a.dims[2])
    if tol is None:
        tol = _default_rank_tol(float(sigma.max(initial=0.0)))
    return int(np.count_nonzero(first_diag > tol))


def spectral_norm(a: Tensor3) -> float:
    """Largest singular value over all Fourier slices (= dense bcirc spectral norm)."""
    sigma = _fourier_singvals(a.data)
    return float(sigma.max(initial=0.0))


def nuclear_norm(a: Tensor3) -> float:
    """Sum of the first-slice diagonal of S; equals (1/N3) * bcirc nuclear norm."""
    sigma = _fourier_singvals(a.data)
    return float(_first_slice_diag(sigma, a.dims[2]).sum())


def tnn_zhang(a: Tensor3) -> float:
    """Sum of the diagonal entries of every frontal slice of the spatial S."""
    fac = tsvd_skinny(a)
    r = fac.rank
    if r == 0:
        return 0.0
    return float(fac.s.data[np.arange(r), np.arange(r), :].sum())


def _tsvt_array(arr: np.ndarray, tau: float) -> tuple[np.ndarray, float]:
    """Singular-value soft threshold per Fourier slice.

    The (1/N3) factor in the tensor nuclear norm cancels against the (1/N3)
    Parseval factor of the Frobenius term, so every slice is shrunk by the
    same tau.  Returns the shrunk array and its tensor nuclear norm (free
    byproduct, used by the solver's objective trace).
    """
    n3 = arr.shape[2]
    f = _half_spectrum(arr)
    h = f.shape[2]
    out = np.empty_like(f)
    w = _slice_weights(n3)
    nuclear = 0.0
    for k in range(h):
        u, s, vh = _slice_svd(f[:, :, k], _self_conjugate(k, n3, h))
        shrunk = np.maximum(s - tau, 0.0)
        out[:, :, k] = (u * shrunk) @ vh
        nuclear += w[k] * shrunk.sum()
    return np.fft.irfft(out, n=n3, axis=2), nuclear / n3


def tsvt_prox(a: Tensor3, tau: float) -> Tensor3:
    """Proximal operator of tau * nuclear norm: argmin_Z tau*||Z||_* + 0.5*||Z - A||_F^2."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    if tau == 0.0:
        return a
    out, _ = _tsvt_array(a.data, tau)
    return Tensor3(out, copy=False)


def subgradient_member(a: Tensor3, g: Tensor3, tol: float = 1e-8) -> bool:
    """Whether ``g`` is a subgradient of the tensor nuclear norm at ``a``.

    Checks g = U * V' + W with U' * W = 0, W * V = 0 and spectral norm of W
    at most 1, all up to ``tol`` (orthogonality residuals are measured
    relative to max(1, ||g||_F)).
    """
    if a.dims != g.dims:
        raise ShapeMismatch(f"dims mismatch: {a.dims} vs {g.dims}")
    fac = tsvd_skinny(a)
    d = tprod(fac.u, ttranspose(fac.v))
    w = g - d
    scale = max(1.0, norm(g, "fro"))
    if norm(tprod(ttranspose(fac.u), w), "fro") > tol * scale:
        return False
    if norm(tprod(w, fac.v), "fro") > tol * scale:
        return False
    return spectral_norm(w) <= 1.0 + tol
