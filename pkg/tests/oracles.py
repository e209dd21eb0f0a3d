"""Independent reference implementations used as test oracles.

Everything here is written from the defining formulas (summation DFT,
loop-built block circulant, dense matrix SVD) without going through the
library's FFT fast paths, so agreement between the two routes is evidence,
not tautology.
"""

import numpy as np


def dft_reference(x):
    """Length-N DFT straight from the summation definition, O(N^2)."""
    x = np.asarray(x, dtype=complex)
    n = x.shape[0]
    k = np.arange(n)
    w = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return w @ x


def idft_reference(x):
    x = np.asarray(x, dtype=complex)
    n = x.shape[0]
    k = np.arange(n)
    w = np.exp(2j * np.pi * np.outer(k, k) / n)
    return (w @ x) / n


def unfold_reference(arr):
    """Stack frontal slices top-to-bottom by explicit loop."""
    n1, n2, n3 = arr.shape
    out = np.zeros((n1 * n3, n2))
    for k in range(n3):
        out[k * n1 : (k + 1) * n1, :] = arr[:, :, k]
    return out


def fold_reference(mat, n3):
    rows, n2 = mat.shape
    n1 = rows // n3
    out = np.zeros((n1, n2, n3))
    for k in range(n3):
        out[:, :, k] = mat[k * n1 : (k + 1) * n1, :]
    return out


def bcirc_reference(arr):
    """Block circulant built entry-block by entry-block."""
    n1, n2, n3 = arr.shape
    out = np.zeros((n1 * n3, n2 * n3))
    for i in range(n3):
        for j in range(n3):
            out[i * n1 : (i + 1) * n1, j * n2 : (j + 1) * n2] = arr[:, :, (i - j) % n3]
    return out


def tprod_reference(a_arr, b_arr):
    """fold(bcirc(A) @ unfold(B)) with the loop-built pieces above."""
    n3 = a_arr.shape[2]
    return fold_reference(bcirc_reference(a_arr) @ unfold_reference(b_arr), n3)


def spectral_reference(arr):
    m = bcirc_reference(arr)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def nuclear_reference(arr):
    n3 = arr.shape[2]
    m = bcirc_reference(arr)
    if m.size == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False).sum() / n3)


def mu_reference(mask):
    """Spectral norm of the 0/1 support indicator via the dense bcirc."""
    return spectral_reference(mask.astype(float))


def scalar_prox_nuclear_1d(sigma, tau, grid=20001):
    """Brute-force argmin_s tau*s + 0.5*(s - sigma)^2 over s >= 0."""
    s = np.linspace(0.0, max(sigma, 1.0) * 1.5, grid)
    obj = tau * s + 0.5 * (s - sigma) ** 2
    return float(s[np.argmin(obj)])


def block_prox_reference(vec, tau, grid=20001):
    """Brute-force prox of tau*||.||_2 at vec: argmin tau*||z|| + 0.5*||z - vec||^2.

    The minimizer is radial, so scan the scale factor on [0, 1].
    """
    vec = np.asarray(vec, dtype=float)
    nrm = np.linalg.norm(vec)
    if nrm == 0.0:
        return vec
    t = np.linspace(0.0, 1.0, grid)
    obj = tau * t * nrm + 0.5 * (1.0 - t) ** 2 * nrm**2
    return vec * t[np.argmin(obj)]


def matrix_rpca_admm(x, gamma, rho0=1e-3, rho_scale=1.1, rho_max=1e10, tol=1e-8, max_iters=500):
    """Plain matrix RPCA via the same ADMM scheme, for the N3 = 1 reduction check."""
    x = np.asarray(x, dtype=float)
    norm_x = np.linalg.norm(x)
    l = np.zeros_like(x)
    e = np.zeros_like(x)
    y = np.zeros_like(x)
    rho = rho0
    iters = 0
    for it in range(1, max_iters + 1):
        iters = it
        u, s, vh = np.linalg.svd(x - e + y / rho, full_matrices=False)
        l = (u * np.maximum(s - 1.0 / rho, 0.0)) @ vh
        w = x - l + y / rho
        e = np.sign(w) * np.maximum(np.abs(w) - gamma / rho, 0.0)
        r = x - l - e
        y = y + rho * r
        rho = min(rho * rho_scale, rho_max)
        res = np.linalg.norm(r) / norm_x if norm_x > 0 else np.linalg.norm(r)
        if res <= tol:
            break
    return l, e, iters


def random_dims(rng, max_n1=8, max_n2=8, max_n3=8):
    return (
        int(rng.integers(1, max_n1 + 1)),
        int(rng.integers(1, max_n2 + 1)),
        int(rng.integers(1, max_n3 + 1)),
    )
