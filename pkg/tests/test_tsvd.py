"""t-SVD contract, norms and prox against the dense bcirc oracle."""

import numpy as np
import pytest

import oracles
from trpca import (
    ShapeMismatch,
    Tensor3,
    identity_tensor,
    inner,
    norm,
    nuclear_norm,
    spectral_norm,
    subgradient_member,
    tnn_zhang,
    tprod,
    tsvd_skinny,
    tsvt_prox,
    ttranspose,
    tubal_rank,
)


def rand_tensor(rng, dims):
    return Tensor3(rng.standard_normal(dims))


def rand_low_rank(rng, n1, n2, n3, r):
    g1 = rand_tensor(rng, (n1, r, n3))
    g2 = rand_tensor(rng, (n2, r, n3))
    return tprod(g1, ttranspose(g2))


def check_factors(a, fac, tol=1e-9):
    r, n3 = fac.rank, a.dims[2]
    if r:
        eye = identity_tensor(r, n3)
        assert norm(tprod(ttranspose(fac.u), fac.u) - eye, "fro") <= tol
        assert norm(tprod(ttranspose(fac.v), fac.v) - eye, "fro") <= tol
    # f-diagonal: off-diagonal entries exactly zero by construction
    off = fac.s.data.copy()
    off[np.arange(r), np.arange(r), :] = 0.0
    assert np.all(off == 0)
    diag = fac.s.data[np.arange(r), np.arange(r), 0]
    assert np.all(np.diff(diag) <= 1e-12)
    assert np.all(diag >= -1e-12)
    scale = max(norm(a, "fro"), 1e-30)
    assert norm(fac.reconstruct() - a, "fro") <= tol * scale


class TestTsvdSkinny:
    def test_zero_tensor(self):
        fac = tsvd_skinny(Tensor3.zeros((3, 4, 2)))
        assert fac.rank == 0
        assert fac.u.dims == (3, 0, 2) and fac.v.dims == (4, 0, 2)
        assert norm(fac.reconstruct(), "fro") == 0.0

    def test_identity(self):
        fac = tsvd_skinny(identity_tensor(3, 4))
        assert fac.rank == 3
        check_factors(identity_tensor(3, 4), fac)
        np.testing.assert_allclose(fac.s.data, identity_tensor(3, 4).data, atol=1e-12)

    def test_forced_rank_two(self):
        rng = np.random.default_rng(0)
        a = rand_low_rank(rng, 6, 5, 3, 2)
        fac = tsvd_skinny(a)
        assert fac.rank == 2
        check_factors(a, fac)
        # rank agrees with the dense bcirc: 3 slices each of rank 2
        m = oracles.bcirc_reference(a.data)
        assert np.linalg.matrix_rank(m, tol=1e-8) == 2 * 3

    @pytest.mark.parametrize("seed", range(8))
    def test_contract_random(self, seed):
        rng = np.random.default_rng(seed)
        a = rand_tensor(rng, oracles.random_dims(rng, 12, 12, 6))
        check_factors(a, tsvd_skinny(a))

    def test_projector_comparison_not_raw_factors(self):
        # factors are phase/sign ambiguous; projectors are not
        rng = np.random.default_rng(3)
        a = rand_low_rank(rng, 5, 4, 3, 2)
        f1 = tsvd_skinny(a)
        f2 = tsvd_skinny(Tensor3(a.data.copy()))
        p1 = tprod(f1.u, ttranspose(f1.u))
        p2 = tprod(f2.u, ttranspose(f2.u))
        assert norm(p1 - p2, "fro") <= 1e-9


class TestTubalRank:
    def test_zero(self):
        assert tubal_rank(Tensor3.zeros((2, 3, 4))) == 0

    def test_identity(self):
        assert tubal_rank(identity_tensor(4, 2)) == 4

    def test_forced_rank(self):
        rng = np.random.default_rng(1)
        assert tubal_rank(rand_low_rank(rng, 6, 5, 3, 3)) == 3

    def test_two_characterizations_agree(self):
        # nonzero singular tubes vs nonzero first-slice diagonal
        rng = np.random.default_rng(2)
        for r in (0, 1, 3):
            a = rand_low_rank(rng, 6, 6, 4, r) if r else Tensor3.zeros((6, 6, 4))
            fac = tsvd_skinny(a)
            tube_count = sum(
                1 for i in range(fac.rank)
                if np.linalg.norm(fac.s.data[i, i, :]) > 1e-10
            )
            assert tubal_rank(a) == tube_count == r

    def test_scale_invariant_default_tol(self):
        rng = np.random.default_rng(4)
        a = rand_low_rank(rng, 6, 5, 3, 2)
        assert tubal_rank(1e-8 * a) == 2
        assert tubal_rank(1e8 * a) == 2


class TestSpectralNorm:
    def test_identity(self):
        assert spectral_norm(identity_tensor(5, 3)) == pytest.approx(1.0)

    def test_tube_circulant_eigenvalues(self):
        # 1x1x3 tube: max over cube roots of unity of |a + b*w + c*w^2|
        a, b, c = 0.7, -1.3, 0.4
        t = Tensor3(np.array([a, b, c]).reshape(1, 1, 3))
        roots = np.exp(2j * np.pi * np.arange(3) / 3)
        want = max(abs(a + b * w + c * w**2) for w in roots)
        assert spectral_norm(t) == pytest.approx(want, rel=1e-12)
        assert spectral_norm(t) == pytest.approx(oracles.spectral_reference(t.data), rel=1e-12)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(5)
        a = rand_tensor(rng, (5, 4, 3))
        assert spectral_norm(a) == pytest.approx(oracles.spectral_reference(a.data), abs=1e-9)


class TestNuclearNorm:
    def test_identity_is_n(self):
        assert nuclear_norm(identity_tensor(4, 3)) == pytest.approx(4.0)

    def test_zero(self):
        assert nuclear_norm(Tensor3.zeros((3, 3, 2))) == 0.0

    def test_two_formulas_agree(self):
        rng = np.random.default_rng(6)
        a = rand_tensor(rng, (4, 4, 3))
        fac = tsvd_skinny(a)
        first_slice_sum = float(
            fac.s.data[np.arange(fac.rank), np.arange(fac.rank), 0].sum()
        )
        assert nuclear_norm(a) == pytest.approx(first_slice_sum, rel=1e-12)
        assert nuclear_norm(a) == pytest.approx(oracles.nuclear_reference(a.data), rel=1e-9)

    def test_duality_pairing(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            a = rand_tensor(rng, (4, 3, 3))
            b = rand_tensor(rng, (4, 3, 3))
            assert abs(inner(a, b)) <= spectral_norm(a) * nuclear_norm(b) + 1e-9


class TestTnnZhang:
    def test_identity_is_n(self):
        assert tnn_zhang(identity_tensor(4, 3)) == pytest.approx(4.0)

    def test_zero(self):
        assert tnn_zhang(Tensor3.zeros((2, 2, 3))) == 0.0

    def test_matches_direct_formula_on_s(self):
        rng = np.random.default_rng(8)
        a = rand_tensor(rng, (3, 3, 2))
        fac = tsvd_skinny(a)
        want = sum(
            float(fac.s.data[i, i, k]) for i in range(fac.rank) for k in range(2)
        )
        assert tnn_zhang(a) == pytest.approx(want, rel=1e-12)

    def test_equals_dc_slice_nuclear_norm(self):
        # summing S(i,i,:) over the tube picks out the DC Fourier bin, so the
        # value equals the plain nuclear norm of the summed frontal slices
        rng = np.random.default_rng(9)
        a = rand_tensor(rng, (4, 5, 3))
        dc = a.data.sum(axis=2)
        want = float(np.linalg.svd(dc, compute_uv=False).sum())
        assert tnn_zhang(a) == pytest.approx(want, rel=1e-9)


class TestTsvtProx:
    def test_tau_zero_identity(self):
        rng = np.random.default_rng(10)
        a = rand_tensor(rng, (3, 4, 2))
        assert tsvt_prox(a, 0.0) == a

    def test_large_tau_annihilates_identity(self):
        z = tsvt_prox(identity_tensor(2, 2), 5.0)
        assert norm(z, "fro") == 0.0

    def test_fdiagonal_shrinkage_matches_scalar_prox(self):
        # impulse tubes on the diagonal give a flat Fourier spectrum, so each
        # slice carries known singular values (4 and 2); every one must shrink
        # exactly like the scalar prox solved by brute force
        s = np.zeros((2, 2, 3))
        s[0, 0, 0] = 4.0
        s[1, 1, 0] = 2.0
        a = Tensor3(s)
        tau = 1.5
        z = tsvt_prox(a, tau)
        f = np.fft.fft(z.data, axis=2)
        for i, sig in enumerate((4.0, 2.0)):
            want = oracles.scalar_prox_nuclear_1d(sig, tau)
            for k in range(3):
                assert abs(f[i, i, k]) == pytest.approx(want, abs=2e-4)

    @pytest.mark.parametrize("tau", [0.1, 1.0, 10.0])
    def test_subgradient_optimality(self, tau):
        rng = np.random.default_rng(11)
        a = rand_tensor(rng, (5, 4, 3))
        z = tsvt_prox(a, tau)
        if norm(z, "fro") > 0:
            g = (1.0 / tau) * (a - z)
            assert subgradient_member(z, g, 1e-6)

    def test_matches_slicewise_dense_svt(self):
        rng = np.random.default_rng(12)
        a = rand_tensor(rng, (4, 5, 4))
        tau = 0.8
        f = np.fft.fft(a.data, axis=2)
        out = np.empty_like(f)
        for k in range(4):
            u, s, vh = np.linalg.svd(f[:, :, k], full_matrices=False)
            out[:, :, k] = (u * np.maximum(s - tau, 0.0)) @ vh
        want = np.fft.ifft(out, axis=2).real
        assert np.linalg.norm(tsvt_prox(a, tau).data - want) <= 1e-10


class TestSubgradientMember:
    def test_uv_transpose_is_member(self):
        rng = np.random.default_rng(13)
        a = rand_low_rank(rng, 5, 4, 3, 2)
        fac = tsvd_skinny(a)
        g = tprod(fac.u, ttranspose(fac.v))
        assert subgradient_member(a, g, 1e-8)

    def test_oversized_complement_part_rejected(self):
        rng = np.random.default_rng(14)
        a = rand_low_rank(rng, 6, 5, 3, 2)
        fac = tsvd_skinny(a)
        # spectral-norm-1 tensor supported on the orthogonal complement
        g_extra = rand_tensor(rng, (6, 5, 3))
        pu = tprod(fac.u, ttranspose(fac.u))
        pv = tprod(fac.v, ttranspose(fac.v))
        w = g_extra - tprod(pu, g_extra) - tprod(g_extra - tprod(pu, g_extra), pv)
        w = (1.0 / spectral_norm(w)) * w
        d = tprod(fac.u, ttranspose(fac.v))
        assert subgradient_member(a, d + w, 1e-6)
        assert not subgradient_member(a, d + 2.0 * w, 1e-6)

    def test_a_itself_rejected_when_top_singular_value_large(self):
        rng = np.random.default_rng(15)
        a = 5.0 * rand_low_rank(rng, 5, 5, 2, 2)
        assert spectral_norm(a) > 1.0  # oracle-checked separately
        assert oracles.spectral_reference(a.data) > 1.0
        assert not subgradient_member(a, a, 1e-6)

    def test_zero_tensor_ball(self):
        # at A = 0 the subdifferential is the unit spectral-norm ball
        z = Tensor3.zeros((3, 3, 2))
        rng = np.random.default_rng(16)
        g = rand_tensor(rng, (3, 3, 2))
        g_small = (0.5 / spectral_norm(g)) * g
        g_big = (2.0 / spectral_norm(g)) * g
        assert subgradient_member(z, g_small)
        assert not subgradient_member(z, g_big)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            subgradient_member(Tensor3.zeros((2, 2, 2)), Tensor3.zeros((2, 3, 2)))


class TestOrthogonalityDefinition:
    def test_square_u_is_orthogonal(self):
        rng = np.random.default_rng(17)
        a = rand_tensor(rng, (4, 6, 3))  # full row rank -> square U
        fac = tsvd_skinny(a)
        assert fac.rank == 4
        q = fac.u
        eye = identity_tensor(4, 3)
        assert norm(tprod(ttranspose(q), q) - eye, "fro") <= 1e-9
        assert norm(tprod(q, ttranspose(q)) - eye, "fro") <= 1e-9
