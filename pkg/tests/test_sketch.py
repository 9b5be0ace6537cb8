import json

import numpy as np
import pytest
from scipy import stats

from sublinsolve import (
    InstanceSpec,
    RankDeficientSketch,
    SampledMatrix,
    ZeroNormSample,
    generate_instance,
    named_stream,
    oracle,
    rank_probe,
    sample_rows,
    subsample,
    v_column_access,
    v_entry,
    verify_sketch,
)
from sublinsolve.sketch import (
    SDaggerAccess,
    SuccinctDescription,
    dense_s,
    dense_v,
    paper_sketch_size,
    suggest_sketch_size,
)
from sublinsolve.errors import DimensionTooLarge
from conftest import random_complex


def haar_instance(n=40, k=2, kappa=2.0, seed=3, m=None):
    spec = InstanceSpec(m=m or n, n=n, k=k, kappa=kappa, profile="linear",
                        b_mode="in-range", seed=seed)
    return generate_instance(spec)


def sketch_of(a_matrix, k, p, seed=0):
    return subsample(a_matrix, k, p, named_stream(seed, "rows"),
                     col_rng=named_stream(seed, "cols"), seed=seed)


def test_sample_rows_scale_consistency(rng):
    inst = haar_instance()
    a = SampledMatrix.from_dense(inst.a)
    idx, scales = sample_rows(a, 50, rng)
    s = inst.a[idx] * scales[:, None]
    fro = np.linalg.norm(inst.a) ** 2
    probs = (np.abs(inst.a[idx]) ** 2).sum(axis=1) / fro
    np.testing.assert_allclose(s * np.sqrt(50 * probs)[:, None], inst.a[idx],
                               rtol=1e-12)


def test_sample_rows_zero_matrix(rng):
    with pytest.raises(ZeroNormSample):
        sample_rows(SampledMatrix.from_dense(np.zeros((3, 3))), 5, rng)


def test_s_and_w_frobenius_identities():
    """Row and column scaling make ||S||_F and ||W||_F equal ||A||_F exactly."""
    inst = haar_instance(n=60, k=3, kappa=3.0)
    a = SampledMatrix.from_dense(inst.a)
    d = sketch_of(a, 3, 80)
    s = dense_s(d, inst.a)
    w = s[:, d.col_indices] * d.col_scales[None, :]
    fro = np.linalg.norm(inst.a)
    assert np.linalg.norm(s) == pytest.approx(fro, rel=1e-12)
    assert np.linalg.norm(w) == pytest.approx(fro, rel=1e-12)


def test_column_distribution_identity():
    """P'_j equals the column length-squared mass of S."""
    inst = haar_instance(n=30, k=2)
    a = SampledMatrix.from_dense(inst.a)
    d = sketch_of(a, 2, 40)
    s = dense_s(d, inst.a)
    fro_sq = np.linalg.norm(inst.a) ** 2
    p_prime = 1.0 / (d.p * d.col_scales**2)
    expected = (np.abs(s[:, d.col_indices]) ** 2).sum(axis=0) / fro_sq
    np.testing.assert_allclose(p_prime, expected, rtol=1e-10)


def test_rank_one_alignment():
    """For rank-1 input the sketch basis reproduces the singular direction."""
    rng = np.random.default_rng(5)
    n = 50
    u = random_complex(rng, n)
    u /= np.linalg.norm(u)
    a_dense = 2.0 * np.outer(u, u.conj())
    a = SampledMatrix.from_dense(a_dense)
    d = sketch_of(a, 1, 30)
    v = dense_v(d, a_dense)[:, 0]
    overlap = abs(np.vdot(v / np.linalg.norm(v), u))
    assert overlap >= 1.0 - 1e-8


def test_diag_rank_k_reconstruction():
    """Sampled reconstruction of the second moment on a padded diagonal.

    The equal-weight diagonal needs a generous sketch: the handful of live
    rows makes the multinomial count noise relatively large.
    """
    n, k = 16, 4
    a_dense = 2.0 * np.diag([1.0] * k + [0.0] * (n - k)).astype(complex)
    a = SampledMatrix.from_dense(a_dense)
    ata = a_dense.conj().T @ a_dense
    ok = 0
    for seed in range(10):
        d = sketch_of(a, k, 256, seed=seed)
        v = dense_v(d, a_dense)
        ahat2 = (v * d.sigma_hat**2) @ v.conj().T
        ok += np.linalg.norm(ata - ahat2) <= 0.1 * np.linalg.norm(a_dense) ** 2
    assert ok >= 8


def test_rank_deficient_sketch_raises():
    inst = haar_instance(n=30, k=2)
    a = SampledMatrix.from_dense(inst.a)
    with pytest.raises(RankDeficientSketch):
        sketch_of(a, 5, 40)


def test_subsample_argument_validation(rng):
    inst = haar_instance(n=20, k=2)
    a = SampledMatrix.from_dense(inst.a)
    with pytest.raises(ValueError):
        subsample(a, 0, 10, rng)
    with pytest.raises(ValueError):
        subsample(a, 3, 2, rng)


def test_v_entry_one_hot_synthetic():
    """With a one-hot u_hat the basis entry is conj(S(t, j)) / sigma."""
    inst = haar_instance(n=25, k=2)
    a = SampledMatrix.from_dense(inst.a)
    d = sketch_of(a, 2, 12)
    t = 3
    u_hot = np.zeros((d.p, 1), dtype=complex)
    u_hot[t, 0] = 1.0
    synthetic = SuccinctDescription(
        row_indices=d.row_indices, row_scales=d.row_scales,
        col_indices=d.col_indices, col_scales=d.col_scales,
        sigma_hat=np.array([2.0]), u_hat=u_hot, k=1, p=d.p,
    )
    s = dense_s(d, inst.a)
    for j in (0, 7, 24):
        expect = np.conj(s[t, j]) / 2.0
        assert v_entry(synthetic, a, j, 0) == pytest.approx(expect, rel=1e-12)


def test_v_entry_zero_column():
    n, k = 12, 3
    a_dense = np.diag([1.0] * k + [0.0] * (n - k)).astype(complex)
    a = SampledMatrix.from_dense(a_dense)
    d = sketch_of(a, k, 24)
    for i in range(k):
        assert v_entry(d, a, n - 1, i) == 0.0


def test_v_entry_matches_dense_v():
    inst = haar_instance(n=35, k=2, kappa=1.5)
    a = SampledMatrix.from_dense(inst.a)
    d = sketch_of(a, 2, 60)
    v = dense_v(d, inst.a)
    for j in (0, 10, 34):
        for i in range(2):
            assert v_entry(d, a, j, i) == pytest.approx(v[j, i], rel=1e-10)


def test_v_entry_index_errors():
    inst = haar_instance(n=20, k=2)
    a = SampledMatrix.from_dense(inst.a)
    d = sketch_of(a, 2, 10)
    with pytest.raises(IndexError):
        v_entry(d, a, 20, 0)
    with pytest.raises(IndexError):
        v_entry(d, a, 0, 2)


def test_v_column_sampling_law_rank_one():
    rng = np.random.default_rng(9)
    n = 40
    u = random_complex(rng, n)
    u /= np.linalg.norm(u)
    a_dense = np.outer(u, u.conj())
    a = SampledMatrix.from_dense(a_dense)
    d = sketch_of(a, 1, 25)
    v_dense = dense_v(d, a_dense)[:, 0]
    acc = v_column_access(d, a, 0)
    draws = acc.sample_many(rng, 50_000)
    tv = oracle.exact_tv(oracle.empirical_distribution(draws, n),
                         oracle.exact_distribution(v_dense))
    assert tv <= 0.05


def test_v_column_one_hot_law_matches_row():
    """A one-hot coefficient vector samples the underlying scaled row."""
    rng = np.random.default_rng(11)
    inst = haar_instance(n=30, k=2)
    a = SampledMatrix.from_dense(inst.a)
    d = sketch_of(a, 2, 15)
    t = 4
    u_hot = np.zeros((d.p, 1), dtype=complex)
    u_hot[t, 0] = 1.0
    synthetic = SuccinctDescription(
        row_indices=d.row_indices, row_scales=d.row_scales,
        col_indices=d.col_indices, col_scales=d.col_scales,
        sigma_hat=np.array([1.0]), u_hat=u_hot, k=1, p=d.p,
    )
    acc = v_column_access(synthetic, a, 0)
    draws = acc.sample_many(rng, 40_000)
    expected = oracle.exact_distribution(inst.a[d.row_indices[t]])
    res = stats.chisquare(np.bincount(draws, minlength=30), 40_000 * expected)
    assert res.pvalue >= 1e-3


def test_v_column_acceptance_rate(rng):
    """Measured acceptance stays within a factor two of 1/(p C)."""
    inst = haar_instance(n=80, k=3, kappa=2.0, seed=7)
    a = SampledMatrix.from_dense(inst.a)
    d = sketch_of(a, 3, 60)
    v_dense = dense_v(d, inst.a)
    fro_sq = np.linalg.norm(inst.a) ** 2
    for i in range(3):
        c_val = fro_sq / (d.p * d.sigma_hat[i] ** 2 *
                          np.linalg.norm(v_dense[:, i]) ** 2)
        acc = v_column_access(d, a, i)
        before = a.ledger.samples
        draws = 2000
        acc.sample_many(rng, draws)
        trials = a.ledger.samples - before
        rate = draws / trials
        assert rate >= 1.0 / (2.0 * d.p * c_val)


def test_v_column_fused_values(rng):
    inst = haar_instance(n=30, k=2)
    a = SampledMatrix.from_dense(inst.a)
    d = sketch_of(a, 2, 20)
    v_dense = dense_v(d, inst.a)
    acc = v_column_access(d, a, 1)
    idx, vals = acc.sample_many_with_values(rng, 300)
    np.testing.assert_allclose(vals, v_dense[idx, 1], rtol=1e-10)
    assert acc.norm() == 1.0


def test_sdagger_access_shapes_and_norms():
    inst = haar_instance(n=24, k=2)
    a = SampledMatrix.from_dense(inst.a)
    d = sketch_of(a, 2, 16)
    acc = SDaggerAccess(d, a)
    assert (acc.n_rows, acc.n_cols) == (24, 16)
    fro = np.sqrt(a.frobenius_sq())
    np.testing.assert_allclose(acc.col_norms(), fro / np.sqrt(16), rtol=1e-12)
    s = dense_s(d, inst.a)
    block = acc.row_block(np.array([0, 5]))
    np.testing.assert_allclose(block, s[:, [0, 5]].conj().T, rtol=1e-12)


def test_verify_sketch_panel():
    inst = haar_instance(n=50, k=2, kappa=2.0)
    a = SampledMatrix.from_dense(inst.a)
    d = sketch_of(a, 2, 100)
    rep = verify_sketch(d, a)
    assert rep.s_fro_ratio == pytest.approx(1.0, rel=1e-12)
    assert rep.w_fro_ratio == pytest.approx(1.0, rel=1e-12)
    assert rep.sigma_k_w > 0
    assert rep.sigma_1_w >= rep.sigma_k_w
    assert np.isfinite(rep.ata_sts_err)
    assert np.isfinite(rep.inv_ahat_m2_err)
    assert 0.5 <= rep.s_fro_ratio**2 <= 1.5
    as_dict = rep.as_dict()
    assert "v_gram_err" in as_dict


def test_verify_sketch_dense_cap():
    inst = haar_instance(n=20, k=2)
    a = SampledMatrix.from_dense(inst.a)
    d = sketch_of(a, 2, 10)
    with pytest.raises(DimensionTooLarge):
        verify_sketch(d, a, dense_cap=10)


def test_row_sketch_tail_bound():
    """Large deviations of ||A'A - S'S||_F are as rare as 1/(theta^2 p)."""
    inst = haar_instance(n=60, k=3, kappa=2.0)
    a = SampledMatrix.from_dense(inst.a)
    p = 60
    theta = np.sqrt(40.0 / p)
    fro_sq = np.linalg.norm(inst.a) ** 2
    ata = inst.a.conj().T @ inst.a
    bad = 0
    trials = 200
    for seed in range(trials):
        idx, scales = sample_rows(a, p, named_stream(seed, "rows"))
        s = inst.a[idx] * scales[:, None]
        bad += np.linalg.norm(ata - s.conj().T @ s) >= theta * fro_sq
    assert bad / trials <= 1.0 / (theta**2 * p) + 0.05


def test_gram_error_shrinks_with_p():
    inst = haar_instance(n=100, k=3, kappa=2.0, seed=13)
    a = SampledMatrix.from_dense(inst.a)
    medians = []
    for p in (40, 320):
        errs = []
        for seed in range(7):
            d = sketch_of(a, 3, p, seed=seed)
            v = dense_v(d, inst.a)
            errs.append(np.linalg.norm(v.conj().T @ v - np.eye(3)))
        medians.append(np.median(errs))
    assert medians[1] < medians[0]


def test_sigma1_w_bounded():
    inst = haar_instance(n=60, k=3, kappa=3.0)
    a = SampledMatrix.from_dense(inst.a)
    spectral = np.linalg.norm(inst.a, ord=2)
    ok = 0
    for seed in range(20):
        d = sketch_of(a, 3, 200, seed=seed)
        w = dense_s(d, inst.a)[:, d.col_indices] * d.col_scales[None, :]
        ok += np.linalg.svd(w, compute_uv=False)[0] <= 2.0 * spectral
    assert ok >= 18


def test_svd_truncation_contract():
    """W has rank <= k, so the kept top-k factorization reconstructs it."""
    inst = haar_instance(n=50, k=2, kappa=2.0)
    a = SampledMatrix.from_dense(inst.a)
    d = sketch_of(a, 2, 40)
    w = dense_s(d, inst.a)[:, d.col_indices] * d.col_scales[None, :]
    sigma = np.linalg.svd(w, compute_uv=False)
    assert sigma[d.k:].max(initial=0.0) <= 1e-8 * np.linalg.norm(w)
    np.testing.assert_allclose(sigma[: d.k], d.sigma_hat, rtol=1e-10)


def test_phase_convention():
    inst = haar_instance(n=30, k=2)
    a = SampledMatrix.from_dense(inst.a)
    d = sketch_of(a, 2, 30)
    for i in range(2):
        t = int(np.argmax(np.abs(d.u_hat[:, i])))
        z = d.u_hat[t, i]
        assert abs(z.imag) <= 1e-12 * abs(z)
        assert z.real > 0


def test_description_validate_and_scales():
    inst = haar_instance(n=30, k=2)
    a = SampledMatrix.from_dense(inst.a)
    d = sketch_of(a, 2, 25)
    d.validate()
    assert d.check_scales(a)
    broken = SuccinctDescription(
        row_indices=d.row_indices, row_scales=d.row_scales * 1.0001,
        col_indices=d.col_indices, col_scales=d.col_scales,
        sigma_hat=d.sigma_hat, u_hat=d.u_hat, k=d.k, p=d.p,
    )
    assert not broken.check_scales(a)


def test_serialization_roundtrip():
    inst = haar_instance(n=30, k=2)
    a = SampledMatrix.from_dense(inst.a)
    d = sketch_of(a, 2, 25, seed=77)
    blob = json.dumps(d.to_json_dict())
    back = SuccinctDescription.from_json_dict(json.loads(blob))
    np.testing.assert_array_equal(back.row_indices, d.row_indices)
    np.testing.assert_array_equal(back.row_scales, d.row_scales)
    np.testing.assert_array_equal(back.col_indices, d.col_indices)
    np.testing.assert_array_equal(back.col_scales, d.col_scales)
    np.testing.assert_array_equal(back.sigma_hat, d.sigma_hat)
    np.testing.assert_array_equal(back.u_hat, d.u_hat)
    assert back.seed == 77 and back.source_digest == d.source_digest
    with pytest.raises(ValueError):
        SuccinctDescription.from_json_dict({"format": "other"})


def test_digest_tracks_matrix():
    inst = haar_instance(n=20, k=2)
    a = SampledMatrix.from_dense(inst.a)
    d1 = sketch_of(a, 2, 10)
    other = SampledMatrix.from_dense(inst.a * 2.0)
    d2 = sketch_of(other, 2, 10)
    assert d1.source_digest != d2.source_digest


def test_rank_probe_and_size_helpers(rng):
    inst = haar_instance(n=40, k=3, kappa=2.0)
    a = SampledMatrix.from_dense(inst.a)
    spectrum = rank_probe(a, 60, rng)
    assert spectrum.shape == (60,)
    assert np.sum(spectrum > 1e-8 * spectrum[0]) == 3

    assert suggest_sketch_size(3, 100, 100) == max(60, 3 * int(np.ceil(np.log(10000))))
    assert paper_sketch_size(2, 2.0, 0.1, 1.0) == pytest.approx(
        1e7 * 2**11 * 2**20 / 0.1**4
    )
