import math

import numpy as np
import pytest

from mcplab.rng import derive_seed, normals
from mcplab.sensing import (
    PowerIterationError,
    SizeOverflowError,
    batch_top_singular_values,
    draw_ensemble,
    load_ensemble,
    measure,
    measure_noisy,
    noise_vector,
    save_ensemble,
    sigma_max,
)


class TestDrawEnsemble:
    def test_reproducible(self):
        a = draw_ensemble(5, 7, 123)
        b = draw_ensemble(5, 7, 123)
        assert np.array_equal(a.entries, b.entries)

    def test_scalar_mean_over_seeds(self):
        # CLT oracle: mean of 1e5 unit normals within a 5 sigma window
        values = np.array([draw_ensemble(1, 1, s).entries[0, 0] for s in range(10_000)])
        assert abs(values.mean()) < 0.05  # 5 sigma at 1e4 draws
        big = normals(derive_seed(999, 0x11), 100_000)
        assert abs(big.mean()) < 0.02

    def test_entry_variance(self):
        a = draw_ensemble(1000, 1000, 4)
        var = a.entries.var()
        assert abs(var - 1.0) < 0.01  # chi-square oracle: sd(var) ~ sqrt(2/1e6)

    def test_size_cap(self):
        with pytest.raises(SizeOverflowError):
            draw_ensemble(100_000, 1_000, 1)

    def test_immutability(self):
        a = draw_ensemble(2, 2, 0)
        with pytest.raises(ValueError):
            a.entries[0, 0] = 5.0


class TestMeasure:
    def test_zero_signal(self):
        a = draw_ensemble(3, 4, 9)
        assert np.array_equal(measure(a, np.zeros(4)), np.zeros(3))

    def test_row_sum(self):
        a = draw_ensemble(1, 2, 5)
        y = measure(a, np.ones(2))
        assert y[0] == pytest.approx(a.entries.sum(), rel=1e-15)

    def test_against_naive_double_loop(self):
        a = draw_ensemble(6, 9, 31)
        x = normals(77, 9)
        y = measure(a, x)
        naive = np.array(
            [sum(a.entries[i, j] * x[j] for j in range(9)) for i in range(6)]
        )
        assert np.allclose(y, naive, rtol=1e-12, atol=0)

    def test_linearity(self):
        a = draw_ensemble(8, 10, 3)
        x = normals(1, 10)
        z = normals(2, 10)
        lhs = measure(a, 2.5 * x + 0.5 * z)
        rhs = 2.5 * measure(a, x) + 0.5 * measure(a, z)
        assert np.allclose(lhs, rhs, rtol=1e-10)

    def test_dimension_mismatch(self):
        a = draw_ensemble(3, 4, 9)
        with pytest.raises(ValueError):
            measure(a, np.zeros(5))


class TestMeasureNoisy:
    def test_sigma_zero_is_exact(self):
        a = draw_ensemble(5, 6, 2)
        x = np.linspace(0, 1, 6)
        rec = measure_noisy(a, x, 0.0, 99)
        assert np.array_equal(rec.y, measure(a, x))

    def test_reproducible(self):
        a = draw_ensemble(5, 6, 2)
        x = np.linspace(0, 1, 6)
        r1 = measure_noisy(a, x, 0.3, 7)
        r2 = measure_noisy(a, x, 0.3, 7)
        assert np.array_equal(r1.y, r2.y)

    def test_noise_scale_chi_square(self):
        # x = 0, sigma = 1: ||y||^2 / d concentrates at 1 over many seeds
        a = draw_ensemble(50, 4, 8)
        ratios = [
            np.linalg.norm(measure_noisy(a, np.zeros(4), 1.0, s).y) ** 2 / 50
            for s in range(2000)
        ]
        assert abs(np.mean(ratios) - 1.0) < 0.02

    def test_noise_independent_of_matrix(self):
        # correlation with a fixed matrix entry across shared integer seeds
        pairs = np.array(
            [
                (
                    draw_ensemble(1, 1, s).entries[0, 0],
                    noise_vector(s, 1)[0],
                )
                for s in range(10_000)
            ]
        )
        corr = np.corrcoef(pairs[:, 0], pairs[:, 1])[0, 1]
        assert abs(corr) < 5 / math.sqrt(10_000)


class TestSigmaMax:
    def test_scalar(self):
        assert sigma_max(np.array([[3.0]])) == 3.0

    def test_diagonal(self):
        assert sigma_max(np.diag([2.0, 1.0])) == pytest.approx(2.0, abs=1e-10)

    def test_against_svd_oracle(self):
        a = draw_ensemble(50, 200, 99)
        direct = sigma_max(a)
        oracle = np.linalg.svd(a.entries, compute_uv=False)[0]
        assert direct == pytest.approx(oracle, rel=1e-8)

    def test_zero_matrix(self):
        assert sigma_max(np.zeros((3, 5))) == 0.0

    def test_nonconvergence_reported(self):
        with pytest.raises(PowerIterationError):
            sigma_max(draw_ensemble(30, 100, 5), tol=1e-10, max_iter=2)

    def test_batch_matches_single(self):
        mats = [draw_ensemble(20, 60, s) for s in range(6)]
        grams = np.stack([m.entries @ m.entries.T for m in mats])
        tops = batch_top_singular_values(grams)
        for top, m in zip(tops, mats):
            assert top == pytest.approx(sigma_max(m), rel=1e-7)


class TestBinaryExport:
    def test_roundtrip(self, tmp_path):
        a = draw_ensemble(7, 5, 424242)
        path = tmp_path / "mat.bin"
        save_ensemble(a, path)
        b = load_ensemble(path)
        assert (b.d, b.n, b.seed) == (7, 5, 424242)
        assert np.array_equal(a.entries, b.entries)

    def test_layout_is_documented_little_endian(self, tmp_path):
        import struct

        a = draw_ensemble(2, 3, 17)
        path = tmp_path / "mat.bin"
        save_ensemble(a, path)
        blob = path.read_bytes()
        magic, d, n, seed = struct.unpack("<8sIIQ", blob[:24])
        assert magic == b"SENSMAT1" and (d, n, seed) == (2, 3, 17)
        body = np.frombuffer(blob[24:], dtype="<f8").reshape(2, 3)
        assert np.array_equal(body, a.entries)

    def test_tampered_file_rejected(self, tmp_path):
        a = draw_ensemble(2, 3, 17)
        path = tmp_path / "mat.bin"
        save_ensemble(a, path)
        blob = bytearray(path.read_bytes())
        blob[-1] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(ValueError, match="do not match"):
            load_ensemble(path)


def test_sigma_max_tail_bound_mini_monte_carlo():
    # eq-style check at small scale: rate <= exp(-d t3^2 / 2) + 3 SE
    from mcplab.concentration import verify_sigma_max_tail

    report = verify_sigma_max_tail(30, 100, 0.5, 2000, 515)
    assert report.passed
    assert 0.0 <= report.empirical_rate <= 1.0
