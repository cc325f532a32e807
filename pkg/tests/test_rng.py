import numpy as np
import pytest

from mcplab.rng import derive_seed, normals, raw_uint64, uniform01


def test_streams_are_reproducible():
    assert np.array_equal(raw_uint64(123, 64), raw_uint64(123, 64))
    assert np.array_equal(normals(123, 64), normals(123, 64))


def test_stream_windows_are_consistent():
    full = normals(9, 100)
    for start, count in ((0, 10), (3, 7), (50, 1), (99, 1), (1, 98)):
        assert np.array_equal(full[start : start + count], normals(9, count, start))
    ufull = uniform01(9, 100)
    assert np.array_equal(ufull[13:40], uniform01(9, 27, start=13))


def test_uniforms_are_strictly_inside_unit_interval():
    u = uniform01(2024, 200_000)
    assert u.min() > 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.005


def test_normals_moments():
    z = normals(77, 1_000_000)
    assert abs(z.mean()) < 0.005
    assert abs(z.std() - 1.0) < 0.005
    assert abs((z**3).mean()) < 0.02


def test_derive_seed_changes_with_every_component():
    base = derive_seed(5, 1, 2)
    assert derive_seed(5, 1, 3) != base
    assert derive_seed(5, 2, 2) != base
    assert derive_seed(6, 1, 2) != base
    assert derive_seed(5, 2, 1) != derive_seed(5, 1, 2)


def test_distinct_seeds_give_decorrelated_streams():
    a = normals(1000, 50_000)
    b = normals(1001, 50_000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.02


def test_negative_count_rejected():
    with pytest.raises(ValueError):
        normals(1, -1)
    with pytest.raises(ValueError):
        raw_uint64(1, -1)
