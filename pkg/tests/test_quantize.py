from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcplab.quantize import (
    DomainError,
    QuantizedSignal,
    Resolution,
    binary_expansion,
    quantization_error_bound,
    quantize_vector,
    signal_bits,
    truncate,
)


def oracle_truncate(x: Fraction, m: int) -> Fraction:
    """Exact rational truncation: keep the first m expansion bits of x."""
    if x >= 1:
        return Fraction(2**m - 1, 2**m)
    return Fraction((x * 2**m).__floor__(), 2**m)


class TestBinaryExpansion:
    def test_exact_dyadic(self):
        assert binary_expansion(0.625, 3).tolist() == [1, 0, 1]

    def test_zero(self):
        assert binary_expansion(0.0, 4).tolist() == [0, 0, 0, 0]

    def test_endpoint_is_all_ones(self):
        assert binary_expansion(1.0, 3).tolist() == [1, 1, 1]

    def test_domain_error(self):
        with pytest.raises(DomainError):
            binary_expansion(1.5, 3)
        with pytest.raises(DomainError):
            binary_expansion(-0.1, 3)

    def test_one_ulp_overshoot_tolerated(self):
        assert binary_expansion(-(2.0**-53), 3).tolist() == [0, 0, 0]
        assert binary_expansion(1.0 + 2.0**-52, 3).tolist() == [1, 1, 1]


class TestTruncate:
    def test_dyadic(self):
        assert truncate(0.625, 2) == 0.5

    def test_first_bit_of_near_one(self):
        assert truncate(0.999, 1) == 0.5

    def test_third_rational_oracle(self):
        # frozen from the exact rational expansion of 1/3 at m=4
        expected = oracle_truncate(Fraction(1, 3), 4)
        assert expected == Fraction(5, 16)
        assert truncate(1 / 3, 4) == 0.3125

    def test_max_resolution_endpoint(self):
        assert truncate(1.0, 53) == 1.0 - 2.0**-53


class TestQuantizeVector:
    def test_basic(self):
        sig = quantize_vector([0.625, 0.0], 2)
        assert sig.values.tolist() == [0.5, 0.0]

    def test_idempotent(self):
        sig = quantize_vector([0.3, 0.77, 1.0, 0.0], 5)
        again = quantize_vector(sig.values, 5)
        assert np.array_equal(sig.values, again.values)

    def test_rational_oracle_vector(self):
        sig = quantize_vector([1 / 3, 2 / 3, 1.0], 4)
        expected = [
            float(oracle_truncate(Fraction(1, 3), 4)),
            float(oracle_truncate(Fraction(2, 3), 4)),
            float(oracle_truncate(Fraction(1, 1), 4)),
        ]
        assert sig.values.tolist() == expected == [0.3125, 0.625, 0.9375]

    def test_reports_offending_index(self):
        with pytest.raises(DomainError, match="coordinate 2"):
            quantize_vector([0.1, 0.2, 7.0], 3)

    def test_signal_invariant_rejects_off_grid(self):
        with pytest.raises(ValueError):
            QuantizedSignal(values=np.array([0.3]), resolution=Resolution(2))


class TestErrorBound:
    def test_values(self):
        assert quantization_error_bound(4, 1) == 2.0
        assert quantization_error_bound(1, 1) == 1.0
        assert quantization_error_bound(256, 8) == 0.125

    def test_bounds_any_pair_difference(self):
        rng = np.random.default_rng(5)
        for m in (1, 3, 6):
            u = rng.uniform(size=40)
            v = rng.uniform(size=40)
            du = u - quantize_vector(u, m).values
            dv = v - quantize_vector(v, m).values
            assert np.linalg.norm(du - dv) <= quantization_error_bound(40, m)


class TestResolution:
    def test_bounds(self):
        with pytest.raises(ValueError):
            Resolution(0)
        with pytest.raises(ValueError):
            Resolution(54)
        assert Resolution(53).step == 2.0**-53

    def test_for_length_natural_log(self):
        assert Resolution.for_length(1).m == 1
        assert Resolution.for_length(2).m == 1
        assert Resolution.for_length(32).m == 4
        assert Resolution.for_length(256).m == 6
        assert Resolution.for_length(4096).m == 9


@settings(max_examples=300, deadline=None)
@given(
    x=st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
    m=st.integers(min_value=1, max_value=53),
)
def test_truncation_error_window(x, m):
    t = truncate(x, m)
    if x < 1.0:
        assert 0.0 <= x - t < 2.0**-m
    else:
        assert x - t == 2.0**-m


@settings(max_examples=300, deadline=None)
@given(
    x=st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
    m=st.integers(min_value=1, max_value=53),
    m2=st.integers(min_value=1, max_value=53),
)
def test_prefix_property(x, m, m2):
    lo, hi = sorted((m, m2))
    assert truncate(truncate(x, hi), lo) == truncate(x, lo)


@settings(max_examples=300, deadline=None)
@given(
    x=st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
    m=st.integers(min_value=1, max_value=53),
)
def test_expansion_matches_truncation_bit_exactly(x, m):
    bits = binary_expansion(x, m)
    # partial sums of distinct negative powers of two are exact in float64
    total = 0.0
    for i, b in enumerate(bits, start=1):
        total += float(b) * 2.0**-i
    assert total == truncate(x, m)


def test_signal_bits_concatenates_expansions():
    sig = quantize_vector([0.625, 1.0], 3)
    assert signal_bits(sig).tolist() == [1, 0, 1, 1, 1, 1]
