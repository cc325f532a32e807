import itertools
import json
import math
from pathlib import Path

import numpy as np
import pytest

from mcplab.codebook import (
    BudgetTooLargeError,
    Codebook,
    ComplexityBudget,
    EmptyCodebookError,
    Family,
    MalformedPayloadError,
    ProgramEntry,
    _bits_of,
    _cl2,
    count_entries,
    decode,
    description_length,
    entry_id,
    enumerate_entries,
    sample_entry,
)
from mcplab.quantize import Resolution

GOLDEN = Path(__file__).parent / "golden"

ALL_FAMILIES = (
    Family.CONSTANT,
    Family.K_SPARSE,
    Family.PIECEWISE_CONSTANT,
    Family.PRNG_EXPANSION,
)


def make_entry(family, payload, n, m):
    return ProgramEntry(family, tuple(payload), n, Resolution(m))


class TestDecode:
    def test_constant(self):
        entry = make_entry(Family.CONSTANT, _bits_of(2, 2), 3, 2)
        assert decode(entry).values.tolist() == [0.5, 0.5, 0.5]

    def test_k_sparse_single(self):
        payload = _bits_of(1, _cl2(5)) + _bits_of(2, _cl2(4)) + _bits_of(3, 2)
        entry = make_entry(Family.K_SPARSE, payload, 4, 2)
        assert decode(entry).values.tolist() == [0.0, 0.0, 0.75, 0.0]

    def test_piecewise(self):
        # b=1, breakpoint 2, levels 1 then 3 at m=2 over n=4
        payload = (
            _bits_of(1, _cl2(4)) + _bits_of(2, _cl2(4)) + _bits_of(1, 2) + _bits_of(3, 2)
        )
        entry = make_entry(Family.PIECEWISE_CONSTANT, payload, 4, 2)
        assert decode(entry).values.tolist() == [0.25, 0.25, 0.75, 0.75]

    def test_prng_golden_vectors(self):
        for case in json.loads((GOLDEN / "prng_vectors.json").read_text()):
            entry = make_entry(
                Family.PRNG_EXPANSION, _bits_of(case["seed"], 16), case["n"], case["m"]
            )
            assert decode(entry).values.tolist() == case["values"]

    def test_determinism(self):
        entry = make_entry(Family.PRNG_EXPANSION, _bits_of(0xAB, 16), 8, 4)
        assert np.array_equal(decode(entry).values, decode(entry).values)

    def test_decoded_signals_are_on_grid(self):
        book = Codebook(6, Resolution(3), ALL_FAMILIES)
        for entry in book.entries(ComplexityBudget(24)):
            sig = decode(entry)  # QuantizedSignal validates grid membership
            assert sig.n == 6

    def test_malformed_payloads(self):
        with pytest.raises(MalformedPayloadError, match="value"):
            decode(make_entry(Family.CONSTANT, (1,), 3, 2))
        # count exceeding n
        payload = _bits_of(5, _cl2(5)) + _bits_of(0, _cl2(4)) + _bits_of(0, 2)
        with pytest.raises(MalformedPayloadError, match="count"):
            decode(make_entry(Family.K_SPARSE, payload, 4, 2))
        # positions not strictly increasing
        payload = (
            _bits_of(2, _cl2(5))
            + _bits_of(2, _cl2(4))
            + _bits_of(1, _cl2(4))
            + _bits_of(0, 2)
            + _bits_of(0, 2)
        )
        with pytest.raises(MalformedPayloadError, match="position 1"):
            decode(make_entry(Family.K_SPARSE, payload, 4, 2))
        # breakpoint zero is out of range
        payload = _bits_of(1, _cl2(4)) + _bits_of(0, _cl2(4)) + _bits_of(0, 2) * 2
        with pytest.raises(MalformedPayloadError, match="breakpoint 0"):
            decode(make_entry(Family.PIECEWISE_CONSTANT, payload, 4, 2))
        # trailing bits
        with pytest.raises(MalformedPayloadError, match="trailing"):
            decode(make_entry(Family.CONSTANT, (1, 0, 1), 3, 2))


class TestDescriptionLength:
    def test_constant_m4(self):
        entry = make_entry(Family.CONSTANT, _bits_of(5, 4), 8, 4)
        assert description_length(entry) == 12

    def test_k_sparse_layout_n16_m4(self):
        # 8 header + 5 count + 1 * (4 position + 4 value) = 21
        payload = _bits_of(1, 5) + _bits_of(7, 4) + _bits_of(9, 4)
        entry = make_entry(Family.K_SPARSE, payload, 16, 4)
        assert description_length(entry) == 21

    def test_minimum_is_nine_bits(self):
        book = Codebook(1, Resolution(1), ALL_FAMILIES)
        lengths = [description_length(e) for e in book.entries(ComplexityBudget(26))]
        assert min(lengths) == 9


class TestEnumeration:
    def test_constant_m1_budget9(self):
        entries = list(enumerate_entries(ComplexityBudget(9), 4, 1, (Family.CONSTANT,)))
        assert len(entries) == 2
        assert [decode(e).values[0] for e in entries] == [0.0, 0.5]

    def test_constant_m4_budget12(self):
        entries = list(enumerate_entries(ComplexityBudget(12), 4, 4, (Family.CONSTANT,)))
        assert len(entries) == 16

    def test_count_matches_stream_and_cap(self):
        for budget_bits in (9, 12, 16, 20):
            budget = ComplexityBudget(budget_bits)
            entries = list(enumerate_entries(budget, 5, 2, ALL_FAMILIES))
            assert len(entries) == count_entries(budget, 5, 2, ALL_FAMILIES)
            assert len(entries) <= 2 ** (budget_bits + 1)
            assert all(description_length(e) <= budget_bits for e in entries)

    def test_canonical_total_order(self):
        entries = list(
            enumerate_entries(ComplexityBudget(20), 6, 2, ALL_FAMILIES)
        )
        keys = [
            (description_length(e), int(e.generator_id), e.payload_int) for e in entries
        ]
        assert keys == sorted(keys)
        assert len(set(keys)) == len(keys)

    def test_stable_across_runs(self):
        ids1 = [entry_id(e) for e in enumerate_entries(ComplexityBudget(18), 7, 2, ALL_FAMILIES)]
        ids2 = [entry_id(e) for e in enumerate_entries(ComplexityBudget(18), 7, 2, ALL_FAMILIES)]
        assert ids1 == ids2

    def test_budget_cap_enforced(self):
        with pytest.raises(BudgetTooLargeError):
            ComplexityBudget(27)
        with pytest.raises(BudgetTooLargeError):
            ComplexityBudget(20, cap=19)

    def test_independent_recount_k_sparse(self):
        # brute force the k-sparse census with itertools
        n, m, budget_bits = 6, 2, 26
        expected = 0
        cnt_w, pos_w = _cl2(n + 1), _cl2(n)
        for k in range(n + 1):
            if 8 + cnt_w + k * (pos_w + m) <= budget_bits:
                expected += math.comb(n, k) * 4**k
        assert count_entries(ComplexityBudget(budget_bits), n, m, (Family.K_SPARSE,)) == expected


class TestDifferenceCount:
    def test_pairwise_difference_bound(self):
        # exhaustive census at a small budget: distinct decoded differences
        # stay below 4^budget_bits
        budget = ComplexityBudget(12)
        book = Codebook(4, Resolution(2), ALL_FAMILIES)
        signals = [tuple(decode(e).values.tolist()) for e in book.entries(budget)]
        diffs = {
            tuple(np.subtract(a, b).tolist())
            for a, b in itertools.product(signals, repeat=2)
        }
        assert len(diffs) <= 2 ** (2 * budget.max_bits)

    def test_minimal_entry_per_signal_is_well_defined(self):
        budget = ComplexityBudget(16)
        book = Codebook(4, Resolution(2), ALL_FAMILIES)
        best: dict[tuple, tuple] = {}
        for e in book.entries(budget):
            key = tuple(decode(e).values.tolist())
            cand = (description_length(e), int(e.generator_id), e.payload_int)
            best.setdefault(key, cand)
            assert best[key] <= cand  # canonical order visits the minimum first


class TestSampling:
    def test_deterministic(self):
        budget = ComplexityBudget(9)
        a = sample_entry(budget, 4, 1, 7, (Family.CONSTANT,))
        b = sample_entry(budget, 4, 1, 7, (Family.CONSTANT,))
        assert a == b

    def test_supported_on_enumeration(self):
        budget = ComplexityBudget(14)
        book = Codebook(5, Resolution(2), ALL_FAMILIES)
        universe = {entry_id(e) for e in book.entries(budget)}
        seen = {entry_id(book.sample(budget, s)) for s in range(400)}
        assert seen <= universe
        assert len(seen) > len(universe) // 2

    def test_sample_equals_indexed_enumeration(self):
        # the unranking path must agree with the stream order exactly
        budget = ComplexityBudget(16)
        book = Codebook(5, Resolution(2), ALL_FAMILIES)
        entries = list(book.entries(budget))
        total = len(entries)
        from mcplab.codebook import _SAMPLE_TAG
        from mcplab.rng import derive_seed, raw_uint64

        for seed in range(200):
            u = int(raw_uint64(derive_seed(seed, _SAMPLE_TAG), 1)[0])
            assert book.sample(budget, seed) == entries[(u * total) >> 64]

    def test_uniformity_histogram(self):
        # 10^4 draws over 16 constants: binomial oracle, 5 sigma window
        budget = ComplexityBudget(12)
        draws = 10_000
        counts: dict[str, int] = {}
        for s in range(draws):
            e = sample_entry(budget, 4, 4, s, (Family.CONSTANT,))
            counts[entry_id(e)] = counts.get(entry_id(e), 0) + 1
        expected = draws / 16
        sigma = math.sqrt(draws * (1 / 16) * (15 / 16))
        assert len(counts) == 16
        for c in counts.values():
            assert abs(c - expected) <= 5 * sigma

    def test_empty_codebook(self):
        with pytest.raises(EmptyCodebookError):
            sample_entry(ComplexityBudget(9), 4, 4, 0, (Family.CONSTANT,))
