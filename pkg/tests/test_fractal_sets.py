import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cascade_kpz.fractal_sets import DigitRestrictionSet, DyadicIndex, cover, cover_count, iter_cover, zeta0

HALF = DigitRestrictionSet(2, ("00", "11"))


def brute_cover(dset, n):
    """Cells of level n hit by some infinite admissible word (checked to n + block digits)."""
    b = dset.block
    depth = -(-n // b) * b
    words = [format(w, f"0{b}b") for w in dset.allowed]
    hits = set()
    for blocks in itertools.product(words, repeat=depth // b):
        bits = "".join(blocks)
        hits.add(int(bits[:n], 2) if n else 0)
    return sorted(hits)


def test_dyadic_index():
    c = DyadicIndex(3, 5)
    assert c.parent() == DyadicIndex(2, 2)
    assert c.children() == (DyadicIndex(4, 10), DyadicIndex(4, 11))
    assert c.ancestor(1) == DyadicIndex(1, 1)
    assert (c.left, c.right) == (5 / 8, 6 / 8)
    assert DyadicIndex(2, 1) < DyadicIndex(2, 3)
    with pytest.raises(ValueError):
        DyadicIndex(2, 4)
    with pytest.raises(ValueError):
        DyadicIndex(0, 0).parent()


def test_zeta0_examples():
    assert zeta0(DigitRestrictionSet.full()) == 1.0
    assert zeta0(DigitRestrictionSet(2, ("00",))) == 0.0
    assert zeta0(HALF) == 0.5


def test_cover_examples():
    assert cover(HALF, 2).tolist() == [0, 3]
    assert cover(HALF, 1).tolist() == [0, 1]
    assert cover(DigitRestrictionSet.full(), 5).tolist() == list(range(32))
    assert [c.index for c in iter_cover(HALF, 2)] == [0, 3]


def test_cover_count_examples():
    assert cover_count(HALF, 4) == 4
    assert cover_count(DigitRestrictionSet.full(), 7) == 128
    assert cover_count(DigitRestrictionSet(3, ("101",)), 9) == 1


def test_invalid_sets():
    with pytest.raises(ValueError):
        DigitRestrictionSet(2, ())
    with pytest.raises(ValueError):
        DigitRestrictionSet(2, ("012",))
    with pytest.raises(ValueError):
        DigitRestrictionSet(0, ("",))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3).flatmap(
    lambda b: st.tuples(st.just(b), st.sets(st.integers(0, 2**b - 1), min_size=1))), st.integers(0, 7))
def test_cover_matches_brute_force(args, n):
    b, allowed = args
    dset = DigitRestrictionSet(b, tuple(format(w, f"0{b}b") for w in sorted(allowed)))
    expected = brute_cover(dset, n)
    assert cover(dset, n).tolist() == expected
    assert cover_count(dset, n) == len(expected)
