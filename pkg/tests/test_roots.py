import math

import numpy as np
import pytest

from cascade_kpz.roots import NoSignChangeError, bisect, bisect_decreasing_many


def test_bisect_finds_root():
    root, it = bisect(lambda x: x * x - 2, 0, 2, 1e-12)
    assert abs(root - math.sqrt(2)) < 1e-12
    assert it <= 60


def test_bisect_exact_endpoints():
    assert bisect(lambda x: x, 0.0, 1.0, 1e-9)[0] == 0.0
    assert bisect(lambda x: x - 1, 0.0, 1.0, 1e-9)[0] == 1.0


def test_bisect_no_sign_change():
    with pytest.raises(NoSignChangeError) as err:
        bisect(lambda x: x + 1, 0, 1, 1e-9)
    assert err.value.f_lo == 1 and err.value.f_hi == 2


def test_vectorized_bisection():
    targets = np.array([0.1, 0.5, 0.9])
    roots, _ = bisect_decreasing_many(lambda s: targets - s, 0.0, np.ones(3), 1e-10)
    assert np.allclose(roots, targets, atol=1e-10)
