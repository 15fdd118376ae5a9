import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import spearmanr

from sparseoos.embed import laplacian_eigenmaps
from sparseoos.kernels import Knn, NormalizedHeat
from sparseoos.synth import SplitMix64, roll_coordinates, swiss_roll


def test_splitmix_reference_values():
    g = SplitMix64(0)
    assert [g.next_u64() for _ in range(3)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
    g = SplitMix64(1234567)
    assert [g.next_u64() for _ in range(5)] == [
        6457827717110365317,
        3203168211198807973,
        9817491932198370423,
        4593380528125082431,
        16408922859458223821,
    ]


@given(st.integers(0, 2**64 - 1))
def test_uniform_range(seed):
    g = SplitMix64(seed)
    for _ in range(5):
        assert 0.0 <= g.uniform() < 1.0


def test_origin_of_unit_square():
    pt, intr = roll_coordinates(0.0, 0.0)
    np.testing.assert_allclose(pt, [0.0, 0.0, -1.5 * math.pi], atol=1e-12)
    np.testing.assert_allclose(intr, [1.5 * math.pi, 0.0])


def test_draw_order():
    g = SplitMix64(9)
    u, v = g.uniform(), g.uniform()
    roll = swiss_roll(1, seed=9)
    pt, intr = roll_coordinates(u, v)
    assert np.array_equal(roll.points[0], pt)
    assert np.array_equal(roll.intrinsic[0], intr)


def test_deterministic():
    a, b = swiss_roll(200, seed=4), swiss_roll(200, seed=4)
    assert a.points.tobytes() == b.points.tobytes()
    assert a.intrinsic.tobytes() == b.intrinsic.tobytes()
    assert not np.array_equal(a.points, swiss_roll(200, seed=5).points)


def test_radius_range_and_alignment():
    roll = swiss_roll(1000, seed=0)
    t = roll.intrinsic[:, 0]
    assert np.all((t >= 1.5 * math.pi) & (t <= 4.5 * math.pi))
    np.testing.assert_allclose(np.hypot(roll.points[:, 0], roll.points[:, 2]), t, rtol=1e-12)
    np.testing.assert_array_equal(roll.points[:, 1], roll.intrinsic[:, 1])
    assert np.all((roll.intrinsic[:, 1] >= 0) & (roll.intrinsic[:, 1] < 21))


def test_empty_roll_rejected():
    with pytest.raises(ValueError):
        swiss_roll(0)


def test_embedding_follows_arc_parameter():
    roll = swiss_roll(1000, seed=0)
    emb = laplacian_eigenmaps(roll.points, NormalizedHeat(10.0, Knn(7)), 2)
    rho = spearmanr(emb.coordinates[:, 0], roll.intrinsic[:, 0]).statistic
    assert abs(rho) > 0.9
