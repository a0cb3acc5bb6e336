import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wbcount.enhance import (
    EIGHT_NEIGHBOR_KERNEL,
    FOUR_NEIGHBOR_KERNEL,
    LaplacianKernel,
    kernel_by_name,
    laplacian,
    sharpen,
)
from wbcount.raster import GrayImage, RgbImage

small_planes = arrays(
    np.float64,
    (5, 6),
    elements=st.floats(min_value=-100.0, max_value=100.0, allow_nan=False, width=32),
)


def test_kernel_zero_sum_is_enforced():
    with pytest.raises(ValueError):
        LaplacianKernel(np.ones((3, 3)))
    assert FOUR_NEIGHBOR_KERNEL.taps.sum() == 0
    assert EIGHT_NEIGHBOR_KERNEL.taps.sum() == 0


def test_kernel_by_name():
    assert kernel_by_name("four") is FOUR_NEIGHBOR_KERNEL
    assert kernel_by_name("eight") is EIGHT_NEIGHBOR_KERNEL
    with pytest.raises(ValueError):
        kernel_by_name("five")


class TestLaplacian:
    def test_constant_image_gives_zero(self):
        out = laplacian(GrayImage(np.full((7, 7), 100.0)))
        assert np.all(out.v == 0.0)

    def test_constant_is_zero_for_eight_neighbor_too(self):
        out = laplacian(GrayImage(np.full((5, 5), 42.0)), EIGHT_NEIGHBOR_KERNEL)
        assert np.all(out.v == 0.0)

    def test_linear_ramp_interior_is_zero(self):
        v = np.tile(np.arange(8, dtype=float), (6, 1))
        out = laplacian(GrayImage(v))
        # Second difference of a linear ramp vanishes away from the sides.
        assert np.all(out.v[:, 1:-1] == 0.0)

    def test_impulse_response_hand_convolution(self):
        v = np.zeros((5, 5))
        v[2, 2] = 255.0
        out = laplacian(GrayImage(v)).v
        expected = np.zeros((5, 5))
        expected[2, 2] = -1020.0
        for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            expected[2 + dy, 2 + dx] = 255.0
        assert np.array_equal(out, expected)

    @given(small_planes, small_planes, st.floats(-3, 3), st.floats(-3, 3))
    def test_linearity(self, f, g, a, b):
        combined = laplacian(GrayImage(a * f + b * g)).v
        separate = a * laplacian(GrayImage(f)).v + b * laplacian(GrayImage(g)).v
        assert np.allclose(combined, separate, atol=1e-9)

    @given(
        arrays(np.float64, (3, 3), elements=st.floats(-5, 5, allow_nan=False, width=16)),
        st.floats(1.0, 200.0),
    )
    def test_any_zero_sum_kernel_annihilates_constants(self, taps, level):
        taps = taps - taps.mean()  # force the zero-sum invariant
        out = laplacian(GrayImage(np.full((6, 6), level)), LaplacianKernel(taps))
        assert np.allclose(out.v, 0.0, atol=1e-9)


class TestSharpen:
    def test_constant_color_is_unchanged(self):
        img = RgbImage(np.full((4, 4), 30.0), np.full((4, 4), 60.0), np.full((4, 4), 90.0))
        out = sharpen(img)
        assert np.array_equal(out.r, img.r)
        assert np.array_equal(out.g, img.g)
        assert np.array_equal(out.b, img.b)

    def test_step_edge_overshoot_is_clamped(self):
        step = np.array([[0.0, 0.0, 255.0, 255.0]] * 3)
        flat = np.full((3, 4), 128.0)
        out = sharpen(RgbImage(step, flat, flat))
        # Raw responses are -255 below and +510 above the edge; both rails clamp.
        assert np.array_equal(out.r, step)
        assert out.r.min() >= 0.0 and out.r.max() <= 255.0

    def test_channels_are_independent(self):
        rng = np.random.default_rng(3)
        r = rng.integers(0, 256, (6, 6)).astype(float)
        g = rng.integers(0, 256, (6, 6)).astype(float)
        b = rng.integers(0, 256, (6, 6)).astype(float)
        out = sharpen(RgbImage(r, g, b))
        out_r_only = sharpen(RgbImage(r, np.zeros((6, 6)), np.zeros((6, 6))))
        assert np.array_equal(out.r, out_r_only.r)

    def test_output_always_in_range(self):
        rng = np.random.default_rng(4)
        img = RgbImage(*(rng.integers(0, 256, (8, 8)).astype(float) for _ in range(3)))
        out = sharpen(img)
        for plane in (out.r, out.g, out.b):
            assert plane.min() >= 0.0 and plane.max() <= 255.0

    def test_single_pixel_image_is_unchanged(self):
        # Every neighbor replicates the only pixel, so the response is zero.
        dot = np.array([[77.0]])
        out = sharpen(RgbImage(dot, dot, dot))
        assert np.array_equal(out.r, dot)

    def test_constant_column_is_unchanged(self):
        column = np.full((5, 1), 77.0)
        out = sharpen(RgbImage(column, column, column))
        assert np.array_equal(out.r, column)
