import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wbcount.classify import (
    CellClass,
    ClassifyParams,
    classify_cell,
    classify_granulocyte,
    cytoplasm_mask,
    cytoplasm_stats,
    shape_features,
)
from wbcount.raster import BinaryMask, RgbImage, mask_stats


def mask_from(bit) -> BinaryMask:
    return BinaryMask(np.asarray(bit, dtype=bool))


def solid_rgb(shape, color) -> RgbImage:
    r, g, b = color
    return RgbImage(np.full(shape, float(r)), np.full(shape, float(g)), np.full(shape, float(b)))


def horseshoe_mask(size=31, outer=12, inner=6, gap_half_deg=40.0) -> BinaryMask:
    c = size // 2
    yy, xx = np.mgrid[0:size, 0:size]
    d2 = (xx - c) ** 2 + (yy - c) ** 2
    ring = (d2 <= outer * outer) & (d2 > inner * inner)
    ang = np.degrees(np.arctan2(yy - c, xx - c))
    return BinaryMask(ring & ~(np.abs(ang) <= gap_half_deg))


class TestShapeFeatures:
    def test_filled_square(self):
        bit = np.zeros((14, 14), dtype=bool)
        bit[2:12, 2:12] = True
        m = mask_from(bit)
        sf = shape_features(mask_stats(m), m)
        assert sf.elongation == 1.0
        assert sf.centroid_inside

    def test_filled_rectangle_elongation(self):
        bit = np.zeros((16, 26), dtype=bool)
        bit[3:13, 3:23] = True  # 20 wide, 10 tall
        m = mask_from(bit)
        sf = shape_features(mask_stats(m), m)
        assert sf.elongation == 2.0
        assert sf.centroid_inside

    def test_horseshoe_centroid_is_outside(self):
        m = horseshoe_mask()
        sf = shape_features(mask_stats(m), m)
        assert not sf.centroid_inside

    def test_empty_region_is_an_error(self):
        m = mask_from(np.zeros((3, 3)))
        with pytest.raises(ValueError):
            mask_stats(m)


class TestCytoplasmMask:
    def test_single_pixel_nucleus_ring(self):
        bit = np.zeros((5, 5), dtype=bool)
        bit[2, 2] = True
        ring = cytoplasm_mask(mask_from(bit))
        assert ring.count() == 8

    def test_border_nucleus_ring_is_clipped_and_disjoint(self):
        bit = np.zeros((4, 4), dtype=bool)
        bit[0, 0] = True
        ring = cytoplasm_mask(mask_from(bit))
        assert ring.count() == 3
        assert not (ring.bit & bit).any()

    def test_empty_nucleus_empty_ring(self):
        assert cytoplasm_mask(BinaryMask.full((4, 4), False)).count() == 0


class TestCytoplasmStats:
    def test_white_ring_has_zero_saturation(self):
        img = solid_rgb((5, 5), (255, 255, 255))
        sel = np.zeros((5, 5), dtype=bool)
        sel[0, :] = True
        ave_hue, ave_sat = cytoplasm_stats(img, mask_from(sel))
        assert ave_sat == 0.0

    def test_blue_ring(self):
        img = solid_rgb((5, 5), (0, 0, 255))
        sel = np.zeros((5, 5), dtype=bool)
        sel[2, :] = True
        ave_hue, ave_sat = cytoplasm_stats(img, mask_from(sel))
        assert ave_hue == pytest.approx(240.0, abs=1e-9)
        assert ave_sat == pytest.approx(1.0)

    def test_circular_mean_across_the_seam(self):
        # (200, 75, 50) and (200, 50, 75) sit at hue +/-8.96 degrees with
        # identical saturation, so the weighted circular mean is exactly 0.
        r = np.full((2, 4), 200.0)
        g = np.array([[75.0] * 4, [50.0] * 4])
        b = np.array([[50.0] * 4, [75.0] * 4])
        img = RgbImage(r, g, b)
        ave_hue, ave_sat = cytoplasm_stats(img, BinaryMask.full((2, 4), True))
        assert min(ave_hue, 360.0 - ave_hue) == pytest.approx(0.0, abs=1e-9)

    def test_empty_mask_is_an_error(self):
        with pytest.raises(ValueError):
            cytoplasm_stats(solid_rgb((3, 3), (1, 2, 3)), BinaryMask.full((3, 3), False))

    @given(st.floats(0.1, 1.0))
    @settings(max_examples=30)
    def test_uniform_intensity_scaling_preserves_the_stats(self, c):
        # Scaling all channels together leaves hue and saturation alone,
        # so the granulocyte decision cannot change.
        base = solid_rgb((4, 4), (200, 53, 13))
        scaled = RgbImage(base.r * c, base.g * c, base.b * c)
        sel = BinaryMask.full((4, 4), True)
        hue_a, sat_a = cytoplasm_stats(base, sel)
        hue_b, sat_b = cytoplasm_stats(scaled, sel)
        assert hue_a == pytest.approx(hue_b, abs=1e-9)
        assert sat_a == pytest.approx(sat_b, abs=1e-9)
        assert classify_granulocyte((hue_a, sat_a)) is classify_granulocyte((hue_b, sat_b))


class TestClassifyGranulocyte:
    def test_low_saturation_is_neutrophil(self):
        assert classify_granulocyte((123.0, 0.05)) is CellClass.NEUTROPHIL

    def test_red_cytoplasm_is_eosinophil(self):
        assert classify_granulocyte((0.0, 0.9)) is CellClass.EOSINOPHIL

    def test_blue_cytoplasm_is_basophil(self):
        assert classify_granulocyte((240.0, 0.9)) is CellClass.BASOPHIL

    def test_unsupported_hue_is_unknown(self):
        assert classify_granulocyte((120.0, 0.9)) is CellClass.UNKNOWN

    def test_literal_high_saturation_reading_flag(self):
        p = ClassifyParams(neutrophil_high_saturation=True)
        assert classify_granulocyte((0.0, 0.95), p) is CellClass.NEUTROPHIL
        assert classify_granulocyte((0.0, 0.5), p) is CellClass.EOSINOPHIL

    def test_param_validation(self):
        with pytest.raises(ValueError):
            ClassifyParams(elongation_cut=1.0)
        with pytest.raises(ValueError):
            ClassifyParams(sat_white_max=0.0)


def embed(mask_bit: np.ndarray, canvas_shape=(48, 48), at=(8, 8)) -> BinaryMask:
    canvas = np.zeros(canvas_shape, dtype=bool)
    h, w = mask_bit.shape
    canvas[at[1] : at[1] + h, at[0] : at[0] + w] = mask_bit
    return BinaryMask(canvas)


class TestClassifyCell:
    def test_round_nucleus_is_lymphocyte(self):
        yy, xx = np.mgrid[0:40, 0:40]
        disc = mask_from((xx - 20) ** 2 + (yy - 20) ** 2 <= 81)
        img = solid_rgb((40, 40), (192, 192, 200))
        assert classify_cell(disc, mask_stats(disc), img) is CellClass.LYMPHOCYTE

    def test_oval_nucleus_is_monocyte(self):
        yy, xx = np.mgrid[0:40, 0:40]
        oval = mask_from(49 * (xx - 20) ** 2 + 144 * (yy - 20) ** 2 <= 49 * 144)
        img = solid_rgb((40, 40), (192, 192, 200))
        assert classify_cell(oval, mask_stats(oval), img) is CellClass.MONOCYTE

    def test_horseshoe_with_white_surround_is_neutrophil(self):
        nucleus = embed(horseshoe_mask().bit)
        img = solid_rgb((48, 48), (230, 230, 230))
        assert classify_cell(nucleus, mask_stats(nucleus), img) is CellClass.NEUTROPHIL

    def test_horseshoe_with_red_surround_is_eosinophil(self):
        nucleus = embed(horseshoe_mask().bit)
        img = solid_rgb((48, 48), (200, 53, 13))
        assert classify_cell(nucleus, mask_stats(nucleus), img) is CellClass.EOSINOPHIL

    def test_horseshoe_with_blue_surround_is_basophil(self):
        nucleus = embed(horseshoe_mask().bit)
        img = solid_rgb((48, 48), (100, 100, 210))
        assert classify_cell(nucleus, mask_stats(nucleus), img) is CellClass.BASOPHIL

    def test_degenerate_region_is_unknown(self):
        bit = np.zeros((10, 10), dtype=bool)
        bit[4, 4] = True
        m = mask_from(bit)
        img = solid_rgb((10, 10), (100, 100, 100))
        assert classify_cell(m, mask_stats(m), img) is CellClass.UNKNOWN

    def test_speckle_holes_do_not_flip_the_shape_test(self):
        # A disc with interior holes, one of them at the centroid pixel.
        yy, xx = np.mgrid[0:40, 0:40]
        disc = (xx - 20) ** 2 + (yy - 20) ** 2 <= 100
        holes = np.zeros_like(disc)
        holes[20, 20] = holes[17, 22] = holes[23, 18] = True
        m = mask_from(disc & ~holes)
        img = solid_rgb((40, 40), (192, 192, 200))
        assert classify_cell(m, mask_stats(m), img) is CellClass.LYMPHOCYTE

    def test_integer_upscaling_preserves_the_decision(self):
        yy, xx = np.mgrid[0:30, 0:30]
        oval = 25 * (xx - 15) ** 2 + 100 * (yy - 15) ** 2 <= 2500
        img_small = solid_rgb((30, 30), (192, 192, 200))
        small = mask_from(oval)
        scaled = mask_from(np.kron(oval, np.ones((2, 2), dtype=bool)))
        img_big = solid_rgb((60, 60), (192, 192, 200))
        assert classify_cell(small, mask_stats(small), img_small) is classify_cell(
            scaled, mask_stats(scaled), img_big
        )

    @given(st.integers(0, 2**31), st.sampled_from([True, False]))
    @settings(max_examples=50, deadline=None)
    def test_total_and_deterministic(self, seed, use_blob):
        rng = np.random.default_rng(seed)
        if use_blob:
            yy, xx = np.mgrid[0:24, 0:24]
            cx, cy = rng.integers(8, 16, 2)
            bit = (xx - cx) ** 2 + (yy - cy) ** 2 <= int(rng.integers(9, 36))
        else:
            bit = rng.random((24, 24)) < 0.3
            bit[0, 0] = True  # never empty
        m = mask_from(bit)
        img = RgbImage(*(rng.integers(0, 256, (24, 24)).astype(float) for _ in range(3)))
        first = classify_cell(m, mask_stats(m), img)
        second = classify_cell(m, mask_stats(m), img)
        assert first in CellClass
        assert first is second
