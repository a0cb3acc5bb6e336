import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wbcount.raster import (
    BinaryMask,
    GrayImage,
    ImageReadError,
    LabelMatrix,
    RgbImage,
    mask_stats,
    pixelwise_multiply,
    read_image,
    region_stats,
    subtract_mask,
    write_png,
)


def rgb(r, g, b):
    return RgbImage(np.asarray(r, float), np.asarray(g, float), np.asarray(b, float))


masks = arrays(np.bool_, (6, 7), elements=st.booleans()).map(BinaryMask)


class TestContainers:
    def test_rgb_rejects_mismatched_planes(self):
        with pytest.raises(ValueError):
            rgb(np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)))

    def test_rgb_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            rgb([[256.0]], [[0.0]], [[0.0]])

    def test_gray_rejects_nan(self):
        with pytest.raises(ValueError):
            GrayImage(np.array([[np.nan]]))

    def test_arrays_are_immutable(self):
        img = rgb([[1.0]], [[2.0]], [[3.0]])
        with pytest.raises(ValueError):
            img.r[0, 0] = 5.0

    def test_label_matrix_requires_contiguous_labels(self):
        with pytest.raises(ValueError):
            LabelMatrix(np.array([[0, 2], [0, 2]]), count=1)
        LabelMatrix(np.array([[0, 1], [0, 2]]), count=2)

    def test_round_trip_through_uint8(self):
        arr = np.arange(12, dtype=np.uint8).reshape(2, 2, 3)
        assert np.array_equal(RgbImage.from_array(arr).to_array(), arr)


class TestPixelwiseMultiply:
    def test_all_true_mask_is_identity(self):
        img = rgb([[10.0, 40.0]], [[20.0, 50.0]], [[30.0, 60.0]])
        out = pixelwise_multiply(img, BinaryMask.full((1, 2), True))
        assert np.array_equal(out.r, img.r)
        assert np.array_equal(out.b, img.b)

    def test_all_false_mask_annihilates(self):
        img = rgb([[10.0, 40.0]], [[20.0, 50.0]], [[30.0, 60.0]])
        out = pixelwise_multiply(img, BinaryMask.full((1, 2), False))
        assert out.r.sum() == out.g.sum() == out.b.sum() == 0

    def test_hand_evaluated_two_pixel_case(self):
        img = rgb([[10.0, 40.0]], [[20.0, 50.0]], [[30.0, 60.0]])
        out = pixelwise_multiply(img, BinaryMask(np.array([[True, False]])))
        assert out.r.tolist() == [[10.0, 0.0]]
        assert out.g.tolist() == [[20.0, 0.0]]
        assert out.b.tolist() == [[30.0, 0.0]]

    def test_dimension_mismatch_is_an_error(self):
        img = rgb([[1.0]], [[1.0]], [[1.0]])
        with pytest.raises(ValueError):
            pixelwise_multiply(img, BinaryMask.full((2, 2), True))

    @given(masks)
    def test_idempotent_in_the_mask(self, mask):
        img = rgb(np.full(mask.shape, 7.0), np.full(mask.shape, 8.0), np.full(mask.shape, 9.0))
        once = pixelwise_multiply(img, mask)
        twice = pixelwise_multiply(once, mask)
        assert np.array_equal(once.r, twice.r)
        assert np.array_equal(once.g, twice.g)
        assert np.array_equal(once.b, twice.b)


class TestSubtractMask:
    def test_self_difference_is_empty(self):
        m = BinaryMask(np.eye(3, dtype=bool))
        assert subtract_mask(m, m).count() == 0

    def test_subtracting_empty_is_identity(self):
        m = BinaryMask(np.eye(3, dtype=bool))
        out = subtract_mask(m, BinaryMask.full((3, 3), False))
        assert np.array_equal(out.bit, m.bit)

    def test_center_removal_leaves_ring(self):
        a = BinaryMask.full((3, 3), True)
        b = np.zeros((3, 3), dtype=bool)
        b[1, 1] = True
        out = subtract_mask(a, BinaryMask(b))
        assert out.count() == 8
        assert not out.bit[1, 1]

    @given(masks, masks)
    def test_set_difference_laws(self, a, b):
        diff = subtract_mask(a, b)
        assert not (diff.bit & b.bit).any()
        assert np.array_equal(diff.bit | (a.bit & b.bit), a.bit)


class TestRegionStats:
    def test_single_pixel(self):
        lab = np.zeros((6, 6), dtype=np.int32)
        lab[4, 3] = 1
        reg = region_stats(LabelMatrix(lab, 1), 1)
        assert reg.area == 1
        assert reg.centroid == (3.0, 4.0)
        assert reg.bbox == (3, 4, 3, 4)

    def test_square_block_centroid(self):
        lab = np.zeros((4, 4), dtype=np.int32)
        lab[0:2, 0:2] = 1
        reg = region_stats(LabelMatrix(lab, 1), 1)
        assert reg.area == 4
        assert reg.centroid == (0.5, 0.5)

    def test_c_shape_centroid_off_center(self):
        lab = np.zeros((3, 3), dtype=np.int32)
        lab[:, :] = 1
        lab[1, 2] = 0  # remove middle-right pixel
        reg = region_stats(LabelMatrix(lab, 1), 1)
        assert reg.area == 8
        assert reg.centroid == (pytest.approx(0.875), pytest.approx(1.0))
        assert reg.bbox == (0, 0, 2, 2)

    def test_label_out_of_range(self):
        lab = np.zeros((2, 2), dtype=np.int32)
        lab[0, 0] = 1
        with pytest.raises(ValueError):
            region_stats(LabelMatrix(lab, 1), 2)

    def test_regions_partition_foreground(self):
        lab = np.array([[1, 1, 0, 2], [0, 1, 0, 2], [3, 0, 0, 0]], dtype=np.int32)
        labels = LabelMatrix(lab, 3)
        regions = [region_stats(labels, k) for k in (1, 2, 3)]
        assert sum(r.area for r in regions) == int((lab > 0).sum())
        union = set()
        for r in regions:
            assert not (union & r.pixels)
            union |= r.pixels
        assert len(union) == int((lab > 0).sum())

    def test_to_mask_round_trip(self):
        lab = np.zeros((4, 5), dtype=np.int32)
        lab[1:3, 2:4] = 1
        reg = region_stats(LabelMatrix(lab, 1), 1)
        assert np.array_equal(reg.to_mask((4, 5)).bit, lab > 0)
        again = mask_stats(reg.to_mask((4, 5)))
        assert again.pixels == reg.pixels


class TestImageIo:
    def test_png_round_trip(self, tmp_path):
        arr = np.random.default_rng(1).integers(0, 256, (9, 11, 3)).astype(np.uint8)
        img = RgbImage.from_array(arr)
        path = tmp_path / "field.png"
        write_png(img, path)
        back = read_image(path)
        assert np.array_equal(back.to_array(), arr)

    def test_bmp_decoding(self, tmp_path):
        from PIL import Image

        arr = np.random.default_rng(2).integers(0, 256, (5, 6, 3)).astype(np.uint8)
        path = tmp_path / "field.bmp"
        Image.fromarray(arr, "RGB").save(path, format="BMP")
        assert np.array_equal(read_image(path).to_array(), arr)

    def test_corrupt_file_reports_error(self, tmp_path):
        path = tmp_path / "junk.png"
        path.write_bytes(b"this is not an image")
        with pytest.raises(ImageReadError):
            read_image(path)

    def test_unsupported_format_reports_error(self, tmp_path):
        from PIL import Image

        path = tmp_path / "field.tiff"
        Image.new("RGB", (4, 4)).save(path, format="TIFF")
        with pytest.raises(ImageReadError):
            read_image(path)
