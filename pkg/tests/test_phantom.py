import numpy as np
import pytest

from mammocad.phantom import generate_phantom

from oracles import connected_components_8


class TestGeneratePhantom:
    def test_deterministic_per_seed(self):
        img1, truth1 = generate_phantom("tumor", 5, 256)
        img2, truth2 = generate_phantom("tumor", 5, 256)
        assert img1 == img2
        assert (truth1 == truth2).all()

    def test_seeds_differ(self):
        img1, _ = generate_phantom("tumor", 1, 256)
        img2, _ = generate_phantom("tumor", 2, 256)
        assert img1 != img2

    def test_blank_truth_empty(self):
        img, truth = generate_phantom("blank", 3, 128)
        assert not truth.any()
        assert (img.width, img.height) == (128, 128)

    def test_tumor_truth_one_blob(self):
        _, truth = generate_phantom("tumor", 1, 256)
        pixels = [(int(x), int(y)) for y, x in np.argwhere(truth)]
        assert pixels
        assert connected_components_8(pixels) == 1

    def test_multi_truth_marks_textured_blob_only(self):
        size = 256
        _, truth = generate_phantom("multi", 1, size)
        pixels = [(int(x), int(y)) for y, x in np.argwhere(truth)]
        assert connected_components_8(pixels) == 1
        xs = [x for x, _ in pixels]
        assert max(xs) < size // 2  # textured blob sits on the left

    def test_blob_darker_than_background(self):
        img, truth = generate_phantom("tumor", 2, 256)
        inside = img.pixels[truth].mean()
        outside = img.pixels[~truth].mean()
        assert inside < outside - 30

    def test_pixel_range_and_dtype(self):
        img, _ = generate_phantom("multi", 4, 128)
        assert img.pixels.dtype == np.uint8

    def test_kind_validation(self):
        with pytest.raises(ValueError):
            generate_phantom("weird", 1, 128)

    def test_size_validation(self):
        with pytest.raises(ValueError):
            generate_phantom("blank", 1, 32)

    def test_blank_is_smooth(self):
        img, _ = generate_phantom("blank", 1, 128)
        assert int(img.pixels.max()) - int(img.pixels.min()) < 16
