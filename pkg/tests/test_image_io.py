import numpy as np
import pytest

from src.errors import ImageFormatError
from src.imaging.image_io import ImageBuffer, load_image, save_image, to_grayscale


class TestLoadImage:
    def test_reads_p5_with_comment_in_header(self, tmp_path):
        path = tmp_path / "frame.pgm"
        path.write_bytes(b"P5\n# comentario\n3 2\n255\n" + bytes([0, 1, 2, 253, 254, 255]))

        img = load_image(path)

        assert (img.width, img.height, img.channels) == (3, 2, 1)
        np.testing.assert_array_equal(img.plane(), [[0, 1, 2], [253, 254, 255]])

    def test_reads_p6_as_three_channels(self, tmp_path):
        path = tmp_path / "frame.ppm"
        path.write_bytes(b"P6 2 1 255\n" + bytes([10, 20, 30, 40, 50, 60]))

        img = load_image(path)

        assert img.channels == 3
        np.testing.assert_array_equal(img.data[0, 1], [40, 50, 60])

    def test_save_then_load_is_exact(self, tmp_path, rng):
        original = ImageBuffer.from_array(rng.integers(0, 256, size=(5, 7, 3), dtype=np.uint8))
        path = tmp_path / "roundtrip.ppm"

        save_image(original, path)

        assert load_image(path) == original

    def test_rejects_ascii_magic(self, tmp_path):
        path = tmp_path / "ascii.pgm"
        path.write_bytes(b"P2\n2 2\n255\n0 0 0 0\n")

        with pytest.raises(ImageFormatError) as info:
            load_image(path)
        assert info.value.token == "P2"

    def test_rejects_maxval_other_than_255(self, tmp_path):
        path = tmp_path / "deep.pgm"
        path.write_bytes(b"P5\n1 1\n65535\n\x00\x00")

        with pytest.raises(ImageFormatError) as info:
            load_image(path)
        assert info.value.token == "65535"

    def test_rejects_truncated_payload(self, tmp_path):
        path = tmp_path / "short.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + bytes(10))

        with pytest.raises(ImageFormatError, match="truncados"):
            load_image(path)

    def test_rejects_zero_dimension(self, tmp_path):
        path = tmp_path / "empty.pgm"
        path.write_bytes(b"P5\n0 4\n255\n")

        with pytest.raises(ImageFormatError) as info:
            load_image(path)
        assert info.value.token == "0"

    def test_missing_file_is_format_error(self, tmp_path):
        with pytest.raises(ImageFormatError):
            load_image(tmp_path / "nao_existe.pgm")


class TestImageBuffer:
    def test_from_array_rounds_half_up_and_clips(self):
        img = ImageBuffer.from_array(np.array([[0.5, 1.49, 300.0, -4.0]]))
        np.testing.assert_array_equal(img.plane(), [[1, 1, 255, 0]])

    def test_rejects_wrong_channel_count(self):
        with pytest.raises(ImageFormatError):
            ImageBuffer(width=1, height=1, channels=2, data=np.zeros((1, 1, 2), dtype=np.uint8))


class TestToGrayscale:
    def test_mean_with_half_up_rounding(self):
        img = ImageBuffer.from_array(np.array([[[1, 1, 2], [0, 0, 1], [255, 255, 255]]], dtype=np.uint8))
        gray = to_grayscale(img)
        # (1+1+2)/3 = 1.33 -> 1, 1/3 -> 0, 255
        np.testing.assert_array_equal(gray.plane(), [[1, 0, 255]])

    def test_half_rounds_up(self):
        img = ImageBuffer.from_array(np.array([[[1, 2, 2]]], dtype=np.uint8))
        # 5/3 = 1.67 -> 2
        assert to_grayscale(img).plane()[0, 0] == 2

    def test_identity_for_gray(self, rng):
        img = ImageBuffer.from_array(rng.integers(0, 256, size=(3, 3), dtype=np.uint8))
        assert to_grayscale(img) is img
