"""IDX parsing, structured error reporting, and the synthetic digit set."""

import struct

import numpy as np
import pytest

from synsampler import idx


def _write_raw(path, payload: bytes):
    with open(path, "wb") as fh:
        fh.write(payload)
    return path


def _image_file(tmp_path, arr, name="imgs"):
    path = tmp_path / name
    idx.write_idx(path, arr.astype(np.uint8))
    return path


def _label_file(tmp_path, arr, name="labs"):
    path = tmp_path / name
    idx.write_idx(path, arr.astype(np.uint8))
    return path


class TestRoundTrip:
    def test_uint8_3d(self, tmp_path):
        rng = np.random.default_rng(3)
        arr = rng.integers(0, 256, size=(7, 28, 28), dtype=np.uint8)
        path = tmp_path / "a.idx"
        idx.write_idx(path, arr)
        back = idx.read_idx(path)
        np.testing.assert_array_equal(back, arr)
        assert back.dtype == np.uint8

    def test_float64_2d(self, tmp_path):
        rng = np.random.default_rng(4)
        arr = rng.standard_normal((5, 3))
        path = tmp_path / "b.idx"
        idx.write_idx(path, arr)
        back = idx.read_idx(path)
        np.testing.assert_array_equal(back, arr)
        assert back.dtype == np.float64

    def test_int32_1d(self, tmp_path):
        arr = np.array([-7, 0, 123456], dtype=np.int32)
        path = tmp_path / "c.idx"
        idx.write_idx(path, arr)
        np.testing.assert_array_equal(idx.read_idx(path), arr)

    def test_unsupported_dtype_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="no IDX type code"):
            idx.write_idx(tmp_path / "d.idx", np.zeros(3, dtype=np.complex128))


class TestStructuredErrors:
    def test_empty_file_is_truncated_header(self, tmp_path):
        path = _write_raw(tmp_path / "empty", b"")
        with pytest.raises(idx.IdxFormatError, match="truncated header") as exc:
            idx.read_idx(path)
        assert exc.value.byte_offset == 0

    def test_header_cut_inside_dims(self, tmp_path):
        payload = struct.pack(">BBBB", 0, 0, 0x08, 3) + struct.pack(">I", 5)
        path = _write_raw(tmp_path / "cut", payload)
        with pytest.raises(idx.IdxFormatError, match="truncated header") as exc:
            idx.read_idx(path)
        assert exc.value.byte_offset == len(payload)

    def test_nonzero_lead_bytes_are_wrong_magic(self, tmp_path):
        payload = struct.pack(">BBBB", 1, 0, 0x08, 1) + struct.pack(">I", 0)
        path = _write_raw(tmp_path / "lead", payload)
        with pytest.raises(idx.IdxFormatError, match="wrong magic") as exc:
            idx.read_idx(path)
        assert exc.value.byte_offset == 0

    def test_unknown_type_code_is_wrong_magic(self, tmp_path):
        payload = struct.pack(">BBBB", 0, 0, 0x05, 1) + struct.pack(">I", 0)
        path = _write_raw(tmp_path / "code", payload)
        with pytest.raises(idx.IdxFormatError, match="wrong magic"):
            idx.read_idx(path)

    def test_short_payload_is_truncated_data(self, tmp_path):
        payload = struct.pack(">BBBB", 0, 0, 0x08, 1) + struct.pack(">I", 10)
        payload += b"\x00" * 4
        path = _write_raw(tmp_path / "short", payload)
        with pytest.raises(idx.IdxFormatError, match="truncated data") as exc:
            idx.read_idx(path)
        assert exc.value.byte_offset == len(payload)

    def test_trailing_bytes_rejected(self, tmp_path):
        payload = struct.pack(">BBBB", 0, 0, 0x08, 1) + struct.pack(">I", 2)
        payload += b"\x01\x02\x03"
        path = _write_raw(tmp_path / "trail", payload)
        with pytest.raises(idx.IdxFormatError, match="trailing bytes") as exc:
            idx.read_idx(path)
        assert exc.value.byte_offset == 10

    def test_error_message_names_path_and_offset(self, tmp_path):
        path = _write_raw(tmp_path / "named", b"\x00\x00")
        with pytest.raises(idx.IdxFormatError) as exc:
            idx.read_idx(path)
        assert "named" in str(exc.value)
        assert "byte offset 2" in str(exc.value)


class TestLoadPair:
    def test_parses_matching_pair(self, tmp_path):
        rng = np.random.default_rng(5)
        imgs = _image_file(tmp_path, rng.integers(0, 256, (12, 28, 28)))
        labs = _label_file(tmp_path, rng.integers(0, 10, 12))
        images, labels = idx.load_mnist(imgs, labs)
        assert images.shape == (12, 784)
        assert images.dtype == np.float32
        assert labels.shape == (12,)
        assert labels.dtype == np.int64
        assert float(images.min()) >= 0.0
        assert float(images.max()) <= 1.0

    def test_scaling_is_exact_for_extremes(self, tmp_path):
        arr = np.zeros((2, 28, 28), dtype=np.uint8)
        arr[1] = 255
        imgs = _image_file(tmp_path, arr)
        labs = _label_file(tmp_path, np.array([0, 1]))
        images, _ = idx.load_mnist(imgs, labs)
        assert images[0].max() == 0.0
        assert images[1].min() == 1.0

    def test_label_magic_in_image_slot(self, tmp_path):
        labs = _label_file(tmp_path, np.arange(5) % 10, name="l1")
        labs2 = _label_file(tmp_path, np.arange(5) % 10, name="l2")
        with pytest.raises(idx.IdxFormatError, match="wrong magic") as exc:
            idx.load_mnist(labs, labs2)
        assert "0x00000803" in str(exc.value)
        assert exc.value.byte_offset == 0

    def test_image_magic_in_label_slot(self, tmp_path):
        rng = np.random.default_rng(6)
        imgs = _image_file(tmp_path, rng.integers(0, 256, (3, 28, 28)))
        with pytest.raises(idx.IdxFormatError, match="wrong magic") as exc:
            idx.load_mnist(imgs, imgs)
        assert "0x00000801" in str(exc.value)

    def test_count_mismatch_names_both_counts(self, tmp_path):
        rng = np.random.default_rng(7)
        imgs = _image_file(tmp_path, rng.integers(0, 256, (10, 28, 28)))
        labs = _label_file(tmp_path, rng.integers(0, 10, 9))
        with pytest.raises(idx.IdxFormatError, match="count mismatch") as exc:
            idx.load_mnist(imgs, labs)
        assert "10 images" in str(exc.value)
        assert "9 labels" in str(exc.value)

    def test_wrong_item_shape(self, tmp_path):
        rng = np.random.default_rng(8)
        imgs = _image_file(tmp_path, rng.integers(0, 256, (4, 32, 32)))
        labs = _label_file(tmp_path, rng.integers(0, 10, 4))
        with pytest.raises(idx.IdxFormatError, match="unexpected image shape"):
            idx.load_mnist(imgs, labs)


class TestSyntheticSet:
    def test_shapes_counts_and_dtypes(self):
        tr_img, tr_lab, te_img, te_lab = idx.synthetic_digit_set(400, 100, seed=1)
        assert tr_img.shape == (400, 28, 28) and tr_img.dtype == np.uint8
        assert te_img.shape == (100, 28, 28)
        assert tr_lab.shape == (400,) and tr_lab.dtype == np.uint8
        assert set(np.unique(tr_lab)) <= set(range(10))
        assert te_lab.shape == (100,)

    def test_deterministic_given_seed(self):
        a = idx.synthetic_digit_set(150, 30, seed=9)
        b = idx.synthetic_digit_set(150, 30, seed=9)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)
        c = idx.synthetic_digit_set(150, 30, seed=10)
        assert any(not np.array_equal(x, y) for x, y in zip(a, c))

    def test_classes_are_visually_distinct(self):
        tr_img, tr_lab, _, _ = idx.synthetic_digit_set(2000, 10, seed=2)
        means = np.stack(
            [tr_img[tr_lab == c].mean(axis=0) for c in range(10)]
        )
        gaps = [
            np.abs(means[i] - means[j]).max()
            for i in range(10)
            for j in range(i + 1, 10)
        ]
        assert min(gaps) > 30.0

    def test_written_files_load_as_pair(self, tmp_path):
        paths = idx.write_synthetic_mnist(tmp_path, n_train=300, n_test=60, seed=3)
        images, labels = idx.load_mnist(paths["train_images"], paths["train_labels"])
        assert images.shape == (300, 784)
        assert labels.shape == (300,)
        t_images, t_labels = idx.load_mnist(paths["test_images"], paths["test_labels"])
        assert t_images.shape == (60, 784)
        assert t_labels.shape == (60,)
