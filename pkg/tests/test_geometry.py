import numpy as np
import pytest

from trackmem.geometry import BBox, BitMask, box_iou, mask_area, mask_iou, mask_to_bbox
from trackmem.oracles import dense_box_iou, dense_mask_iou

from conftest import empty_mask, random_mask, rect_mask, rng_for


# --- box IoU -----------------------------------------------------------------


def test_box_iou_identity():
    b = BBox(0, 0, 2, 2)
    assert box_iou(b, b) == 1.0


def test_box_iou_disjoint():
    assert box_iou(BBox(0, 0, 1, 1), BBox(5, 5, 1, 1)) == 0.0


def test_box_iou_overlap_one_seventh():
    # inter 1x1 = 1, union 4 + 4 - 1 = 7; checked against rasterization
    got = box_iou(BBox(0, 0, 2, 2), BBox(1, 1, 2, 2))
    assert abs(got - 1.0 / 7.0) < 1e-12
    assert abs(got - dense_box_iou((0, 0, 2, 2), (1, 1, 2, 2))) < 1e-12


def test_box_iou_zero_area_convention():
    assert box_iou(BBox(0, 0, 0, 5), BBox(0, 0, 2, 2)) == 0.0
    assert box_iou(BBox(0, 0, 2, 2), BBox(1, 1, 3, 0)) == 0.0
    assert box_iou(BBox(0, 0, 0, 0), BBox(0, 0, 0, 0)) == 0.0


def test_box_negative_size_rejected():
    with pytest.raises(ValueError):
        BBox(0, 0, -1, 2)


def test_box_iou_integer_aligned_matches_rasterization():
    rng = rng_for(7)
    for _ in range(2000):
        a = tuple(int(v) for v in rng.integers(0, 30, size=2)) + \
            tuple(int(v) for v in rng.integers(0, 20, size=2))
        b = tuple(int(v) for v in rng.integers(0, 30, size=2)) + \
            tuple(int(v) for v in rng.integers(0, 20, size=2))
        got = box_iou(BBox(*a), BBox(*b))
        assert abs(got - dense_box_iou(a, b)) < 1e-9


def test_box_iou_symmetric_and_bounded():
    rng = rng_for(8)
    for _ in range(500):
        a = BBox(*rng.uniform(0, 40, size=2), *rng.uniform(0.1, 25, size=2))
        b = BBox(*rng.uniform(0, 40, size=2), *rng.uniform(0.1, 25, size=2))
        ab, ba = box_iou(a, b), box_iou(b, a)
        assert ab == ba
        assert 0.0 <= ab <= 1.0
        assert box_iou(a, a) == 1.0


# --- masks ---------------------------------------------------------------------


def test_mask_runs_validation():
    with pytest.raises(ValueError):
        BitMask(4, 4, runs=((0, 0, 3), (0, 2, 2)))  # overlapping
    with pytest.raises(ValueError):
        BitMask(4, 4, runs=((0, 2, 3),))  # out of bounds
    with pytest.raises(ValueError):
        BitMask(4, 4, runs=((4, 0, 1),))  # row out of range
    with pytest.raises(ValueError):
        BitMask(4, 4, runs=((1, 0, 1), (0, 0, 1)))  # rows out of order


def test_mask_iou_trivial():
    m = rect_mask(8, 8, 1, 1, 3, 3)
    assert mask_iou(m, m) == 1.0
    assert mask_iou(empty_mask(8, 8), m) == 0.0
    assert mask_iou(empty_mask(8, 8), empty_mask(8, 8)) == 0.0


def test_mask_iou_dimension_mismatch():
    with pytest.raises(ValueError):
        mask_iou(empty_mask(8, 8), empty_mask(8, 9))


def test_mask_iou_matches_dense_oracle():
    rng = rng_for(9)
    for _ in range(300):
        da = rng.random((32, 32)) < rng.uniform(0.05, 0.6)
        db = rng.random((32, 32)) < rng.uniform(0.05, 0.6)
        got = mask_iou(BitMask.from_dense(da), BitMask.from_dense(db))
        assert got == dense_mask_iou(da, db)


def test_mask_iou_symmetric_bounded_identity(rng):
    for _ in range(200):
        a = random_mask(rng)
        b = random_mask(rng)
        assert mask_iou(a, b) == mask_iou(b, a)
        assert 0.0 <= mask_iou(a, b) <= 1.0
        if not a.is_empty:
            assert mask_iou(a, a) == 1.0


def test_mask_area():
    assert mask_area(empty_mask(4, 4)) == 0
    assert mask_area(rect_mask(4, 4, 0, 0, 4, 4)) == 16
    rng = rng_for(10)
    for _ in range(100):
        dense = rng.random((16, 16)) < 0.4
        assert mask_area(BitMask.from_dense(dense)) == int(dense.sum())


def test_mask_to_bbox_single_run():
    m = BitMask(16, 8, runs=((3, 4, 3),))
    assert mask_to_bbox(m) == BBox(4, 3, 3, 1)


def test_mask_to_bbox_empty():
    assert mask_to_bbox(empty_mask()) is None


def test_mask_to_bbox_matches_dense_scan(rng):
    for _ in range(200):
        dense = rng.random((20, 24)) < 0.15
        m = BitMask.from_dense(dense)
        box = mask_to_bbox(m)
        if not dense.any():
            assert box is None
            continue
        ys, xs = np.nonzero(dense)
        assert box == BBox(float(xs.min()), float(ys.min()),
                           float(xs.max() - xs.min() + 1), float(ys.max() - ys.min() + 1))


def test_mask_to_bbox_tightness(rng):
    # the box covers every foreground pixel and no smaller box does
    for _ in range(50):
        m = random_mask(rng, 16, 16, 0.2)
        box = mask_to_bbox(m)
        if box is None:
            continue
        for row, start, length in m.runs:
            assert box.y <= row < box.y + box.h
            assert box.x <= start and start + length <= box.x + box.w
        dense = m.to_dense()
        x0, y0, w, h = int(box.x), int(box.y), int(box.w), int(box.h)
        assert dense[y0, :].any() and dense[y0 + h - 1, :].any()
        assert dense[:, x0].any() and dense[:, x0 + w - 1].any()


# --- RLE text form ----------------------------------------------------------------


def test_rle_text_roundtrip(rng):
    for _ in range(100):
        m = random_mask(rng, 17, 11, 0.3)
        assert BitMask.from_text(m.to_text()) == m


def test_rle_text_examples():
    m = rect_mask(8, 4, 2, 1, 3, 2)
    assert m.to_text() == "8 4; 1:2+3; 2:2+3"
    assert empty_mask(8, 4).to_text() == "8 4"
    assert BitMask.from_text("8 4") == empty_mask(8, 4)


def test_dense_roundtrip(rng):
    for _ in range(100):
        dense = rng.random((13, 9)) < 0.35
        assert (BitMask.from_dense(dense).to_dense() == dense).all()
