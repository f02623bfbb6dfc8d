"""EmbeddingSet validation, EMB1 byte layout, CSV ingestion, partition."""
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from terank import (
    EmbeddingSet,
    gen_class_gaussians,
    load_csv,
    load_emb1,
    partition,
    save_emb1,
)
from terank.errors import (
    BadMagicError,
    LabelRangeError,
    MissingLabelColumnError,
    NonFiniteValueError,
    NonNumericCellError,
    SingleClassError,
    TruncatedPayloadError,
    ValidationError,
)


def emb1_bytes(n, d, c, features, labels, magic=b"EMB1", reserved=0):
    head = magic + struct.pack("<4I", n, d, c, reserved)
    body = np.asarray(features, dtype="<f4").tobytes()
    body += np.asarray(labels, dtype="<u4").tobytes()
    return head + body


def small_set():
    return EmbeddingSet(
        features=np.array([[0.0], [1.0]], dtype=np.float32),
        labels=np.array([0, 1]),
        class_count=2,
        model_id="tiny",
    )


# --- EMB1 ------------------------------------------------------------------

def test_load_smallest_valid_file(tmp_path):
    path = tmp_path / "t.emb1"
    path.write_bytes(emb1_bytes(2, 1, 2, [[0.0], [1.0]], [0, 1]))
    ds = load_emb1(path)
    assert ds.sample_count == 2 and ds.feature_dim == 1 and ds.class_count == 2
    assert ds.features.tolist() == [[0.0], [1.0]]
    assert ds.labels.tolist() == [0, 1]
    assert ds.model_id == "t"


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.emb1"
    path.write_bytes(emb1_bytes(2, 1, 2, [[0.0], [1.0]], [0, 1], magic=b"XXXX"))
    with pytest.raises(BadMagicError):
        load_emb1(path)


def test_truncated_payload(tmp_path):
    full = emb1_bytes(2, 1, 2, [[0.0], [1.0]], [0, 1])
    path = tmp_path / "cut.emb1"
    path.write_bytes(full[:-3])
    with pytest.raises(TruncatedPayloadError):
        load_emb1(path)
    path.write_bytes(full + b"\x00")
    with pytest.raises(TruncatedPayloadError):
        load_emb1(path)


def test_label_out_of_range(tmp_path):
    path = tmp_path / "lab.emb1"
    path.write_bytes(emb1_bytes(2, 1, 2, [[0.0], [1.0]], [0, 5]))
    with pytest.raises(LabelRangeError):
        load_emb1(path)


def test_non_finite_feature(tmp_path):
    path = tmp_path / "nan.emb1"
    path.write_bytes(emb1_bytes(2, 1, 2, [[np.nan], [1.0]], [0, 1]))
    with pytest.raises(NonFiniteValueError):
        load_emb1(path)


def test_reserved_field_must_be_zero(tmp_path):
    path = tmp_path / "res.emb1"
    path.write_bytes(emb1_bytes(2, 1, 2, [[0.0], [1.0]], [0, 1], reserved=7))
    with pytest.raises(ValidationError):
        load_emb1(path)


def test_header_is_16_bytes_after_magic(tmp_path):
    ds = gen_class_gaussians(3, 4, 4, rho=1.0, noise=0.5, seed=0)
    assert (ds.sample_count, ds.feature_dim, ds.class_count) == (12, 4, 3)
    path = tmp_path / "h.emb1"
    save_emb1(ds, path)
    raw = path.read_bytes()
    assert raw[:4] == b"EMB1"
    assert struct.unpack("<4I", raw[4:20]) == (12, 4, 3, 0)
    assert len(raw) == 20 + 12 * 4 * 4 + 12 * 4


def test_round_trip_bit_identical(tmp_path):
    ds = gen_class_gaussians(4, 25, 6, rho=3.0, noise=1.0, seed=99)
    path = tmp_path / "r.emb1"
    save_emb1(ds, path)
    back = load_emb1(path)
    assert back.features.tobytes() == ds.features.tobytes()
    assert back.labels.tolist() == ds.labels.tolist()
    assert back.class_count == ds.class_count


def test_two_saves_byte_identical(tmp_path):
    ds = gen_class_gaussians(2, 10, 3, rho=1.0, noise=1.0, seed=5)
    p1, p2 = tmp_path / "a.emb1", tmp_path / "b.emb1"
    save_emb1(ds, p1)
    save_emb1(ds, p2)
    assert p1.read_bytes() == p2.read_bytes()


# --- CSV -------------------------------------------------------------------

def test_csv_dense_remap(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("f0,f1,label\n1.0,2.0,5\n3.0,4.0,9\n5.0,6.0,5\n")
    ds = load_csv(path)
    assert ds.labels.tolist() == [0, 1, 0]
    assert ds.class_count == 2
    assert ds.label_map == {5: 0, 9: 1}
    assert ds.features.tolist() == [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]


def test_csv_single_row_rejected(tmp_path):
    path = tmp_path / "one.csv"
    path.write_text("f0,label\n1.0,0\n")
    with pytest.raises((ValidationError, SingleClassError)):
        load_csv(path)


def test_csv_matches_emb1_within_tolerance(tmp_path):
    ds = gen_class_gaussians(3, 20, 5, rho=2.0, noise=1.0, seed=21)
    emb_path = tmp_path / "x.emb1"
    save_emb1(ds, emb_path)
    lines = ["f0,f1,f2,f3,f4,label"]
    for row, lab in zip(ds.features, ds.labels):
        lines.append(",".join(repr(float(v)) for v in row) + f",{lab}")
    csv_path = tmp_path / "x.csv"
    csv_path.write_text("\n".join(lines) + "\n")
    a = load_emb1(emb_path)
    b = load_csv(csv_path)
    assert a.labels.tolist() == b.labels.tolist()
    assert np.allclose(a.features, b.features, atol=1e-6)


def test_csv_missing_label_column(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("f0,f1\n1,2\n3,4\n")
    with pytest.raises(MissingLabelColumnError):
        load_csv(path)


def test_csv_non_numeric_cell(tmp_path):
    path = tmp_path / "n.csv"
    path.write_text("f0,label\n1.0,0\nfoo,1\n")
    with pytest.raises(NonNumericCellError) as err:
        load_csv(path)
    assert "foo" in str(err.value)


def test_csv_single_class(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("f0,label\n1.0,3\n2.0,3\n")
    with pytest.raises(SingleClassError):
        load_csv(path)


# --- validation ------------------------------------------------------------

def test_every_class_must_occur():
    with pytest.raises(ValidationError):
        EmbeddingSet(
            features=np.zeros((3, 2), dtype=np.float32),
            labels=np.array([0, 0, 0]),
            class_count=2,
        )


def test_features_are_read_only():
    ds = small_set()
    with pytest.raises(ValueError):
        ds.features[0, 0] = 5.0


# --- partition --------------------------------------------------------------

def test_partition_trivial():
    ds = EmbeddingSet(
        features=np.zeros((3, 1), dtype=np.float32) + [[1.0], [2.0], [3.0]],
        labels=np.array([0, 1, 0]),
        class_count=2,
    )
    part = partition(ds)
    assert part.by_class[0].tolist() == [0, 2]
    assert part.by_class[1].tolist() == [1]


def test_partition_is_permutation():
    ds = gen_class_gaussians(8, 125, 3, rho=1.0, noise=1.0, seed=4)  # 1000 rows
    part = partition(ds)
    merged = np.concatenate(part.by_class)
    assert sorted(merged.tolist()) == list(range(ds.sample_count))
    for c, idx in enumerate(part.by_class):
        assert (ds.labels[idx] == c).all()
        assert (np.diff(idx) > 0).all()  # row order preserved


@given(
    labels=st.lists(st.integers(min_value=0, max_value=4), min_size=2, max_size=60)
)
@settings(max_examples=60, deadline=None)
def test_partition_disjoint_and_complete(labels):
    labels = np.asarray(labels)
    present = np.unique(labels)
    dense = np.searchsorted(present, labels)  # densify so the set validates
    if len(present) < 2:
        return
    ds = EmbeddingSet(
        features=np.arange(len(labels) * 2, dtype=np.float32).reshape(-1, 2),
        labels=dense,
        class_count=len(present),
    )
    part = partition(ds)
    merged = np.concatenate(part.by_class)
    assert sorted(merged.tolist()) == list(range(len(labels)))


@given(
    n=st.integers(min_value=2, max_value=20),
    d=st.integers(min_value=1, max_value=6),
    seed=st.integers(min_value=0, max_value=2**32),
)
@settings(max_examples=40, deadline=None)
def test_save_load_identity(tmp_path_factory, n, d, seed):
    rng = np.random.default_rng(seed)
    labels = np.zeros(n, dtype=np.int64)
    labels[rng.integers(0, n)] = 1  # guarantee both classes occur
    labels[0] = 0
    if (labels == 1).sum() == 0:
        labels[-1] = 1
    ds = EmbeddingSet(
        features=rng.normal(size=(n, d)).astype(np.float32),
        labels=labels,
        class_count=2,
    )
    path = tmp_path_factory.mktemp("rt") / "f.emb1"
    save_emb1(ds, path)
    back = load_emb1(path)
    assert back.features.tobytes() == ds.features.tobytes()
    assert back.labels.tolist() == ds.labels.tolist()
