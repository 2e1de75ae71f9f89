import numpy as np
import pytest

from gridmark.errors import (
    BadParameterError,
    DimensionError,
    MalformedFileError,
    NonFiniteValueError,
    NotSquareError,
)
from gridmark.model_io import (
    MODEL_KINDS,
    GridModel,
    WatermarkBitmap,
    export_obj,
    generate_model,
    load_model,
    load_watermark,
    save_model,
    save_watermark,
    validate_model,
)

RNG = np.random.default_rng(7)


def random_model(n, scale=1.0):
    return GridModel(*(RNG.uniform(-scale, scale, size=(n, n)) for _ in range(3)))


def test_grid_model_validation():
    with pytest.raises(NotSquareError):
        GridModel(np.zeros((2, 3)), np.zeros((2, 3)), np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        GridModel(np.zeros((2, 2)), np.zeros((3, 3)), np.zeros((2, 2)))
    with pytest.raises(NonFiniteValueError):
        GridModel(np.full((2, 2), np.nan), np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(NonFiniteValueError):
        GridModel(np.zeros((2, 2)), np.full((2, 2), np.inf), np.zeros((2, 2)))


def test_grid_model_accessors():
    m = random_model(8)
    assert m.n == 8
    assert m.matrix("x2") is m.x2
    with pytest.raises(BadParameterError):
        m.matrix("x9")
    swapped = m.replace(x3=np.zeros((8, 8)))
    assert np.all(swapped.x3 == 0.0) and swapped.x1 is m.x1
    c = m.copy()
    assert np.array_equal(c.x1, m.x1) and c.x1 is not m.x1


def test_validate_model_side_rule():
    for n in range(1, 65):
        m = GridModel(*(np.zeros((n, n)) for _ in range(3)))
        if n % 8 == 0:
            assert validate_model(m) is m
        else:
            with pytest.raises(DimensionError):
                validate_model(m)


def test_grid3_roundtrip(tmp_path):
    m = random_model(16, scale=1e4)
    path = tmp_path / "m.grid3"
    save_model(m, path)
    back = load_model(path)
    for name in ("x1", "x2", "x3"):
        assert np.array_equal(back.matrix(name), m.matrix(name))
    # canonical writer: save(load(f)) reproduces f byte for byte
    path2 = tmp_path / "m2.grid3"
    save_model(back, path2)
    assert path2.read_bytes() == path.read_bytes()


def test_grid3_header(tmp_path):
    m = random_model(8)
    path = tmp_path / "m.grid3"
    save_model(m, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "GRID3 8"
    assert lines[1] == "MATRIX x1"
    assert len(lines) == 1 + 3 * 9


def test_grid3_blank_lines_ok(tmp_path):
    m = random_model(8)
    path = tmp_path / "m.grid3"
    save_model(m, path)
    padded = tmp_path / "padded.grid3"
    padded.write_text("\n" + path.read_text().replace("MATRIX x2", "\nMATRIX x2\n") + "\n\n")
    back = load_model(padded)
    assert np.array_equal(back.x2, m.x2)


def test_save_model_rejects_bad_side(tmp_path):
    m = GridModel(*(np.zeros((10, 10)) for _ in range(3)))
    with pytest.raises(DimensionError):
        save_model(m, tmp_path / "bad.grid3")


@pytest.mark.parametrize(
    "mangle,err",
    [
        (lambda t: "", MalformedFileError),
        (lambda t: t.replace("GRID3 8", "GRID 8"), MalformedFileError),
        (lambda t: t.replace("GRID3 8", "GRID3 eight"), MalformedFileError),
        (lambda t: t.replace("GRID3 8", "GRID3 10"), DimensionError),
        (lambda t: t.replace("MATRIX x2", "MATRIX x9"), MalformedFileError),
        (lambda t: t.replace("MATRIX x3\n", ""), MalformedFileError),
        (lambda t: t + "stray\n", MalformedFileError),
        (lambda t: t.replace("0.", "zero.", 1), MalformedFileError),
    ],
)
def test_grid3_malformed(tmp_path, mangle, err):
    path = tmp_path / "m.grid3"
    save_model(random_model(8), path)
    bad = tmp_path / "bad.grid3"
    bad.write_text(mangle(path.read_text()))
    with pytest.raises(err):
        load_model(bad)


def test_grid3_short_row(tmp_path):
    path = tmp_path / "m.grid3"
    save_model(random_model(8), path)
    lines = path.read_text().splitlines()
    lines[2] = " ".join(lines[2].split()[:-1])
    bad = tmp_path / "bad.grid3"
    bad.write_text("\n".join(lines) + "\n")
    with pytest.raises(MalformedFileError):
        load_model(bad)


def test_grid3_rejects_written_nan(tmp_path):
    path = tmp_path / "m.grid3"
    save_model(random_model(8), path)
    text = path.read_text().splitlines()
    row = text[2].split()
    row[0] = "nan"
    text[2] = " ".join(row)
    bad = tmp_path / "bad.grid3"
    bad.write_text("\n".join(text) + "\n")
    with pytest.raises(NonFiniteValueError):
        load_model(bad)


def test_watermark_bitmap_validation():
    with pytest.raises(NotSquareError):
        WatermarkBitmap(np.zeros((2, 3), dtype=np.uint8))
    with pytest.raises(DimensionError):
        WatermarkBitmap(np.zeros((0, 0), dtype=np.uint8))
    with pytest.raises(MalformedFileError):
        WatermarkBitmap(np.array([[0, 2], [1, 0]]))
    wm = WatermarkBitmap(np.array([[1, 0], [0, 1]]))
    assert wm.w == 2 and wm.bits.dtype == np.uint8


def test_watermark_pbm_roundtrip(tmp_path):
    wm = WatermarkBitmap(np.array([[1, 0], [0, 1]]))
    path = tmp_path / "wm.pbm"
    save_watermark(wm, path)
    assert path.read_text() == "P1\n2 2\n1 0\n0 1\n"
    assert np.array_equal(load_watermark(path).bits, wm.bits)


def test_watermark_p1_variants(tmp_path):
    packed = tmp_path / "packed.pbm"
    packed.write_text("P1\n# comment\n2 2\n1001\n")
    assert np.array_equal(load_watermark(packed).bits, [[1, 0], [0, 1]])
    spread = tmp_path / "spread.pbm"
    spread.write_text("P1 2 2 1 0 0 1\n")
    assert np.array_equal(load_watermark(spread).bits, [[1, 0], [0, 1]])


def test_watermark_p2_threshold(tmp_path):
    path = tmp_path / "wm.pgm"
    path.write_text("P2\n2 2\n255\n0 127\n128 255\n")
    assert np.array_equal(load_watermark(path).bits, [[0, 0], [1, 1]])


@pytest.mark.parametrize(
    "text,err",
    [
        ("", MalformedFileError),
        ("P5\n2 2\n1 0 0 1\n", MalformedFileError),
        ("P1\n2 3\n1 0 0 1 0 0\n", NotSquareError),
        ("P1\n2 2\n1 0 0\n", MalformedFileError),
        ("P1\n2 2\n1 0 0 2\n", MalformedFileError),
        ("P1\n2 2\n1 0 0 x\n", MalformedFileError),
        ("P2\n2 2\n0\n0 0 0 0\n", MalformedFileError),
        ("P2\n2 2\n100\n0 0 0 101\n", MalformedFileError),
        ("P2\n2 2\n255\n0 0 0\n", MalformedFileError),
    ],
)
def test_watermark_malformed(tmp_path, text, err):
    path = tmp_path / "bad.pnm"
    path.write_text(text)
    with pytest.raises(err):
        load_watermark(path)


def test_export_obj_counts(tmp_path):
    m = generate_model("plane", 8)
    path = tmp_path / "m.obj"
    export_obj(m, path)
    lines = path.read_text().splitlines()
    v = [l for l in lines if l.startswith("v ")]
    f = [l for l in lines if l.startswith("f ")]
    assert len(v) == 64 and len(f) == 2 * 49
    idx = np.array([[int(t) for t in l.split()[1:]] for l in f])
    assert idx.min() == 1 and idx.max() == 64


def test_export_obj_plane_normals(tmp_path):
    m = generate_model("plane", 8)
    path = tmp_path / "m.obj"
    export_obj(m, path)
    lines = path.read_text().splitlines()
    verts = np.array(
        [[float(t) for t in l.split()[1:]] for l in lines if l.startswith("v ")]
    )
    faces = [[int(t) - 1 for t in l.split()[1:]] for l in lines if l.startswith("f ")]
    for a, b, c in faces:
        normal = np.cross(verts[b] - verts[a], verts[c] - verts[a])
        normal = normal / np.linalg.norm(normal)
        assert abs(abs(normal[2]) - 1.0) <= 1e-12


def test_generate_plane_is_exact_grid():
    m = generate_model("plane", 16, seed=3)
    i, j = np.meshgrid(np.arange(16.0), np.arange(16.0), indexing="ij")
    assert np.array_equal(m.x1, i)
    assert np.array_equal(m.x2, j)
    assert np.all(m.x3 == 0.0)


def test_generate_model_deterministic():
    a = generate_model("harmonic", 256, 7)
    b = generate_model("harmonic", 256, 7)
    for name in ("x1", "x2", "x3"):
        assert np.array_equal(a.matrix(name), b.matrix(name))


def test_generate_model_seed_and_kind_sensitivity():
    a = generate_model("bumps", 64, 1)
    b = generate_model("bumps", 64, 2)
    c = generate_model("meshgrid", 64, 1)
    assert not np.array_equal(a.x3, b.x3)
    assert not np.array_equal(a.x3, c.x3)


def test_generate_model_validation():
    with pytest.raises(BadParameterError):
        generate_model("torus", 64)
    with pytest.raises(DimensionError):
        generate_model("bumps", 100)
    with pytest.raises(DimensionError):
        generate_model("bumps", 0)
    assert MODEL_KINDS == ("plane", "harmonic", "meshgrid", "bumps")


@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_generated_models_loadable(tmp_path, kind):
    m = generate_model(kind, 32, seed=5)
    assert m.n == 32
    path = tmp_path / f"{kind}.grid3"
    save_model(m, path)
    back = load_model(path)
    assert np.array_equal(back.x3, m.x3)
