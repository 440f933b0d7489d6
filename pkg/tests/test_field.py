import numpy as np
import pytest

from tlprof import (FieldFormatError, FieldSizeError, GridSpec, ParameterError,
                    ScalarField, generate_grid, grid_coords, grid_index,
                    parse_field, synth_wells, write_field)
from tlprof.field import default_scale, detect_grid

from oracles import grid_graph_edges, local_minima_scan


def test_generate_grid_smallest_lattice():
    pts = generate_grid(GridSpec(n=1, r=3))
    assert pts.tolist() == [[0], [1], [2]]


def test_generate_grid_row_major():
    pts = generate_grid(GridSpec(n=2, r=2))
    assert pts.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]


def test_generate_grid_paper_resolution():
    spec = GridSpec(n=3, r=41)
    pts = generate_grid(spec)
    assert pts.shape == (68921, 3)
    center = grid_index(spec, (20, 20, 20))
    assert center == (68921 - 1) // 2
    assert pts[center].tolist() == [20, 20, 20]


def test_index_coords_bijection():
    spec = GridSpec(n=3, r=5)
    for i in range(spec.num_points):
        assert grid_index(spec, grid_coords(spec, i)) == i


def test_default_scale_spans_hundredth():
    spec = GridSpec(n=2, r=41)
    assert spec.scale * (41 - 1) / 2 == pytest.approx(0.01)
    assert default_scale(41) == spec.scale


def test_grid_spec_validation():
    with pytest.raises(ParameterError):
        GridSpec(n=0, r=5)
    with pytest.raises(ParameterError):
        GridSpec(n=2, r=1)
    with pytest.raises(FieldSizeError):
        GridSpec(n=64, r=41)


def test_field_rejects_nonfinite():
    with pytest.raises(FieldFormatError, match="row 1"):
        ScalarField(np.zeros((3, 2)), np.array([0.0, np.nan, 1.0]))


def test_field_shape_mismatch():
    with pytest.raises(FieldFormatError):
        ScalarField(np.zeros((3, 2)), np.zeros(4))


def test_csv_minimal_parse(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("alpha_1,alpha_2,loss\n0,0,1.5\n0,1,2.5\n1,0,0.25\n1,1,3.0\n")
    fld = parse_field(p)
    assert fld.n == 2 and fld.N == 4
    assert fld.values.tolist() == [1.5, 2.5, 0.25, 3.0]
    assert fld.grid is not None and fld.grid.r == 2  # full lattice recognized


def test_csv_nan_row_reported(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("alpha_1,loss\n0,1.0\n1,nan\n")
    with pytest.raises(FieldFormatError, match="row 3"):
        parse_field(p)


def test_csv_bad_header(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("x,y,loss\n0,0,1\n")
    with pytest.raises(FieldFormatError, match="header"):
        parse_field(p)


def test_binary_roundtrip_bit_exact(tmp_path):
    fld = synth_wells(3, 5, [((2, 2, 2), 1.0, 1.5)])
    fld.provenance["model"] = "toy"
    p = tmp_path / "f.tlpf"
    write_field(fld, p, "tlpf")
    back = parse_field(p)
    assert np.array_equal(back.coords, fld.coords)
    assert np.array_equal(back.values, fld.values)
    assert back.grid.r == 5 and back.grid.n == 3
    assert back.provenance["model"] == "toy"


def test_binary_truncated(tmp_path):
    fld = synth_wells(2, 4, [((1, 1), 1.0, 1.0)])
    p = tmp_path / "f.tlpf"
    write_field(fld, p, "tlpf")
    (tmp_path / "g.tlpf").write_bytes(p.read_bytes()[:40])
    with pytest.raises(FieldFormatError, match="truncated"):
        parse_field(tmp_path / "g.tlpf")


def test_roundtrip_randomized():
    rng = np.random.default_rng(11)
    import tempfile, os
    with tempfile.TemporaryDirectory() as d:
        for trial in range(1000):
            N = int(rng.integers(1, 40))
            n = int(rng.integers(1, 5))
            fld = ScalarField(rng.normal(size=(N, n)) * 10,
                              rng.normal(size=N) * 100)
            pb = os.path.join(d, "f.tlpf")
            pc = os.path.join(d, "f.csv")
            write_field(fld, pb, "tlpf")
            write_field(fld, pc, "csv")
            bb = parse_field(pb)
            assert np.array_equal(bb.coords, fld.coords)
            assert np.array_equal(bb.values, fld.values)
            bc = parse_field(pc, "csv")
            assert np.allclose(bc.coords, fld.coords, rtol=0, atol=1e-12)
            assert np.allclose(bc.values, fld.values, rtol=0, atol=1e-12)


def test_synth_wells_matches_formula():
    wells = [((3.0, 4.0), 1.0, 2.0), ((10.0, 12.0), 0.5, 3.0)]
    fld = synth_wells(2, 15, wells, baseline=0.25)
    for i in [0, 7, 100, 224]:
        x = fld.coords[i]
        expected = 0.25 - sum(
            d * np.exp(-np.sum((x - np.asarray(c)) ** 2) / w ** 2)
            for c, d, w in wells)
        assert fld.values[i] == pytest.approx(expected, abs=1e-12)


def test_synth_wells_single_center_minimum():
    fld = synth_wells(2, 21, [((10, 10), 1.0, 2.0)])
    assert np.argmin(fld.values) == grid_index(fld.grid, (10, 10))


def test_synth_wells_two_well_minima_count():
    fld = synth_wells(2, 21, [((5, 5), 1.0, 1.5), ((15, 15), 0.5, 1.5)])
    edges = grid_graph_edges((21, 21))
    assert len(local_minima_scan(fld.values, edges)) == 2


@pytest.mark.parametrize("k", [2, 3, 5])
def test_synth_wells_k_well_minima_count(k):
    centers = [(4, 4, 4), (16, 16, 16), (4, 16, 4), (16, 4, 16), (10, 10, 16)]
    wells = [(centers[j], 1.0 - 0.1 * j, 1.5) for j in range(k)]
    fld = synth_wells(3, 21, wells)
    edges = grid_graph_edges((21, 21, 21))
    assert len(local_minima_scan(fld.values, edges)) == k


def test_synth_wells_validation():
    with pytest.raises(ParameterError):
        synth_wells(2, 5, [])
    with pytest.raises(ParameterError):
        synth_wells(2, 5, [((9, 0), 1.0, 1.0)])
    with pytest.raises(ParameterError):
        synth_wells(2, 5, [((1, 1), 1.0, 0.0)])


def test_detect_grid_rejects_partial():
    spec = GridSpec(n=2, r=3)
    pts = generate_grid(spec).astype(float)
    assert detect_grid(pts).r == 3
    assert detect_grid(pts[:-1]) is None
    assert detect_grid(pts + 0.5) is None
