import os

import numpy as np
import pytest
from numpy.testing import assert_allclose

from riemann_kdv import riemann_family as rf
from riemann_kdv.errors import BracketNotFound, ClipTooSmall, ValidationError


def test_scale_at_unit_torus():
    assert_allclose(rf.example(1.0).a_t, rf.scale_at_unit_torus_literal(1.0), rtol=1e-12)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_periods_close_and_flux_normalised(t):
    pd = rf.period_data(t)
    assert pd.closure_defect() < 1e-8
    assert pd.max_residue() < 1e-8
    F = rf.normalized_flux(t)
    assert abs(F[1]) < 1e-8 and abs(F[2] - 1) < 1e-8
    assert F[0] > 0


def test_flux_profile_monotone():
    table = rf.FluxTable(0.3, 3.0, 11)
    assert np.all(np.diff(table.h) < 0)


def test_flux_inverse_round_trip():
    for t in (0.45, 1.3, 2.7):
        assert_allclose(rf.flux_inverse(rf.flux_profile(t)), t, rtol=1e-9)


def test_flux_inverse_out_of_range():
    with pytest.raises(BracketNotFound):
        rf.flux_inverse(1e6)
    with pytest.raises(ValidationError):
        rf.flux_inverse(-1.0)


def test_family_table_columns():
    rows = rf.family_table([0.5, 1.0])
    assert set(rows[0]) == {"t", "a_t", "e2", "h"}
    assert abs(rows[1]["e2"]) < 1e-12


def test_mesh_counts_and_symmetry():
    m = rf.mesh(1.0, 16)
    ny, nx = m.grid_shape
    assert len(m.vertices) == ny * nx - m.clipped
    assert m.clipped > 0
    assert_allclose(np.linalg.norm(m.normals, axis=1), 1.0, atol=1e-12)
    assert rf.reflection_defect(m) < 1e-6
    assert max(r for _, r in rf.horizontal_circle_residuals(m)) < 1e-8


def test_mesh_exports():
    m = rf.mesh(1.0, 12)
    obj = m.to_obj()
    assert obj.count("\nv ") == len(m.vertices)
    assert obj.count("\nf ") == len(m.faces)
    ply = m.to_ply()
    assert f"element vertex {len(m.vertices)}" in ply
    assert ply.splitlines()[-1].startswith("3 ")


def test_mesh_rejects_tiny_clip():
    with pytest.raises(ClipTooSmall):
        rf.mesh(1.0, 16, end_clip=1e-4)


def test_write_atomic(tmp_path):
    p = tmp_path / "a.txt"
    rf.write_atomic(str(p), "x\n")
    assert p.read_text() == "x\n"
    assert os.listdir(tmp_path) == ["a.txt"]
