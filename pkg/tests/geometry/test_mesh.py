#!/usr/bin/env python3
"""
Mesh tests: volumes, faces, fields and norms.
"""

import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from errors import GeometryError
from geometry import (
    CHART_NAMES,
    MetricChart,
    ScalarField,
    build_chart,
    build_mesh,
    divergence,
    integrate,
    metric_pairing,
    lp_norm,
    total_variation,
)

CIRCLE = build_mesh(build_chart("flat_circle"), 16)
cell_values = st.lists(st.floats(min_value=-10.0, max_value=10.0), min_size=16, max_size=16)


def test_total_volumes():
    print("\n🧪 Total volumes")
    torus = build_mesh(build_chart("flat_torus"), 32)
    assert torus.total_volume == pytest.approx(4.0 * np.pi ** 2, rel=1e-12)

    band = build_mesh(build_chart("sphere_band", {"latitude": np.pi / 3.0}), (64, 64))
    exact = 2.0 * np.pi * 2.0 * np.sin(np.pi / 3.0)
    print(f"  sphere band: {band.total_volume:.6f} vs {exact:.6f}")
    assert band.total_volume == pytest.approx(exact, rel=1e-3)

    weighted = build_mesh(build_chart("weighted_circle"), 64)
    assert weighted.total_volume == pytest.approx(2.0, rel=1e-12)


def test_face_counts():
    torus = build_mesh(build_chart("flat_torus"), 32)
    assert len(torus.faces) == 2 * 32 * 32

    # the latitude axis is closed: no faces wrap across it
    band = build_mesh(build_chart("sphere_band"), (16, 16))
    assert len(band.faces) == 15 * 16 + 16 * 16


def test_face_sum_telescopes_on_closed_mesh():
    mesh = build_mesh(build_chart("wavy_torus"), 16)
    rng = np.random.default_rng(0)
    face_values = rng.normal(size=len(mesh.faces))
    assert abs(mesh.face_sum(face_values).sum()) < 1e-10


def test_dump_rows_layout():
    mesh = build_mesh(build_chart("flat_torus"), (16, 20))
    rows = mesh.dump_rows()
    assert len(rows) == 16 * 20
    assert len(rows[0]) == 4
    assert rows[5][0] == 5
    assert rows[5][3] == pytest.approx(mesh.volumes[5])


def test_resolution_must_match_dimension():
    with pytest.raises(ValueError):
        build_mesh(build_chart("flat_torus"), (16,))
    with pytest.raises(ValueError):
        build_mesh(build_chart("flat_circle"), 1)


def test_non_positive_metric_rejected_by_mesh():
    chart = MetricChart(
        name="negative", dim=1, metric_fn=lambda p: -np.ones((p.shape[0], 1, 1)),
        lower=(0.0,), upper=(1.0,), periodic=(True,),
    )
    with pytest.raises(GeometryError):
        build_mesh(chart, 16)


def test_scalar_field_validation():
    with pytest.raises(ValueError):
        ScalarField(CIRCLE, np.zeros(15))
    with pytest.raises(ValueError):
        ScalarField(CIRCLE, np.full(16, np.nan))
    field = ScalarField.from_function(CIRCLE, lambda x: np.sin(2.0 * np.pi * x[:, 0]))
    assert not field.values.flags.writeable


def test_norms_of_known_fields():
    ones = np.ones(CIRCLE.n_cells)
    assert integrate(CIRCLE, ones) == pytest.approx(1.0)
    assert lp_norm(ones, 2, CIRCLE) == pytest.approx(1.0)
    assert lp_norm(-3.0 * ones, np.inf, CIRCLE) == 3.0
    assert total_variation(ones, CIRCLE) == 0.0

    step = np.where(np.arange(16) < 8, 1.0, 0.0)
    # one jump up and one jump down across the periodic seam
    assert total_variation(step, CIRCLE) == pytest.approx(2.0)

    with pytest.raises(ValueError):
        lp_norm(ones, 0.5, CIRCLE)


@given(cell_values, st.floats(min_value=-5.0, max_value=5.0))
@settings(max_examples=50, deadline=None)
def test_total_variation_ignores_constant_shifts(values, shift):
    u = np.array(values)
    assert total_variation(u + shift, CIRCLE) == pytest.approx(total_variation(u, CIRCLE), abs=1e-9)


@given(cell_values, cell_values)
@settings(max_examples=50, deadline=None)
def test_l1_triangle_inequality(a, b):
    u, v = np.array(a), np.array(b)
    assert lp_norm(u + v, 1, CIRCLE) <= lp_norm(u, 1, CIRCLE) + lp_norm(v, 1, CIRCLE) + 1e-9


def test_face_normals_have_unit_length():
    print("\n🧪 Face normals")
    for name in CHART_NAMES:
        mesh = build_mesh(build_chart(name), 24)
        faces = mesh.faces
        length = metric_pairing(mesh.chart, faces.center, faces.normal, faces.normal)
        pairing = np.einsum("ni,ni->n", faces.normal_covector, faces.normal)
        print(f"  {name}: max |g(n, n) - 1| = {np.abs(length - 1.0).max():.1e}")
        assert np.abs(length - 1.0).max() <= 1e-12
        assert np.abs(pairing - 1.0).max() <= 1e-12


def test_volume_weighted_divergence_sums_to_zero():
    """Sum of vol * div X vanishes on closed meshes for fields tangent to any closed boundary."""

    def torus_field(p):
        return np.stack([np.sin(p[:, 1]) + 0.3, np.cos(p[:, 0]) * np.sin(p[:, 1])], axis=1)

    def zonal_field(p):
        return np.stack([np.zeros(p.shape[0]), 1.0 + np.cos(p[:, 0]) * np.sin(p[:, 1])], axis=1)

    print("\n🧪 Discrete Gauss sums")
    for name, field in (("flat_torus", torus_field), ("wavy_torus", torus_field), ("sphere_band", zonal_field)):
        for n in (16, 32, 64):
            mesh = build_mesh(build_chart(name), n)
            div = divergence(mesh.chart, field, mesh.centers)
            total = integrate(mesh, div)
            scale = integrate(mesh, np.abs(div))
            print(f"  {name} N={n}: {total:+.2e} (scale {scale:.2f})")
            assert abs(total) <= 1e-9 * max(1.0, scale)


def test_face_incidence_pairs_opposite_normals():
    """Every face bounds two cells, outward for one and inward for the other."""
    mesh = build_mesh(build_chart("wavy_torus"), (8, 12))
    face_ids, cells, signs = mesh.face_incidence()
    n_faces = len(mesh.faces)
    assert np.array_equal(np.bincount(face_ids, minlength=n_faces), np.full(n_faces, 2))
    assert np.array_equal(np.bincount(face_ids, weights=signs, minlength=n_faces), np.zeros(n_faces))
    # periodic 2D cells each touch four faces
    assert np.array_equal(np.bincount(cells, minlength=mesh.n_cells), np.full(mesh.n_cells, 4))
    rng = np.random.default_rng(3)
    face_values = rng.normal(size=n_faces)
    per_cell = np.bincount(cells, weights=signs * face_values[face_ids], minlength=mesh.n_cells)
    assert np.allclose(per_cell, mesh.face_sum(face_values), atol=1e-14)

    band = build_mesh(build_chart("sphere_band"), (6, 8))
    _, band_cells, _ = band.face_incidence()
    counts = band.grid(np.bincount(band_cells, minlength=band.n_cells))
    # the closed latitude rows lose their outer face
    assert (counts[0] == 3).all() and (counts[-1] == 3).all()
    assert (counts[1:-1] == 4).all()


def test_total_variation_is_anisotropic_on_grids():
    """Face jumps sum |d1 u| + |d2 u|, which is sqrt(2) times int |grad u| for sin(x + y)."""
    mesh = build_mesh(build_chart("flat_torus"), 128)
    u = np.sin(mesh.centers[:, 0] + mesh.centers[:, 1])
    measured = total_variation(u, mesh)
    isotropic = 8.0 * np.sqrt(2.0) * np.pi
    print(f"\n🧪 Grid TV {measured:.4f} vs int |grad u| = {isotropic:.4f}")
    assert measured == pytest.approx(16.0 * np.pi, rel=1e-3)
    assert measured / isotropic == pytest.approx(np.sqrt(2.0), rel=1e-3)


if __name__ == "__main__":
    test_total_volumes()
    test_face_counts()
    test_face_sum_telescopes_on_closed_mesh()
    test_dump_rows_layout()
    test_resolution_must_match_dimension()
    test_non_positive_metric_rejected_by_mesh()
    test_scalar_field_validation()
    test_norms_of_known_fields()
    test_face_normals_have_unit_length()
    test_volume_weighted_divergence_sums_to_zero()
    test_face_incidence_pairs_opposite_normals()
    test_total_variation_is_anisotropic_on_grids()
    print("\n✅ All mesh tests passed!")
