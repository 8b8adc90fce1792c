import numpy as np
import pytest

from src.mesh import build_mesh, interior_vertices, refine_uniform, resolve_facets
from src.mesh.structured import dirichlet_vertex_mask


def test_square_mesh_counts():
    mesh = build_mesh(2, (8, 8))
    assert mesh.num_vertices == 81
    assert mesh.num_edges == 144
    assert mesh.num_cells == 64
    assert mesh.num_vertices - mesh.num_edges + mesh.num_cells == 1


def test_single_cell_mesh():
    mesh = build_mesh(2, (1, 1))
    assert (mesh.num_vertices, mesh.num_edges, mesh.num_cells) == (4, 4, 1)
    np.testing.assert_array_equal(mesh.cell_vertices, [[0, 1, 2, 3]])


def test_cube_mesh_counts():
    mesh = build_mesh(3, (4, 4, 4))
    assert mesh.num_vertices == 125
    assert mesh.num_cells == 64
    small = build_mesh(3, (2, 2, 2))
    assert small.num_edges == 54
    assert small.num_faces == 36


def test_rectangular_edge_formula():
    mesh = build_mesh(2, (3, 2))
    assert mesh.num_edges == 3 * 3 + 4 * 2


@pytest.mark.parametrize(
    "dim, cells, box",
    [
        (4, (1, 1, 1, 1), None),
        (2, (0, 3), None),
        (2, (2, -1), None),
        (2, (2,), None),
        (2, (2, 2), ((0.0, 0.0), (1.0, 0.0))),
    ],
)
def test_build_mesh_rejects_bad_input(dim, cells, box):
    with pytest.raises(ValueError):
        build_mesh(dim, cells, box)


def test_interior_vertex_sharing():
    mesh = build_mesh(2, (4, 4))
    counts = np.bincount(mesh.cell_vertices.ravel(), minlength=mesh.num_vertices)
    inner = interior_vertices(mesh, "all")
    assert np.all(counts[inner] == 4)
    mesh3 = build_mesh(3, (3, 3, 3))
    counts3 = np.bincount(mesh3.cell_vertices.ravel(), minlength=mesh3.num_vertices)
    assert np.all(counts3[interior_vertices(mesh3, "all")] == 8)


def test_refine_uniform_levels():
    hier = refine_uniform(build_mesh(2, (8, 8)), 6)
    assert len(hier) == 7
    assert hier.finest.cells_per_axis == (512, 512)
    assert hier.coarsest == build_mesh(2, (8, 8))
    cant = refine_uniform(build_mesh(2, (125, 5), ((0, 0), (25, 1))), 2)
    assert cant.finest.cells_per_axis == (500, 20)
    single = refine_uniform(build_mesh(3, (2, 2, 2)), 0)
    assert len(single) == 1 and single.finest == single.coarsest


def test_refine_uniform_rejects_negative():
    with pytest.raises(ValueError):
        refine_uniform(build_mesh(2, (2, 2)), -1)


@pytest.mark.parametrize("cells", [(2, 3), (2, 2, 1)])
def test_hierarchy_parent_child_maps(cells):
    hier = refine_uniform(build_mesh(len(cells), cells), 2)
    for level in (0, 1):
        children = hier.child_cells(level)
        assert children.shape == (hier[level].num_cells, 2 ** len(cells))
        parents = hier.parent_cells(level + 1)
        np.testing.assert_array_equal(parents[children], np.repeat(np.arange(hier[level].num_cells)[:, None],
                                                                   children.shape[1], axis=1))
        assert hier[level + 1].num_cells == 2 ** len(cells) * hier[level].num_cells


def test_refinement_nests_vertices_exactly():
    hier = refine_uniform(build_mesh(2, (3, 5), ((0.0, -1.0), (0.7, 2.3))), 1)
    fine_ids = hier.coarse_vertex_in_fine(0)
    coarse_xy = hier[0].vertex_coordinates
    fine_xy = hier[1].vertex_coordinates[fine_ids]
    assert np.array_equal(coarse_xy, fine_xy)


def test_fine_vertex_classification():
    hier = refine_uniform(build_mesh(3, (1, 1, 1)), 1)
    kinds = hier.classify_fine_vertices(0)
    assert np.bincount(kinds).tolist() == [8, 12, 6, 1]


def test_interior_vertices_examples():
    assert interior_vertices(build_mesh(2, (2, 2)), "all").tolist() == [4]
    assert len(interior_vertices(build_mesh(2, (32, 32)), "all")) == 961
    assert interior_vertices(build_mesh(3, (2, 2, 2)), "all").tolist() == [13]


def test_cantilever_patch_centers():
    mesh = build_mesh(2, (125, 5), ((0.0, 0.0), (25.0, 1.0)))
    clamped = dirichlet_vertex_mask(mesh, ["xmin"])
    assert clamped.sum() == 6
    centers = interior_vertices(mesh, ["xmin"])
    assert len(centers) == mesh.num_vertices - 6
    assert np.all(mesh.vertex_coordinates[centers, 0] > 0.0)


def test_vertex_partition():
    mesh = build_mesh(2, (4, 3))
    dirichlet = dirichlet_vertex_mask(mesh, ["xmin", "ymax"])
    boundary = dirichlet_vertex_mask(mesh, "all")
    inner = np.zeros(mesh.num_vertices, dtype=bool)
    inner[interior_vertices(mesh, "all")] = True
    natural = boundary & ~dirichlet
    assert np.all(inner.astype(int) + dirichlet.astype(int) + natural.astype(int) == 1)


def test_resolve_facets():
    assert resolve_facets("all", 2) == ((0, 0), (0, 1), (1, 0), (1, 1))
    assert resolve_facets("none", 3) == ()
    assert resolve_facets(None, 3) == ()
    assert resolve_facets(["ymax", "xmin"], 2) == ((0, 0), (1, 1))
    assert resolve_facets("xmin,zmax", 3) == ((0, 0), (2, 1))
    with pytest.raises(ValueError):
        resolve_facets(["left"], 2)
    with pytest.raises(ValueError):
        resolve_facets(["zmin"], 2)
