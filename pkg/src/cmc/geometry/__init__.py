"""Embeddings, measures and de Rham maps for chart-based and polygonal meshes."""
from .catalog import CATALOG, CatalogEntry, catalog_entry, catalog_names, catalog_problem
from .charts import Chart, cartesian, polar, spherical
from .embedding import BoxEmbedding, EmbeddedMesh, FormField, PolygonEmbedding
from .generators import (embed_polygon_mesh, gen_cube_mesh, gen_hemisphere_mesh,
                         gen_polar_disk_mesh, gen_rect_mesh)
from .tess import Tessellation, import_tess, read_tess, tess_mesh, voronoi_rectangle, write_tess

__all__ = [
    "CATALOG", "CatalogEntry", "catalog_entry", "catalog_names", "catalog_problem", "Chart",
    "cartesian", "polar", "spherical", "BoxEmbedding", "EmbeddedMesh", "FormField",
    "PolygonEmbedding", "embed_polygon_mesh", "gen_cube_mesh", "gen_hemisphere_mesh",
    "gen_polar_disk_mesh", "gen_rect_mesh", "Tessellation", "import_tess", "read_tess",
    "tess_mesh", "voronoi_rectangle", "write_tess",
]
