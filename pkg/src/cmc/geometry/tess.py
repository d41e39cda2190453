"""Planar polygonal tessellations: Voronoi generation and a reader/writer
for the 2D subset of the Neper ``.tess`` format (``**vertex``, ``**edge``
and ``**face`` sections)."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import Voronoi

from ..complex import CellComplex
from .generators import embed_polygon_mesh

log = logging.getLogger(__name__)


@dataclass
class Tessellation:
    """Vertices (n, 2), edges as vertex pairs (tail, head) and faces as
    lists of signed 1-based edge ids (negative = traversed head to tail)."""

    vertices: np.ndarray
    edges: np.ndarray
    faces: list

    def complex(self) -> CellComplex:
        nv, ne = len(self.vertices), len(self.edges)
        e_faces = [np.array([t, h]) for t, h in self.edges]
        e_signs = [np.array([-1, 1]) for _ in self.edges]
        f_faces = [np.abs(np.asarray(f)) - 1 for f in self.faces]
        f_signs = [np.sign(np.asarray(f)) for f in self.faces]
        return CellComplex([nv, ne, len(self.faces)], [[], e_faces, f_faces],
                           [[], e_signs, f_signs])

    def face_loops(self):
        """Vertex loop of every face following its signed edges."""
        loops = []
        for f in self.faces:
            loop = []
            for e in f:
                t, h = self.edges[abs(e) - 1]
                loop.append(t if e > 0 else h)
            loops.append(np.asarray(loop))
        return loops

    def areas(self):
        out = []
        for loop in self.face_loops():
            x, y = self.vertices[loop, 0], self.vertices[loop, 1]
            out.append(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
        return np.asarray(out)


def voronoi_rectangle(n_cells, width=20.0, height=15.0, seed=0) -> Tessellation:
    """Voronoi tessellation of a rectangle from ``n_cells`` uniform random
    seeds, clipped exactly by mirroring the seeds across the four sides."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform([0, 0], [width, height], size=(n_cells, 2))
    mirrored = [pts,
                np.column_stack([-pts[:, 0], pts[:, 1]]),
                np.column_stack([2 * width - pts[:, 0], pts[:, 1]]),
                np.column_stack([pts[:, 0], -pts[:, 1]]),
                np.column_stack([pts[:, 0], 2 * height - pts[:, 1]])]
    vor = Voronoi(np.vstack(mirrored))
    scale = max(width, height)
    key_of = {}
    vertices = []
    edge_index = {}
    edges = []
    faces = []
    for i in range(n_cells):
        region = vor.regions[vor.point_region[i]]
        if -1 in region or not region:
            raise RuntimeError("unbounded Voronoi region for an interior seed")
        loop = []
        for v in region:
            xy = np.clip(vor.vertices[v], [0, 0], [width, height])
            key = tuple(np.round(xy / scale, 9))
            if key not in key_of:
                key_of[key] = len(vertices)
                vertices.append(xy)
            idx = key_of[key]
            if not loop or loop[-1] != idx:
                loop.append(idx)
        if loop[0] == loop[-1]:
            loop.pop()
        verts = np.asarray(vertices)
        x, y = verts[loop, 0], verts[loop, 1]
        if np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) < 0:
            loop = loop[::-1]
        face = []
        for a, b in zip(loop, loop[1:] + loop[:1]):
            if (a, b) in edge_index:
                face.append(edge_index[(a, b)] + 1)
            elif (b, a) in edge_index:
                face.append(-(edge_index[(b, a)] + 1))
            else:
                edge_index[(a, b)] = len(edges)
                edges.append((a, b))
                face.append(len(edges))
        faces.append(face)
    return Tessellation(np.asarray(vertices), np.asarray(edges, dtype=np.int64), faces)


def write_tess(tess: Tessellation, path):
    """Write a minimal 2D ``.tess`` file."""
    lines = ["***tess", " **format", "   3.4", " **general", "   2 standard",
             " **vertex", f" {len(tess.vertices)}"]
    for i, (x, y) in enumerate(tess.vertices, start=1):
        lines.append(f" {i} {x:.15g} {y:.15g} 0 0")
    lines += [" **edge", f" {len(tess.edges)}"]
    for i, (t, h) in enumerate(tess.edges, start=1):
        lines.append(f" {i} {t + 1} {h + 1} 0")
    lines += [" **face", f" {len(tess.faces)}"]
    loops = tess.face_loops()
    for i, (f, loop) in enumerate(zip(tess.faces, loops), start=1):
        centre = tess.vertices[loop].mean(axis=0)
        lines.append(f" {i} {len(loop)} " + " ".join(str(v + 1) for v in loop))
        lines.append(f"   {len(f)} " + " ".join(str(e) for e in f))
        lines.append("   0 0 0 1")
        lines.append(f"   0 0 {centre[0]:.15g} {centre[1]:.15g} 0")
    lines.append("***end")
    Path(path).write_text("\n".join(lines) + "\n")


def _sections(text):
    """Split a tess document into ``{name: [tokens]}``."""
    sections, current = {}, None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("***"):
            current = None
            continue
        if line.startswith("**"):
            current = line[2:].split()[0]
            sections[current] = []
            continue
        if current is not None:
            sections[current].extend(line.split())
    return sections


def read_tess(path) -> Tessellation:
    """Parse the 2D subset of a Neper ``.tess`` file."""
    sections = _sections(Path(path).read_text())
    for name in ("vertex", "edge", "face"):
        if name not in sections:
            raise ValueError(f"tess file lacks a **{name} section")
    for name in sections:
        if name not in ("vertex", "edge", "face", "format", "general"):
            log.warning("skipping unsupported tess section **%s", name)

    tok = sections["vertex"]
    n = int(tok[0])
    vertices = np.array([[float(tok[1 + 5 * i + 1]), float(tok[1 + 5 * i + 2])]
                         for i in range(n)])
    tok = sections["edge"]
    n = int(tok[0])
    edges = np.array([[int(tok[1 + 4 * i + 1]) - 1, int(tok[1 + 4 * i + 2]) - 1]
                      for i in range(n)], dtype=np.int64)
    tok = sections["face"]
    n, pos, faces = int(tok[0]), 1, []
    for _ in range(n):
        nver = int(tok[pos + 1])
        pos += 2 + nver
        nedge = int(tok[pos])
        faces.append([int(e) for e in tok[pos + 1:pos + 1 + nedge]])
        pos += 1 + nedge + 4 + 5  # plane equation, then state and point
    return Tessellation(vertices, edges, faces)


def tess_mesh(tess: Tessellation, name="tess", params=None):
    """Embedded Forman mesh of a tessellation; faces are first turned
    counterclockwise."""
    areas = tess.areas()
    faces = [f if a > 0 else [-e for e in f] for f, a in zip(tess.faces, areas)]
    tess = Tessellation(tess.vertices, tess.edges, faces)
    p = {"w": float(tess.vertices[:, 0].max()), "h": float(tess.vertices[:, 1].max())}
    p.update(params or {})
    return embed_polygon_mesh(tess.complex(), tess.vertices, name, p)


def import_tess(path):
    """Read a ``.tess`` file and return its embedded Forman mesh."""
    return tess_mesh(read_tess(path), name=Path(path).stem)
