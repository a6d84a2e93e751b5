"""Segment and quadrilateral meshes and continuous-Galerkin DoF numbering.

Quadrilateral vertices are listed counterclockwise; local vertex ``a`` maps to
the reference corner ``(-1,-1), (1,-1), (1,1), (-1,1)`` for ``a = 0..3``. The
geometric map is bilinear, so edges are straight.

Mesh file format (UTF-8, whitespace separated, ``#`` starts a comment)::

    $vertices N
    x y            (N lines)
    $elements M
    v0 v1 v2 v3    (M lines, 0-based vertex indices, counterclockwise)
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, MeshParseError, ParameterError
from .ref_element import MAX_DEGREE, gauss_legendre, gauss_lobatto_nodes

_CORNERS = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


@dataclass(frozen=True)
class Mesh:
    dim: int
    vertices: np.ndarray
    elements: np.ndarray
    # (element, local face) pairs on the domain boundary
    boundary: tuple = field(default=())

    @property
    def n_elem(self) -> int:
        return len(self.elements)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def element_measures(self) -> np.ndarray:
        if self.dim == 1:
            x = self.vertices[:, 0]
            return x[self.elements[:, 1]] - x[self.elements[:, 0]]
        xy = self.vertices[self.elements]  # (E, 4, 2)
        x, y = xy[..., 0], xy[..., 1]
        return 0.5 * np.sum(x * np.roll(y, -1, axis=1) - np.roll(x, -1, axis=1) * y, axis=1)

    def measure(self) -> float:
        return float(np.sum(self.element_measures()))

    def h(self) -> float:
        """Largest element diameter."""
        if self.dim == 1:
            return float(np.max(self.element_measures()))
        xy = self.vertices[self.elements]
        d1 = np.linalg.norm(xy[:, 2] - xy[:, 0], axis=1)
        d2 = np.linalg.norm(xy[:, 3] - xy[:, 1], axis=1)
        return float(np.max(np.maximum(d1, d2)))

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


def _boundary_faces(elements: np.ndarray, dim: int) -> tuple:
    if dim == 1:
        count: dict[int, list] = {}
        for e, (a, b) in enumerate(elements):
            count.setdefault(int(a), []).append((e, 0))
            count.setdefault(int(b), []).append((e, 1))
        return tuple(sorted(v[0] for v in count.values() if len(v) == 1))
    edges: dict[tuple, list] = {}
    for e, quad in enumerate(elements):
        for k in range(4):
            a, b = int(quad[k]), int(quad[(k + 1) % 4])
            edges.setdefault((min(a, b), max(a, b)), []).append((e, k))
    return tuple(sorted(v[0] for v in edges.values() if len(v) == 1))


def make_segment_mesh(a: float, b: float, n_elem: int) -> Mesh:
    """Uniform partition of [a, b] into ``n_elem`` segments."""
    if not n_elem >= 1 or int(n_elem) != n_elem:
        raise ParameterError(f"n_elem must be a positive integer, got {n_elem!r}")
    if not a < b:
        raise ParameterError(f"need a < b, got a={a}, b={b}")
    n_elem = int(n_elem)
    x = np.linspace(a, b, n_elem + 1)[:, None]
    elems = np.column_stack([np.arange(n_elem), np.arange(1, n_elem + 1)])
    _freeze(x, elems)
    return Mesh(1, x, elems, _boundary_faces(elems, 1))


def _structured_quads(nx: int, ny: int) -> np.ndarray:
    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    i, j = i.ravel(), j.ravel()
    v0 = i + (nx + 1) * j
    return np.column_stack([v0, v0 + 1, v0 + nx + 2, v0 + nx + 1])


def make_rect_mesh(lx: float, ly: float, nx: int, ny: int,
                   origin: tuple[float, float] = (0.0, 0.0)) -> Mesh:
    """Axis-aligned ``nx`` by ``ny`` quadrilateral mesh of [0, lx] x [0, ly]."""
    if not (lx > 0 and ly > 0):
        raise ParameterError(f"side lengths must be positive, got {lx}, {ly}")
    if not (nx >= 1 and ny >= 1 and int(nx) == nx and int(ny) == ny):
        raise ParameterError(f"element counts must be positive integers, got {nx}, {ny}")
    nx, ny = int(nx), int(ny)
    x = origin[0] + np.linspace(0.0, lx, nx + 1)
    y = origin[1] + np.linspace(0.0, ly, ny + 1)
    X, Y = np.meshgrid(x, y, indexing="xy")
    verts = np.column_stack([X.ravel(), Y.ravel()])
    elems = _structured_quads(nx, ny)
    _freeze(verts, elems)
    return Mesh(2, verts, elems, _boundary_faces(elems, 2))


def make_mapped_quad_mesh(corners, nx: int, ny: int) -> Mesh:
    """Structured mesh of the straight-edged quadrilateral with the given corners.

    ``corners`` are the four counterclockwise vertices; the unit square grid is
    pushed through the bilinear map, so e.g. a trapezoid gets trapezoidal cells.
    """
    c = np.asarray(corners, dtype=float)
    if c.shape != (4, 2):
        raise ParameterError("corners must be a 4x2 array")
    s = np.linspace(0.0, 1.0, nx + 1)
    t = np.linspace(0.0, 1.0, ny + 1)
    S, T = np.meshgrid(s, t, indexing="xy")
    S, T = S.ravel()[:, None], T.ravel()[:, None]
    verts = ((1 - S) * (1 - T) * c[0] + S * (1 - T) * c[1]
             + S * T * c[2] + (1 - S) * T * c[3])
    return _validated_quad_mesh(verts, _structured_quads(nx, ny))


def _bilinear_jacobians(xy: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Jacobian determinants of quads ``xy`` (E, 4, 2) at reference points (n, 2)."""
    xi, eta = ref[:, 0], ref[:, 1]
    dN_dxi = 0.25 * np.stack([-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)], axis=1)
    dN_deta = 0.25 * np.stack([-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)], axis=1)
    dx_dxi = np.einsum("na,ead->end", dN_dxi, xy)
    dx_deta = np.einsum("na,ead->end", dN_deta, xy)
    return dx_dxi[..., 0] * dx_deta[..., 1] - dx_dxi[..., 1] * dx_deta[..., 0]


def _validated_quad_mesh(verts: np.ndarray, elems: np.ndarray) -> Mesh:
    verts = np.ascontiguousarray(verts, dtype=float)
    elems = np.ascontiguousarray(elems, dtype=np.int64)
    xq, _ = gauss_legendre(MAX_DEGREE + 4)
    QX, QY = np.meshgrid(xq, xq)
    ref = np.vstack([_CORNERS, np.column_stack([QX.ravel(), QY.ravel()])])
    det = _bilinear_jacobians(verts[elems], ref)
    bad = np.nonzero(np.any(det <= 0.0, axis=1))[0]
    if len(bad):
        e = int(bad[0])
        raise GeometryError(
            f"element {e} (vertices {elems[e].tolist()}) has a non-positive Jacobian; "
            "vertices must be counterclockwise and the quad convex", element=e)
    _freeze(verts, elems)
    return Mesh(2, verts, elems, _boundary_faces(elems, 2))


def import_quad_mesh(source) -> Mesh:
    """Read a quadrilateral mesh from bytes, a path, mesh text or a binary/text stream.

    A ``str`` containing ``$`` is taken as mesh text, any other ``str`` as a path.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str) and "$" in source:
        text = source
    elif hasattr(source, "read"):
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()

    lines = []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((lineno, body.split()))

    def section(pos, name):
        if pos >= len(lines):
            raise MeshParseError(f"expected '${name} <count>' but reached end of file",
                                 lines[-1][0] if lines else 1)
        lineno, tok = lines[pos]
        if tok[0] != f"${name}" or len(tok) != 2:
            raise MeshParseError(f"expected '${name} <count>', got {' '.join(tok)!r}", lineno)
        try:
            n = int(tok[1])
        except ValueError:
            raise MeshParseError(f"invalid count {tok[1]!r}", lineno) from None
        if n < 1:
            raise MeshParseError(f"count must be positive, got {n}", lineno)
        if pos + 1 + n > len(lines):
            raise MeshParseError(f"section ${name} announces {n} rows but file ends early",
                                 lines[-1][0])
        return n, lines[pos + 1: pos + 1 + n], pos + 1 + n

    nv, vrows, pos = section(0, "vertices")
    verts = np.empty((nv, 2))
    for k, (lineno, tok) in enumerate(vrows):
        if len(tok) != 2:
            raise MeshParseError(f"vertex row needs 2 coordinates, got {len(tok)}", lineno)
        try:
            verts[k] = [float(t) for t in tok]
        except ValueError:
            raise MeshParseError(f"invalid coordinate in {' '.join(tok)!r}", lineno) from None
        if not np.all(np.isfinite(verts[k])):
            raise MeshParseError("non-finite coordinate", lineno)

    ne, erows, pos = section(pos, "elements")
    elems = np.empty((ne, 4), dtype=np.int64)
    for k, (lineno, tok) in enumerate(erows):
        if len(tok) != 4:
            raise MeshParseError(f"element row needs 4 vertex indices, got {len(tok)}", lineno)
        try:
            idx = [int(t) for t in tok]
        except ValueError:
            raise MeshParseError(f"invalid vertex index in {' '.join(tok)!r}", lineno) from None
        if min(idx) < 0 or max(idx) >= nv:
            raise MeshParseError(f"vertex index out of range [0, {nv})", lineno)
        if len(set(idx)) != 4:
            raise MeshParseError("element repeats a vertex", lineno)
        elems[k] = idx
    if pos != len(lines):
        raise MeshParseError("unexpected content after $elements section", lines[pos][0])
    return _validated_quad_mesh(verts, elems)


def write_quad_mesh(mesh: Mesh) -> str:
    if mesh.dim != 2:
        raise ParameterError("only quadrilateral meshes can be written")
    out = [f"$vertices {mesh.n_vertices}"]
    out += [f"{x!r} {y!r}" for x, y in mesh.vertices.tolist()]
    out.append(f"$elements {mesh.n_elem}")
    out += [" ".join(str(v) for v in q) for q in mesh.elements.tolist()]
    return "\n".join(out) + "\n"


def refine_quad_mesh(mesh: Mesh) -> Mesh:
    """Split every quad into four at its parametric midpoints.

    The bilinear map of each child is the restriction of its parent's map, so
    the geometry is reproduced exactly.
    """
    if mesh.dim != 2:
        raise ParameterError("refine_quad_mesh expects a 2D mesh")
    verts = [tuple(v) for v in mesh.vertices.tolist()]
    edge_mid: dict[tuple, int] = {}

    def midpoint(a, b):
        key = (min(a, b), max(a, b))
        if key not in edge_mid:
            edge_mid[key] = len(verts)
            va, vb = mesh.vertices[a], mesh.vertices[b]
            verts.append(tuple(0.5 * (va + vb)))
        return edge_mid[key]

    children = []
    for quad in mesh.elements.tolist():
        m = [midpoint(quad[k], quad[(k + 1) % 4]) for k in range(4)]
        c = len(verts)
        verts.append(tuple(mesh.vertices[quad].mean(axis=0)))
        v0, v1, v2, v3 = quad
        children += [[v0, m[0], c, m[3]], [m[0], v1, m[1], c],
                     [c, m[1], v2, m[2]], [m[3], c, m[2], v3]]
    return _validated_quad_mesh(np.array(verts), np.array(children))


@dataclass(frozen=True)
class DofMap:
    degree: int
    n_dofs: int
    element_to_global: np.ndarray
    dof_coords: np.ndarray

    @property
    def dim(self) -> int:
        return self.dof_coords.shape[1]


def _segment_dofmap(mesh: Mesh, p: int) -> DofMap:
    x = mesh.vertices[:, 0]
    if np.any(x[mesh.elements[:, 1]] <= x[mesh.elements[:, 0]]):
        raise GeometryError("segment elements must be oriented left to right")
    ne, nv = mesh.n_elem, mesh.n_vertices
    e2g = np.empty((ne, p + 1), dtype=np.int64)
    e2g[:, 0] = mesh.elements[:, 0]
    e2g[:, p] = mesh.elements[:, 1]
    if p > 1:
        e2g[:, 1:p] = nv + np.arange(ne)[:, None] * (p - 1) + np.arange(p - 1)[None, :]
    n_dofs = nv + ne * (p - 1)
    xi = gauss_lobatto_nodes(p)
    x0, x1 = x[mesh.elements[:, 0]], x[mesh.elements[:, 1]]
    local = 0.5 * (x0 + x1)[:, None] + 0.5 * (x1 - x0)[:, None] * xi[None, :]
    coords = np.empty(n_dofs)
    coords[e2g] = local
    coords[mesh.elements] = x[mesh.elements]
    return DofMap(p, n_dofs, e2g, coords[:, None])


def _quad_local_edges(p: int) -> list[list[int]]:
    """Local node indices along each edge, from its start vertex to its end vertex."""
    n = p + 1
    inner = range(1, p)
    return [
        [i for i in inner],                          # v0 -> v1, eta = -1
        [p + n * j for j in inner],                  # v1 -> v2, xi = +1
        [i + n * p for i in reversed(inner)],        # v2 -> v3, eta = +1
        [n * j for j in reversed(inner)],            # v3 -> v0, xi = -1
    ]


def _quad_dofmap(mesh: Mesh, p: int) -> DofMap:
    n = p + 1
    ne, nv = mesh.n_elem, mesh.n_vertices
    elems = mesh.elements
    keys = np.sort(np.stack([elems, np.roll(elems, -1, axis=1)], axis=-1), axis=-1)
    uniq = np.unique(keys.reshape(-1, 2), axis=0)  # lexicographic (vmin, vmax)
    edge_index = {tuple(k): i for i, k in enumerate(uniq.tolist())}
    n_edges = len(uniq)
    n_int = (p - 1) ** 2

    e2g = np.empty((ne, n * n), dtype=np.int64)
    corner_local = [0, p, p + n * p, n * p]
    local_edges = _quad_local_edges(p)
    interior = [i + n * j for j in range(1, p) for i in range(1, p)]
    edge_base = nv
    int_base = nv + n_edges * (p - 1)
    for e in range(ne):
        quad = elems[e]
        for a in range(4):
            e2g[e, corner_local[a]] = quad[a]
        for k, loc in enumerate(local_edges):
            a, b = int(quad[k]), int(quad[(k + 1) % 4])
            gid = edge_base + edge_index[(min(a, b), max(a, b))] * (p - 1)
            glob = gid + np.arange(p - 1)
            if a > b:
                glob = glob[::-1]
            e2g[e, loc] = glob
        if n_int:
            e2g[e, interior] = int_base + e * n_int + np.arange(n_int)
    n_dofs = nv + n_edges * (p - 1) + ne * n_int

    xi = gauss_lobatto_nodes(p)
    X, Y = np.meshgrid(xi, xi, indexing="xy")
    ref = np.column_stack([X.ravel(), Y.ravel()])
    N = bilinear_shape(ref)
    phys = np.einsum("na,ead->end", N, mesh.vertices[elems])
    coords = np.empty((n_dofs, 2))
    coords[e2g.ravel()] = phys.reshape(-1, 2)
    coords[elems.ravel()] = mesh.vertices[elems.ravel()]
    return DofMap(p, n_dofs, e2g, coords)


def bilinear_shape(ref: np.ndarray) -> np.ndarray:
    """Bilinear vertex shape functions at reference points, shape (n, 4)."""
    xi, eta = ref[:, 0], ref[:, 1]
    return 0.25 * np.stack([(1 - xi) * (1 - eta), (1 + xi) * (1 - eta),
                            (1 + xi) * (1 + eta), (1 - xi) * (1 + eta)], axis=1)


def build_dofmap(mesh: Mesh, degree: int) -> DofMap:
    """Global C0 numbering: vertices, then edge interiors, then element interiors.

    Vertex DoFs reuse the vertex index. Edges are ordered lexicographically by
    their sorted vertex pair and their nodes run from the lower to the higher
    vertex index; element interiors follow element order.
    """
    if not 1 <= degree <= MAX_DEGREE:
        raise ParameterError(f"degree must be in [1, {MAX_DEGREE}], got {degree}")
    dm = _segment_dofmap(mesh, degree) if mesh.dim == 1 else _quad_dofmap(mesh, degree)
    _freeze(dm.element_to_global, dm.dof_coords)
    return dm
