"""Bifurcation and Maxwell set slices at fixed ``(beta, g)``.

All grids are uniform triangular grids on the simplex in barycentric
coordinates. Newton iterations run in the ``(x, y)`` chart, where the
``z`` direction decouples with curvature ``3/beta``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import potential as P
from .roots import edge_brackets, refine

log = logging.getLogger(__name__)

KINDS = ("minimum", "saddle", "maximum", "degenerate")
LABELS = (
    "empty",
    "three-lines",
    "three-Y",
    "six-arcs",
    "three-arcs",
    "triangle-plus-lines",
    "star",
    "unclassified",
)
PHASE_DISTANCE = 1e-3
UNIFORM = np.full(3, 1.0 / 3.0)


class ParameterError(ValueError):
    """Parameters outside the domain of an operation."""


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class StationaryPoint:
    m: tuple[float, float, float]
    kind: str
    value: float


@dataclass
class SliceCurve:
    """Polyline in barycentric coordinates (``space`` is ``"m"`` or
    ``"alpha"``); ``inside`` flags simplex membership per point."""

    points: np.ndarray
    closed: bool = False
    space: str = "m"
    inside: np.ndarray | None = None

    def chart(self, beta: float) -> np.ndarray:
        return np.asarray(P.chart(self.points.T, beta))[:2].T

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class BadSetTopology:
    label: str
    component_count: int
    cycles: int = 0
    max_degree: int = 0
    axis_fraction: float = 0.0
    diagnostics: dict = field(default_factory=dict, compare=False)


@dataclass
class SliceResult:
    curves: list[SliceCurve]
    resolution: int
    warnings: list[str] = field(default_factory=list)

    def __iter__(self):
        return iter(self.curves)

    def __len__(self) -> int:
        return len(self.curves)


@dataclass
class MaxwellSlice:
    curves: list[SliceCurve]
    topology: BadSetTopology
    resolution: int
    nodes: np.ndarray
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class GoodPointReport:
    """``status`` is ``"good"``, ``"bad"`` or ``"boundary"``; ``bool(report)``
    is true only for ``"good"``."""

    status: str
    minimizers: tuple[StationaryPoint, ...]
    gap: float

    def __bool__(self) -> bool:
        return self.status == "good"


# ---------------------------------------------------------------------------
# grids


@lru_cache(maxsize=16)
def simplex_grid(resolution: int):
    """Nodes (barycentric, shape ``(N, 3)``), triangles ``(T, 3)`` and unique
    edges ``(E, 2)`` of the uniform triangular grid with ``resolution``
    cells per edge. Node order is lexicographic in ``(i, j)``."""
    R = int(resolution)
    ij = [(i, j) for i in range(R + 1) for j in range(R + 1 - i)]
    index = {p: k for k, p in enumerate(ij)}
    nodes = np.array([(i, j, R - i - j) for i, j in ij], dtype=float) / R
    tris = []
    for i, j in ij:
        if i + j + 1 <= R:
            tris.append((index[i, j], index[i + 1, j], index[i, j + 1]))
        if i + j + 2 <= R:
            tris.append((index[i + 1, j], index[i + 1, j + 1], index[i, j + 1]))
    tris = np.array(tris, dtype=np.int64)
    pairs = np.sort(np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [0, 2]]]), axis=1)
    edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
    tri_edges = inverse.reshape(3, -1).T
    for arr in (nodes, tris, edges, tri_edges):
        arr.setflags(write=False)
    return nodes, tris, edges, tri_edges


@lru_cache(maxsize=16)
def _neighbours(resolution: int) -> np.ndarray:
    nodes, _, edges, _ = simplex_grid(resolution)
    n = len(nodes)
    nbr = [[k] for k in range(n)]
    for a, b in edges:
        nbr[a].append(b)
        nbr[b].append(a)
    width = max(len(v) for v in nbr)
    out = np.array([v + [v[0]] * (width - len(v)) for v in nbr], dtype=np.int64)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=16)
def _orbits(resolution: int):
    """For every grid node ``k`` a representative ``rep[k]`` in the sector
    ``alpha_1 >= alpha_2 >= alpha_3`` and a permutation with
    ``nodes[k] == nodes[rep[k]][perm[k]]``."""
    R = int(resolution)
    nodes = simplex_grid(R)[0]
    ints = np.rint(nodes * R).astype(np.int64)
    order = np.argsort(-ints, axis=1, kind="stable")
    perm = np.argsort(order, axis=1)
    srt = np.take_along_axis(ints, order, axis=1)
    i, j = srt[:, 0], srt[:, 1]
    rep = i * (R + 1) - i * (i - 1) // 2 + j
    rep.setflags(write=False)
    perm.setflags(write=False)
    return rep, perm


def _chain(n_nodes: int, segments) -> list[tuple[list[int], bool]]:
    """Chain undirected segments into maximal paths; paths break at nodes
    whose degree is not two. Returns ``(node_list, closed)`` pairs."""
    adj: list[list[int]] = [[] for _ in range(n_nodes)]
    for a, b in segments:
        adj[a].append(b)
        adj[b].append(a)
    used = set()
    paths = []

    def walk(start, nxt):
        path = [start, nxt]
        used.add((min(start, nxt), max(start, nxt)))
        prev, cur = start, nxt
        while len(adj[cur]) == 2:
            a, b = adj[cur]
            step = b if a == prev else a
            key = (min(cur, step), max(cur, step))
            if key in used:
                break
            used.add(key)
            path.append(step)
            prev, cur = cur, step
        return path

    for v in range(n_nodes):
        if len(adj[v]) != 2:
            for w in adj[v]:
                if (min(v, w), max(v, w)) not in used:
                    paths.append((walk(v, w), False))
    for v in range(n_nodes):
        for w in adj[v]:
            if (min(v, w), max(v, w)) not in used:
                path = walk(v, w)
                paths.append((path, path[0] == path[-1]))
    return paths


# ---------------------------------------------------------------------------
# degenerate locus and bifurcation slices


def degeneracy_function(x, y, beta: float, g: float):
    """Chart-Hessian determinant ``G_xx G_yy - G_xy^2`` at chart point
    ``(x, y)`` with ``alpha = chi(m)``."""
    return P.degeneracy_on_manifold(P.point(x, y, beta), beta, g)


def _check_slice_args(beta, g, resolution):
    if not (np.isfinite(beta) and beta > 0):
        raise ParameterError(f"beta must be positive, got {beta}")
    if not (np.isfinite(g) and g > 0):
        raise ParameterError(f"g must be positive, got {g}")
    warnings = []
    if resolution < 50:
        warnings.append(f"resolution {resolution} < 50; locus may be under-resolved")
    return warnings


def degenerate_locus(beta: float, g: float, resolution: int = 200) -> SliceResult:
    """Zero set of the degeneracy function on the simplex (marching
    triangles with linear interpolation on edges)."""
    warnings = _check_slice_args(beta, g, resolution)
    nodes, tris, edges, tri_edges = simplex_grid(resolution)
    with np.errstate(all="ignore"):
        f = np.asarray(P.degeneracy_on_manifold(nodes.T, beta, g), dtype=float)
    pos = f >= 0
    a, b = edges[:, 0], edges[:, 1]
    crossing = (pos[a] != pos[b]) & np.isfinite(f[a]) & np.isfinite(f[b])
    lam = np.where(crossing, f[a] / np.where(crossing, f[a] - f[b], 1.0), 0.0)
    pts = nodes[a] + lam[:, None] * (nodes[b] - nodes[a])
    node_of_edge = -np.ones(len(edges), dtype=np.int64)
    node_of_edge[crossing] = np.arange(crossing.sum())
    pts = pts[crossing]
    segs = []
    for te in tri_edges[crossing[tri_edges].sum(axis=1) == 2]:
        k = node_of_edge[te[crossing[te]]]
        segs.append((int(k[0]), int(k[1])))
    curves = []
    for path, closed in _chain(len(pts), segs):
        curves.append(SliceCurve(points=pts[path], closed=closed, space="m"))
    return SliceResult(curves, resolution, warnings)


def bifurcation_slice(beta: float, g: float, resolution: int = 200) -> SliceResult:
    """Image of the degenerate locus under ``chi``; ``inside`` marks points
    whose image lies in the simplex."""
    locus = degenerate_locus(beta, g, resolution)
    curves = []
    for c in locus.curves:
        alpha = np.asarray(P.chi(c.points.T, beta, g)).T
        curves.append(SliceCurve(points=alpha, closed=c.closed, space="alpha", inside=P.in_simplex(alpha.T)))
    return SliceResult(curves, resolution, locus.warnings)


def inside_components(result: SliceResult) -> int:
    """Number of maximal runs of inside-simplex points over all curves."""
    count = 0
    for c in result.curves:
        inside = np.asarray(c.inside, dtype=bool)
        if not inside.any():
            continue
        starts = (
            np.flatnonzero(inside & ~np.roll(inside, 1))
            if c.closed
            else np.flatnonzero(inside & np.concatenate([[True], ~inside[:-1]]))
        )
        count += max(len(starts), 1)
    return count


# ---------------------------------------------------------------------------
# batched Newton in the (x, y) chart


_U = np.array([P.UX, P.UY])  # (2, 3)


def _grad_hess(alpha, x, y, beta, g):
    """Chart gradient and 2x2 Hessian for float arrays, sharing one Gamma."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    alpha = np.asarray(alpha, dtype=float).reshape(3, -1)
    m = np.stack(np.broadcast_arrays(*P.point(x, y, beta))).reshape(3, -1)
    E = np.exp(beta * m)
    eg = np.exp(g)
    W = np.broadcast_to(E, (3, 3, E.shape[1])).copy()  # W[b, a] = exp(M_a + g 1{a=b})
    W[[0, 1, 2], [0, 1, 2]] *= eg
    Gam = W / W.sum(axis=1, keepdims=True)
    ug = np.einsum("ua,ban->ubn", _U, Gam)  # (2, 3, N)
    grad = _U @ m - np.einsum("bn,ubn->un", alpha, ug)
    uv = np.einsum("ua,va,ban->uvbn", _U, _U, Gam)
    cov = np.einsum("bn,uvbn->uvn", alpha, uv - ug[:, None] * ug[None, :])
    shape = np.broadcast(x, y).shape
    c = 6.0 / beta
    return (
        grad[0].reshape(shape),
        grad[1].reshape(shape),
        (c - cov[0, 0]).reshape(shape),
        (-cov[0, 1]).reshape(shape),
        (c - cov[1, 1]).reshape(shape),
    )


def _newton_batch(alpha, x, y, beta, g, iters=60, tol=1e-13, descent=False):
    """Vectorised Newton on the chart gradient.

    With ``descent=True`` the Hessian is shifted to be positive definite
    and steps are backtracked on ``G``, so iterates stay in the basin of a
    local minimum. Returns ``(x, y, converged)``.
    """
    x = np.array(x, dtype=float)
    y = np.array(y, dtype=float)
    cap = beta / 20.0
    conv = np.zeros(x.shape, dtype=bool)
    for _ in range(iters):
        with np.errstate(all="ignore"):
            Gx, Gy, hxx, hxy, hyy = _grad_hess(alpha, x, y, beta, g)
            gnorm = np.maximum(np.abs(Gx), np.abs(Gy))
            conv = np.isfinite(gnorm) & (gnorm < tol)
            if conv.all():
                break
            if descent:
                tr = 0.5 * (hxx + hyy)
                lam_min = tr - np.sqrt(0.25 * (hxx - hyy) ** 2 + hxy**2)
                shift = np.where(lam_min < 1e-3 / beta, 1e-3 / beta - lam_min, 0.0)
                hxx = hxx + shift
                hyy = hyy + shift
            det = hxx * hyy - hxy * hxy
            dx = -(hyy * Gx - hxy * Gy) / det
            dy = -(hxx * Gy - hxy * Gx) / det
            bad = ~np.isfinite(dx) | ~np.isfinite(dy)
            dx = np.where(bad, -Gx, dx)
            dy = np.where(bad, -Gy, dy)
            size = np.maximum(np.abs(dx), np.abs(dy))
            scale = np.where(size > cap, cap / size, 1.0)
            dx = np.where(conv, 0.0, dx * scale)
            dy = np.where(conv, 0.0, dy * scale)
            if descent:
                G0 = P.hs_value(alpha, P.point(x, y, beta), beta, g)
                t = np.ones(x.shape)
                for _ in range(8):
                    G1 = P.hs_value(alpha, P.point(x + t * dx, y + t * dy, beta), beta, g)
                    worse = ~(G1 <= G0 + 1e-15 * np.abs(G0))
                    if not worse.any():
                        break
                    t = np.where(worse, 0.5 * t, t)
                dx, dy = t * dx, t * dy
            x = x + dx
            y = y + dy
    with np.errstate(all="ignore"):
        Gx, Gy, *_ = _grad_hess(alpha, x, y, beta, g)
        conv = np.isfinite(Gx) & np.isfinite(Gy) & (np.maximum(np.abs(Gx), np.abs(Gy)) < 1e-10)
    return x, y, conv


def _classify(alpha, m, beta, g) -> str:
    hxx, hxy, hyy = (float(v) for v in P.chart_hessian_2x2(alpha, m, beta, g))
    det = hxx * hyy - hxy * hxy
    if abs(det) < 1e-9:
        return "degenerate"
    if det < 0:
        return "saddle"
    return "minimum" if hxx + hyy > 0 else "maximum"


def _seeds(beta: float, per_edge: int):
    nodes = simplex_grid(per_edge)[0]
    axis = np.linspace(0.0, 1.0, 2 * per_edge + 1)
    extra = []
    for k in range(3):
        pts = np.empty((len(axis), 3))
        pts[:, k] = axis
        pts[:, [i for i in range(3) if i != k]] = ((1.0 - axis) / 2)[:, None]
        extra.append(pts)
    bary = np.concatenate([nodes] + extra)
    x, y, _ = P.chart(bary.T, beta)
    return x, y


def find_stationary_points(
    alpha, beta: float, g: float, per_edge: int = 40, restrict: bool = True
) -> list[StationaryPoint]:
    """All stationary points of ``G_alpha`` reachable by Newton from a
    triangular seed grid and the symmetry-axis seeds, merged at 1e-8.

    With ``restrict`` only points in the (closed) simplex are returned.
    """
    alpha = np.asarray(alpha, dtype=float)
    if abs(alpha.sum() - 1.0) > 1e-9:
        raise ParameterError(f"alpha must lie in the plane sum=1, got {alpha}")
    if not g > 0:
        raise ParameterError(f"g must be positive, got {g}")
    x0, y0 = _seeds(beta, per_edge)
    x, y, conv = _newton_batch(alpha, x0, y0, beta, g)
    m = np.asarray(P.chart_inverse((x, y), beta))
    keep = conv & np.all(np.isfinite(m), axis=0)
    if restrict:
        keep &= P.in_simplex(m, 1e-9)
    m = m[:, keep].T
    out: list[np.ndarray] = []
    for p in m[np.lexsort(m.T[::-1])]:
        if not any(np.max(np.abs(p - q)) < 1e-8 for q in out):
            out.append(p)
    if out:
        # polish the representatives; the first copy need not be the best
        ox, oy, _ = P.chart(np.array(out).T, beta)
        ox, oy, _ = _newton_batch(alpha, ox, oy, beta, g, iters=20)
        out = list(np.asarray(P.chart_inverse((ox, oy), beta)).T)
    points = []
    for p in out:
        grad = np.asarray(P.hs_gradient(alpha, p, beta, g))
        if np.linalg.norm(grad) >= 1e-10:
            continue
        points.append(
            StationaryPoint(
                m=tuple(float(v) for v in p),
                kind=_classify(alpha, p, beta, g),
                value=float(P.hs_value(alpha, p, beta, g)),
            )
        )
    if not points:
        raise RuntimeError(f"no stationary point found for alpha={alpha}, beta={beta}, g={g}")
    points = _merge_flat(points, alpha, beta, g)
    return sorted(points, key=lambda s: s.value)


def _merge_flat(points, alpha, beta, g, radius=0.05):
    """Collapse clusters of degenerate points of equal depth. Near a
    higher-order degenerate point the gradient is flat enough for Newton
    to stop anywhere in a small neighbourhood; the cluster mean stands in
    for the whole cluster."""
    flat = [p for p in points if p.kind == "degenerate"]
    if len(flat) < 2:
        return points
    rest = [p for p in points if p.kind != "degenerate"]
    clusters: list[list[StationaryPoint]] = []
    for p in flat:
        for c in clusters:
            q = c[0]
            if max(abs(a - b) for a, b in zip(p.m, q.m)) < radius and abs(p.value - q.value) < 1e-12 * (
                1 + abs(q.value)
            ):
                c.append(p)
                break
        else:
            clusters.append([p])
    for c in clusters:
        m = np.mean([p.m for p in c], axis=0)
        rest.append(
            StationaryPoint(m=tuple(float(v) for v in m), kind="degenerate", value=float(P.hs_value(alpha, m, beta, g)))
        )
    return rest


def global_minimizers(points, depth_tol: float = 1e-9) -> list[StationaryPoint]:
    minima = [p for p in points if p.kind in ("minimum", "degenerate")]
    if not minima:
        return []
    low = minima[0].value
    return [p for p in minima if p.value - low <= depth_tol * (1 + abs(low))]


def _symmetry_related(alpha, a, b, tol=1e-7) -> bool:
    alpha = np.asarray(alpha)
    for perm in itertools.permutations(range(3)):
        perm = list(perm)
        if np.max(np.abs(alpha[perm] - alpha)) < 1e-12 and np.max(np.abs(np.asarray(a)[perm] - np.asarray(b))) < tol:
            return True
    return False


def is_good_point(alpha, beta: float, g: float, depth_tol: float = 1e-9) -> GoodPointReport:
    """Unique-global-minimizer test.

    Several minimizers within ``depth_tol`` give ``"bad"`` when they are
    images of each other under a permutation fixing ``alpha`` (the tie is
    exact) and ``"boundary"`` otherwise.
    """
    points = find_stationary_points(alpha, beta, g)
    minima = [p for p in points if p.kind in ("minimum", "degenerate")]
    if len(minima) == 1:
        return GoodPointReport("good", tuple(minima), float("inf"))
    gap = minima[1].value - minima[0].value
    best = global_minimizers(points, depth_tol)
    if len(best) == 1:
        return GoodPointReport("good", tuple(best), gap)
    forced = all(_symmetry_related(alpha, best[0].m, p.m) for p in best[1:])
    return GoodPointReport("bad" if forced else "boundary", tuple(best), gap)


# ---------------------------------------------------------------------------
# global minimisation over an alpha grid


def _grid_global_minima(alphas: np.ndarray, beta, g, m_resolution=48, chunk=2048):
    """Global minimiser of ``G_alpha`` for every row of ``alphas``.

    ``G`` is affine in ``alpha``, so it is tabulated once on an m-grid;
    every discrete local minimum is polished by descent Newton and the
    lowest polished minimum wins.
    """
    mnodes = simplex_grid(m_resolution)[0]
    nbr = _neighbours(m_resolution)
    Bm = beta * mnodes.T
    _, _, S = P._row_sums(tuple(Bm), g)
    L = np.log(np.array(S))  # (3, M)
    Q = 0.5 * beta * np.sum(mnodes**2, axis=1)
    mx, my, _ = P.chart(mnodes.T, beta)
    cand_a, cand_m = [], []
    for start in range(0, len(alphas), chunk):
        A = alphas[start : start + chunk]
        G = Q[None, :] - A @ L
        local = np.ones(G.shape, dtype=bool)
        for col in nbr.T[1:]:
            local &= G <= G[:, col]
        ia, im = np.nonzero(local)
        cand_a.append(ia + start)
        cand_m.append(im)
    ia = np.concatenate(cand_a)
    im = np.concatenate(cand_m)
    alpha_c = alphas[ia].T
    x, y, conv = _newton_batch(alpha_c, mx[im], my[im], beta, g, descent=True)
    val = np.asarray(P.hs_value(alpha_c, P.point(x, y, beta), beta, g))
    val = np.where(conv, val, np.inf)
    order = np.lexsort((val, ia))
    first = np.ones(len(order), dtype=bool)
    first[1:] = ia[order][1:] != ia[order][:-1]
    best = order[first]
    out_x = np.full(len(alphas), np.nan)
    out_y = np.full(len(alphas), np.nan)
    out_x[ia[best]] = x[best]
    out_y[ia[best]] = y[best]
    return out_x, out_y


def _sweep_neighbours(alphas, x, y, edges, beta, g, sweeps=3):
    """Re-seed each grid point from its neighbours' minimisers and keep
    any lower minimum found; repairs basins missed by the coarse table."""
    for _ in range(sweeps):
        # a neighbour in the same basin cannot offer a lower minimum
        differ = np.hypot(x[edges[:, 0]] - x[edges[:, 1]], y[edges[:, 0]] - y[edges[:, 1]]) > 10 * PHASE_DISTANCE * beta
        if not differ.any():
            break
        a, b = edges[differ, 0], edges[differ, 1]
        tgt = np.concatenate([a, b])
        src = np.concatenate([b, a])
        al = alphas[tgt].T
        nx, ny, conv = _newton_batch(al, x[src], y[src], beta, g, descent=True, iters=40)
        val = np.asarray(P.hs_value(al, P.point(nx, ny, beta), beta, g))
        cur = np.asarray(P.hs_value(al, P.point(x[tgt], y[tgt], beta), beta, g))
        better = conv & (val < cur - 1e-12 * (1 + np.abs(cur)))
        if not better.any():
            break
        order = np.argsort(val)
        changed = False
        seen = set()
        for k in order:
            if not better[k]:
                continue
            t = tgt[k]
            if t in seen:
                continue
            seen.add(t)
            x[t], y[t] = nx[k], ny[k]
            changed = True
        if not changed:
            break
    return x, y


def _global_on_grid(beta, g, resolution, m_resolution=48):
    nodes, tris, edges, tri_edges = simplex_grid(resolution)
    rep, perm = _orbits(resolution)
    reps = np.unique(rep)
    xr, yr = _grid_global_minima(nodes[reps], beta, g, m_resolution)
    lookup = np.empty(len(nodes), dtype=np.int64)
    lookup[reps] = np.arange(len(reps))
    # G is S3-equivariant: the minimiser at a permuted alpha is the permuted minimiser
    m_rep = np.asarray(P.chart_inverse((xr, yr), beta)).T[lookup[rep]]
    m_all = np.take_along_axis(m_rep, perm, axis=1)
    x, y, _ = P.chart(m_all.T, beta)
    x, y = _sweep_neighbours(nodes, x, y, edges, beta, g)
    return nodes, tris, edges, tri_edges, x, y


def _phase_crossings(nodes, edges, x, y, beta, g):
    """Edges across which the global minimiser switches basin."""
    a, b = edges[:, 0], edges[:, 1]
    ma = np.asarray(P.chart_inverse((x[a], y[a]), beta))
    mb = np.asarray(P.chart_inverse((x[b], y[b]), beta))
    far = np.max(np.abs(ma - mb), axis=0) > PHASE_DISTANCE
    idx = np.flatnonzero(far)
    if len(idx) == 0:
        return idx, {}
    ea, eb = a[idx], b[idx]
    # continue each minimiser to the other endpoint
    xab, yab, cab = _newton_batch(nodes[eb].T, x[ea], y[ea], beta, g, descent=True)
    xba, yba, cba = _newton_batch(nodes[ea].T, x[eb], y[eb], beta, g, descent=True)
    mab = np.asarray(P.chart_inverse((xab, yab), beta))
    mba = np.asarray(P.chart_inverse((xba, yba), beta))
    d1 = np.max(np.abs(mab - mb[:, idx]), axis=0)
    d2 = np.max(np.abs(mba - ma[:, idx]), axis=0)
    differ = (~cab | (d1 > PHASE_DISTANCE)) & (~cba | (d2 > PHASE_DISTANCE))
    # without coexistence at the endpoints the jump may sit in a wedge
    # thinner than the grid; bisect the global minimiser to tell it apart
    # from steep continuous motion
    jump_size = np.max(np.abs(ma[:, idx] - mb[:, idx]), axis=0)
    rest = np.flatnonzero(~differ & (jump_size > 30 * PHASE_DISTANCE))
    if len(rest):
        jump = _edge_jumps(nodes[ea[rest]], nodes[eb[rest]], ma[:, idx[rest]], mb[:, idx[rest]], beta, g)
        differ[rest[jump]] = True
        cab[rest[jump]] = cba[rest[jump]] = False
    keep = idx[differ]
    branches = {
        "xa": (x[ea][differ], xab[differ]),
        "ya": (y[ea][differ], yab[differ]),
        "xb": (xba[differ], x[eb][differ]),
        "yb": (yba[differ], y[eb][differ]),
    }
    return keep, branches


def _edge_jumps(A0, A1, m0, m1, beta, g, bisections=16, m_resolution=48):
    """True where the global minimiser is discontinuous on the segment
    ``A0 -> A1`` (rows), given the endpoint minimisers ``m0``, ``m1``
    (columns)."""
    n = len(A0)
    alive = np.arange(n)
    lo, hi = np.zeros(n), np.ones(n)
    z0, z1 = m0.T.copy(), m1.T.copy()
    for it in range(bisections):
        if it % 4 == 3:
            alive = alive[np.max(np.abs(z1[alive] - z0[alive]), axis=1) > PHASE_DISTANCE]
        if len(alive) == 0:
            break
        k = alive
        mid = 0.5 * (lo[k] + hi[k])
        xm, ym = _grid_global_minima(A0[k] + mid[:, None] * (A1[k] - A0[k]), beta, g, m_resolution)
        zm = np.asarray(P.chart_inverse((xm, ym), beta)).T
        left = np.max(np.abs(zm - z0[k]), axis=1) >= np.max(np.abs(z1[k] - zm), axis=1)
        hi[k] = np.where(left, mid, hi[k])
        lo[k] = np.where(left, lo[k], mid)
        z1[k] = np.where(left[:, None], zm, z1[k])
        z0[k] = np.where(left[:, None], z0[k], zm)
    out = np.zeros(n, dtype=bool)
    out[alive] = np.max(np.abs(z1[alive] - z0[alive]), axis=1) > PHASE_DISTANCE
    return out


def _locate_maxwell_points(nodes, edges, keep, br, beta, g, steps=6):
    """Equal-depth point on each crossing edge by regula falsi, tracking
    the two competing minima with warm-started descent Newton."""
    if len(keep) == 0:
        return np.zeros((0, 3))
    A0 = nodes[edges[keep, 0]]
    A1 = nodes[edges[keep, 1]]

    def depth(tau, xa, ya, xb, yb):
        al = (A0 + tau[:, None] * (A1 - A0)).T
        xa, ya, _ = _newton_batch(al, xa, ya, beta, g, descent=True, iters=30)
        xb, yb, _ = _newton_batch(al, xb, yb, beta, g, descent=True, iters=30)
        Ga = P.hs_value(al, P.point(xa, ya, beta), beta, g)
        Gb = P.hs_value(al, P.point(xb, yb, beta), beta, g)
        return np.asarray(Ga - Gb), xa, ya, xb, yb

    n = len(keep)
    lo = np.zeros(n)
    hi = np.ones(n)
    D_lo, *_ = depth(lo, br["xa"][0], br["ya"][0], br["xb"][0], br["yb"][0])
    D_hi, *_ = depth(hi, br["xa"][1], br["ya"][1], br["xb"][1], br["yb"][1])
    xa = 0.5 * (br["xa"][0] + br["xa"][1])
    ya = 0.5 * (br["ya"][0] + br["ya"][1])
    xb = 0.5 * (br["xb"][0] + br["xb"][1])
    yb = 0.5 * (br["yb"][0] + br["yb"][1])
    for _ in range(steps):
        ok = np.isfinite(D_lo) & np.isfinite(D_hi) & (D_lo <= 0) & (D_hi >= 0) & (D_hi > D_lo)
        tau = np.where(ok, lo + (hi - lo) * (-D_lo) / np.where(ok, D_hi - D_lo, 1.0), 0.5 * (lo + hi))
        tau = np.clip(tau, lo + 0.02 * (hi - lo), hi - 0.02 * (hi - lo))
        D, xa, ya, xb, yb = depth(tau, xa, ya, xb, yb)
        up = D < 0
        lo = np.where(up, tau, lo)
        D_lo = np.where(up, D, D_lo)
        hi = np.where(up, hi, tau)
        D_hi = np.where(up, D_hi, D)
    ok = np.isfinite(D_lo) & np.isfinite(D_hi) & (D_hi > D_lo)
    tau = np.where(ok, lo + (hi - lo) * (-D_lo) / np.where(ok, D_hi - D_lo, 1.0), 0.5 * (lo + hi))
    tau = np.clip(tau, 0.0, 1.0)
    return A0 + tau[:, None] * (A1 - A0)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _on_axis(points: np.ndarray, tol: float) -> np.ndarray:
    d = np.stack(
        [np.abs(points[:, 1] - points[:, 2]), np.abs(points[:, 0] - points[:, 2]), np.abs(points[:, 0] - points[:, 1])]
    )
    return np.min(d, axis=0) < tol


def classify_topology(points: np.ndarray, segments, resolution: int, min_nodes: int = 3) -> BadSetTopology:
    """Label the Maxwell graph from component count, cycle rank, maximal
    vertex degree and the fraction of nodes on symmetry axes.

    Components with fewer than ``min_nodes`` nodes are treated as grid
    noise and reported in the diagnostics.
    """
    n = len(points)
    uf = _UnionFind(n)
    deg = np.zeros(n, dtype=int)
    for a, b in segments:
        uf.union(a, b)
        deg[a] += 1
        deg[b] += 1
    roots = np.array([uf.find(k) for k in range(n)], dtype=int)
    comps = {}
    for k, r in enumerate(roots):
        comps.setdefault(int(r), []).append(k)
    seg_count = {}
    for a, b in segments:
        r = int(roots[a])
        seg_count[r] = seg_count.get(r, 0) + 1
    kept = {r: v for r, v in comps.items() if len(v) >= min_nodes}
    dropped = len(comps) - len(kept)
    if not kept:
        return BadSetTopology("empty", 0, diagnostics={"dropped_components": dropped})
    cycles = sum(seg_count.get(r, 0) - len(v) + 1 for r, v in kept.items())
    members = np.concatenate([np.array(v) for v in kept.values()])
    max_degree = int(deg[members].max())
    axis_fraction = float(np.mean(_on_axis(points[members], 1.5 / resolution)))
    count = len(kept)
    sizes = sorted(len(v) for v in kept.values())
    label = "unclassified"
    if count == 1:
        if cycles >= 1:
            label = "triangle-plus-lines"
        elif max_degree >= 3:
            label = "star"
    elif count == 3:
        if max_degree >= 3:
            label = "three-Y"
        elif axis_fraction >= 0.8:
            label = "three-lines"
        else:
            label = "three-arcs"
    elif count == 6 and max_degree <= 2:
        label = "six-arcs"
    diag = {"dropped_components": dropped, "component_sizes": sizes}
    return BadSetTopology(label, count, int(cycles), max_degree, axis_fraction, diag)


def _merge_coincident(pts, segs, tol):
    """Identify graph vertices closer than ``tol``. Crossing points on
    different grid edges coincide when the equal-depth locus runs through
    a grid node, as it does on the symmetry axes."""
    if len(pts) == 0:
        return pts, segs
    keys = np.round(pts / tol).astype(np.int64)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    new = rank[inverse]
    merged = pts[np.sort(first)]
    out = sorted({(min(new[a], new[b]), max(new[a], new[b])) for a, b in segs if new[a] != new[b]})
    return merged, [(int(a), int(b)) for a, b in out]


def maxwell_slice(
    beta: float, g: float, resolution: int = 200, m_resolution: int = 48, axis: bool = True
) -> MaxwellSlice:
    """Maxwell set slice in alpha-space with its topology label.

    Features near the symmetry axes (short stems, triple points, the first
    triangle edges) can be narrower than the grid spacing, so the label is
    refined with :func:`axis_profile` unless ``axis`` is false."""
    warnings = _check_slice_args(beta, g, resolution)
    nodes, tris, edges, tri_edges, x, y = _global_on_grid(beta, g, resolution, m_resolution)
    keep, br = _phase_crossings(nodes, edges, x, y, beta, g)
    pts = _locate_maxwell_points(nodes, edges, keep, br, beta, g)
    node_of_edge = -np.ones(len(edges), dtype=np.int64)
    node_of_edge[keep] = np.arange(len(keep))
    crossing = node_of_edge >= 0
    ncross = crossing[tri_edges].sum(axis=1)
    segs = []
    extra = []
    for te in tri_edges[ncross == 2]:
        k = node_of_edge[te[crossing[te]]]
        segs.append((int(k[0]), int(k[1])))
    for te in tri_edges[ncross == 3]:
        k = node_of_edge[te]
        c = len(pts) + len(extra)
        extra.append(pts[k].mean(axis=0))
        segs.extend((int(c), int(v)) for v in k)
    if extra:
        pts = np.concatenate([pts, np.array(extra)])
    pts, segs = _merge_coincident(pts, segs, 1e-6 / resolution)
    dangling = int(np.sum(ncross == 1))
    topo = classify_topology(pts, segs, resolution)
    topo.diagnostics["dangling_triangles"] = dangling
    if axis:
        topo = _refine_with_axis(topo, axis_profile(beta, g, n=max(2 * resolution, 400)))
    curves = [
        SliceCurve(points=pts[path], closed=closed, space="alpha", inside=np.ones(len(path), dtype=bool))
        for path, closed in _chain(len(pts), segs)
    ]
    if topo.label == "unclassified":
        warnings.append(f"unclassified Maxwell topology: {topo}")
    return MaxwellSlice(curves, topo, resolution, pts, warnings)


# ---------------------------------------------------------------------------
# triple point


def _axis_minima(v, beta, g):
    alpha = np.asarray(P.chart_inverse((0.0, v), beta), dtype=float)
    pts = find_stationary_points(alpha, beta, g, per_edge=24, restrict=False)
    minima = [p for p in pts if p.kind == "minimum"]
    sym = [p for p in minima if abs(p.m[1] - p.m[2]) < 1e-7]
    asym = [p for p in minima if p.m[2] - p.m[1] > 1e-7]
    return alpha, sym, asym


def triple_point_depth(v: float, beta: float, g: float) -> float:
    """Depth of the lowest asymmetric minimum minus the lowest symmetric one
    at ``alpha = chart_inverse(0, v)``; NaN if either is missing."""
    _, sym, asym = _axis_minima(v, beta, g)
    if not sym or not asym:
        return float("nan")
    return asym[0].value - sym[0].value


def triple_point(beta: float, g: float, scan: int = 80) -> np.ndarray:
    """The alpha with ``alpha_2 = alpha_3`` where the symmetric minimum and
    the mirror pair of asymmetric minima have equal depth."""
    if not (np.isfinite(beta) and beta > 0 and g > 0):
        raise ParameterError("invalid parameters")
    f = lambda v: triple_point_depth(v, beta, g)  # noqa: E731
    vs = np.linspace(-beta / 2, beta / 3, scan + 1)
    fs = np.array([f(v) for v in vs])
    roots = [refine(f, lo, hi, xtol=1e-12) for lo, hi in edge_brackets(f, vs, fs, depth=2)]
    good = []
    for v in roots:
        alpha, sym, asym = _axis_minima(v, beta, g)
        lowest = min(p.value for p in sym + asym)
        if abs(sym[0].value - lowest) < 1e-8 and abs(asym[0].value - lowest) < 1e-8:
            good.append(alpha)
    if len(good) != 1:
        raise ParameterError(f"expected one triple point, found {len(good)} at beta={beta}, g={g}")
    return good[0]


# ---------------------------------------------------------------------------
# symmetry-axis profile


def _axis_alphas(a1):
    a1 = np.asarray(a1, dtype=float)
    return np.column_stack([a1, 0.5 * (1 - a1), 0.5 * (1 - a1)])


def axis_minima(a1, beta: float, g: float, m_resolution: int = 64, y_points: int = 400):
    """Lowest symmetric and lowest mirror-pair local minimum of ``G_alpha``
    for ``alpha`` on the axis ``alpha_2 = alpha_3`` with first component
    ``a1`` (array).

    Returns ``(sym_val, sym_y, pair_val, pair_x, pair_y)``; missing minima
    are NaN.
    Symmetric minima have chart ``x = 0``; pair minima are reported with
    ``x > 0`` (their mirror image has ``-x``).
    """
    A = _axis_alphas(a1)
    n = len(A)
    # symmetric minima from a 1-D table along the m-axis
    ys = np.linspace(-beta / 6, beta / 3, y_points + 1)[1:-1]
    ms = np.asarray(P.point(np.zeros_like(ys), ys, beta))
    _, _, S = P._row_sums(tuple(beta * ms), g)
    Gs = 0.5 * beta * np.sum(ms**2, axis=0)[None, :] - A @ np.log(np.array(S))
    loc = np.zeros(Gs.shape, dtype=bool)
    loc[:, 1:-1] = (Gs[:, 1:-1] <= Gs[:, :-2]) & (Gs[:, 1:-1] <= Gs[:, 2:])
    ia, iy = np.nonzero(loc)
    x, y, conv = _newton_batch(A[ia].T, np.zeros(len(ia)), ys[iy], beta, g, descent=True)
    m = P.point(x, y, beta)
    hxx, _, hyy = P.chart_hessian_2x2(A[ia].T, m, beta, g)
    ok = conv & (np.abs(x) < 1e-9 * beta) & (np.asarray(hxx) > 0) & (np.asarray(hyy) > 0)
    val = np.where(ok, np.asarray(P.hs_value(A[ia].T, m, beta, g)), np.inf)
    sym_val = np.full(n, np.inf)
    sym_y = np.full(n, np.nan)
    for k in np.argsort(-val):  # ascending overwrite leaves the lowest
        if np.isfinite(val[k]):
            sym_val[ia[k]] = val[k]
            sym_y[ia[k]] = y[k]
    # mirror pairs from the half-grid x >= 0
    mnodes = simplex_grid(m_resolution)[0]
    nbr = _neighbours(m_resolution)
    mx, my, _ = P.chart(mnodes.T, beta)
    _, _, S = P._row_sums(tuple(beta * mnodes.T), g)
    G = 0.5 * beta * np.sum(mnodes**2, axis=1)[None, :] - A @ np.log(np.array(S))
    local = np.ones(G.shape, dtype=bool)
    for col in nbr.T[1:]:
        local &= G <= G[:, col]
    local &= (mx >= -1e-12)[None, :]
    ia, im = np.nonzero(local)
    h = 0.25 * beta / m_resolution
    x0 = np.maximum(mx[im], h)
    x, y, conv = _newton_batch(A[ia].T, x0, my[im], beta, g, descent=True)
    m = P.point(x, y, beta)
    hxx, hxy, hyy = P.chart_hessian_2x2(A[ia].T, m, beta, g)
    det = np.asarray(hxx) * np.asarray(hyy) - np.asarray(hxy) ** 2
    ok = conv & (x > 1e-6 * beta) & (det > 0) & (np.asarray(hxx) > 0)
    val = np.where(ok, np.asarray(P.hs_value(A[ia].T, m, beta, g)), np.inf)
    pair_val = np.full(n, np.inf)
    pair_x = np.full(n, np.nan)
    pair_y = np.full(n, np.nan)
    for k in np.argsort(-val):
        if np.isfinite(val[k]):
            pair_val[ia[k]] = val[k]
            pair_x[ia[k]] = x[k]
            pair_y[ia[k]] = y[k]
    sym_val[~np.isfinite(sym_val)] = np.nan
    pair_val[~np.isfinite(pair_val)] = np.nan
    return sym_val, sym_y, pair_val, pair_x, pair_y


def _axis_state(a1, beta, g, m_resolution):
    """Chart position ``(x, y)`` of the global minimizer (``x >= 0``) and
    whether it is a mirror pair."""
    sv, sy, pv, px, py = axis_minima(a1, beta, g, m_resolution)
    sv = np.where(np.isnan(sv), np.inf, sv)
    pv = np.where(np.isnan(pv), np.inf, pv)
    pair = pv < sv
    x = np.where(pair, px, 0.0)
    y = np.where(pair, py, sy)
    return x, y, pair


@dataclass(frozen=True)
class AxisProfile:
    """Maxwell structure of a slice along the half-line ``alpha_2 = alpha_3``.

    ``pair`` marks samples where a mirror pair is the global minimum, which
    puts them on the Maxwell set. ``jumps`` are the ``alpha_1`` positions
    where the global minimizer changes discontinuously."""

    beta: float
    g: float
    a1: np.ndarray
    pair: np.ndarray
    jumps: np.ndarray
    jump_sizes: np.ndarray

    @property
    def stem(self) -> bool:
        return bool(self.pair[0])

    @property
    def stem_end(self) -> float:
        """``alpha_1`` where the segment of pair minima starting at the edge
        ends."""
        if not self.stem:
            return float("nan")
        k = int(np.argmin(self.pair)) if not self.pair.all() else len(self.pair) - 1
        lo = self.a1[k - 1]
        near = self.jumps[(self.jumps >= lo) & (self.jumps <= self.a1[k])]
        return float(near[0]) if len(near) else float(0.5 * (lo + self.a1[k]))

    @property
    def triple(self) -> bool:
        """The stem ends where the global minimizer jumps (rather than
        merging continuously onto the axis)."""
        if not self.stem or self.pair.all():
            return False
        k = int(np.argmin(self.pair))
        return bool(np.any((self.jumps >= self.a1[k - 1]) & (self.jumps <= self.a1[k])))

    def vertex_side(self, tol: float = 1e-6) -> bool:
        """Maxwell points with ``alpha_1 > 1/3``."""
        return bool(np.any(self.pair & (self.a1 > 1 / 3 + tol)) or np.any(self.jumps > 1 / 3 + tol))

    def star(self, tol: float = 1e-6) -> bool:
        return self.stem and abs(self.stem_end - 1 / 3) < tol

    def label(self, grid_count: int | None = None) -> str:
        vertex = self.vertex_side()
        if self.stem:
            if self.star() and not vertex:
                return "star"
            if self.triple:
                return "triangle-plus-lines" if vertex else "three-Y"
            return "unclassified" if vertex else "three-lines"
        if vertex:
            return "three-arcs"
        if grid_count == 6:
            return "six-arcs"
        if grid_count == 0:
            return "empty"
        return "unclassified"


def axis_profile(beta: float, g: float, n: int = 400, m_resolution: int = 64, bisections: int = 24) -> AxisProfile:
    """Sample the axis, then bisect every interval at once to separate
    discontinuities of the global minimizer from steep continuous motion."""
    a1 = np.linspace(0.0, 1.0, n + 1)[:-1]
    x, y, pair = _axis_state(a1, beta, g, m_resolution)
    lo, hi = a1[:-1].copy(), a1[1:].copy()
    zl = np.column_stack([x[:-1], y[:-1]])
    zh = np.column_stack([x[1:], y[1:]])
    # only intervals whose end states differ by more than the typical step
    step = np.linalg.norm(zh - zl, axis=1)
    active = step > 1e-6 * beta
    lo, hi, zl, zh = lo[active], hi[active], zl[active], zh[active]
    thresh = 1e-4 * beta
    for it in range(bisections):
        if it % 4 == 3:
            # continuous motion shrinks with the interval; jumps do not
            alive = np.linalg.norm(zh - zl, axis=1) > thresh
            lo, hi, zl, zh = lo[alive], hi[alive], zl[alive], zh[alive]
        if len(lo) == 0:
            break
        mid = 0.5 * (lo + hi)
        xm, ym, _ = _axis_state(mid, beta, g, m_resolution)
        zm = np.column_stack([xm, ym])
        left = np.linalg.norm(zm - zl, axis=1) >= np.linalg.norm(zh - zm, axis=1)
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        zh = np.where(left[:, None], zm, zh)
        zl = np.where(left[:, None], zl, zm)
    size = np.linalg.norm(zh - zl, axis=1)
    big = size > thresh
    return AxisProfile(beta, g, a1, pair, 0.5 * (lo + hi)[big], size[big])


LABEL_COMPONENTS = {
    "empty": 0,
    "three-lines": 3,
    "three-Y": 3,
    "six-arcs": 6,
    "three-arcs": 3,
    "triangle-plus-lines": 1,
    "star": 1,
}


def _refine_with_axis(topo: BadSetTopology, profile: AxisProfile) -> BadSetTopology:
    if not profile.stem and not profile.vertex_side():
        # nothing on the axes: arcs away from them or nothing at all
        label = (
            topo.label if topo.label in ("empty", "six-arcs", "three-lines") else profile.label(topo.component_count)
        )
    else:
        label = profile.label(topo.component_count)
    if label == topo.label:
        return topo
    diag = dict(topo.diagnostics)
    diag.update(grid_label=topo.label, grid_component_count=topo.component_count)
    count = LABEL_COMPONENTS.get(label, topo.component_count)
    return BadSetTopology(label, count, topo.cycles, topo.max_degree, topo.axis_fraction, diag)
