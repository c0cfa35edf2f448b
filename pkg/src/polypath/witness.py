"""Witness sets, numerical irreducible decomposition, membership, sampling.

Witness supersets come from dimension-by-dimension randomized sliced solves:
at dimension i the square system [R.f ; L_i] (plus the chart equation in
projective mode) is solved by a total-degree homotopy, where R is a random
unit-modulus combination matrix and L_i a generic codimension-i slice.
Junk from higher-dimensional components is removed by the membership test,
components are grouped by monodromy loops, and every block is certified by
the linear trace test (failing blocks are merged until their union passes).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .algebra import Rng, random_unit_complex, vec_inf_norm
from .errors import (
    DecompositionIncomplete,
    DimensionMismatch,
    DimensionOutOfRange,
    NotHomogeneous,
    PathFailure,
)
from .polysys import LinearSlice, Polynomial, PolySystem, empty_slice, random_slice
from .tracker import (
    PathStatus,
    SliceMoveHomotopy,
    TrackerConfig,
    straight_line_homotopy,
    track_path,
)
from .zerodim import DEDUPE_TOL, total_degree_start

_MATCH_TOL = 1e-6
_RESIDUAL_GATE = 1e-8
_RETRIES = 3


@dataclass(frozen=True)
class WitnessSet:
    """Witness data (system, slice, points) for one component slice.

    The patch field is the chart row for projective sets; points are chart
    representatives in that case.  degree == number of points.
    """

    system: PolySystem
    slice: LinearSlice
    points: list
    dimension: int
    component_index: int = -1
    is_projective: bool = False
    patch: np.ndarray | None = None

    @property
    def degree(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class NumericalVariety:
    """Witness sets for every irreducible component, keyed by dimension."""

    components: dict
    system: PolySystem
    seed: int
    is_projective: bool = False
    patch: np.ndarray | None = None

    def dims(self):
        return sorted(self.components)

    def witness_sets(self):
        for dim in self.dims():
            for ws in self.components[dim]:
                yield ws


@dataclass(frozen=True)
class SupersetResult:
    points: list
    slice: LinearSlice
    paths_tracked: int


def _randomized_rows(system: PolySystem, count: int, rng: Rng):
    """count generic unit-modulus combinations of the system's polynomials."""
    width = system.width
    weights = np.atleast_2d(rng.unit_complex((count, system.n)))
    return [Polynomial.linear_combination(system.polys, weights[k], width)
            for k in range(count)]


def _patch_polynomial(patch, width):
    terms = {}
    for j, a in enumerate(patch):
        e = [0] * width
        e[j] = 1
        terms[tuple(e)] = complex(a)
    terms[tuple([0] * width)] = -1.0 + 0.0j
    return Polynomial.from_terms(terms, width)


def _fixed_rows(system: PolySystem, dim: int, rng: Rng, patch) -> PolySystem:
    """The non-slice rows of the square sliced system at dimension dim."""
    nv = system.num_vars
    count = nv - dim - (1 if patch is not None else 0)
    rows = _randomized_rows(system, count, rng)
    if patch is not None:
        rows.append(_patch_polynomial(patch, system.width))
    return PolySystem(system.variables, rows)


def _on_variety(system, point, patch=None):
    scale = _RESIDUAL_GATE * (1.0 + vec_inf_norm(point))
    if vec_inf_norm(system.evaluate(point)) > scale:
        return False
    if patch is not None:
        if abs(np.asarray(patch) @ point - 1.0) > scale:
            return False
    return True


def _superset_once(system, dim, rng, patch, config):
    nv = system.num_vars
    slice_ = random_slice(nv, dim, rng) if dim > 0 else empty_slice(nv)
    fixed = _fixed_rows(system, dim, rng, patch)
    square_polys = fixed.polys + slice_.as_polynomials(system.width)
    square = PolySystem(system.variables, square_polys)
    gamma = random_unit_complex(rng)
    start = total_degree_start(square)
    homotopy = straight_line_homotopy(square, start.start_system, gamma)
    points = []
    failures = 0
    for sp in start.start_points:
        res = track_path(homotopy, sp, config)
        if res.status is PathStatus.SUCCESS and _on_variety(system, res.endpoint, patch):
            points.append(res.endpoint)
        elif res.status is not PathStatus.AT_INFINITY:
            failures += 1
    return SupersetResult(points=points, slice=slice_,
                          paths_tracked=len(start.start_points)), failures


def _superset(system, dim, rng, patch, config):
    nv = system.num_vars
    top = nv - 1 - (1 if patch is not None else 0)
    if not 0 <= dim <= top:
        raise DimensionOutOfRange(f"dimension {dim} out of range 0..{top}")
    # a failed path may mean a lost witness point (an unlucky gamma or slice
    # sent it on a wild excursion), so redraw everything a few times and keep
    # the cleanest attempt
    best = None
    best_failures = None
    for _ in range(_RETRIES):
        result, failures = _superset_once(system, dim, rng, patch, config)
        if failures == 0:
            return result
        if best is None or failures < best_failures or (
                failures == best_failures and len(result.points) > len(best.points)):
            best, best_failures = result, failures
    return best


def witness_superset(system: PolySystem, dim: int, rng: Rng,
                     config: TrackerConfig | None = None) -> SupersetResult:
    """Finite solutions of the randomized dimension-dim sliced system.

    The result contains the true dimension-dim witness points, possibly
    plus junk points sitting on higher-dimensional components (singular
    path endpoints included).  Points failing the original system's
    residual are already discarded.
    """
    if system.parameters:
        raise DimensionMismatch("witness computations need a parameter-free system")
    return _superset(system, dim, rng, None, config)


def _dedupe_points(points, tol=DEDUPE_TOL):
    out = []
    for p in points:
        if all(vec_inf_norm(p - q) >= tol for q in out):
            out.append(p)
    return out


def move_slice(ws: WitnessSet, target_slice: LinearSlice, rng: Rng | None = None,
               config: TrackerConfig | None = None) -> WitnessSet:
    """Track every witness point from the current slice to target_slice.

    The homotopy keeps the randomized system rows fixed and interpolates
    (1-t) L_target + gamma t L_source.  Raises PathFailure when any path
    fails or lands off the variety; callers retry with fresh randomness.
    """
    if target_slice.codim != ws.slice.codim:
        raise DimensionMismatch("target slice has a different codimension")
    rng = rng or Rng(0)
    if ws.slice.codim == 0:
        return replace(ws, slice=target_slice, points=list(ws.points))
    fixed = _fixed_rows(ws.system, ws.dimension, rng, ws.patch)
    gamma = random_unit_complex(rng)
    homotopy = SliceMoveHomotopy(fixed, ws.slice, target_slice, gamma)
    moved = []
    for p in ws.points:
        res = track_path(homotopy, p, config)
        if res.status is not PathStatus.SUCCESS:
            raise PathFailure(f"witness point failed to move ({res.status.value})")
        q = res.endpoint
        scale = _RESIDUAL_GATE * (1.0 + vec_inf_norm(q))
        if not _on_variety(ws.system, q, ws.patch):
            raise PathFailure("moved point left the variety")
        if vec_inf_norm(target_slice.evaluate(q)) > scale:
            raise PathFailure("moved point missed the target slice")
        moved.append(q)
    # two paths landing on one endpoint means a crossing near the target
    # slice; the image is no longer a witness point set
    for i in range(len(moved)):
        for j in range(i + 1, len(moved)):
            if vec_inf_norm(moved[i] - moved[j]) < DEDUPE_TOL:
                raise PathFailure("witness points collided during the move")
    return replace(ws, slice=target_slice, points=moved)


def _member_of(ws: WitnessSet, point, rng: Rng, config=None) -> bool:
    """Move the component's slice through `point` and look for a hit."""
    point = np.asarray(point, dtype=complex)
    if ws.dimension == 0:
        return any(vec_inf_norm(point - q) <= _MATCH_TOL for q in ws.points)
    for _ in range(_RETRIES):
        coeffs = np.atleast_2d(rng.unit_complex((ws.slice.codim, ws.system.num_vars)))
        target = LinearSlice(coeffs, -(coeffs @ point))
        try:
            moved = move_slice(ws, target, rng, config)
        except PathFailure:
            continue
        return any(vec_inf_norm(point - q) <= _MATCH_TOL for q in moved.points)
    raise PathFailure("membership test kept failing to move the slice")


def junk_removal(supersets: dict, system: PolySystem, rng: Rng,
                 config: TrackerConfig | None = None,
                 *, is_projective: bool = False, patch=None) -> dict:
    """Discard superset points lying on higher-dimensional components.

    supersets maps dimension -> SupersetResult (or (slice, points) pair),
    computed top dimension downward.  Returns dimension -> surviving points.
    """
    def unpack(v):
        if isinstance(v, SupersetResult):
            return v.slice, v.points
        return v

    confirmed: list[WitnessSet] = []
    cleaned: dict[int, list] = {}
    for dim in sorted(supersets, reverse=True):
        slice_, points = unpack(supersets[dim])
        survivors = []
        for p in points:
            junk = False
            for ws in confirmed:
                try:
                    if _member_of(ws, p, rng, config):
                        junk = True
                        break
                except PathFailure:
                    continue
            if not junk:
                survivors.append(p)
        cleaned[dim] = survivors
        if survivors:
            confirmed.append(WitnessSet(
                system=system, slice=slice_, points=survivors, dimension=dim,
                is_projective=is_projective, patch=patch))
    return cleaned


def _match_points(originals, moved, tol=_MATCH_TOL):
    """Greedy nearest-neighbor matching; None when ambiguous or unmatched."""
    perm = [-1] * len(moved)
    taken = set()
    for j, q in enumerate(moved):
        dists = [vec_inf_norm(q - p) for p in originals]
        i = int(np.argmin(dists))
        if dists[i] > tol * (1.0 + vec_inf_norm(q)) or i in taken:
            return None
        taken.add(i)
        perm[j] = i
    return perm


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j) -> bool:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        self.parent[max(ri, rj)] = min(ri, rj)
        return True

    def blocks(self):
        groups = {}
        for i in range(len(self.parent)):
            groups.setdefault(self.find(i), set()).add(i)
        return [groups[r] for r in sorted(groups)]


def monodromy_partition(ws: WitnessSet, rng: Rng, max_loops: int = 10,
                        config: TrackerConfig | None = None) -> list[set]:
    """Partition witness point indices into monodromy orbits.

    Random slice loops L0 -> L1 -> L2 -> L0 are tracked and the induced
    permutations merged with union-find; stops after max_loops consecutive
    loops produce no merge (or when a single block remains).
    """
    k = len(ws.points)
    uf = _UnionFind(k)
    if k <= 1 or ws.slice.codim == 0:
        # isolated points never exchange; every one is its own component
        return uf.blocks()
    nv = ws.system.num_vars
    quiet = 0
    while quiet < max_loops and len(uf.blocks()) > 1:
        perm = None
        for _ in range(_RETRIES + 1):
            try:
                w1 = move_slice(ws, random_slice(nv, ws.slice.codim, rng), rng, config)
                w2 = move_slice(w1, random_slice(nv, ws.slice.codim, rng), rng, config)
                w0 = move_slice(w2, ws.slice, rng, config)
            except PathFailure:
                continue
            perm = _match_points(ws.points, w0.points)
            if perm is not None:
                break
        if perm is None:
            quiet += 1
            continue
        # list, not a generator: every union must run, not just the first hit
        merged = any([uf.union(j, i) for j, i in enumerate(perm)])
        quiet = 0 if merged else quiet + 1
    return uf.blocks()


def _block_trace_defects(ws: WitnessSet, blocks, rng: Rng, config=None):
    """Per-block trace defect vectors from one shared parallel translation.

    Tracks the whole witness set to the slices L +/- w and returns, for each
    block, sum(+1) + sum(-1) - 2 sum(0) along with the scale of sum(0).
    """
    if ws.slice.codim == 0:
        zero = np.zeros(ws.system.num_vars, dtype=complex)
        return [zero for _ in blocks], 1.0
    last_error = None
    for _ in range(_RETRIES + 1):
        w = np.atleast_1d(rng.unit_complex(ws.slice.codim))
        w /= np.linalg.norm(w)
        try:
            plus = move_slice(ws, ws.slice.translated(w), rng, config)
            minus = move_slice(ws, ws.slice.translated(-w), rng, config)
        except PathFailure as exc:
            last_error = exc
            continue
        defects = []
        for block in blocks:
            idx = sorted(block)
            s0 = sum(ws.points[i] for i in idx)
            sp = sum(plus.points[i] for i in idx)
            sm = sum(minus.points[i] for i in idx)
            defects.append(sp + sm - 2.0 * s0)
        scale = 1.0 + max(vec_inf_norm(sum(ws.points[i] for i in sorted(b)))
                          for b in blocks)
        return defects, scale
    raise PathFailure("trace translations kept failing") from last_error


def trace_test(ws: WitnessSet, block, rng: Rng,
               config: TrackerConfig | None = None) -> bool:
    """Linear trace test: is the block a complete union of components?

    Translates the slice parallel to itself to s = -1, 0, +1 and checks that
    the coordinate-wise sum of the block's points is affine-linear in s.
    """
    block = set(block)
    if not block or not block <= set(range(len(ws.points))):
        raise DimensionMismatch("block must be a nonempty subset of point indices")
    defects, scale = _block_trace_defects(ws, [block], rng, config)
    return vec_inf_norm(defects[0]) <= _MATCH_TOL * scale


def _certified_blocks(ws: WitnessSet, blocks, rng: Rng, config=None):
    """Merge blocks with the smallest combined defect until all traces pass."""
    blocks = [set(b) for b in blocks]
    for _ in range(len(blocks) + _RETRIES):
        defects, scale = _block_trace_defects(ws, blocks, rng, config)
        norms = [vec_inf_norm(d) for d in defects]
        failing = [i for i, d in enumerate(norms) if d > _MATCH_TOL * scale]
        if not failing:
            return blocks
        if len(blocks) == 1:
            raise DecompositionIncomplete(
                "full witness set fails the trace test; tracking is unreliable here")
        # defect vectors add block-wise, so the best pair is found directly
        best = None
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                if i not in failing and j not in failing:
                    continue
                combined = vec_inf_norm(defects[i] + defects[j])
                if best is None or combined < best[0]:
                    best = (combined, i, j)
        _, i, j = best
        blocks[i] = blocks[i] | blocks[j]
        del blocks[j]
    raise DecompositionIncomplete("trace certification did not stabilize")


def _point_sort_key(p):
    return tuple(x for c in p for x in (c.real, c.imag))


def numerical_irreducible_decomposition(
        system: PolySystem, *, projective: bool = False, seed: int = 0,
        config: TrackerConfig | None = None) -> NumericalVariety:
    """Witness sets for every irreducible component, organized by dimension.

    Scans dimensions from the top down: witness superset, dedupe, junk
    removal by membership, then monodromy grouping certified by the linear
    trace test.  Component indices within a dimension are assigned by
    (degree, first-point order).
    """
    if system.parameters:
        raise DimensionMismatch("decomposition needs a parameter-free system")
    if all(p.is_zero for p in system.polys):
        raise DimensionMismatch("the zero system defines the whole space")
    rng = Rng(seed)
    nv = system.num_vars
    if projective:
        if not system.is_homogeneous():
            raise NotHomogeneous("projective decomposition requires a homogeneous system")
        patch = np.atleast_1d(rng.unit_complex(nv))
        top = nv - 2
    else:
        patch = None
        top = nv - 1

    supersets = {}
    for dim in range(top, -1, -1):
        sres = _superset(system, dim, rng.fork(), patch, config)
        pts = _dedupe_points(sres.points)
        if pts:
            supersets[dim] = SupersetResult(points=pts, slice=sres.slice,
                                            paths_tracked=sres.paths_tracked)

    cleaned = junk_removal(supersets, system, rng.fork(), config,
                           is_projective=projective, patch=patch)

    components: dict[int, list[WitnessSet]] = {}
    for dim in sorted(cleaned, reverse=True):
        points = cleaned[dim]
        if not points:
            continue
        ws_all = WitnessSet(system=system, slice=supersets[dim].slice,
                            points=points, dimension=dim,
                            is_projective=projective, patch=patch)
        blocks = monodromy_partition(ws_all, rng.fork(), config=config)
        blocks = _certified_blocks(ws_all, blocks, rng.fork(), config)
        blocks.sort(key=lambda b: (len(b), min(_point_sort_key(points[i]) for i in b)))
        sets = []
        for j, block in enumerate(blocks):
            sets.append(WitnessSet(
                system=system, slice=supersets[dim].slice,
                points=[points[i] for i in sorted(block)], dimension=dim,
                component_index=j, is_projective=projective, patch=patch))
        components[dim] = sets
    return NumericalVariety(components=components, system=system, seed=seed,
                            is_projective=projective, patch=patch)


def membership_test(nv: NumericalVariety, test_points, rng: Rng | None = None,
                    config: TrackerConfig | None = None) -> list:
    """For each point, the (dimension, componentIndex) pairs containing it.

    Projective inputs are representatives; they are normalized onto the
    decomposition's chart first, which makes the test scale-invariant.
    Points failing the system residual are rejected without tracking.
    """
    rng = rng or Rng(nv.seed + 101)
    out = []
    for point in test_points:
        p = np.array([complex(c) for c in point], dtype=complex)
        if p.shape[0] != nv.system.num_vars:
            raise DimensionMismatch(
                f"point has length {p.shape[0]}, expected {nv.system.num_vars}")
        if nv.is_projective:
            s = np.asarray(nv.patch) @ p
            if abs(s) < 1e-12 * (1.0 + vec_inf_norm(p)):
                out.append([])   # representative sits outside the chart
                continue
            p = p / s
        hits = []
        if vec_inf_norm(nv.system.evaluate(p)) <= _MATCH_TOL * (1.0 + vec_inf_norm(p)):
            for dim in nv.dims():
                for ws in nv.components[dim]:
                    if _member_of(ws, p, rng, config):
                        hits.append((dim, ws.component_index))
        out.append(hits)
    return out


def sample(ws: WitnessSet, count: int, rng: Rng,
           config: TrackerConfig | None = None) -> list:
    """Draw count points of the component by moving its slice around.

    Every draw moves the witness set to a fresh generic slice and keeps the
    image of one witness point, so samples satisfy the system to tracking
    accuracy.
    """
    if count < 1:
        raise DimensionMismatch("sample count must be at least 1")
    nv = ws.system.num_vars
    out = []
    for _ in range(count):
        for attempt in range(_RETRIES + 1):
            try:
                if ws.slice.codim == 0:
                    moved = ws
                else:
                    moved = move_slice(ws, random_slice(nv, ws.slice.codim, rng),
                                       rng, config)
                out.append(moved.points[rng.integers(len(moved.points))])
                break
            except PathFailure:
                if attempt == _RETRIES:
                    raise
    return out
