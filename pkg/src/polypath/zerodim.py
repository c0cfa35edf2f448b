"""Zero-dimensional solving, deduplication, refinement, parameter homotopies.

The solver builds the total-degree start system g_i = z_i^(d_i) - 1, tracks
every product of roots of unity through the gamma-twisted straight-line
homotopy, then clusters finite endpoints into solutions with diagnostics.
Projective systems are solved on a random affine chart appended as an extra
equation.  Refinement reruns Newton in extended precision.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import mpmath
import numpy as np

from .algebra import (
    EXTENDED_PREC_BITS,
    Rng,
    condition_estimate,
    extended_precision,
    random_unit_complex,
    to_extended,
    vec_inf_norm,
)
from .errors import (
    DimensionMismatch,
    NotHomogeneous,
    NotSquare,
    RefinementDiverged,
)
from .polysys import Polynomial, PolySystem, affine_patch
from .tracker import (
    ParameterPathHomotopy,
    PathResult,
    PathStatus,
    TrackerConfig,
    straight_line_homotopy,
    track_path,
)

DEDUPE_TOL = 1e-6


@dataclass(frozen=True)
class SolutionPoint:
    """One approximate solution with the standard diagnostic fields."""

    coordinates: tuple
    condition_number: float
    cycle_number: int
    function_residual: float
    last_t: float
    max_precision_bits: int
    newton_residual: float
    solution_number: int
    multiplicity: int = 1
    is_projective: bool = False

    def coordinate_array(self) -> np.ndarray:
        return np.array([complex(c) for c in self.coordinates], dtype=complex)


@dataclass(frozen=True)
class StartData:
    start_system: PolySystem
    start_points: list


def total_degree_start(system: PolySystem) -> StartData:
    """Total-degree start system z_i^(d_i) - 1 and all its roots.

    Start points are every product of d_i-th roots of unity, enumerated in
    lexicographic order of the index tuples.
    """
    if system.parameters:
        raise NotSquare("start systems require a parameter-free system")
    if system.n != system.num_vars:
        raise NotSquare(f"system is {system.n}x{system.num_vars}, not square")
    nv = system.num_vars
    degrees = system.degrees()
    if any(d < 1 for d in degrees):
        raise NotSquare("every polynomial needs positive degree in the variables")
    polys = []
    for i, d in enumerate(degrees):
        e = [0] * nv
        e[i] = d
        polys.append(Polynomial.from_terms(
            {tuple(e): 1.0 + 0.0j, tuple([0] * nv): -1.0 + 0.0j}, nv))
    g = PolySystem(system.variables, polys)
    roots = [np.exp(2j * np.pi * np.arange(d) / d) for d in degrees]
    points = [np.array(combo, dtype=complex)
              for combo in itertools.product(*roots)]
    return StartData(start_system=g, start_points=points)


def _proj_match(p, q, tol) -> bool:
    """Compare two projective representatives after normalizing the
    largest-modulus coordinate of the first to 1."""
    i = int(np.argmax(np.abs(p)))
    if abs(p[i]) == 0.0 or abs(q[i]) <= tol * float(np.max(np.abs(q))):
        return False
    return vec_inf_norm(p / p[i] - q / q[i]) < tol


def dedupe(results: list[PathResult], tol: float = DEDUPE_TOL,
           *, projective: bool = False) -> list[SolutionPoint]:
    """Cluster successful path endpoints into solutions.

    Endpoints closer than tol (infinity norm; projective representatives are
    compared after normalization) join the first cluster they match, so the
    operation is idempotent.  Multiplicity records the cluster size.
    """
    reps: list[PathResult] = []
    counts: list[int] = []
    for res in results:
        if res.status is not PathStatus.SUCCESS:
            continue
        for i, rep in enumerate(reps):
            if projective:
                hit = _proj_match(rep.endpoint, res.endpoint, tol)
            else:
                hit = vec_inf_norm(rep.endpoint - res.endpoint) < tol
            if hit:
                counts[i] += 1
                break
        else:
            reps.append(res)
            counts.append(1)
    out = []
    for i, (rep, count) in enumerate(zip(reps, counts)):
        out.append(SolutionPoint(
            coordinates=tuple(complex(c) for c in rep.endpoint),
            condition_number=rep.condition_number,
            cycle_number=rep.cycle_number,
            function_residual=rep.function_residual,
            last_t=rep.last_t,
            max_precision_bits=rep.max_precision_bits,
            newton_residual=rep.newton_residual,
            solution_number=i,
            multiplicity=count,
            is_projective=projective,
        ))
    return out


def _solution_condition(system: PolySystem, z, patch_row) -> float:
    """Condition number of the square Jacobian with the chart row appended.

    Solutions are conditioned as projective points: the system is evaluated
    at the chart-normalized representative and the patch row closes the
    square matrix, mirroring how homotopy solvers report conditioning.
    """
    z = np.asarray(z, dtype=complex)
    a = np.asarray(patch_row, dtype=complex)
    s = a @ z
    if abs(s) < 1e-13 * (1.0 + vec_inf_norm(z)):
        return math.inf
    zc = z / s
    jac = system.jacobian(zc)
    full = np.vstack([jac, a[None, :]])
    return condition_estimate(full)


def _homogenize(system: PolySystem) -> PolySystem:
    """Append a homogenizing variable column (parameter-free systems)."""
    if system.parameters:
        raise DimensionMismatch("cannot homogenize a parameterized system")
    nv = system.num_vars
    name = "_h"
    while name in system.variables:
        name += "0"
    polys = []
    for p in system.polys:
        if p.is_zero:
            polys.append(Polynomial(np.zeros((0, nv + 1), np.int64), [], width=nv + 1))
            continue
        d = p.degree()
        term_degs = np.sum(p.exps, axis=1)
        exps = np.hstack([p.exps, (d - term_degs)[:, None]])
        polys.append(Polynomial(exps, p.coeffs, width=nv + 1))
    return PolySystem(tuple(system.variables) + (name,), polys)


def zero_dim_solve(system: PolySystem, *, projective: bool = False,
                   seed: int = 0, config: TrackerConfig | None = None,
                   dedupe_tol: float = DEDUPE_TOL) -> list[SolutionPoint]:
    """Find all isolated solutions of a square system.

    Tracks the full Bezout count of paths from the total-degree start system.
    With probability one the result contains every isolated root.  In
    projective mode the input must be homogeneous with one equation fewer
    than variables; solutions are then reported as raw representatives on a
    random affine chart.
    """
    if system.parameters:
        raise NotSquare("solve a specialization; the system still has parameters")
    rng = Rng(seed)
    if projective:
        if not system.is_homogeneous():
            raise NotHomogeneous("projective solving requires a homogeneous system")
        if system.n != system.num_vars - 1:
            raise NotSquare(
                f"projective solving needs n = N - 1, got n={system.n}, N={system.num_vars}")
        solved, _ = affine_patch(system, rng)
        cond_system = cond_patch = None
    else:
        if system.n != system.num_vars:
            raise NotSquare(f"system is {system.n}x{system.num_vars}, not square")
        solved = system
        cond_system = _homogenize(system)
        cond_patch = np.atleast_1d(rng.fork().unit_complex(solved.num_vars + 1))

    gamma = random_unit_complex(rng)
    start = total_degree_start(solved)
    homotopy = straight_line_homotopy(solved, start.start_system, gamma)
    results = [track_path(homotopy, p, config) for p in start.start_points]
    sols = dedupe(results, dedupe_tol, projective=projective)
    enriched = []
    for sp in sols:
        z = sp.coordinate_array()
        fres = vec_inf_norm(solved.evaluate(z))
        if projective:
            # the chart equation is already part of the solved square system
            cond = condition_estimate(solved.jacobian(z))
        else:
            zh = np.concatenate([z, [1.0 + 0.0j]])
            cond = _solution_condition(cond_system, zh, cond_patch)
        enriched.append(replace(sp, function_residual=float(fres),
                                condition_number=float(cond)))
    return enriched


# -- refinement ---------------------------------------------------------------

class _ExtendedSystem:
    """mpmath twin of a parameter-free square system for Newton sharpening."""

    def __init__(self, system: PolySystem):
        if system.parameters:
            raise DimensionMismatch("refinement needs a parameter-free system")
        if system.n != system.num_vars:
            raise NotSquare("refinement needs a square system")
        self.nv = system.num_vars
        self.polys = [[(to_extended(c), tuple(int(e) for e in row))
                       for row, c in zip(p.exps, p.coeffs)]
                      for p in system.polys]
        self.jacs = [[[(to_extended(c), tuple(int(e) for e in row))
                       for row, c in zip(dp.exps, dp.coeffs)]
                      for dp in (p.diff(j) for j in range(self.nv))]
                     for p in system.polys]

    @staticmethod
    def _eval_terms(terms, z):
        total = mpmath.mpc(0)
        for coeff, exps in terms:
            val = coeff
            for zj, e in zip(z, exps):
                if e:
                    val *= zj ** e
            total += val
        return total

    def evaluate(self, z):
        return [self._eval_terms(terms, z) for terms in self.polys]

    def jacobian(self, z):
        return mpmath.matrix([[self._eval_terms(cell, z) for cell in row]
                              for row in self.jacs])


def refine_solutions(system: PolySystem, points, digits: int) -> list[SolutionPoint]:
    """Sharpen solutions to the requested number of digits by Newton's method.

    Iterates in fixed 160-bit arithmetic until successive iterates agree to
    10^-digits relative in every coordinate (coordinates below 1 are held to
    the same absolute tolerance).  Raises RefinementDiverged when Newton
    stops contracting, which signals a singular or wrong input point.
    """
    if not 1 <= digits <= 30:
        raise ValueError("digits must be between 1 and 30")
    tol = mpmath.mpf(10) ** (-digits)
    out = []
    with extended_precision():
        ext = _ExtendedSystem(system)
        for sp in points:
            coords = sp.coordinates if isinstance(sp, SolutionPoint) else sp
            z = [to_extended(c) for c in coords]
            updates = []
            converged = False
            for it in range(30):
                try:
                    jac = ext.jacobian(z)
                    fval = mpmath.matrix(ext.evaluate(z))
                    delta = mpmath.lu_solve(jac, -fval)
                except ZeroDivisionError as exc:
                    raise RefinementDiverged("singular Jacobian during sharpening") from exc
                z = [zi + di for zi, di in zip(z, delta)]
                rel = max(abs(di) / max(1, abs(zi)) for zi, di in zip(z, delta))
                updates.append(max(abs(di) for di in delta))
                if rel <= tol:
                    converged = True
                    break
                if len(updates) >= 5 and updates[-1] > updates[-2] >= updates[-3]:
                    raise RefinementDiverged("Newton updates stopped contracting")
            if not converged:
                raise RefinementDiverged(
                    f"no agreement to {digits} digits within 30 iterations")
            residual = max(abs(v) for v in ext.evaluate(z))
            base = sp if isinstance(sp, SolutionPoint) else None
            out.append(SolutionPoint(
                coordinates=tuple(z),
                condition_number=base.condition_number if base else float("nan"),
                cycle_number=base.cycle_number if base else 1,
                function_residual=float(residual),
                last_t=base.last_t if base else 0.0,
                max_precision_bits=EXTENDED_PREC_BITS,
                newton_residual=float(updates[-1]) if updates else 0.0,
                solution_number=base.solution_number if base else len(out),
                multiplicity=base.multiplicity if base else 1,
                is_projective=base.is_projective if base else False,
            ))
    return out


# -- parameter homotopy ---------------------------------------------------------

class ParameterHomotopyResult(list):
    """Per-tuple solution lists plus the stage-1 bookkeeping."""

    def __init__(self, solution_sets, start_parameters, start_solutions):
        super().__init__(solution_sets)
        self.solution_sets = solution_sets
        self.start_parameters = start_parameters
        self.start_solutions = start_solutions
        self.paths_per_tuple = len(start_solutions)


def parameter_homotopy(family: PolySystem, param_names, value_tuples,
                       *, seed: int = 0,
                       config: TrackerConfig | None = None) -> ParameterHomotopyResult:
    """Two-stage parameter homotopy over a parameterized family.

    Stage 1 assigns a random unit-modulus complex value to every parameter
    and solves that specialization from scratch; stage 2 tracks each
    nonsingular stage-1 solution to every requested parameter tuple, so each
    tuple costs exactly the generic root count in paths.
    """
    if not family.parameters:
        raise DimensionMismatch("family has no parameters")
    if family.n != family.num_vars:
        raise NotSquare("family must be square in its variables")
    names = list(param_names)
    if sorted(names) != sorted(family.parameters):
        raise DimensionMismatch(
            f"parameter names {names} do not match the family's {list(family.parameters)}")
    perm = [names.index(p) for p in family.parameters]
    tuples = []
    for tup in value_tuples:
        tup = list(tup)
        if len(tup) != len(names):
            raise DimensionMismatch(
                f"tuple {tup} should have {len(names)} entries")
        tuples.append(np.array([complex(tup[j]) for j in perm], dtype=complex))

    rng = Rng(seed)
    p0 = np.atleast_1d(rng.unit_complex(len(names)))
    stage1_system = family.specialize(p0)
    stage1 = zero_dim_solve(stage1_system, seed=rng.integers(2**63), config=config)
    stage1 = [sp for sp in stage1
              if sp.cycle_number == 1 and sp.multiplicity == 1
              and math.isfinite(sp.condition_number) and sp.condition_number < 1e12]

    solution_sets = []
    for p1 in tuples:
        homotopy = ParameterPathHomotopy(family, p0, p1)
        results = [track_path(homotopy, sp.coordinate_array(), config)
                   for sp in stage1]
        sols = dedupe(results)
        target = family.specialize(p1)
        enriched = []
        for i, sp in enumerate(sols):
            z = sp.coordinate_array()
            enriched.append(replace(
                sp,
                function_residual=float(vec_inf_norm(target.evaluate(z))),
                condition_number=float(condition_estimate(target.jacobian(z))),
                solution_number=i,
            ))
        solution_sets.append(enriched)
    return ParameterHomotopyResult(solution_sets, p0, stage1)
