"""Multivariate complex polynomials, systems, and random linear slices.

Polynomials are sparse term lists: an integer exponent matrix plus a complex
coefficient vector.  Exponent rows span the variables followed by the
parameters, so a system with N variables and P parameters has width N + P.
Evaluation and differentiation are exact term-wise operations; per-point
monomial powers are memoized in a single table, which keeps the tracker's
hot path inside numpy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Rng, condition_estimate
from .errors import DimensionMismatch, NotHomogeneous

_COEFF_EPS = 0.0  # coefficients are dropped only when they cancel exactly


class Polynomial:
    """One sparse polynomial: terms (coefficient, exponent row)."""

    __slots__ = ("exps", "coeffs")

    def __init__(self, exps, coeffs, width=None):
        exps = np.asarray(exps, dtype=np.int64)
        coeffs = np.asarray(coeffs, dtype=complex)
        if exps.size == 0:
            if width is None:
                raise DimensionMismatch("empty polynomial needs an explicit width")
            exps = exps.reshape(0, width)
            coeffs = coeffs.reshape(0)
        if exps.ndim != 2 or exps.shape[0] != coeffs.shape[0]:
            raise DimensionMismatch("exponent/coefficient shapes disagree")
        self.exps, self.coeffs = _canonicalize(exps, coeffs)

    @classmethod
    def from_terms(cls, terms: dict, width: int) -> "Polynomial":
        """Build from a mapping of exponent tuple -> coefficient."""
        if not terms:
            return cls(np.zeros((0, width), dtype=np.int64), [], width=width)
        exps = np.array(list(terms.keys()), dtype=np.int64)
        coeffs = np.array(list(terms.values()), dtype=complex)
        return cls(exps, coeffs, width=width)

    @property
    def width(self) -> int:
        return self.exps.shape[1]

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 0

    def terms(self) -> dict:
        return {tuple(int(e) for e in row): complex(c)
                for row, c in zip(self.exps, self.coeffs)}

    def degree(self, ncols: int | None = None) -> int:
        """Total degree over the first ncols exponent columns (default all)."""
        if self.is_zero:
            return 0
        cols = self.exps if ncols is None else self.exps[:, :ncols]
        return int(np.max(np.sum(cols, axis=1)))

    def diff(self, j: int) -> "Polynomial":
        """Exact partial derivative with respect to column j."""
        keep = self.exps[:, j] > 0
        exps = self.exps[keep].copy()
        coeffs = self.coeffs[keep] * exps[:, j]
        exps[:, j] -= 1
        return Polynomial(exps, coeffs, width=self.width)

    def scaled(self, c: complex) -> "Polynomial":
        return Polynomial(self.exps, self.coeffs * c, width=self.width)

    def value(self, point) -> complex:
        point = np.asarray(point, dtype=complex)
        if point.shape[0] != self.width:
            raise DimensionMismatch("point length does not match width")
        if self.is_zero:
            return 0.0 + 0.0j
        pw = _power_table(point, int(self.exps.max()) if self.exps.size else 0)
        vals = self.coeffs.copy()
        for j in range(self.width):
            vals *= pw[j, self.exps[:, j]]
        return complex(np.sum(vals))

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (self.exps.shape == other.exps.shape
                and np.array_equal(self.exps, other.exps)
                and np.array_equal(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((self.exps.tobytes(), self.coeffs.tobytes()))

    def __repr__(self):
        return f"Polynomial({len(self.coeffs)} terms, width {self.width})"

    @staticmethod
    def linear_combination(polys, weights, width: int) -> "Polynomial":
        blocks_e = [p.exps for p in polys if not p.is_zero]
        blocks_c = [p.coeffs * w for p, w in zip(polys, weights) if not p.is_zero]
        if not blocks_e:
            return Polynomial(np.zeros((0, width), np.int64), [], width=width)
        return Polynomial(np.vstack(blocks_e), np.concatenate(blocks_c), width=width)


def _canonicalize(exps, coeffs):
    """Merge duplicate exponent rows, drop zeros, sort rows descending."""
    if exps.shape[0]:
        order = np.lexsort(exps.T[::-1])[::-1]
        exps, coeffs = exps[order], coeffs[order]
        uniq = np.ones(exps.shape[0], dtype=bool)
        uniq[1:] = np.any(exps[1:] != exps[:-1], axis=1)
        idx = np.flatnonzero(uniq)
        merged = np.add.reduceat(coeffs, idx)
        exps, coeffs = exps[idx], merged
    keep = np.abs(coeffs) > _COEFF_EPS
    return np.ascontiguousarray(exps[keep]), np.ascontiguousarray(coeffs[keep])


def _power_table(point, max_deg):
    # point is complex (V,); result (V, max_deg + 1); 0**0 == 1.
    return point[:, None] ** np.arange(max_deg + 1)[None, :]


class _Stacked:
    """All terms of several polynomials stacked for one-pass evaluation."""

    __slots__ = ("exps", "coeffs", "rows", "nrows", "max_deg", "width")

    def __init__(self, polys, nrows, width):
        blocks_e, blocks_c, blocks_r = [], [], []
        for i, p in enumerate(polys):
            if p.is_zero:
                continue
            blocks_e.append(p.exps)
            blocks_c.append(p.coeffs)
            blocks_r.append(np.full(p.coeffs.shape[0], i, dtype=np.intp))
        if blocks_e:
            self.exps = np.vstack(blocks_e)
            self.coeffs = np.concatenate(blocks_c)
            self.rows = np.concatenate(blocks_r)
        else:
            self.exps = np.zeros((0, width), dtype=np.int64)
            self.coeffs = np.zeros(0, dtype=complex)
            self.rows = np.zeros(0, dtype=np.intp)
        self.nrows = nrows
        self.width = width
        self.max_deg = int(self.exps.max()) if self.exps.size else 0

    def __call__(self, point):
        out = np.zeros(self.nrows, dtype=complex)
        if self.coeffs.size == 0:
            return out
        pw = _power_table(point, self.max_deg)
        vals = self.coeffs.copy()
        for j in range(self.width):
            vals *= pw[j, self.exps[:, j]]
        np.add.at(out, self.rows, vals)
        return out


class PolySystem:
    """A list of polynomials over named variables and optional parameters."""

    def __init__(self, variables, polys, parameters=()):
        self.variables = tuple(variables)
        self.parameters = tuple(parameters)
        self.polys = list(polys)
        if not self.variables:
            raise DimensionMismatch("a system needs at least one variable")
        if not self.polys:
            raise DimensionMismatch("a system needs at least one polynomial")
        width = len(self.variables) + len(self.parameters)
        for p in self.polys:
            if p.width != width:
                raise DimensionMismatch(
                    f"polynomial width {p.width} != variables+parameters {width}"
                )
        self._ev = None
        self._jac = None
        self._pjac = None

    @property
    def n(self) -> int:
        return len(self.polys)

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    @property
    def width(self) -> int:
        return len(self.variables) + len(self.parameters)

    def _point(self, z, params):
        z = np.asarray(z, dtype=complex)
        if z.shape[0] != self.num_vars:
            raise DimensionMismatch(
                f"point has length {z.shape[0]}, system has {self.num_vars} variables"
            )
        if self.parameters:
            if params is None:
                raise DimensionMismatch("system has parameters; none supplied")
            params = np.asarray(params, dtype=complex)
            if params.shape[0] != len(self.parameters):
                raise DimensionMismatch(
                    f"expected {len(self.parameters)} parameter values, got {params.shape[0]}"
                )
            return np.concatenate([z, params])
        if params is not None and len(params):
            raise DimensionMismatch("system has no parameters")
        return z

    def evaluate(self, z, params=None):
        point = self._point(z, params)
        if self._ev is None:
            self._ev = _Stacked(self.polys, self.n, self.width)
        return self._ev(point)

    def jacobian(self, z, params=None):
        """n x N matrix of partials with respect to the variables."""
        point = self._point(z, params)
        nv = self.num_vars
        if self._jac is None:
            parts = [p.diff(j) for p in self.polys for j in range(nv)]
            self._jac = _Stacked(parts, self.n * nv, self.width)
        return self._jac(point).reshape(self.n, nv)

    def param_jacobian(self, z, params):
        """n x P matrix of partials with respect to the parameters."""
        point = self._point(z, params)
        nv, np_ = self.num_vars, len(self.parameters)
        if self._pjac is None:
            parts = [p.diff(nv + j) for p in self.polys for j in range(np_)]
            self._pjac = _Stacked(parts, self.n * np_, self.width)
        return self._pjac(point).reshape(self.n, np_)

    def degrees(self):
        """Per-polynomial total degrees in the variables only."""
        return [p.degree(self.num_vars) for p in self.polys]

    def bezout_number(self) -> int:
        out = 1
        for d in self.degrees():
            out *= d
        return out

    def is_homogeneous(self) -> bool:
        for p in self.polys:
            if p.is_zero:
                continue
            degs = np.sum(p.exps[:, :self.num_vars], axis=1)
            if np.any(degs != degs[0]):
                return False
        return True

    def specialize(self, param_values) -> "PolySystem":
        """Substitute parameter values, producing a parameter-free system."""
        param_values = np.asarray(param_values, dtype=complex)
        if param_values.shape[0] != len(self.parameters):
            raise DimensionMismatch(
                f"expected {len(self.parameters)} parameter values, got {param_values.shape[0]}"
            )
        nv = self.num_vars
        out = []
        for p in self.polys:
            if p.is_zero:
                out.append(Polynomial(np.zeros((0, nv), np.int64), [], width=nv))
                continue
            scale = np.ones(p.coeffs.shape[0], dtype=complex)
            for j, val in enumerate(param_values):
                scale *= val ** p.exps[:, nv + j]
            out.append(Polynomial(p.exps[:, :nv], p.coeffs * scale, width=nv))
        return PolySystem(self.variables, out)

    def __repr__(self):
        return (f"PolySystem({self.n} polynomials in {self.variables}"
                + (f", parameters {self.parameters}" if self.parameters else "") + ")")


@dataclass(frozen=True)
class LinearSlice:
    """Affine-linear equations A z + b = 0 cutting a codim-many slice."""

    coefficients: np.ndarray  # (codim, N)
    constants: np.ndarray     # (codim,)

    @property
    def codim(self) -> int:
        return self.coefficients.shape[0]

    @property
    def num_vars(self) -> int:
        return self.coefficients.shape[1]

    def evaluate(self, z):
        if self.codim == 0:
            return np.zeros(0, dtype=complex)
        return self.coefficients @ np.asarray(z, dtype=complex) + self.constants

    def as_polynomials(self, width: int):
        """Degree-1 polynomials over a width-column exponent space."""
        out = []
        for k in range(self.codim):
            terms = {}
            for j in range(self.num_vars):
                if self.coefficients[k, j] != 0:
                    e = [0] * width
                    e[j] = 1
                    terms[tuple(e)] = complex(self.coefficients[k, j])
            if self.constants[k] != 0:
                terms[tuple([0] * width)] = complex(self.constants[k])
            out.append(Polynomial.from_terms(terms, width))
        return out

    def translated(self, shift) -> "LinearSlice":
        return LinearSlice(self.coefficients, self.constants + np.asarray(shift, complex))


def empty_slice(num_vars: int) -> LinearSlice:
    return LinearSlice(np.zeros((0, num_vars), dtype=complex),
                       np.zeros(0, dtype=complex))


def random_slice(num_vars: int, codim: int, rng: Rng) -> LinearSlice:
    """Generic slice with unit-modulus coefficients.

    Constants get an extra random magnitude in [0.5, 1.5]: with exactly
    unit-modulus constants, the intersection of the slice with any
    coordinate axis would sit at modulus exactly 1, which collides with
    unit spheres and circles and spoils genericity on such inputs.
    Rows are redrawn (deterministically, from the same stream) in the
    measure-zero event that they fail the independence check.
    """
    if not 1 <= codim <= num_vars:
        raise DimensionMismatch(f"codim {codim} out of range for {num_vars} variables")
    while True:
        coeffs = np.atleast_2d(rng.unit_complex((codim, num_vars)))
        consts = np.atleast_1d(rng.unit_complex(codim))
        consts = consts * rng.uniform(0.5, 1.5, size=consts.shape)
        gram = coeffs @ coeffs.conj().T
        if condition_estimate(gram) < 1e12:
            return LinearSlice(coeffs, consts)


def affine_patch(system: PolySystem, rng: Rng):
    """Append a random chart equation sum(a_i z_i) = 1 to a homogeneous system.

    Returns the patched system and the patch coefficients a.
    """
    if not system.is_homogeneous():
        raise NotHomogeneous("affine patch requires a homogeneous system")
    width = system.width
    nv = system.num_vars
    a = np.atleast_1d(rng.unit_complex(nv))
    terms = {}
    for j in range(nv):
        e = [0] * width
        e[j] = 1
        terms[tuple(e)] = complex(a[j])
    terms[tuple([0] * width)] = -1.0 + 0.0j
    patch_poly = Polynomial.from_terms(terms, width)
    patched = PolySystem(system.variables, system.polys + [patch_poly],
                         system.parameters)
    return patched, a
