import numpy as np
import pytest

from polypath.algebra import Rng, condition_estimate, vec_inf_norm
from polypath.errors import DimensionMismatch, NotHomogeneous
from polypath.parser import parse_input_file, parse_polynomial
from polypath.polysys import PolySystem, affine_patch, random_slice


def _poly(text, variables, params=()):
    return parse_polynomial(text, variables, params)


def _random_system(rng, nvars, max_deg, npolys=None):
    npolys = npolys or nvars
    names = [f"z{i}" for i in range(nvars)]
    polys = []
    for _ in range(npolys):
        terms = {}
        for _ in range(6):
            e = tuple(rng.integers(max_deg + 1) for _ in range(nvars))
            if sum(e) > max_deg:
                continue
            terms[e] = complex(rng.unit_complex())
        if not terms:
            terms[(0,) * nvars] = 1.0 + 0j
        from polypath.polysys import Polynomial
        polys.append(Polynomial.from_terms(terms, nvars))
    return PolySystem(names, polys)


def test_evaluate_on_variety_point():
    circle = PolySystem(["x", "y"], [_poly("x^2 + y^2 - 1", ["x", "y"])])
    assert vec_inf_norm(circle.evaluate([1.0, 0.0])) == 0.0


def test_evaluate_at_paper_intersection(circles):
    vals = circles.evaluate([0.5, 0.866025])
    assert vec_inf_norm(vals) <= 1e-5
    exact = circles.evaluate([0.5, np.sqrt(3.0) / 2.0])
    assert vec_inf_norm(exact) <= 1e-14


def test_evaluate_with_parameters(family):
    vals = family.evaluate([1.0, 0.0], [1.0, 1.0, 1.0])
    assert vec_inf_norm(vals) == 0.0


def test_evaluate_dimension_errors(circles, family):
    with pytest.raises(DimensionMismatch):
        circles.evaluate([1.0])
    with pytest.raises(DimensionMismatch):
        family.evaluate([1.0, 0.0])
    with pytest.raises(DimensionMismatch):
        family.evaluate([1.0, 0.0], [1.0])


def test_jacobian_monomial_rule():
    sys = PolySystem(["x", "y"], [_poly("x^2 + y^2 - 1", ["x", "y"])])
    assert np.allclose(sys.jacobian([1.0, 2.0]), [[2.0, 4.0]], atol=0)


def test_jacobian_product_symmetry():
    sys = PolySystem(["x", "y"], [_poly("x*y", ["x", "y"])])
    a, b = 1.7 - 0.3j, -2.2 + 1.1j
    assert np.allclose(sys.jacobian([a, b]), [[b, a]], atol=0)


def test_jacobian_matches_finite_differences():
    h = 1e-5
    for seed in range(20):
        rng = Rng(seed)
        sys = _random_system(rng, 3, 3)
        z = np.asarray(rng.unit_complex(3))
        jac = sys.jacobian(z)
        for j in range(3):
            e = np.zeros(3, dtype=complex)
            e[j] = h
            fd = (sys.evaluate(z + e) - sys.evaluate(z - e)) / (2 * h)
            denom = np.maximum(np.abs(jac[:, j]), 1.0)
            assert np.max(np.abs(fd - jac[:, j]) / denom) <= 1e-6


def test_degrees_and_bezout(circles, quadrics, family):
    assert circles.degrees() == [2, 2]
    assert circles.bezout_number() == 4
    assert quadrics.degrees() == [2, 2]
    assert quadrics.bezout_number() == 4
    assert family.degrees() == [2, 1]
    assert family.bezout_number() == 2


def test_bezout_multiplies_under_concatenation(circles, family):
    combined = PolySystem(circles.variables, circles.polys + circles.polys)
    assert combined.bezout_number() == circles.bezout_number() ** 2


def test_is_homogeneous(quadrics, circles):
    assert quadrics.is_homogeneous()
    assert not circles.is_homogeneous()


def test_specialize_paper_tuples(family):
    s1 = family.specialize([1.0, 1.0, 1.0])
    expect = parse_input_file("vars x, y; f1 = x^2 + y^2 - 1; f2 = y;").system
    assert s1.polys[0] == expect.polys[0]
    assert s1.polys[1] == expect.polys[1]
    s2 = family.specialize([2.0, 3.0, 4.0])
    expect2 = parse_input_file("vars x, y; f1 = 2*x^2 + 3*y^2 - 4; f2 = y;").system
    assert s2.polys[0] == expect2.polys[0]


def test_specialize_empty_is_identity(circles):
    again = circles.specialize([])
    assert all(p == q for p, q in zip(again.polys, circles.polys))


def test_specialize_commutes_with_evaluate(family):
    rng = Rng(4)
    for _ in range(20):
        p = np.asarray(rng.unit_complex(3))
        z = np.asarray(rng.unit_complex(2))
        a = family.specialize(p).evaluate(z)
        b = family.evaluate(z, p)
        assert vec_inf_norm(a - b) <= 1e-12 * (1.0 + vec_inf_norm(b))


def test_random_slice_shapes_and_independence():
    rng = Rng(8)
    one = random_slice(3, 1, rng)
    assert one.coefficients.shape == (1, 3)
    assert one.constants.shape == (1,)
    two = random_slice(3, 2, rng)
    gram = two.coefficients @ two.coefficients.conj().T
    assert condition_estimate(gram) < 1e12
    with pytest.raises(DimensionMismatch):
        random_slice(3, 4, rng)


def test_random_slice_determinism():
    a = random_slice(4, 2, Rng(21))
    b = random_slice(4, 2, Rng(21))
    assert np.array_equal(a.coefficients, b.coefficients)
    assert np.array_equal(a.constants, b.constants)


def test_affine_patch_squares_the_quadrics(quadrics):
    patched, coeffs = affine_patch(quadrics, Rng(2))
    assert patched.n == 3 and patched.num_vars == 3
    z = np.asarray(Rng(3).unit_complex(3))
    patch_val = patched.polys[-1].value(z)
    assert abs(patch_val - (coeffs @ z - 1.0)) <= 1e-14


def test_affine_patch_rejects_inhomogeneous(circles):
    with pytest.raises(NotHomogeneous):
        affine_patch(circles, Rng(0))


def test_homogeneous_scaling_property(quadrics):
    rng = Rng(12)
    degs = np.array(quadrics.degrees())
    for _ in range(10):
        z = np.asarray(rng.unit_complex(3)) * 1.7
        lam = complex(rng.unit_complex()) * 0.8
        lhs = quadrics.evaluate(lam * z)
        rhs = lam ** degs * quadrics.evaluate(z)
        assert vec_inf_norm(lhs - rhs) <= 1e-10 * (1.0 + vec_inf_norm(rhs))
