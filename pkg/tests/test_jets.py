import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ckl.jets import Jet, JetDomainError, jcontract, jet_space


def poly_jet(space, coeff_map, base):
    """Independent construction of the jet of a polynomial: evaluate all
    partials of sum c_alpha x^alpha at base by brute-force differentiation."""
    data = np.zeros(space.ncoeff)
    for i, alpha in enumerate(space.indices):
        total = 0.0
        for beta, c in coeff_map.items():
            if any(b < a for a, b in zip(alpha, beta)):
                continue
            term = c
            for k in range(space.nvars):
                a, b = alpha[k], beta[k]
                term *= math.factorial(b) / math.factorial(b - a)
                term *= base[k] ** (b - a)
            total += term
        data[i] = total / space.factorials[i]
    return Jet(space, data)


def eval_poly(coeff_map, x):
    return sum(c * math.prod(xi**b for xi, b in zip(x, beta)) for beta, c in coeff_map.items())


def random_poly(rng, nvars, degree):
    space = jet_space(nvars, degree)
    return {alpha: rng.uniform(-2, 2) for alpha in space.indices}


class TestBasics:
    def test_exp_taylor_coeffs(self):
        space = jet_space(4, 4)
        x0 = Jet.coordinate(space, 0, 0.0)
        j = x0.exp()
        along = [j.coeff((k, 0, 0, 0)) for k in range(5)]
        assert np.allclose(along, [1, 1, 1 / 2, 1 / 6, 1 / 24], rtol=1e-15, atol=1e-16)

    def test_polynomial_partials(self):
        # e = x0^2 * x1 at base (1, 2, 0, 0)
        space = jet_space(4, 2)
        x0 = Jet.coordinate(space, 0, 1.0)
        x1 = Jet.coordinate(space, 1, 2.0)
        j = x0 * x0 * x1
        assert j.value == pytest.approx(2.0)
        assert j.coeff((1, 0, 0, 0)) == pytest.approx(4.0)
        assert j.coeff((2, 0, 0, 0)) == pytest.approx(2.0)

    def test_geometric_series(self):
        space = jet_space(4, 3)
        x0 = Jet.coordinate(space, 0, 0.0)
        j = 1.0 / (1.0 - x0)
        along = [j.coeff((k, 0, 0, 0)) for k in range(4)]
        assert np.allclose(along, [1, 1, 1, 1], rtol=1e-14)

    def test_partial_factorial_scaling(self):
        space = jet_space(4, 4)
        j = Jet.coordinate(space, 0, 0.0).exp()
        assert j.partial((3, 0, 0, 0)) == pytest.approx(1.0)

    def test_constant_partials_vanish(self):
        space = jet_space(4, 3)
        j = Jet.constant(space, 5.0)
        assert j.partial((1, 0, 0, 0)) == 0.0
        assert j.partial((0, 1, 1, 0)) == 0.0

    def test_mixed_partial(self):
        space = jet_space(4, 2)
        x1 = Jet.coordinate(space, 1, 0.3)
        x2 = Jet.coordinate(space, 2, -0.7)
        assert (x1 * x2).partial((0, 1, 1, 0)) == pytest.approx(1.0)

    def test_domain_errors(self):
        space = jet_space(4, 2)
        zero = Jet.constant(space, 0.0)
        with pytest.raises(JetDomainError):
            1.0 / zero
        with pytest.raises(JetDomainError):
            Jet.constant(space, -1.0).log()
        with pytest.raises(JetDomainError):
            Jet.constant(space, -1.0).sqrt()


class TestExactness:
    @given(st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_product_of_polynomials_exact(self, seed):
        rng = np.random.default_rng(seed)
        order = 4
        space = jet_space(3, order)
        base = rng.uniform(-1, 1, size=3)
        p = random_poly(rng, 3, 2)
        q = random_poly(rng, 3, 2)
        jp = poly_jet(space, p, base)
        jq = poly_jet(space, q, base)
        prod = {}
        for a, ca in p.items():
            for b, cb in q.items():
                c = tuple(x + y for x, y in zip(a, b))
                prod[c] = prod.get(c, 0.0) + ca * cb
        expected = poly_jet(space, prod, base)
        np.testing.assert_allclose(
            (jp * jq).data, expected.data, rtol=1e-13, atol=1e-13
        )

    def test_truncation_consistency(self):
        # jet at order k, truncated to k-1, equals the jet built at k-1
        rng = np.random.default_rng(7)
        base = rng.uniform(0.2, 1.0, size=4)
        for k in (2, 3, 4):
            hi = jet_space(4, k)
            lo = jet_space(4, k - 1)
            f_hi = (Jet.coordinate(hi, 0, base[0]) * Jet.coordinate(hi, 1, base[1])).exp().sqrt()
            f_lo = (Jet.coordinate(lo, 0, base[0]) * Jet.coordinate(lo, 1, base[1])).exp().sqrt()
            np.testing.assert_allclose(f_hi.truncate(k - 1).data, f_lo.data, rtol=1e-14)

    def test_division_exact_for_rational(self):
        space = jet_space(2, 5)
        rng = np.random.default_rng(3)
        base = [0.5, -0.25]
        x = Jet.coordinate(space, 0, base[0])
        y = Jet.coordinate(space, 1, base[1])
        f = (1.0 + x * y) / (2.0 + x**2)
        g = f * (2.0 + x**2)
        target = 1.0 + x * y
        np.testing.assert_allclose(g.data, target.data, rtol=1e-14, atol=1e-15)
        _ = rng


FD_FUNCS = {
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "sqrt": np.sqrt,
}


class TestElementaryAgainstFiniteDifferences:
    @pytest.mark.parametrize("name", sorted(FD_FUNCS))
    def test_first_three_derivatives(self, name):
        # central finite differences as the independent oracle
        rng = np.random.default_rng(hash(name) % 2**32)
        fn = FD_FUNCS[name]
        space = jet_space(1, 4)
        for _ in range(100):
            if name in ("log", "sqrt"):
                x0 = rng.uniform(0.3, 2.5)
            elif name == "tan":
                x0 = rng.uniform(-1.2, 1.2)
            else:
                x0 = rng.uniform(-1.5, 1.5)
            j = getattr(Jet.coordinate(space, 0, x0), name)()
            h = 1e-3
            grid = fn(x0 + h * np.arange(-3, 4))
            d1 = (grid[4] - grid[2]) / (2 * h)
            d2 = (grid[4] - 2 * grid[3] + grid[2]) / h**2
            d3 = (grid[5] - 2 * grid[4] + 2 * grid[2] - grid[1]) / (2 * h**3)
            scale = max(1.0, abs(d1), abs(d2), abs(d3))
            assert abs(j.partial((1,)) - d1) / scale < 1e-6
            assert abs(j.partial((2,)) - d2) / scale < 1e-5
            assert abs(j.partial((3,)) - d3) / scale < 1e-4


class TestCalculus:
    def test_diff_matches_poly(self):
        rng = np.random.default_rng(11)
        space = jet_space(3, 4)
        base = rng.uniform(-1, 1, 3)
        p = random_poly(rng, 3, 3)
        jp = poly_jet(space, p, base)
        dp = {}
        for a, c in p.items():
            if a[1] == 0:
                continue
            b = (a[0], a[1] - 1, a[2])
            dp[b] = dp.get(b, 0.0) + c * a[1]
        expected = poly_jet(jet_space(3, 3), dp, base)
        np.testing.assert_allclose(jp.diff(1).data, expected.data, rtol=1e-13, atol=1e-13)

    def test_eval_at_displacement(self):
        rng = np.random.default_rng(13)
        p = random_poly(rng, 2, 3)
        space = jet_space(2, 3)
        base = [0.4, -0.2]
        jp = poly_jet(space, p, base)
        dx = [0.05, -0.03]
        exact = eval_poly(p, [base[0] + dx[0], base[1] + dx[1]])
        assert jp.eval_at(dx) == pytest.approx(exact, rel=1e-13)

    def test_jcontract_matrix_product(self):
        rng = np.random.default_rng(5)
        space = jet_space(2, 3)
        A = Jet(space, rng.standard_normal((space.ncoeff, 2, 3)))
        B = Jet(space, rng.standard_normal((space.ncoeff, 3, 2)))
        C = jcontract("ab,bc->ac", A, B)
        # compare against scalar-by-scalar multiplication
        for i in range(2):
            for c in range(2):
                acc = None
                for b in range(3):
                    term = A[i, b] * B[b, c]
                    acc = term if acc is None else acc + term
                np.testing.assert_allclose(C.data[:, i, c], acc.data, rtol=1e-12, atol=1e-12)

    def test_jcontract_three_way_and_trace(self):
        rng = np.random.default_rng(9)
        space = jet_space(2, 2)
        A = Jet(space, rng.standard_normal((space.ncoeff, 2, 2)))
        B = Jet(space, rng.standard_normal((space.ncoeff, 2, 2)))
        v = Jet(space, rng.standard_normal((space.ncoeff, 2)))
        out = jcontract("ab,bc,c->a", A, B, v)
        ref = jcontract("ab,b->a", A, jcontract("bc,c->b", B, v))
        np.testing.assert_allclose(out.data, ref.data, rtol=1e-12, atol=1e-12)
        tr = jcontract("aa->", A)
        np.testing.assert_allclose(tr.data, A.data[:, 0, 0] + A.data[:, 1, 1])
