"""Truncated multivariate Taylor (jet) arithmetic.

A jet stores the Taylor coefficients ``coeffs[alpha] = d^alpha f / alpha!`` of a
scalar (or an array of scalars) at a base point, for all multi-indices with
``|alpha| <= order``.  Arithmetic on jets is exact for polynomial inputs of
total degree up to the truncation order, which is what makes third and fourth
metric derivatives downstream noise-free.

Coefficients are stored densely in graded-lexicographic order; the index
tables and product convolution tables are precomputed once per
``(nvars, order)`` pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "JetSpace",
    "Jet",
    "JetDomainError",
    "jet_space",
    "jet_constant",
    "jet_coordinate",
]


class JetDomainError(ZeroDivisionError):
    """A jet operation left the domain of the function (division by zero,
    log of a non-positive value, ...)."""


def _multi_indices(nvars, order):
    """All multi-indices with |alpha| <= order, graded-lexicographic."""
    out = []
    for total in range(order + 1):
        level = []

        def rec(prefix, remaining, slots):
            if slots == 1:
                level.append(prefix + (remaining,))
                return
            for k in range(remaining, -1, -1):
                rec(prefix + (k,), remaining - k, slots - 1)

        rec((), total, nvars)
        level.sort(reverse=True)
        out.extend(level)
    return out


class JetSpace:
    """Index bookkeeping for jets in ``nvars`` variables at truncation ``order``."""

    def __init__(self, nvars, order):
        if nvars < 1 or order < 0:
            raise ValueError("need nvars >= 1 and order >= 0")
        self.nvars = nvars
        self.order = order
        self.indices = _multi_indices(nvars, order)
        self.ncoeff = len(self.indices)
        self.index_of = {alpha: i for i, alpha in enumerate(self.indices)}
        self.degrees = np.array([sum(a) for a in self.indices], dtype=np.intp)
        self.factorials = np.array(
            [math.prod(math.factorial(k) for k in a) for a in self.indices],
            dtype=np.float64,
        )
        self._mul_table = None
        self._diff_tables = {}

    # -- tables ----------------------------------------------------------

    @property
    def mul_table(self):
        """(I, J, K) index triples with alpha_I + alpha_J = alpha_K."""
        if self._mul_table is None:
            I, J, K = [], [], []
            for i, a in enumerate(self.indices):
                da = self.degrees[i]
                for j, b in enumerate(self.indices):
                    if da + self.degrees[j] > self.order:
                        continue
                    c = tuple(x + y for x, y in zip(a, b))
                    I.append(i)
                    J.append(j)
                    K.append(self.index_of[c])
            self._mul_table = (
                np.array(I, dtype=np.intp),
                np.array(J, dtype=np.intp),
                np.array(K, dtype=np.intp),
            )
        return self._mul_table

    def diff_table(self, var):
        """(src, dst, scale): d/dx_var maps coeff[src] to scale*coeff -> dst
        in the order-1 smaller space."""
        if var not in self._diff_tables:
            lower = jet_space(self.nvars, self.order - 1)
            src, dst, scale = [], [], []
            for i, a in enumerate(self.indices):
                if a[var] == 0:
                    continue
                b = tuple(x - (1 if k == var else 0) for k, x in enumerate(a))
                if sum(b) > lower.order:
                    continue
                src.append(i)
                dst.append(lower.index_of[b])
                scale.append(a[var])
            self._diff_tables[var] = (
                np.array(src, dtype=np.intp),
                np.array(dst, dtype=np.intp),
                np.array(scale, dtype=np.float64),
            )
        return self._diff_tables[var]

    def truncation_map(self, lower_order):
        """Indices of this space's coefficients that survive truncation."""
        lower = jet_space(self.nvars, lower_order)
        return np.array([self.index_of[a] for a in lower.indices], dtype=np.intp)

    def monomials(self, dx):
        """Values of the monomials (x - base)^alpha at displacement dx."""
        dx = np.asarray(dx, dtype=np.float64)
        vals = np.empty(self.ncoeff, dtype=np.float64)
        for i, a in enumerate(self.indices):
            v = 1.0
            for k, p in enumerate(a):
                if p:
                    v *= dx[k] ** p
            vals[i] = v
        return vals


@lru_cache(maxsize=None)
def jet_space(nvars, order):
    return JetSpace(nvars, order)


def _as_array(data, shape):
    arr = np.asarray(data)
    if arr.shape != shape:
        raise ValueError(f"shape mismatch: {arr.shape} vs {shape}")
    return arr


@dataclass(frozen=True)
class Jet:
    """A (possibly array-valued) truncated Taylor expansion.

    ``data`` has shape ``(space.ncoeff, *shape)``; entry ``data[i, ...]`` is the
    coefficient of the monomial ``(x - base)^indices[i]`` divided by alpha!.
    Jets are immutable; every operation returns a fresh jet truncated to the
    smaller of the operand orders.
    """

    space: JetSpace
    data: np.ndarray

    # -- constructors ------------------------------------------------------

    @staticmethod
    def constant(space, value):
        value = np.asarray(value)
        data = np.zeros((space.ncoeff,) + value.shape, dtype=np.result_type(value, np.float64))
        data[0] = value
        return Jet(space, data)

    @staticmethod
    def coordinate(space, var, base_value):
        data = np.zeros(space.ncoeff, dtype=np.float64)
        data[0] = base_value
        if space.order >= 1:
            unit = tuple(1 if k == var else 0 for k in range(space.nvars))
            data[space.index_of[unit]] = 1.0
        return Jet(space, data)

    @staticmethod
    def zeros(space, shape=(), dtype=np.float64):
        return Jet(space, np.zeros((space.ncoeff,) + shape, dtype=dtype))

    # -- basic queries ------------------------------------------------------

    @property
    def shape(self):
        return self.data.shape[1:]

    @property
    def order(self):
        return self.space.order

    @property
    def value(self):
        """Coefficient of the empty multi-index: the value at the base point."""
        return self.data[0]

    def coeff(self, alpha):
        return self.data[self.space.index_of[tuple(alpha)]]

    def partial(self, alpha):
        """The partial derivative d^alpha f at the base point (coeff * alpha!)."""
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            raise ValueError(f"|alpha|={sum(alpha)} exceeds jet order {self.order}")
        i = self.space.index_of[alpha]
        return self.data[i] * self.space.factorials[i]

    def coeffs_dict(self):
        return {a: self.data[i] for i, a in enumerate(self.space.indices)}

    # -- structural ops ------------------------------------------------------

    def truncate(self, order):
        if order > self.order:
            raise ValueError("cannot extend a jet by truncation")
        if order == self.order:
            return self
        lower = jet_space(self.space.nvars, order)
        return Jet(lower, self.data[self.space.truncation_map(order)])

    def astype(self, dtype):
        return Jet(self.space, self.data.astype(dtype))

    def conj(self):
        return Jet(self.space, np.conj(self.data))

    @property
    def real(self):
        return Jet(self.space, self.data.real.copy())

    @property
    def imag(self):
        return Jet(self.space, self.data.imag.copy())

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.space, self.data[(slice(None),) + key])

    def component(self, *key):
        return self[key]

    # -- arithmetic -----------------------------------------------------------

    def _match(self, other):
        a, b = self, other
        if not isinstance(b, Jet):
            b = Jet.constant(a.space, b)
        if a.space.nvars != b.space.nvars:
            raise ValueError("jets live in different variable counts")
        order = min(a.order, b.order)
        return a.truncate(order), b.truncate(order)

    def __add__(self, other):
        a, b = self._match(other)
        return Jet(a.space, a.data + b.data)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.data)

    def __sub__(self, other):
        a, b = self._match(other)
        return Jet(a.space, a.data - b.data)

    def __rsub__(self, other):
        a, b = self._match(other)
        return Jet(a.space, b.data - a.data)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.space, self.data * other)
        a, b = self._match(other)
        return _jet_mul(a, b)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.space, self.data / other)
        a, b = self._match(other)
        return _jet_mul(a, b.reciprocal())

    def __rtruediv__(self, other):
        return Jet.constant(self.space, other) / self

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("jet exponents must be integers")
        if n < 0:
            return self.reciprocal() ** (-n)
        result = Jet.constant(self.space, np.ones(self.shape))
        base = self
        n = int(n)
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -- calculus ---------------------------------------------------------------

    def diff(self, var):
        """Partial derivative with respect to chart variable ``var``
        (returns a jet one order lower)."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        src, dst, scale = self.space.diff_table(var)
        lower = jet_space(self.space.nvars, self.order - 1)
        out = np.zeros((lower.ncoeff,) + self.shape, dtype=self.data.dtype)
        scale = scale.reshape((-1,) + (1,) * len(self.shape))
        np.add.at(out, dst, self.data[src] * scale)
        return Jet(lower, out)

    def directional(self, direction):
        """Derivative along a constant chart direction (sum of diffs)."""
        out = None
        for k, w in enumerate(direction):
            if w == 0:
                continue
            term = self.diff(k) * w
            out = term if out is None else out + term
        if out is None:
            return Jet.zeros(jet_space(self.space.nvars, self.order - 1), self.shape, self.data.dtype)
        return out

    def eval_at(self, dx):
        """Evaluate the truncated polynomial at displacement dx from base."""
        mono = self.space.monomials(dx)
        return np.tensordot(mono, self.data, axes=(0, 0))

    # -- nonlinear scalar functions ------------------------------------------------

    def reciprocal(self):
        v = self.value
        if np.any(np.abs(v) == 0):
            raise JetDomainError("division by a jet with zero value")
        inv0 = 1.0 / v
        x = Jet.constant(self.space, inv0)
        # Newton iteration doubles the correct truncation order each step.
        steps = max(1, math.ceil(math.log2(self.order + 1))) if self.order else 1
        for _ in range(steps):
            x = x * (2.0 - self * x)
        return x

    def sqrt(self):
        v = self.value
        if np.any(np.real(v) <= 0) and not np.iscomplexobj(self.data):
            raise JetDomainError("sqrt of a non-positive jet value")
        return self._compose(np.sqrt(v), _sqrt_series)

    def exp(self):
        return self._compose(np.exp(self.value), _exp_series)

    def log(self):
        v = self.value
        if not np.iscomplexobj(self.data) and np.any(v <= 0):
            raise JetDomainError("log of a non-positive jet value")
        return self._compose(np.log(v), _log_series)

    def sin(self):
        return self._compose(np.sin(self.value), _sin_series)

    def cos(self):
        return self._compose(np.cos(self.value), _cos_series)

    def tan(self):
        c = np.cos(self.value)
        if np.any(np.abs(c) < 1e-300):
            raise JetDomainError("tan at a pole")
        return self.sin() / self.cos()

    def sinh(self):
        return self._compose(np.sinh(self.value), _sinh_series)

    def cosh(self):
        return self._compose(np.cosh(self.value), _cosh_series)

    def _compose(self, f0, series):
        """Univariate composition f(self) via the Taylor series of f about
        the jet's value, evaluated by Horner on the nilpotent part."""
        coeffs = series(self.value, self.order)
        delta = Jet(self.space, self.data.copy())
        delta.data[0] = np.zeros_like(delta.data[0])
        result = Jet.constant(self.space, coeffs[-1])
        for c in reversed(coeffs[:-1]):
            result = result * delta + Jet.constant(self.space, c)
        _ = f0
        return result


def _jet_mul(a, b):
    space = a.space
    I, J, K = space.mul_table
    pa = a.data[I]
    pb = b.data[J]
    prod = pa * pb
    out = np.zeros((space.ncoeff,) + prod.shape[1:], dtype=prod.dtype)
    np.add.at(out, K, prod)
    return Jet(space, out)


def _exp_series(v, order):
    e = np.exp(v)
    return [e / math.factorial(k) for k in range(order + 1)]


def _log_series(v, order):
    out = [np.log(v)]
    for k in range(1, order + 1):
        out.append(((-1.0) ** (k + 1)) / (k * v**k))
    return out


def _sqrt_series(v, order):
    s = np.sqrt(v)
    out = [s]
    c = 0.5
    for k in range(1, order + 1):
        out.append(c * s / v**k)
        c *= (0.5 - k) / (k + 1)
    return out


def _sin_series(v, order):
    s, c = np.sin(v), np.cos(v)
    cycle = [s, c, -s, -c]
    return [cycle[k % 4] / math.factorial(k) for k in range(order + 1)]


def _cos_series(v, order):
    s, c = np.sin(v), np.cos(v)
    cycle = [c, -s, -c, s]
    return [cycle[k % 4] / math.factorial(k) for k in range(order + 1)]


def _sinh_series(v, order):
    s, c = np.sinh(v), np.cosh(v)
    return [(s if k % 2 == 0 else c) / math.factorial(k) for k in range(order + 1)]


def _cosh_series(v, order):
    s, c = np.sinh(v), np.cosh(v)
    return [(c if k % 2 == 0 else s) / math.factorial(k) for k in range(order + 1)]


def jet_constant(value, nvars, order):
    return Jet.constant(jet_space(nvars, order), value)


def jet_coordinate(var, base_value, nvars, order):
    return Jet.coordinate(jet_space(nvars, order), var, base_value)


def jcontract(subscripts, *operands):
    """einsum over the tensor indices of jets, convolving Taylor coefficients.

    ``subscripts`` uses plain einsum syntax for the tensor part, e.g.
    ``jcontract('ab,bc->ac', A, B)``.  Operands may be jets or plain arrays
    (treated as constants).  Evaluated pairwise left to right; an index is
    summed away as soon as it no longer appears downstream.
    """
    parts, out = subscripts.split("->")
    terms = parts.split(",")
    if len(terms) != len(operands):
        raise ValueError("subscript count does not match operand count")

    jets = []
    for sub, op in zip(terms, operands):
        if not isinstance(op, Jet):
            space = next(o.space for o in operands if isinstance(o, Jet))
            op = Jet.constant(space, np.asarray(op))
        jets.append(op)

    acc, acc_sub = jets[0], terms[0]
    for pos in range(1, len(jets)):
        nxt, nxt_sub = jets[pos], terms[pos]
        a, b = acc._match(nxt)
        downstream = out + "".join(terms[pos + 1 :])
        target = "".join(
            c
            for c in dict.fromkeys(acc_sub + nxt_sub)
            if c in downstream or (acc_sub + nxt_sub).count(c) == 1
        )
        # drop indices fully contracted in this pair and unused later
        target = "".join(c for c in target if c in downstream)
        I, J, K = a.space.mul_table
        prod = np.einsum(f"p{acc_sub},p{nxt_sub}->p{target}", a.data[I], b.data[J])
        outdata = np.zeros((a.space.ncoeff,) + prod.shape[1:], dtype=prod.dtype)
        np.add.at(outdata, K, prod)
        acc = Jet(a.space, outdata)
        acc_sub = target
    if acc_sub != out:
        acc = Jet(acc.space, np.einsum(f"p{acc_sub}->p{out}", acc.data))
    return acc
