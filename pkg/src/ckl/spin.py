"""Two-component spinor conventions.

Fixed numeric soldering constants tie frame indices to spinor index pairs:
``v^{AA'} = v^i SIG[i]``.  The symplectic form has eps_{01} = 1; indices are
raised as ``mu^A = eps^{AB} mu_B`` and lowered as ``mu_A = mu^B eps_{BA}``.

Riemannian signature uses the quaternionic soldering ``(I, i s1, i s2, i s3)/sqrt2``
(s_k the Pauli matrices) and the antilinear involution ``mu_A -> HL conj(mu)_A``
which squares to -1 on odd valence; split signature uses the split-quaternion
set and plain complex conjugation.  Real tensors correspond exactly to
involution-invariant spinor objects, which the tests verify for every
soldering constant.

All stored spinor objects carry lower indices; an object's index layout is
described by a spec string over ``u`` (unprimed), ``p`` (primed) and ``f``
(frame), e.g. ``"uupp"`` for phi_{ABA'B'}.
"""

from __future__ import annotations

import numpy as np

from .dsl import RIEMANNIAN, SPLIT, signature_eta
from .jets import Jet, jcontract

EPS = np.array([[0.0, 1.0], [-1.0, 0.0]])  # eps_{AB} = eps^{AB}, eps_{01} = 1

_PAULI = [
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]

_HL = np.array([[0.0, -1.0], [1.0, 0.0]])  # involution matrix on lower spinor indices


def _lower_both(m):
    # (sigma_a)_{AA'} = sigma_a^{BB'} eps_{BA} eps_{B'A'}
    return np.einsum("BC,BD,DE->CE", EPS, m, EPS)


class SpinConvention:
    """Soldering constants, involution tables and fixed real bases."""

    def __init__(self, signature):
        self.signature = signature
        self.eta = signature_eta(signature)
        rt2 = np.sqrt(2.0)
        if signature == RIEMANNIAN:
            self.sig_up = np.stack(
                [np.eye(2, dtype=complex) / rt2]
                + [1j * p / rt2 for p in _PAULI]
            )
            self.hat_matrix = _HL.astype(complex)
            self.hat_sign_odd = -1.0
        elif signature == SPLIT:
            self.sig_up = np.stack(
                [
                    np.eye(2, dtype=complex) / rt2,
                    np.array([[0, 1], [-1, 0]], dtype=complex) / rt2,
                    np.array([[0, 1], [1, 0]], dtype=complex) / rt2,
                    np.array([[1, 0], [0, -1]], dtype=complex) / rt2,
                ]
            )
            self.hat_matrix = np.eye(2, dtype=complex)
            self.hat_sign_odd = 1.0
        else:
            raise ValueError(signature)
        self.sig_dn = np.stack([_lower_both(m) for m in self.sig_up])
        # lower frame index -> lower spinor pair: u_{AA'} = u_i LS[i]
        self.low2spin = np.einsum("ai,aAB->iAB", self.eta, self.sig_dn)
        # inverse map: lower spinor pair -> lower frame index
        flat = self.low2spin.reshape(4, 4)
        self.spin2low = np.linalg.inv(flat).reshape(2, 2, 4)

        self.basis_sd = _real_sym2_basis(self)  # omega_{A'B'} slice, |E|^2 = 2
        self.basis_asd = self.basis_sd.copy()  # same numeric arrays for rho_{AB}
        self.basis_sym4 = _real_symk_basis(self, 4)
        self.basis_cond4 = _real_cond4_basis(self)

    # -- involution -------------------------------------------------------------

    def hat(self, arr, spec):
        """Antilinear involution on an array of lower-index spinor components.

        spec marks each axis 'u'/'p' (frame axes 'f' are left alone, taking the
        components real).  Works on plain ndarrays.
        """
        out = np.conj(np.asarray(arr, dtype=complex))
        h = self.hat_matrix
        for ax, kind in enumerate(spec):
            if kind in ("u", "p"):
                out = np.tensordot(h, out, axes=(1, ax))
                out = np.moveaxis(out, 0, ax)
            elif kind != "f":
                raise ValueError(f"bad index spec {spec!r}")
        return out

    def reality_defect(self, arr, spec):
        """Norm of (object - hat(object)); zero iff real in this signature."""
        n_spin = sum(1 for c in spec if c in "up")
        if self.signature == RIEMANNIAN and n_spin % 2 == 1:
            raise ValueError("odd-valence spinors have no real form in riemannian signature")
        arr = np.asarray(arr, dtype=complex)
        return float(np.linalg.norm(arr - self.hat(arr, spec)))

    # -- frame <-> spinor ---------------------------------------------------------

    def vector_to_spinor(self, v_up):
        """v^{AA'} from upper-frame components (ndarray or Jet on last axis)."""
        if isinstance(v_up, Jet):
            return jcontract("i,iAB->AB", v_up, self.sig_up)
        return np.einsum("i,iAB->AB", v_up, self.sig_up)

    def covector_to_spinor(self, u_dn):
        if isinstance(u_dn, Jet):
            return jcontract("i,iAB->AB", u_dn, self.low2spin)
        return np.einsum("i,iAB->AB", u_dn, self.low2spin)

    def spinor_to_covector(self, u_sp):
        if isinstance(u_sp, Jet):
            return jcontract("AB,ABi->i", u_sp, self.spin2low)
        return np.einsum("AB,ABi->i", u_sp, self.spin2low)


_CONVENTIONS = {}


def convention(signature):
    if signature not in _CONVENTIONS:
        _CONVENTIONS[signature] = SpinConvention(signature)
    return _CONVENTIONS[signature]


# --------------------------------------------------------------------------
# Fixed real bases


def _real_slice(apply_hat, dim_complex):
    """Real points of an antilinear involution on C^dim, via its real form."""
    # real-linear action on (Re, Im) stacked coordinates
    n = dim_complex
    mat = np.zeros((2 * n, 2 * n))
    for k in range(n):
        z = np.zeros(n, dtype=complex)
        z[k] = 1.0
        w = apply_hat(z)
        mat[:n, k] = w.real
        mat[n:, k] = w.imag
        w = apply_hat(1j * z)
        mat[:n, n + k] = w.real
        mat[n:, n + k] = w.imag
    u, s, vt = np.linalg.svd(mat - np.eye(2 * n))
    null = vt[s < 1e-10].conj()
    vecs = [null[k, :n] + 1j * null[k, n:] for k in range(null.shape[0])]
    return vecs


def _sym_indices(k):
    idx = []
    for m in range(k + 1):  # number of 1s
        idx.append(tuple([1] * m + [0] * (k - m)))
    return idx


def _symmetrize(arr, axes):
    from itertools import permutations

    perms = list(permutations(axes))
    out = np.zeros_like(arr)
    for p in perms:
        order = list(range(arr.ndim))
        for src, dst in zip(axes, p):
            order[dst] = src
        out = out + np.transpose(arr, order)
    return out / len(perms)


def _real_sym2_basis(conv):
    """Orthogonal basis of involution-real symmetric 2-index spinors, |E|^2 = 2."""
    if conv.signature == SPLIT:
        e1 = np.array([[1, 0], [0, 1]], dtype=complex)
        e2 = np.array([[1, 0], [0, -1]], dtype=complex)
        e3 = np.array([[0, 1], [1, 0]], dtype=complex)
        return np.stack([e1, e2, e3])
    e1 = np.array([[1, 0], [0, 1]], dtype=complex)
    e2 = np.array([[1j, 0], [0, -1j]], dtype=complex)
    e3 = np.array([[0, 1j], [1j, 0]], dtype=complex)
    return np.stack([e1, e2, e3])


def sym_bilinear(a, b):
    """Full eps-contraction a_{A..} b^{A..} of two equal-valence spinors."""
    a = np.asarray(a)
    b = np.asarray(b)
    k = a.ndim
    bu = b
    for ax in range(k):
        bu = np.tensordot(EPS, bu, axes=(1, ax))
        bu = np.moveaxis(bu, 0, ax)
    return np.tensordot(a, bu, axes=(list(range(k)), list(range(k))))


def _real_symk_basis(conv, k):
    """Orthonormal real basis of involution-real symmetric valence-k spinors
    (orthonormal for the hermitian component inner product)."""
    shape = (2,) * k
    spec = "u" * k

    def embed(coeffs):
        arr = np.zeros(shape, dtype=complex)
        for c, idx in zip(coeffs, _sym_indices(k)):
            arr[idx] = c
        return _symmetrize_full(arr)

    def flatten(arr):
        return np.array([arr[idx] for idx in _sym_indices(k)])

    def apply_hat(z):
        return flatten(conv.hat(embed(z), spec))

    vecs = _real_slice(apply_hat, k + 1)
    basis = [embed(v) for v in vecs]
    return np.stack(_orthonormalize(basis))


def _symmetrize_full(arr):
    # symmetrize over all axes, weighting stored entries by multiplicity
    from itertools import permutations

    k = arr.ndim
    out = np.zeros_like(arr)
    seen = {}
    for idx in np.ndindex(*arr.shape):
        key = tuple(sorted(idx))
        if key not in seen:
            seen[key] = arr[key if key in seen else idx]  # representative
    # direct approach: value at sorted representative copied everywhere
    rep = {}
    for idx in np.ndindex(*arr.shape):
        key = tuple(sorted(idx))
        if key not in rep:
            rep[key] = arr[key] if False else None
    for idx in np.ndindex(*arr.shape):
        out[idx] = arr[tuple(sorted(idx, reverse=True))]
    _ = permutations, seen, rep, k
    return out


def _orthonormalize(arrs):
    out = []
    for a in arrs:
        v = a.copy()
        for b in out:
            v = v - np.vdot(b, v) * b
        n = np.sqrt(np.vdot(v, v).real)
        if n < 1e-12:
            continue
        v = v / n
        # deterministic sign: first nonzero entry has positive real part (or +imag)
        flatv = v.ravel()
        k = np.argmax(np.abs(flatv) > 1e-9)
        lead = flatv[k]
        phase = lead / abs(lead)
        if abs(phase.imag) < 1e-9 or True:
            v = v * np.conj(phase) if abs(phase.real) < 0.999 or phase.real < 0 else v
        out.append(v)
    return out


def _real_cond4_basis(conv):
    """Orthonormal real basis for involution-real spinors H_{(ABCDF)F'}
    (symmetric valence 5 unprimed, one primed index): 12 real dimensions."""
    sym5 = _sym_indices(5)
    dim = len(sym5) * 2  # 6 symmetric slots x primed index

    def embed(coeffs):
        arr = np.zeros((2,) * 6, dtype=complex)
        for n, idx in enumerate(sym5):
            for fp in range(2):
                arr[idx + (fp,)] = coeffs[2 * n + fp]
        out = np.zeros_like(arr)
        # symmetrize the first five axes by sorted-representative copy
        for idx in np.ndindex(*(2,) * 6):
            out[idx] = arr[tuple(sorted(idx[:5], reverse=True)) + (idx[5],)]
        return out

    def flatten(arr):
        return np.array([arr[idx + (fp,)] for idx in sym5 for fp in range(2)])

    def apply_hat(z):
        return flatten(conv.hat(embed(z), "uuuuup"))

    vecs = _real_slice(apply_hat, dim)
    basis = [embed(v) for v in vecs]
    return np.stack(_orthonormalize(basis))


# --------------------------------------------------------------------------
# Index helpers shared by the curvature and detector modules


def raise_index(arr, axis):
    """mu^A = eps^{AB} mu_B on the given axis (ndarray or Jet)."""
    if isinstance(arr, Jet):
        data = np.tensordot(EPS, arr.data, axes=(1, axis + 1))
        data = np.moveaxis(data, 0, axis + 1)
        return Jet(arr.space, data)
    out = np.tensordot(EPS, arr, axes=(1, axis))
    return np.moveaxis(out, 0, axis)


def lower_index(arr, axis):
    """mu_A = mu^B eps_{BA} on the given axis."""
    if isinstance(arr, Jet):
        data = np.tensordot(EPS, arr.data, axes=(0, axis + 1))
        data = np.moveaxis(data, 0, axis + 1)
        return Jet(arr.space, data)
    out = np.tensordot(EPS, arr, axes=(0, axis))
    return np.moveaxis(out, 0, axis)


def symmetrize(arr, axes):
    """Symmetrize an ndarray or Jet over the listed tensor axes."""
    if isinstance(arr, Jet):
        return Jet(arr.space, _symmetrize(arr.data, [a + 1 for a in axes]))
    return _symmetrize(np.asarray(arr), list(axes))


def hermitian_norm(arr):
    a = arr.data if isinstance(arr, Jet) else np.asarray(arr)
    if isinstance(arr, Jet):
        a = arr.value
    return float(np.sqrt(np.vdot(a, a).real))
