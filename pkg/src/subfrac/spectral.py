"""Discrete sub-Laplacian on a box with zero exterior values, and its functional calculus.

Small problems use a dense eigendecomposition; large ones apply f(A) to a
vector with a two-pass Lanczos iteration (only the tridiagonal coefficients
are stored between passes).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.sparse.linalg import cg

from .group import GridFunction, GroupSpec, Lattice, stencil_terms

DENSE_LIMIT = 8000


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Symmetrised matrix of -sum X_j^2 on the interior nodes of a lattice."""

    lattice: Lattice
    matrix: sp.csr_matrix
    interior: np.ndarray
    asymmetry: float

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def restrict(self, u) -> np.ndarray:
        vals = u.values if isinstance(u, GridFunction) else np.asarray(u, float)
        return vals[self.interior]

    def extend(self, vec) -> GridFunction:
        out = np.zeros(self.lattice.shape)
        out[self.interior] = vec
        return GridFunction(self.lattice, out)


def assemble_sublaplacian(g: GroupSpec, lattice: Lattice, rings: int = 1) -> DiscreteOperator:
    """Assemble L on the nodes at least ``rings`` away from the lattice boundary.

    Neighbours outside that set carry the value zero.  The raw matrix is
    replaced by (A + A^T)/2; the relative Frobenius norm of A - A^T is kept
    in ``asymmetry``.
    """
    if lattice.ndim != g.dim:
        raise ValueError("lattice dimension does not match group")
    interior = lattice.interior_mask(rings)
    n = int(interior.sum())
    if n == 0:
        raise ValueError("lattice has no interior nodes")
    number = -np.ones(lattice.shape, dtype=np.int64)
    number[interior] = np.arange(n)
    idx = np.argwhere(interior)
    rows, cols, vals = [], [], []
    shape = np.asarray(lattice.shape)
    for off, w in stencil_terms(g, lattice):
        tgt = idx + np.asarray(off)
        ok = np.all((tgt >= 0) & (tgt < shape), axis=1)
        tnum = np.full(idx.shape[0], -1)
        tnum[ok] = number[tuple(tgt[ok].T)]
        keep = tnum >= 0
        rows.append(number[tuple(idx[keep].T)])
        cols.append(tnum[keep])
        vals.append(np.asarray(w)[tuple(idx[keep].T)])
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    A.sum_duplicates()
    skew = A - A.T
    asym = float(sp.linalg.norm(skew) / max(sp.linalg.norm(A), 1e-300))
    A = ((A + A.T) * 0.5).tocsr()
    return DiscreteOperator(lattice, A, interior, asym)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    operator: DiscreteOperator
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def residual(self) -> float:
        A = self.operator.matrix
        V = self.eigenvectors
        R = A @ V - V * self.eigenvalues
        return float(np.max(np.linalg.norm(R, axis=0)))

    def gram_defect(self) -> float:
        V = self.eigenvectors
        return float(np.max(np.abs(V.T @ V - np.eye(V.shape[1]))))


def eigendecompose(op: DiscreteOperator, k: int | None = None) -> SpectralDecomposition:
    """Full dense decomposition up to DENSE_LIMIT unknowns, else the k lowest pairs."""
    n = op.size
    if n <= DENSE_LIMIT and k is None:
        lam, V = eigh(op.matrix.toarray())
    else:
        if k is None:
            raise ValueError(f"{n} unknowns exceed the dense limit; pass k for a partial spectrum")
        from scipy.sparse.linalg import ArpackNoConvergence, eigsh
        try:
            lam, V = eigsh(op.matrix, k=k, sigma=0.0, which="LM")
        except ArpackNoConvergence as exc:
            raise RuntimeError("Lanczos eigensolver did not converge") from exc
        order = np.argsort(lam)
        lam, V = lam[order], V[:, order]
    return SpectralDecomposition(op, lam, V)


def _coeffs(S: SpectralDecomposition, u) -> np.ndarray:
    return S.eigenvectors.T @ S.operator.restrict(u)


def spectral_apply(S: SpectralDecomposition, f, u) -> GridFunction:
    """sum_i f(lambda_i) <u, e_i> e_i as a grid function (zero off the interior)."""
    c = _coeffs(S, u)
    return S.operator.extend(S.eigenvectors @ (f(S.eigenvalues) * c))


def _power(lam, s):
    lam = np.maximum(lam, 0.0)
    if s == 0:
        return np.ones_like(lam)
    if s < 0 and np.any(lam <= 0):
        raise ValueError("negative power with a zero eigenvalue")
    return lam ** s


def apply_fractional_spectral(S: SpectralDecomposition, s: float, u) -> GridFunction:
    return spectral_apply(S, lambda lam: _power(lam, s), u)


def resolvent(S: SpectralDecomposition, eta: float, u) -> GridFunction:
    """(1 + eta L)^(-1) u."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    return spectral_apply(S, lambda lam: 1.0 / (1.0 + eta * lam), u)


def sobolev_norm(S: SpectralDecomposition, s: float, u) -> float:
    """Graph norm (|u|^2 + |L^(s/2) u|^2)^(1/2) with the cell-volume weighted l2 norm."""
    vol = S.operator.lattice.cell_volume
    c = _coeffs(S, u)
    base = np.sum(S.operator.restrict(u) ** 2)
    return math.sqrt(vol * (base + np.sum(_power(S.eigenvalues, s) * c * c)))


# ---------------------------------------------------------------------------
# large problems


def lanczos_apply(A, f, b: np.ndarray, tol: float = 1e-10, maxiter: int = 6000,
                  check_every: int = 25):
    """Approximate f(A) b for symmetric A by two-pass Lanczos.

    The first pass builds the tridiagonal matrix T_m and stops once the
    coefficients of f(T_m) e_1 stop changing (relative ``tol``); the second
    pass regenerates the basis and accumulates the result.  Returns
    ``(x, m)`` with the number of Lanczos steps used.
    """
    b = np.asarray(b, float)
    beta0 = np.linalg.norm(b)
    if beta0 == 0:
        return np.zeros_like(b), 0
    alphas, betas = [], []
    v_prev = np.zeros_like(b)
    v = b / beta0
    beta = 0.0
    prev = None
    m = 0
    for m in range(1, maxiter + 1):
        w = A @ v - beta * v_prev
        a = float(v @ w)
        w -= a * v
        alphas.append(a)
        beta = float(np.linalg.norm(w))
        if m % check_every == 0 or beta < 1e-14 * abs(a):
            lam, Z = eigh_tridiagonal(np.array(alphas), np.array(betas))
            y = Z @ (f(lam) * Z[0])
            if prev is not None:
                diff = np.linalg.norm(y[:prev.size] - prev) + np.linalg.norm(y[prev.size:])
                if diff <= tol * np.linalg.norm(y):
                    break
            prev = y
        if beta < 1e-14 * abs(a):
            break
        betas.append(beta)
        v_prev, v = v, w / beta
    else:
        raise RuntimeError("Lanczos did not converge")
    k = len(alphas)
    lam, Z = eigh_tridiagonal(np.array(alphas), np.array(betas[:k - 1]))
    y = beta0 * (Z @ (f(lam) * Z[0]))
    # second pass
    x = y[0] * (b / beta0)
    v_prev = np.zeros_like(b)
    v = b / beta0
    for j in range(k - 1):
        w = A @ v - (betas[j - 1] if j > 0 else 0.0) * v_prev - alphas[j] * v
        v_prev, v = v, w / betas[j]
        x += y[j + 1] * v
    return x, k


def apply_fractional_large(op: DiscreteOperator, s: float, u, tol: float = 1e-9) -> GridFunction:
    """L^s u for operators too large for a dense decomposition."""
    b = op.restrict(u)
    x, _ = lanczos_apply(op.matrix, lambda lam: _power(lam, s), b, tol=tol)
    return op.extend(x)


def resolvent_large(op: DiscreteOperator, eta: float, u, rtol: float = 1e-10) -> GridFunction:
    if not eta > 0:
        raise ValueError("eta must be positive")
    M = sp.identity(op.size, format="csr") + eta * op.matrix
    x, info = cg(M, op.restrict(u), rtol=rtol, maxiter=10 * op.size)
    if info != 0:
        raise RuntimeError("conjugate gradients did not converge")
    return op.extend(x)


def fractional_apply(g: GroupSpec, lattice: Lattice, s: float, u) -> GridFunction:
    """L^s u on the box: dense spectral path when small, Lanczos otherwise."""
    op = assemble_sublaplacian(g, lattice)
    if op.size <= 3000:
        return apply_fractional_spectral(eigendecompose(op), s, u)
    return apply_fractional_large(op, s, u)
