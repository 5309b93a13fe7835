"""Discrete group convolution on lattices and cell integration of kernels.

The discrete convolution computed here is

    (u * K)(x) = sum_w u(x . w^-1) Kc(w),

where ``w`` runs over lattice offsets and ``Kc(w)`` is the integral of the
kernel over the cell centred at ``w``.  On abelian groups this is an ordinary
discrete convolution (done with FFTs).  On step-two groups the upper
coordinates of ``x . w^-1`` pick up a shift that is bilinear in the horizontal
parts of ``x`` and ``y = x . w^-1``; those coordinates are handled in Fourier
space, which amounts to trigonometric interpolation of ``u`` along them, and
the horizontal sum becomes a twisted convolution computed as a batch of small
Toeplitz products.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import fft as sfft
from scipy.signal import fftconvolve

from .group import GroupSpec, Lattice
from .quad import tensor_gauss

# ---------------------------------------------------------------------------
# axis bookkeeping


def twisted_axes(g: GroupSpec):
    """(loop axes, fft axes): horizontal axes entering a bracket, and the rest."""
    loop = [i for i in range(g.dim) if np.any(g.bracket[:, i, :])]
    rest = [i for i in range(g.dim) if i not in loop]
    return loop, rest


def max_shift(g: GroupSpec, lattice: Lattice) -> np.ndarray:
    """Largest |1/2 sum B[k,i,j] x_i y_j| over lattice pairs, per coordinate."""
    lo = np.asarray(lattice.origin) - lattice.h * np.asarray(lattice.extent)
    hi = np.asarray(lattice.origin) + lattice.h * np.asarray(lattice.extent)
    amax = np.maximum(np.abs(lo), np.abs(hi))
    return 0.5 * np.einsum("kij,i,j->k", np.abs(g.bracket), amax, amax)


def kernel_extent(g: GroupSpec, lattice: Lattice) -> tuple:
    """Offset half-widths (in cells) that make the convolution exact on the lattice."""
    s = max_shift(g, lattice)
    ext = []
    for ax in range(g.dim):
        e = 2 * lattice.extent[ax] + int(math.ceil(s[ax] / lattice.spacing[ax] - 1e-9))
        ext.append(e)
    return tuple(ext)


def offset_lattice(lattice: Lattice, extent) -> Lattice:
    return Lattice(lattice.spacing, tuple(int(e) for e in extent))


# ---------------------------------------------------------------------------
# convolution


def group_convolve(g: GroupSpec, lattice: Lattice, u: np.ndarray, kc: np.ndarray,
                   out_slices=None) -> np.ndarray:
    """``sum_w u(x . w^-1) kc(w)`` at every node ``x`` of ``lattice``.

    ``kc`` lives on a centred offset lattice with the same spacing and odd
    shape.  ``out_slices`` optionally restricts the output along the
    bracket-carrying (loop) axes; entries outside are returned as NaN.
    """
    u = np.asarray(u, float)
    kc = np.asarray(kc, float)
    if u.shape != lattice.shape or kc.ndim != u.ndim:
        raise ValueError("array shapes do not match the lattice")
    if any(s % 2 == 0 for s in kc.shape):
        raise ValueError("kernel array must have odd shape (centred offsets)")
    if g.is_abelian:
        return _abelian_convolve(u, kc)
    return _twisted_convolve(g, lattice, u, kc, out_slices)


def _abelian_convolve(u, kc):
    full = fftconvolve(u, kc, mode="full")
    sl = tuple(slice(k // 2, k // 2 + n) for k, n in zip(kc.shape, u.shape))
    return full[sl]


def _twisted_convolve(g, lattice, u, kc, out_slices, chunk=24):
    loop, rest = twisted_axes(g)
    if len(loop) != 2:
        raise NotImplementedError("twisted convolution needs exactly two bracket axes")
    i0, i1 = loop
    vert = [k for k in range(g.dim) if g.bracket[k, i0, i1] != 0]
    n = u.shape
    kext = [s // 2 for s in kc.shape]
    s = max_shift(g, lattice)
    # periods: long enough that shifted columns never wrap onto the support
    M = []
    for ax in rest:
        need = n[ax] + kext[ax] + int(math.ceil(s[ax] / lattice.spacing[ax])) + 2
        m = sfft.next_fast_len(need)
        M.append(m + 1 if m % 2 == 0 else m)
    # move loop axes first
    perm = [i0, i1] + rest
    ut = np.transpose(u, perm)
    kt = np.transpose(kc, perm)
    faxes = tuple(range(2, 2 + len(rest)))
    uh = sfft.rfftn(ut, s=M, axes=faxes, workers=-1)
    kpad = np.zeros(kt.shape[:2] + tuple(M))
    # place offset m at index m mod M along each Fourier axis
    idx = [slice(None), slice(None)]
    for j, ax in enumerate(rest):
        e = kext[ax]
        src = np.arange(-e, e + 1) % M[j]
        idx.append(src)
    kpad[np.ix_(np.arange(kt.shape[0]), np.arange(kt.shape[1]), *idx[2:])] = kt
    kh = sfft.rfftn(kpad, axes=faxes, workers=-1)
    fshape = uh.shape[2:]
    F = int(np.prod(fshape))
    uh = uh.reshape(n[i0], n[i1], F)
    kh = kh.reshape(kt.shape[0], kt.shape[1], F)

    # angular frequencies of the vertical axes, flattened like the transforms
    grids = []
    for j, ax in enumerate(rest):
        f = sfft.rfftfreq(M[j]) if j == len(rest) - 1 else sfft.fftfreq(M[j])
        grids.append(2 * np.pi * f / lattice.spacing[ax])
    mesh = np.meshgrid(*grids, indexing="ij")
    # phase exp(i sum_k xi_k c_k x0 y1 - i sum_k xi_k c_k x1 y0), c_k = B[k,i0,i1] / 2
    coef = np.zeros(F)
    for j, ax in enumerate(rest):
        if ax in vert:
            coef += 0.5 * g.bracket[ax, i0, i1] * mesh[j].ravel()
    ax0 = lattice.axes()[i0]
    ax1 = lattice.axes()[i1]

    o0 = np.arange(n[i0]) if out_slices is None else np.arange(n[i0])[out_slices[0]]
    o1 = np.arange(n[i1]) if out_slices is None else np.arange(n[i1])[out_slices[1]]
    c0, c1 = kext[i0], kext[i1]
    # inner sum over y1 is a linear convolution along the second loop axis
    L1 = sfft.next_fast_len(n[i1] + 2 * c1)
    dsel = o0[:, None] - np.arange(n[i0])[None, :] + c0      # (x0, y0) -> offset index
    out_h = np.zeros((F, o0.size, o1.size), complex)
    for f0 in range(0, F, chunk):
        fs = slice(f0, min(F, f0 + chunk))
        cf = coef[fs]
        A = np.exp(1j * cf[:, None, None] * ax0[o0][None, :, None] * ax1[None, None, :])
        Bph = np.exp(-1j * cf[:, None, None] * ax0[None, :, None] * ax1[o1][None, None, :])
        ub = np.moveaxis(uh[:, :, fs], -1, 0)                 # (f, y0, y1)
        kb = np.moveaxis(kh[:, :, fs], -1, 0)                 # (f, w0, w1)
        kf = sfft.fft(kb, n=L1, axis=-1, workers=-1)          # (f, w0, L1)
        V = ub[:, None, :, :] * A[:, :, None, :]              # (f, x0, y0, y1)
        Vf = sfft.fft(V, n=L1, axis=-1, workers=-1)
        Vf *= kf[:, dsel, :]
        G = sfft.ifft(Vf, axis=-1, workers=-1)[..., c1 + o1]  # (f, x0, y0, x1)
        out_h[fs] = np.einsum("fabx,fbx->fax", G, Bph)
    out_h = np.moveaxis(out_h, 0, -1).reshape((o0.size, o1.size) + fshape)
    full = sfft.irfftn(out_h, s=M, axes=faxes, workers=-1)
    sl = (slice(None), slice(None)) + tuple(slice(0, n[ax]) for ax in rest)
    res_t = np.full((n[i0], n[i1]) + tuple(n[ax] for ax in rest), np.nan)
    res_t[np.ix_(o0, o1)] = full[sl]
    inv = np.argsort(perm)
    return np.transpose(res_t, inv)


def direct_convolve(g: GroupSpec, lattice: Lattice, u: np.ndarray, kernel, targets,
                    interp_axis_order: int = 3) -> np.ndarray:
    """Reference sum_y u(y) K(y^-1 x) vol at ``targets`` (N, dim) by brute force."""
    from .group import inverse, mult
    pts = lattice.points().reshape(-1, g.dim)
    uv = u.ravel()
    keep = uv != 0
    pts, uv = pts[keep], uv[keep]
    out = np.empty(len(targets))
    for i, x in enumerate(np.asarray(targets, float)):
        w = mult(g, inverse(g, pts), x)
        out[i] = np.sum(uv * kernel(w)) * lattice.cell_volume
    return out


# ---------------------------------------------------------------------------
# cell integrals


def box_integrals(fn, lo, hi, q: int = 4, rtol: float = 1e-7, atol: float = 0.0,
                  depth: int = 14) -> np.ndarray:
    """Adaptive tensor Gauss integrals of ``fn`` over many boxes at once.

    ``lo`` and ``hi`` have shape (B, d).  Refinement is breadth first: every
    box whose q-point rule disagrees with the sum over its 2^d children is
    replaced by the children, and all rule evaluations of one level go
    through ``fn`` in a single call.
    """
    lo = np.atleast_2d(np.asarray(lo, float))
    hi = np.atleast_2d(np.asarray(hi, float))
    nb, nd = lo.shape
    ref, w = tensor_gauss([0.0] * nd, [1.0] * nd, q)
    bits = np.array(list(np.ndindex(*(2,) * nd)), dtype=float)

    def rules(a, b):
        span = b - a
        pts = a[:, None, :] + span[:, None, :] * ref[None, :, :]
        vals = fn(pts.reshape(-1, nd)).reshape(a.shape[0], -1)
        return vals @ w * np.prod(span, axis=1)

    def split(a, b):
        mid = 0.5 * (a + b)
        ca = np.where(bits[None], mid[:, None], a[:, None]).reshape(-1, nd)
        cb = np.where(bits[None], b[:, None], mid[:, None]).reshape(-1, nd)
        return ca, cb

    total = np.zeros(nb)
    owner = np.arange(nb)
    a, b = lo, hi
    coarse = rules(a, b)
    tol_abs = np.full(nb, atol)
    for level in range(depth + 1):
        ca, cb = split(a, b)
        kids = rules(ca, cb).reshape(a.shape[0], -1)
        fine = kids.sum(axis=1)
        done = np.abs(fine - coarse) <= np.maximum(rtol * np.abs(fine), tol_abs[owner])
        if level == depth:
            done[:] = True
        np.add.at(total, owner[done], fine[done])
        keep = ~done
        if not np.any(keep):
            break
        nk = 2 ** nd
        sel = np.repeat(keep, nk)
        a, b = ca[sel], cb[sel]
        coarse = kids[keep].ravel()
        owner = np.repeat(owner[keep], nk)
    return total


def box_integral(fn, lo, hi, q: int = 4, rtol: float = 1e-7, atol: float = 0.0,
                 depth: int = 14) -> float:
    """Adaptive tensor Gauss integral of ``fn`` over the box [lo, hi]."""
    return float(box_integrals(fn, [lo], [hi], q, rtol, atol, depth)[0])


def origin_box_integral(fn, half, d, degree: float, q: int = 6, rtol: float = 1e-8) -> float:
    """Integral over the box |x_i| <= half_i of a kernel homogeneous of ``degree``.

    The box family is invariant under the dilations with exponents ``d``, so
    with gamma = degree + sum(d) > 0 the integral equals the integral over the
    shell ``box minus delta_(1/2) box`` divided by 1 - 2^-gamma.
    """
    half = np.asarray(half, float)
    d = np.asarray(d, float)
    gamma = degree + d.sum()
    if gamma <= 0:
        raise ValueError("kernel is not integrable at the origin")
    inner = half * 0.5 ** d
    cuts = [np.array([-h, -i, i, h]) for h, i in zip(half, inner)]
    a, b = _shell_boxes(cuts)
    total = box_integrals(fn, a, b, q=q, rtol=rtol).sum()
    return total / (1.0 - 2.0 ** (-gamma))


def exterior_box_integral(fn, half, d, degree: float, q: int = 6, rtol: float = 1e-8) -> float:
    """Integral outside the box |x_i| <= half_i of a kernel homogeneous of ``degree``.

    Needs gamma = degree + sum(d) < 0; uses the shell ``delta_2 box minus box``.
    """
    half = np.asarray(half, float)
    d = np.asarray(d, float)
    gamma = degree + d.sum()
    if gamma >= 0:
        raise ValueError("kernel is not integrable at infinity")
    outer = half * 2.0 ** d
    cuts = [np.array([-o, -h, h, o]) for h, o in zip(half, outer)]
    a, b = _shell_boxes(cuts)
    total = box_integrals(fn, a, b, q=q, rtol=rtol).sum()
    return total / (1.0 - 2.0 ** gamma)


def _shell_boxes(cuts):
    """The 3^d - 1 boxes of a tensor grid of cuts minus the central one."""
    los, his = [], []
    for idx in np.ndindex(*(3,) * len(cuts)):
        if all(k == 1 for k in idx):
            continue
        los.append([c[k] for c, k in zip(cuts, idx)])
        his.append([c[k + 1] for c, k in zip(cuts, idx)])
    return np.array(los), np.array(his)


def cell_weights(lattice: Lattice, extent, fn, near: int = 2, q: int = 4,
                 rtol: float = 1e-7, origin=None) -> np.ndarray:
    """Cell integrals of ``fn`` over the offset lattice of half-widths ``extent``.

    Cells with every index within ``near`` (an int or one per axis) of the origin are integrated
    adaptively; the rest use the midpoint rule.  ``origin`` may supply the
    origin-cell integral directly (e.g. for homogeneous singular kernels).
    """
    off = offset_lattice(lattice, extent)
    pts = off.points()
    vol = lattice.cell_volume
    out = np.empty(off.shape)
    flat = pts.reshape(-1, lattice.ndim)
    step = 200_000
    vals = np.empty(flat.shape[0])
    centre = np.all(np.abs(flat) < 0.5 * lattice.h, axis=1)
    for i in range(0, flat.shape[0], step):
        sl = slice(i, i + step)
        block = flat[sl]
        vb = np.zeros(block.shape[0])
        ok = ~centre[sl]
        if np.any(ok):
            vb[ok] = fn(block[ok])
        vals[sl] = vb * vol
    out[...] = vals.reshape(off.shape)
    h = lattice.h
    ext = np.asarray(extent)
    near = np.broadcast_to(np.asarray(near, int), ext.shape)
    rng = [np.arange(-min(nr, e), min(nr, e) + 1) for nr, e in zip(near, ext)]
    ks = np.stack(np.meshgrid(*rng, indexing="ij"), axis=-1).reshape(-1, lattice.ndim)
    if origin is not None:
        ks = ks[np.any(ks != 0, axis=1)]
        out[tuple(ext)] = origin
    if ks.shape[0]:
        c = ks * h
        vals = box_integrals(fn, c - 0.5 * h, c + 0.5 * h, q=q, rtol=rtol, atol=1e-14 * vol)
        out[tuple((ks + ext).T)] = vals
    return out


def resolved(g: GroupSpec, lattice: Lattice, scale: float, factor: float = 1.5) -> bool:
    """True when a kernel of dilation scale ``scale`` spans ``factor`` cells on every axis."""
    return bool(np.all(scale ** g.d >= factor * lattice.h))


def scaled_kernel_cells(g: GroupSpec, lattice: Lattice, extent, fn, scale: float) -> np.ndarray:
    """Cell weights of a smooth kernel concentrated at dilation scale ``scale``.

    Resolved kernels are point-sampled (trapezoid sums of smooth products
    converge spectrally); otherwise cells within a few kernel widths of the
    origin, counted per axis, are integrated adaptively.
    """
    if resolved(g, lattice, scale):
        return cell_weights(lattice, extent, fn, near=0)
    h = lattice.h
    near = np.clip(np.ceil(3 * scale ** g.d / h), 1, 12).astype(int)
    return cell_weights(lattice, extent, fn, near=near, q=4)
