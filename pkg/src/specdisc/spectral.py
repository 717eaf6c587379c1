"""Finite-difference Dirichlet Schrödinger operators on boxes.

``-Delta_h + V`` on the interior nodes of a uniform grid, assembled as a
Kronecker sum of 1D second-difference matrices plus a diagonal.  The lowest
eigenvalues come from shift-invert Lanczos (``scipy.sparse.linalg.eigsh``).

Sampling ``V`` at nodes aliases potentials that oscillate below the grid
scale; ``sample="x1-average"`` replaces the node value by the mean over the
node's cell along the first axis (the direction in which the Cantor-type
potentials oscillate).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .geometry import Box

MAX_NODES = 1_000_000


@dataclass(frozen=True)
class DiscreteHamiltonian:
    box: Box
    n: tuple           # interior nodes per axis
    h: tuple           # spacing per axis
    matrix: sp.csr_matrix
    potential: np.ndarray   # diagonal part, C order over nodes

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def nodes(self) -> np.ndarray:
        return grid_nodes(self.box, self.n)


def grid_nodes(box: Box, n: Sequence[int]) -> np.ndarray:
    axes = [float(lo) + (np.arange(k) + 1) * (float(hi) - float(lo)) / (k + 1)
            for lo, hi, k in zip(box.lo, box.hi, n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def laplacian_1d(k: int, h: float) -> sp.csr_matrix:
    main = np.full(k, 2.0 / h ** 2)
    off = np.full(k - 1, -1.0 / h ** 2)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


def _sample(V, box: Box, n, sample: str, oversample: int) -> np.ndarray:
    pts = grid_nodes(box, n)
    fn = getattr(V, "evaluate", None) or V
    if not callable(fn):
        return np.full(pts.shape[0], float(V))
    if sample == "node":
        return np.asarray(fn(pts), dtype=float).reshape(-1)
    if sample != "x1-average":
        raise ValueError(f"unknown sampling {sample!r}")
    h1 = (float(box.hi[0]) - float(box.lo[0])) / (n[0] + 1)
    offs = ((np.arange(oversample) + 0.5) / oversample - 0.5) * h1
    acc = np.zeros(pts.shape[0])
    chunk = max(1, 2_000_000 // pts.shape[0])
    for s in range(0, oversample, chunk):
        o = offs[s:s + chunk]
        q = np.repeat(pts[None, :, :], o.size, axis=0)
        q[:, :, 0] += o[:, None]
        acc += np.asarray(fn(q.reshape(-1, pts.shape[1])), dtype=float).reshape(o.size, -1).sum(axis=0)
    return acc / oversample


def assemble(V, box: Box, n: int | Sequence[int], sample: str = "node",
             oversample: int = 243) -> DiscreteHamiltonian:
    """``-Delta_h + V`` with Dirichlet data on the faces of ``box`` and ``n`` interior nodes per axis."""
    d = box.dim
    n = tuple(int(v) for v in np.broadcast_to(np.asarray(n), (d,)))
    if min(n) < 1:
        raise ValueError("need at least one interior node per axis")
    if math.prod(n) > MAX_NODES:
        raise ValueError(f"grid exceeds {MAX_NODES} nodes")
    h = tuple((float(hi) - float(lo)) / (k + 1) for lo, hi, k in zip(box.lo, box.hi, n))
    eye = [sp.identity(k, format="csr") for k in n]
    L = None
    for ax in range(d):
        term = None
        for b in range(d):
            f = laplacian_1d(n[ax], h[ax]) if b == ax else eye[b]
            term = f if term is None else sp.kron(term, f, format="csr")
        L = term if L is None else L + term
    v = _sample(V, box, n, sample, oversample)
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ValueError("potential must be nonnegative and finite")
    H = (L + sp.diags(v)).tocsr()
    return DiscreteHamiltonian(box, n, h, H, v)


@dataclass(frozen=True)
class Eigenpairs:
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray


def lowest_eigenvalues(op: DiscreteHamiltonian, k: int = 1, tol: float = 1e-8) -> Eigenpairs:
    """``k`` lowest eigenvalues, ascending, with residual norms ``|H v - lam v|``."""
    H = op.matrix
    if k >= op.size:
        w, v = np.linalg.eigh(H.toarray())
        w, v = w[:k], v[:, :k]
    else:
        w, v = eigsh(H, k=k, sigma=0.0, which="LM", tol=1e-12)
        order = np.argsort(w)
        w, v = w[order], v[:, order]
    res = np.linalg.norm(H @ v - v * w, axis=0)
    scale = np.maximum(1.0, np.abs(w))
    if np.any(res > tol * scale * 1e4):
        raise RuntimeError("eigensolver did not converge")
    return Eigenpairs(w, v, res)


def rayleigh(op: DiscreteHamiltonian, v: np.ndarray) -> float:
    return float(v @ (op.matrix @ v) / (v @ v))


def window(center: Sequence[float], side: float) -> Box:
    return Box(tuple(float(c) - side / 2 for c in center), tuple(float(c) + side / 2 for c in center))


def bottom_trace(V, centers: Sequence[Sequence[float]], side: float, n: int = 24, k: int = 1,
                 sample: str = "node", oversample: int = 243) -> list[dict]:
    """Lowest ``k`` Dirichlet eigenvalues on cubes of side ``side`` around each center."""
    rows = []
    for i, c in enumerate(centers):
        op = assemble(V, window(c, side), n, sample, oversample)
        ev = lowest_eigenvalues(op, k)
        rows.append({"index": i, "center": [float(v) for v in c],
                     "eigenvalues": [float(v) for v in ev.values]})
    return rows


def diagonal_centers(ks: Sequence[int], d: int = 3) -> list[tuple]:
    """Centers ``(k, .., k)`` with ``|y|_inf = k``."""
    return [(float(k),) * d for k in ks]
