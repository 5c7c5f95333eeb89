"""Lattice representation: determinant normalization, LLL reduction,
fundamental-domain sampling, and the basis text format.

A Lattice stores a determinant-1 basis together with an LLL-reduced basis
of the same lattice, its Gramian, inverse, and a QR factorization used by
the enumeration decoder.  Lattices are immutable after construction and
safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateBasisError, InvalidArgumentError, ReductionError

DEFAULT_LLL_DELTA = 0.99
_MAX_LLL_SWAPS = 10**6


@dataclass(frozen=True)
class Basis:
    """A k x k real basis; column i is the i-th basis vector."""

    columns: np.ndarray

    def __post_init__(self):
        cols = np.ascontiguousarray(np.asarray(self.columns, dtype=float))
        if cols.ndim != 2 or cols.shape[0] != cols.shape[1]:
            raise InvalidArgumentError(f"basis must be square, got shape {cols.shape}")
        if not np.all(np.isfinite(cols)):
            raise InvalidArgumentError("basis entries must be finite")
        object.__setattr__(self, "columns", cols)
        norms = np.linalg.norm(cols, axis=0)
        if np.any(norms == 0.0):
            raise DegenerateBasisError("basis contains a zero column")
        # Linear-independence proxy, per dimension: the geometric mean of
        # |det| / prod(column norms) must exceed 1e-10.  (Skewed but valid
        # bases like the q-ary construction have huge orthogonality defect,
        # so the defect bound has to scale with k.)
        k = cols.shape[0]
        sign, logdet = np.linalg.slogdet(cols)
        if sign == 0 or logdet < k * math.log(1e-10) + np.sum(np.log(norms)):
            raise DegenerateBasisError("basis columns are (numerically) dependent")

    @property
    def k(self) -> int:
        return self.columns.shape[0]


def lll_reduce(basis: Basis, delta: float = DEFAULT_LLL_DELTA) -> Basis:
    """LLL-reduce a basis; the output generates the same lattice.

    Guarantees the Lovasz condition with parameter delta for every
    consecutive pair and size reduction |mu_ij| <= 1/2 + 1e-9.
    """
    if not 0.25 < delta < 1.0:
        raise InvalidArgumentError(f"delta must lie in (0.25, 1), got {delta}")
    cols = basis.columns.copy()
    swaps = _kernels.lll_kernel(cols, delta, _MAX_LLL_SWAPS)
    if swaps < 0:
        raise ReductionError(f"LLL did not terminate within {_MAX_LLL_SWAPS} swaps")
    out = Basis(cols)
    _check_lll(out, delta)
    _check_same_lattice(basis, out)
    return out


def _gso(cols: np.ndarray):
    k = cols.shape[1]
    bstar = np.zeros_like(cols)
    mu = np.zeros((k, k))
    normsq = np.zeros(k)
    _kernels.gram_schmidt(cols, bstar, mu, normsq)
    return bstar, mu, normsq


def _check_lll(basis: Basis, delta: float):
    _, mu, normsq = _gso(basis.columns)
    k = basis.k
    for i in range(1, k):
        for j in range(i):
            if abs(mu[i, j]) > 0.5 + 1e-6:
                raise ReductionError(f"size reduction violated: |mu[{i},{j}]| = {abs(mu[i, j]):.3g}")
        if normsq[i] < (delta - mu[i, i - 1] ** 2) * normsq[i - 1] - 1e-9 * normsq[i - 1]:
            raise ReductionError(f"Lovasz condition violated at index {i}")


def _check_same_lattice(original: Basis, reduced: Basis):
    """Verify original and reduced generate the same lattice.

    Solves in the reduced frame (the reduced basis is well conditioned
    even when the original is an extremely skewed q-ary basis): original
    columns must be integer combinations of reduced ones, and the
    covolumes must match, which pins the sublattice index to 1.
    """
    v = np.linalg.solve(reduced.columns, original.columns)
    v_int = np.rint(v)
    scale = max(1.0, float(np.max(np.abs(v_int))))
    if np.max(np.abs(v - v_int)) > max(1e-6, 1e-9 * scale):
        raise ReductionError("original basis is not an integer transform of the reduction")
    residual = np.max(np.abs(reduced.columns @ v_int - original.columns))
    if residual > 1e-6 * max(1.0, float(np.max(np.abs(original.columns)))):
        raise ReductionError("reduction transform does not reproduce the original basis")
    _, logdet_orig = np.linalg.slogdet(original.columns)
    _, logdet_red = np.linalg.slogdet(reduced.columns)
    # The index |det V| is a positive integer; 1e-3 log slack separates 1 from 2.
    if abs(logdet_orig - logdet_red) > 1e-3:
        raise ReductionError("reduction changed the covolume (transform not unimodular)")


class Lattice:
    """An immutable determinant-1 lattice with cached reduction data."""

    def __init__(self, basis: Basis, reduced_basis: Basis | None = None):
        sign, logdet = np.linalg.slogdet(basis.columns)
        if sign == 0 or abs(logdet) > 1e-9:
            raise InvalidArgumentError(
                f"Lattice requires |det| = 1 (log|det| = {logdet:.3g}); use normalize_det"
            )
        self.basis = basis
        self.reduced_basis = reduced_basis if reduced_basis is not None else lll_reduce(basis)
        if reduced_basis is not None:
            _check_same_lattice(basis, reduced_basis)
        self.gram = self.reduced_basis.columns.T @ self.reduced_basis.columns
        self.inv_reduced = np.linalg.inv(self.reduced_basis.columns)
        q, r = np.linalg.qr(self.reduced_basis.columns)
        # Fix signs so R has a positive diagonal (enumeration kernels assume it).
        flip = np.sign(np.diag(r))
        flip[flip == 0] = 1.0
        self.qmat = q * flip
        self.rmat = np.ascontiguousarray(flip[:, None] * r)

    @property
    def k(self) -> int:
        return self.basis.k

    def to_qframe(self, targets: np.ndarray) -> np.ndarray:
        """Map targets (…, k) into the QR frame used by enumeration."""
        return np.ascontiguousarray(np.asarray(targets, dtype=float) @ self.qmat)

    def __repr__(self):
        return f"Lattice(k={self.k})"


def normalize_det(basis: Basis) -> Lattice:
    """Scale a basis to |det| = 1 and build the Lattice around it.

    Scaling is skipped when |det| is already 1 to machine precision, so
    loading an already-normalized basis is bit-stable.
    """
    sign, logdet = np.linalg.slogdet(basis.columns)
    if sign == 0 or logdet < math.log(1e-30):
        raise DegenerateBasisError("basis is singular or nearly singular (|det| < 1e-30)")
    if abs(logdet) < 1e-12:
        scaled = basis
    else:
        scaled = Basis(basis.columns * math.exp(-logdet / basis.k))
    return Lattice(scaled)


def sample_fundamental(lattice: Lattice, rng: np.random.Generator) -> np.ndarray:
    """Uniform point in the fundamental parallelepiped {B u : u in [0,1)^k}.

    Uniform over cosets of R^k / L, hence usable for Voronoi-cell sampling
    after recentering by the closest lattice vector.
    """
    return lattice.basis.columns @ rng.random(lattice.k)


# ---------------------------------------------------------------------------
# Structured bases

def basis_zk(k: int) -> Basis:
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    return Basis(np.eye(k))


def basis_dk(k: int) -> Basis:
    """Checkerboard lattice D_k = {x in Z^k : sum(x) even}; |det| = 2."""
    if k < 2:
        raise InvalidArgumentError(f"D_k requires k >= 2, got {k}")
    cols = np.zeros((k, k))
    cols[0, 0] = -1.0
    cols[1, 0] = -1.0
    for i in range(1, k):
        cols[i - 1, i] = 1.0
        cols[i, i] = -1.0
    return Basis(cols)


def basis_e8() -> Basis:
    """The standard E8 basis (D8 plus the all-halves glue vector); det = 1."""
    cols = np.array(
        [
            [2, -1, 0, 0, 0, 0, 0, 0.5],
            [0, 1, -1, 0, 0, 0, 0, 0.5],
            [0, 0, 1, -1, 0, 0, 0, 0.5],
            [0, 0, 0, 1, -1, 0, 0, 0.5],
            [0, 0, 0, 0, 1, -1, 0, 0.5],
            [0, 0, 0, 0, 0, 1, -1, 0.5],
            [0, 0, 0, 0, 0, 0, 1, 0.5],
            [0, 0, 0, 0, 0, 0, 0, 0.5],
        ]
    )
    return Basis(cols)


def lattice_zk(k: int) -> Lattice:
    return Lattice(basis_zk(k), reduced_basis=basis_zk(k))


def lattice_dk(k: int) -> Lattice:
    return normalize_det(basis_dk(k))


def lattice_e8() -> Lattice:
    return normalize_det(basis_e8())


# ---------------------------------------------------------------------------
# Basis text format: line 1 is k, then k rows of k reals (row i of the
# basis matrix, i.e. coordinate i across all columns), 17 significant
# digits for exact round-trips.

def save_basis(basis: Basis, path):
    lines = [str(basis.k)]
    for row in basis.columns:
        lines.append(" ".join(f"{x:.17g}" for x in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_basis(path) -> Basis:
    with open(path) as fh:
        tokens = fh.read().split("\n")
    rows = [line for line in tokens if line.strip()]
    if not rows:
        raise InvalidArgumentError(f"{path}: empty basis file")
    try:
        k = int(rows[0])
    except ValueError as exc:
        raise InvalidArgumentError(f"{path}: first line must be the dimension") from exc
    if len(rows) < k + 1:
        raise InvalidArgumentError(f"{path}: expected {k} basis rows, found {len(rows) - 1}")
    mat = np.empty((k, k))
    for i in range(k):
        parts = rows[1 + i].split()
        if len(parts) != k:
            raise InvalidArgumentError(f"{path}: row {i} has {len(parts)} entries, expected {k}")
        mat[i] = [float(tok) for tok in parts]
    return Basis(mat)


def load_lattice(path) -> Lattice:
    """Load a basis file and normalize it to a determinant-1 Lattice."""
    return normalize_det(load_basis(path))
