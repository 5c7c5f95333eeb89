"""Closest-vector computation.

Fast exact decoders for the structured lattices (Z^k, the checkerboard
lattice D_k, and E8), exact Schnorr-Euchner enumeration for arbitrary
lattices, and a brute-force oracle for tests.  Every decoder returns
integer coefficient vectors so hash keys have exact equality semantics.

Coefficients are expressed in the decoder's reference basis: the reduced
basis for enumeration/brute decoders, the canonical structured basis for
Z^k / D_k / E8.  The ``vector`` and ``dist`` fields are always in ambient
coordinates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import BudgetExceededError, InvalidArgumentError
from .lattice import Basis, Lattice, basis_dk, basis_e8, normalize_det

DEFAULT_NODE_BUDGET = 10**9
ENUM_SOFT_DIM_LIMIT = 48
_BRUTE_POINT_BUDGET = 10**8


@dataclass(frozen=True)
class CvpResult:
    """coeffs: integer coordinates in the reference basis; vector: the
    closest lattice point; dist: ||target - vector||."""

    coeffs: np.ndarray
    vector: np.ndarray
    dist: float


def _result(coeffs: np.ndarray, vector: np.ndarray, target: np.ndarray) -> CvpResult:
    coeffs = np.asarray(coeffs, dtype=np.int64)
    vector = np.asarray(vector, dtype=float)
    return CvpResult(coeffs, vector, float(np.linalg.norm(np.asarray(target) - vector)))


# ---------------------------------------------------------------------------
# Z^k

def decode_zk_batch(targets: np.ndarray) -> np.ndarray:
    """Coordinate-wise nearest integer; exact ties round to even."""
    return np.rint(np.asarray(targets, dtype=float)).astype(np.int64)


def decode_zk(target) -> CvpResult:
    target = np.atleast_1d(np.asarray(target, dtype=float))
    z = decode_zk_batch(target)
    return _result(z, z.astype(float), target)


# ---------------------------------------------------------------------------
# D_k

def dk_nearest_point_batch(targets: np.ndarray) -> np.ndarray:
    """Nearest points of D_k = {x in Z^k : sum x_i even} to each row.

    Round every coordinate; where the sum comes out odd, re-round the
    coordinate with the largest rounding error to its second-nearest
    integer.  This is the classic exact D_k decoder.
    """
    t = np.atleast_2d(np.asarray(targets, dtype=float))
    f = np.rint(t)
    err = t - f
    odd = np.rint(f.sum(axis=1)).astype(np.int64) % 2 != 0
    if np.any(odd):
        rows = np.nonzero(odd)[0]
        idx = np.argmax(np.abs(err[rows]), axis=1)
        bump = np.where(err[rows, idx] >= 0.0, 1.0, -1.0)
        f[rows, idx] += bump
    return f


_DK_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _dk_basis_inv(k: int):
    if k not in _DK_CACHE:
        b = basis_dk(k).columns
        _DK_CACHE[k] = (b, np.linalg.inv(b))
    return _DK_CACHE[k]


def decode_dk(target) -> CvpResult:
    target = np.atleast_1d(np.asarray(target, dtype=float))
    k = target.shape[0]
    if k < 2:
        raise InvalidArgumentError(f"D_k decoding requires k >= 2, got {k}")
    point = dk_nearest_point_batch(target[None, :])[0]
    _, binv = _dk_basis_inv(k)
    coeffs = np.rint(binv @ point)
    return _result(coeffs, point, target)


# ---------------------------------------------------------------------------
# E8 = D8 union (D8 + (1/2, ..., 1/2))

_E8_BASIS = basis_e8().columns
_E8_INV = np.linalg.inv(_E8_BASIS)
_E8_GLUE = np.full(8, 0.5)


def e8_nearest_point_batch(targets: np.ndarray) -> np.ndarray:
    t = np.atleast_2d(np.asarray(targets, dtype=float))
    cand0 = dk_nearest_point_batch(t)
    cand1 = dk_nearest_point_batch(t - _E8_GLUE) + _E8_GLUE
    d0 = ((t - cand0) ** 2).sum(axis=1)
    d1 = ((t - cand1) ** 2).sum(axis=1)
    return np.where((d0 <= d1)[:, None], cand0, cand1)


def decode_e8(target) -> CvpResult:
    target = np.atleast_1d(np.asarray(target, dtype=float))
    if target.shape[0] != 8:
        raise InvalidArgumentError(f"E8 decoding requires dimension 8, got {target.shape[0]}")
    point = e8_nearest_point_batch(target[None, :])[0]
    coeffs = np.rint(_E8_INV @ point)
    return _result(coeffs, point, target)


# ---------------------------------------------------------------------------
# Babai nearest plane (enumeration radius initializer, brute-force center)

def babai_nearest_plane(lattice: Lattice, target) -> np.ndarray:
    tq = lattice.to_qframe(np.asarray(target, dtype=float))
    r = lattice.rmat
    k = lattice.k
    z = np.zeros(k, dtype=np.int64)
    for j in range(k - 1, -1, -1):
        resid = tq[j] - r[j, j + 1 :] @ z[j + 1 :]
        z[j] = round(resid / r[j, j])
    return z


# ---------------------------------------------------------------------------
# Exact enumeration

def decode_enum(lattice: Lattice, target, node_budget: int = DEFAULT_NODE_BUDGET) -> CvpResult:
    """Provably closest vector by pruning-free depth-first enumeration.

    Deterministic tie-break: lexicographically smallest coefficient
    vector.  Raises BudgetExceededError carrying the best-so-far result
    if the node budget runs out.
    """
    target = np.atleast_1d(np.asarray(target, dtype=float))
    if lattice.k > ENUM_SOFT_DIM_LIMIT:
        warnings.warn(
            f"enumeration at k={lattice.k} > {ENUM_SOFT_DIM_LIMIT} may be very slow",
            RuntimeWarning,
            stacklevel=2,
        )
    tq = lattice.to_qframe(target)
    k = lattice.k
    z_out = np.zeros(k, dtype=np.int64)
    scratch = (np.zeros((k, k)), np.zeros(k, np.int64), np.zeros(k, np.int64), np.zeros(k + 1))
    _, _, status = _kernels.se_closest(lattice.rmat, tq, node_budget, z_out, *scratch)
    result = _result(z_out, lattice.reduced_basis.columns @ z_out, target)
    if status == _kernels.BUDGET_EXCEEDED:
        raise BudgetExceededError(
            f"enumeration exceeded {node_budget} nodes at k={k}", best=result
        )
    return result


def decode_enum_batch(lattice: Lattice, targets: np.ndarray, node_budget: int = DEFAULT_NODE_BUDGET):
    """Batch enumeration: returns (coeffs n x k int64, status n int64).

    Status is 0 where the search completed and 1 where the per-target
    node budget was exceeded (those rows hold the best found so far).
    """
    tq = lattice.to_qframe(np.atleast_2d(np.asarray(targets, dtype=float)))
    n = tq.shape[0]
    z = np.zeros((n, lattice.k), dtype=np.int64)
    status = np.zeros(n, dtype=np.int64)
    _kernels.se_closest_batch(lattice.rmat, tq, node_budget, z, status)
    return z, status


# ---------------------------------------------------------------------------
# Brute-force oracle

def decode_brute(lattice: Lattice, target, box: int) -> CvpResult:
    """Exhaustive minimum over coefficients in [-box, box]^k around the
    Babai point.  Test oracle; guarded at (2 box + 1)^k <= 1e8 points."""
    if box < 0:
        raise InvalidArgumentError(f"box must be nonnegative, got {box}")
    target = np.atleast_1d(np.asarray(target, dtype=float))
    k = lattice.k
    width = 2 * box + 1
    if width**k > _BRUTE_POINT_BUDGET:
        raise InvalidArgumentError(
            f"brute-force budget exceeded: (2*{box}+1)^{k} > {_BRUTE_POINT_BUDGET}"
        )
    center = babai_nearest_plane(lattice, target)
    bred = lattice.reduced_basis.columns
    if k > 1:
        offsets_tail = np.stack(
            np.meshgrid(*([np.arange(-box, box + 1)] * (k - 1)), indexing="ij"), axis=-1
        ).reshape(-1, k - 1)
    else:
        offsets_tail = np.zeros((1, 0), dtype=np.int64)
    base = target - bred @ center
    best_d2 = float(base @ base)
    best_z = center.copy()
    for z0 in range(-box, box + 1):
        z_block = np.concatenate(
            [np.full((offsets_tail.shape[0], 1), z0, dtype=np.int64), offsets_tail], axis=1
        )
        diff = base[None, :] - z_block @ bred.T
        d2 = np.einsum("ij,ij->i", diff, diff)
        m = float(d2.min())
        tie = 1e-12 * (1.0 + min(m, best_d2))
        if m < best_d2 + tie:
            rows = np.nonzero(d2 <= m + tie)[0]
            cand = min(tuple(center + z_block[r]) for r in rows)
            if m < best_d2 - tie or cand < tuple(best_z):
                best_z = np.array(cand, dtype=np.int64)
            best_d2 = min(best_d2, m)
    return _result(best_z, bred @ best_z, target)


# ---------------------------------------------------------------------------
# Decoder objects bound to a lattice (hash-family plumbing)

class Decoder:
    """A CVP strategy bound to an immutable Lattice.

    decode_batch returns (coeffs, status) where coeffs are exact integer
    identities in the decoder's reference basis and status is 0/1 per
    target (1 = budget exceeded, best-effort coefficients).
    """

    name = "base"

    def __init__(self, lattice: Lattice):
        self.lattice = lattice

    @property
    def k(self) -> int:
        return self.lattice.k

    def decode_batch(self, targets: np.ndarray):
        raise NotImplementedError

    def vectors_for(self, coeffs: np.ndarray) -> np.ndarray:
        """Ambient lattice points for coefficient rows."""
        raise NotImplementedError

    def decode(self, target) -> CvpResult:
        target = np.atleast_1d(np.asarray(target, dtype=float))
        z, status = self.decode_batch(target[None, :])
        result = _result(z[0], self.vectors_for(z)[0], target)
        if status[0] != 0:
            raise BudgetExceededError(f"{self.name} decoder budget exceeded", best=result)
        return result


class ZkDecoder(Decoder):
    name = "zk"

    def __init__(self, k: int):
        super().__init__(Lattice(Basis(np.eye(k)), reduced_basis=Basis(np.eye(k))))

    def decode_batch(self, targets):
        t = np.atleast_2d(np.asarray(targets, dtype=float))
        return decode_zk_batch(t), np.zeros(t.shape[0], dtype=np.int64)

    def vectors_for(self, coeffs):
        return coeffs.astype(float)


class DkDecoder(Decoder):
    """Exact decoder for the determinant-normalized D_k (scale 2^{-1/k})."""

    name = "dk"

    def __init__(self, k: int):
        super().__init__(normalize_det(basis_dk(k)))
        self.scale = 2.0 ** (-1.0 / k)
        self._basis, self._binv = _dk_basis_inv(k)

    def decode_batch(self, targets):
        t = np.atleast_2d(np.asarray(targets, dtype=float)) / self.scale
        points = dk_nearest_point_batch(t)
        coeffs = np.rint(points @ self._binv.T).astype(np.int64)
        return coeffs, np.zeros(t.shape[0], dtype=np.int64)

    def vectors_for(self, coeffs):
        return (coeffs.astype(float) @ self._basis.T) * self.scale


class E8Decoder(Decoder):
    name = "e8"

    def __init__(self):
        super().__init__(normalize_det(basis_e8()))

    def decode_batch(self, targets):
        t = np.atleast_2d(np.asarray(targets, dtype=float))
        if t.shape[1] != 8:
            raise InvalidArgumentError(f"E8 decoding requires dimension 8, got {t.shape[1]}")
        points = e8_nearest_point_batch(t)
        coeffs = np.rint(points @ _E8_INV.T).astype(np.int64)
        return coeffs, np.zeros(t.shape[0], dtype=np.int64)

    def vectors_for(self, coeffs):
        return coeffs.astype(float) @ _E8_BASIS.T


class EnumDecoder(Decoder):
    name = "enum"

    def __init__(self, lattice: Lattice, node_budget: int = DEFAULT_NODE_BUDGET):
        super().__init__(lattice)
        self.node_budget = node_budget

    def decode_batch(self, targets):
        return decode_enum_batch(self.lattice, targets, self.node_budget)

    def vectors_for(self, coeffs):
        return coeffs.astype(float) @ self.lattice.reduced_basis.columns.T


def get_decoder(selector: str, lattice: Lattice | None = None, k: int | None = None) -> Decoder:
    """Decoder factory for the selector strings used by config/CLI."""
    if selector in ("zk", "dk"):
        dim = k if k is not None else (lattice.k if lattice is not None else None)
        if dim is None:
            raise InvalidArgumentError(f"{selector!r} decoder requires the dimension k")
        return ZkDecoder(dim) if selector == "zk" else DkDecoder(dim)
    if selector == "e8":
        return E8Decoder()
    if selector == "enum":
        if lattice is None:
            raise InvalidArgumentError("enum decoder requires a lattice")
        return EnumDecoder(lattice)
    raise InvalidArgumentError(f"unknown decoder selector {selector!r}")
