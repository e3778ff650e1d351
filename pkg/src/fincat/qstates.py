"""Density-matrix utilities for the mixed-state LOCC sufficiency check."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError, InvalidStateError
from .spectra import shannon_entropy

HERMITIAN_TOL = 1e-10
MAX_DIM = 16
BOUNDARY_TOL = 1e-10

_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_SYSY = np.kron(_SY, _SY)


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray
    dims: tuple[int, int] | None = None

    def __post_init__(self):
        rho = np.array(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvalidStateError(f"density matrix must be square, got shape {rho.shape}")
        if not np.allclose(rho, rho.conj().T, atol=HERMITIAN_TOL, rtol=0):
            raise InvalidStateError("density matrix is not Hermitian")
        rho = 0.5 * (rho + rho.conj().T)
        if abs(np.trace(rho).real - 1.0) > HERMITIAN_TOL:
            raise InvalidStateError(f"trace is {np.trace(rho).real!r}, expected 1")
        if np.linalg.eigvalsh(rho).min() < -HERMITIAN_TOL:
            raise InvalidStateError("density matrix is not positive semidefinite")
        dims = self.dims
        if dims is not None:
            dims = (int(dims[0]), int(dims[1]))
            if dims[0] * dims[1] != rho.shape[0]:
                raise DimensionMismatchError(f"bipartition {dims} does not match size {rho.shape[0]}")
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_ket(cls, psi, dims=None) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), dims)


def eigenvalues(rho: DensityMatrix) -> np.ndarray:
    """Spectrum with tiny negative round-off clamped to zero."""
    return np.clip(np.linalg.eigvalsh(rho.entries), 0.0, None)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    if rho.dim > MAX_DIM:
        raise DimensionMismatchError(f"dimension {rho.dim} exceeds {MAX_DIM}")
    lam = eigenvalues(rho)
    return shannon_entropy(lam / lam.sum())


def partial_trace(rho: DensityMatrix, keep: str) -> DensityMatrix:
    """Reduced state on subsystem ``keep`` ("A" or "B")."""
    if rho.dims is None:
        raise DimensionMismatchError("partial trace needs a declared bipartition")
    dA, dB = rho.dims
    t = rho.entries.reshape(dA, dB, dA, dB)
    if keep == "A":
        return DensityMatrix(np.einsum("ijkj->ik", t))
    if keep == "B":
        return DensityMatrix(np.einsum("ijil->jl", t))
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def hashing_bound(rho: DensityMatrix) -> float:
    """max(S(rho_A), S(rho_B)) - S(rho); negative values certify nothing."""
    s = von_neumann_entropy(rho)
    return max(von_neumann_entropy(partial_trace(rho, "A")),
               von_neumann_entropy(partial_trace(rho, "B"))) - s


def concurrence(sigma: DensityMatrix) -> float:
    """Two-qubit concurrence from the spin-flipped spectrum."""
    if sigma.dim != 4 or (sigma.dims is not None and sigma.dims != (2, 2)):
        raise DimensionMismatchError("concurrence is defined here for two qubits only")
    rho = sigma.entries
    flipped = _SYSY @ rho.conj() @ _SYSY
    # sqrt(rho) flipped sqrt(rho) is Hermitian with the same spectrum as rho*flipped
    w, v = np.linalg.eigh(rho)
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(root @ flipped @ root), 0.0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def _binary_entropy(x: float) -> float:
    return sum(-t * math.log(t) for t in (x, 1.0 - x) if t > 0.0)


def eof_two_qubit(sigma: DensityMatrix) -> float:
    """Entanglement of formation (nats) of a two-qubit state via the concurrence."""
    c = min(concurrence(sigma), 1.0)
    return _binary_entropy(0.5 * (1.0 + math.sqrt(1.0 - c * c)))


@dataclass(frozen=True)
class Corollary1Verdict:
    status: str  # "sufficient" | "boundary" | "not_implied"
    hashing_bound: float
    target_entanglement: float

    @property
    def margin(self) -> float:
        return self.hashing_bound - self.target_entanglement


def corollary1_check(rho: DensityMatrix, sigma: DensityMatrix | None = None,
                     e_sigma: float | None = None) -> Corollary1Verdict:
    """Mixed-state test: hashing bound of rho against the entanglement of sigma.

    ``e_sigma`` may be supplied directly; otherwise sigma must be two-qubit
    and its entanglement of formation is used. Equality (within 1e-10) is
    reported as "boundary": the construction needs a rate strictly above one.
    """
    if e_sigma is None:
        if sigma is None:
            raise ValueError("give either sigma or e_sigma")
        e_sigma = eof_two_qubit(sigma)
    hb = hashing_bound(rho)
    margin = hb - e_sigma
    if abs(margin) <= BOUNDARY_TOL:
        status = "boundary"
    elif margin > 0:
        status = "sufficient"
    else:
        status = "not_implied"
    return Corollary1Verdict(status, hb, float(e_sigma))
