"""Truncated Fock-space linear algebra for one- and two-mode bosonic fields.

States are complex amplitude vectors over the photon-number basis, operators
are dense matrices on the same basis.  Two-mode objects use a row-major
flattening with mode 1 (the phase-carrying mode) as the outer index, so the
flat index of ``|n1, n2>`` is ``n1 * (cutoff + 1) + n2``.

Everything here is a pure function of its inputs; constructed objects are
treated as immutable (their arrays are marked read-only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

# Norm deficit tolerated when a normalized state is constructed on a
# truncated basis.
TAIL_TOL = 1e-10

# Certification threshold for operators flagged Hermitian.
HERMITIAN_TOL = 1e-12


class TruncationError(ValueError):
    """The photon-number cutoff is too small for the requested object."""


def default_cutoff(mean_photons: float) -> int:
    """Cutoff large enough that a Poisson-like tail above it is < 1e-12.

    ``mean_photons`` is the largest mean photon number the truncated basis
    has to carry (e.g. ``(|alpha| + |beta|)**2`` when a displacement by
    ``beta`` follows a coherent amplitude ``alpha``).
    """
    mu = float(mean_photons)
    if mu < 0:
        raise ValueError("mean photon number must be >= 0")
    return int(math.ceil(mu + 8.0 * math.sqrt(mu) + 20.0))


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FockVector:
    """State vector over the truncated photon-number basis.

    ``amplitudes`` has length ``(cutoff + 1) ** modes``; for ``modes == 2``
    the entries are indexed row-major with mode 1 outer.
    """

    amplitudes: np.ndarray
    cutoff: int
    modes: int = 1

    def __post_init__(self):
        if self.cutoff < 0:
            raise ValueError("cutoff must be >= 0")
        if self.modes not in (1, 2):
            raise ValueError("only 1- and 2-mode vectors are supported")
        expected = (self.cutoff + 1) ** self.modes
        if self.amplitudes.shape != (expected,):
            raise ValueError(
                f"amplitude vector has length {self.amplitudes.shape}, "
                f"expected ({expected},)"
            )
        _freeze(self.amplitudes)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def overlap(self, other: "FockVector") -> complex:
        _check_compatible(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class Operator:
    """Dense operator on the truncated basis; ``hermitian`` is a certified hint."""

    matrix: np.ndarray
    cutoff: int
    modes: int = 1
    hermitian: bool = False

    def __post_init__(self):
        d = (self.cutoff + 1) ** self.modes
        if self.matrix.shape != (d, d):
            raise ValueError(f"matrix shape {self.matrix.shape}, expected ({d}, {d})")
        if self.hermitian:
            dev = np.abs(self.matrix - self.matrix.conj().T).max()
            if dev > HERMITIAN_TOL:
                raise ValueError(f"operator flagged Hermitian deviates by {dev:.3e}")
        _freeze(self.matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive-semidefinite state matrix.

    ``tail_loss`` records trace mass lost to basis truncation: the trace is
    expected to equal ``1 - tail_loss`` rather than being silently
    renormalized.
    """

    matrix: np.ndarray
    cutoff: int
    modes: int = 1
    tail_loss: float = 0.0

    def __post_init__(self):
        d = (self.cutoff + 1) ** self.modes
        if self.matrix.shape != (d, d):
            raise ValueError(f"matrix shape {self.matrix.shape}, expected ({d}, {d})")
        dev = np.abs(self.matrix - self.matrix.conj().T).max()
        if dev > 1e-10:
            raise ValueError(f"density matrix deviates from Hermitian by {dev:.3e}")
        tr = float(np.trace(self.matrix).real)
        if abs(tr - (1.0 - self.tail_loss)) > 1e-9:
            raise ValueError(
                f"trace {tr} inconsistent with recorded tail loss {self.tail_loss}"
            )
        _freeze(self.matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


@dataclass(frozen=True)
class EigenSystem:
    """Spectral decomposition, eigenvalues sorted descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        _freeze(self.eigenvalues)
        _freeze(self.eigenvectors)


def _check_compatible(a, b):
    if a.cutoff != b.cutoff or a.modes != b.modes:
        raise ValueError(
            f"incompatible objects: cutoff {a.cutoff}/{b.cutoff}, "
            f"modes {a.modes}/{b.modes}"
        )


# ---------------------------------------------------------------------------
# state constructors


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Raw coherent-state amplitudes e^{-|a|^2/2} a^n / sqrt(n!).

    Evaluated through logs so that cutoffs past n = 170 do not overflow.
    """
    n = np.arange(cutoff + 1)
    if alpha == 0:
        amps = np.zeros(cutoff + 1, dtype=complex)
        amps[0] = 1.0
        return amps
    log_amp = -abs(alpha) ** 2 / 2.0 + n * np.log(complex(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_amp)


def coherent_vector(alpha: complex, cutoff: int | None = None) -> FockVector:
    """Coherent state |alpha> on a truncated basis.

    Raises :class:`TruncationError` when the Poisson tail beyond the cutoff
    exceeds the construction tolerance; the state is never renormalized.
    """
    if cutoff is None:
        cutoff = default_cutoff(abs(alpha) ** 2)
    amps = coherent_amplitudes(alpha, cutoff)
    deficit = 1.0 - float(np.vdot(amps, amps).real)
    if deficit > TAIL_TOL:
        raise TruncationError(
            f"cutoff {cutoff} too small for |alpha|={abs(alpha):.3f}: "
            f"tail mass {deficit:.3e}"
        )
    return FockVector(amps, cutoff, 1)


def number_state(n: int, cutoff: int) -> FockVector:
    """Photon-number eigenstate |n>."""
    if not 0 <= n <= cutoff:
        raise TruncationError(f"|{n}> does not fit below cutoff {cutoff}")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[n] = 1.0
    return FockVector(amps, cutoff, 1)


# ---------------------------------------------------------------------------
# operators


def identity_operator(cutoff: int, modes: int = 1) -> Operator:
    d = (cutoff + 1) ** modes
    return Operator(np.eye(d, dtype=complex), cutoff, modes, hermitian=True)


def number_operator(cutoff: int) -> Operator:
    """n-hat = a+ a, diagonal on the number basis."""
    return Operator(
        np.diag(np.arange(cutoff + 1, dtype=float)).astype(complex),
        cutoff,
        1,
        hermitian=True,
    )


def phase_shift(phi: float, cutoff: int) -> Operator:
    """Phase rotation exp(i n-hat phi); unitary and diagonal."""
    return Operator(
        np.diag(np.exp(1j * phi * np.arange(cutoff + 1))), cutoff, 1, hermitian=False
    )


def phase_profile(phi: float, cutoff: int, modes: int = 1) -> np.ndarray:
    """Diagonal of the phase rotation acting on mode 1 only."""
    d = cutoff + 1
    single = np.exp(1j * phi * np.arange(d))
    if modes == 1:
        return single
    return np.repeat(single, d)


def rotate_phase(vec: FockVector, phi: float) -> FockVector:
    """Apply exp(i n1-hat phi) to the phase mode of a state vector."""
    if phi == 0.0:
        return vec
    prof = phase_profile(phi, vec.cutoff, vec.modes)
    return FockVector(vec.amplitudes * prof, vec.cutoff, vec.modes)


def phase_generator(cutoff: int, modes: int = 1) -> Operator:
    """Photon number of the phase mode: n-hat for one mode, n1-hat ⊗ 1 for two."""
    d = cutoff + 1
    if modes == 1:
        return number_operator(cutoff)
    diag = np.repeat(np.arange(d, dtype=float), d)
    return Operator(np.diag(diag).astype(complex), cutoff, 2, hermitian=True)


def annihilation_operator(cutoff: int) -> Operator:
    d = cutoff + 1
    mat = np.zeros((d, d), dtype=complex)
    n = np.arange(1, d)
    mat[n - 1, n] = np.sqrt(n)
    return Operator(mat, cutoff, 1)


def displacement_operator(beta: complex, cutoff: int) -> Operator:
    """Displacement D(beta) = exp(beta a+ - beta* a) on the truncated basis.

    Built as the exponential of the (truncated) Hermitian generator via
    eigendecomposition, which keeps the matrix exactly unitary on the
    truncated space and reproduces the closed-form matrix elements wherever
    the displaced amplitudes fit under the cutoff.  A power-series
    exponential or raw closed-form evaluation would either overflow or lose
    unitarity at these sizes.
    """
    if cutoff < default_cutoff(abs(beta) ** 2):
        raise TruncationError(
            f"cutoff {cutoff} too small to displace by |beta|={abs(beta):.3f}; "
            f"need >= {default_cutoff(abs(beta) ** 2)}"
        )
    d = cutoff + 1
    n = np.arange(1, d)
    h = np.zeros((d, d), dtype=complex)
    # H = i (beta* a - beta a+) is Hermitian and exp(iH) = D(beta).
    h[n - 1, n] = 1j * np.conj(beta) * np.sqrt(n)
    h[n, n - 1] = -1j * beta * np.sqrt(n)
    w, v = np.linalg.eigh(h)
    mat = (v * np.exp(1j * w)) @ v.conj().T
    return Operator(mat, cutoff, 1)


def apply_operator(op: Operator, vec: FockVector) -> FockVector:
    _check_compatible(op, vec)
    return FockVector(op.matrix @ vec.amplitudes, vec.cutoff, vec.modes)


def tensor(a, b):
    """Kronecker product of two single-mode objects of the same kind.

    Mode 1 is the first factor (outer index)."""
    if a.modes != 1 or b.modes != 1:
        raise ValueError("tensor expects single-mode inputs")
    if a.cutoff != b.cutoff:
        raise ValueError(f"cutoff mismatch: {a.cutoff} vs {b.cutoff}")
    if isinstance(a, FockVector) and isinstance(b, FockVector):
        return FockVector(np.kron(a.amplitudes, b.amplitudes), a.cutoff, 2)
    if isinstance(a, Operator) and isinstance(b, Operator):
        return Operator(
            np.kron(a.matrix, b.matrix), a.cutoff, 2, hermitian=a.hermitian and b.hermitian
        )
    raise TypeError("tensor expects two FockVectors or two Operators")


def density_from_vector(vec: FockVector) -> DensityOperator:
    """|psi><psi| with truncation deficit recorded, not renormalized."""
    amps = vec.amplitudes
    # A state that is real up to roundoff gets a real matrix; this halves the
    # memory and speeds up the eigensolves downstream.
    if np.all(amps.imag == 0.0):
        amps = amps.real
    mat = np.outer(amps, amps.conj())
    tail = 1.0 - float(np.vdot(amps, amps).real)
    tail = max(tail, 0.0)
    return DensityOperator(mat, vec.cutoff, vec.modes, tail_loss=tail)


def expectation(op: Operator, vec: FockVector) -> float:
    """<psi|A|psi> for Hermitian A (real part returned)."""
    return float(np.vdot(vec.amplitudes, op.matrix @ vec.amplitudes).real)


def eigh(obj) -> EigenSystem:
    """Hermitian eigendecomposition, eigenvalues sorted descending.

    Rejects inputs that deviate from Hermitian by more than 1e-10.
    """
    if isinstance(obj, (Operator, DensityOperator)):
        mat = obj.matrix
    else:
        mat = np.asarray(obj)
    dev = np.abs(mat - mat.conj().T).max()
    if dev > 1e-10:
        raise ValueError(f"matrix deviates from Hermitian by {dev:.3e}")
    if np.iscomplexobj(mat) and np.all(mat.imag == 0.0):
        mat = mat.real
    vals, vecs = np.linalg.eigh(mat)
    return EigenSystem(vals[::-1].copy(), vecs[:, ::-1].copy())
