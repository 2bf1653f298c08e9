"""Photon loss as a Kraus channel, plus the closed-form lossy superposition state.

Loss with transmissivity ``eta`` is a beam splitter whose second port holds
vacuum, followed by a trace over that port.  In operator-sum form the Kraus
operator for losing ``k`` photons has its only nonzeros on the k-th
subdiagonal:

    (K_k)_{n-k, n} = sqrt(C(n, k) eta^(n-k) (1-eta)^k)

which is exactly trace preserving on the truncated basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .fock import (
    DensityOperator,
    TruncationError,
    coherent_amplitudes,
    default_cutoff,
)

COMPLETENESS_TOL = 1e-10


def _subdiagonal_weights(eta: float, k: int, dim: int) -> np.ndarray:
    """w[m] = sqrt(C(m+k, k) eta^m (1-eta)^k) for m = 0 .. dim-1-k."""
    m = np.arange(dim - k)
    log_binom = gammaln(m + k + 1) - gammaln(k + 1) - gammaln(m + 1)
    if eta == 1.0:
        return np.ones(dim - k) if k == 0 else np.zeros(dim - k)
    if eta == 0.0:
        return np.where(m == 0, 1.0, 0.0)
    return np.exp(0.5 * (log_binom + m * np.log(eta) + k * np.log(1.0 - eta)))


@dataclass(frozen=True)
class LossChannel:
    """Kraus operators of a transmissivity-``eta`` loss channel."""

    eta: float
    cutoff: int
    kraus: tuple

    def __post_init__(self):
        dev = self.completeness_defect()
        if dev > COMPLETENESS_TOL:
            raise ValueError(f"Kraus completeness defect {dev:.3e}")

    def completeness_defect(self) -> float:
        d = self.cutoff + 1
        acc = np.zeros((d, d))
        for k_mat in self.kraus:
            acc += k_mat.T @ k_mat
        return float(np.abs(acc - np.eye(d)).max())


def loss_kraus(eta: float, cutoff: int) -> LossChannel:
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {eta}")
    d = cutoff + 1
    mats = []
    for k in range(d):
        mat = np.zeros((d, d))
        w = _subdiagonal_weights(eta, k, d)
        mat[np.arange(d - k), np.arange(k, d)] = w
        mat.flags.writeable = False
        mats.append(mat)
    return LossChannel(eta, cutoff, tuple(mats))


def apply_channel(rho: DensityOperator, channel: LossChannel, mode: int = 1) -> DensityOperator:
    """Sum_k (K_k x 1) rho (K_k x 1)+ with the identity on the untouched mode.

    Exploits the subdiagonal structure of the K_k instead of forming the
    Kronecker products, which is the same channel at quadratic memory.
    """
    if rho.cutoff != channel.cutoff:
        raise ValueError(
            f"cutoff mismatch: state {rho.cutoff}, channel {channel.cutoff}"
        )
    if mode not in (1, 2) or mode > rho.modes:
        raise ValueError(f"mode {mode} invalid for a {rho.modes}-mode state")
    d = rho.cutoff + 1
    if rho.modes == 1:
        out = np.zeros_like(rho.matrix)
        for k, k_mat in enumerate(channel.kraus):
            w = np.diagonal(k_mat, offset=k)
            if not w.any():
                continue
            out[: d - k, : d - k] += np.outer(w, w) * rho.matrix[k:, k:]
        return DensityOperator(out, rho.cutoff, 1, tail_loss=rho.tail_loss)

    r4 = rho.matrix.reshape(d, d, d, d)
    out = np.zeros_like(r4)
    for k, k_mat in enumerate(channel.kraus):
        w = np.diagonal(k_mat, offset=k)
        if not w.any():
            continue
        if mode == 1:
            out[: d - k, :, : d - k, :] += (
                w[:, None, None, None] * w[None, None, :, None] * r4[k:, :, k:, :]
            )
        else:
            out[:, : d - k, :, : d - k] += (
                w[None, :, None, None] * w[None, None, None, :] * r4[:, k:, :, k:]
            )
    return DensityOperator(
        out.reshape(d * d, d * d), rho.cutoff, 2, tail_loss=rho.tail_loss
    )


def partial_trace(rho: DensityOperator, keep_mode: int) -> DensityOperator:
    """Trace a two-mode state down to one of its modes."""
    if rho.modes != 2:
        raise ValueError("partial_trace expects a two-mode state")
    d = rho.cutoff + 1
    r4 = rho.matrix.reshape(d, d, d, d)
    if keep_mode == 1:
        out = np.einsum("abcb->ac", r4)
    elif keep_mode == 2:
        out = np.einsum("abac->bc", r4)
    else:
        raise ValueError("keep_mode must be 1 or 2")
    return DensityOperator(out, rho.cutoff, 1, tail_loss=rho.tail_loss)


def beamsplitter_loss(rho: DensityOperator, eta: float) -> DensityOperator:
    """Loss realized literally: mix with a vacuum port, trace the port out.

    Quartic in the basis size, so intended for small cutoffs as a
    cross-check of the operator-sum route.
    """
    if rho.modes != 1:
        raise ValueError("dilation cross-check is single-mode only")
    d = rho.cutoff + 1
    theta = np.arccos(np.sqrt(eta))
    n = np.arange(1, d)
    a = np.zeros((d, d), dtype=complex)
    a[n - 1, n] = np.sqrt(n)
    ident = np.eye(d)
    a1 = np.kron(a, ident)
    a2 = np.kron(ident, a)
    # exp(theta (a1+ a2 - a1 a2+)) sends a1 -> cos(theta) a1 + sin(theta) a2.
    gen = theta * (a1.conj().T @ a2 - a1 @ a2.conj().T)
    w, v = np.linalg.eigh(1j * gen)
    bs = (v * np.exp(-1j * w)) @ v.conj().T
    vac = np.zeros((d, d))
    vac[0, 0] = 1.0
    joint = np.kron(rho.matrix, vac)
    joint = bs @ joint @ bs.conj().T
    two = DensityOperator(joint, rho.cutoff, 2, tail_loss=rho.tail_loss)
    return partial_trace(two, keep_mode=1)


def ucs_lossy_rho_analytic(
    a: float,
    n_phi: float,
    eta: float,
    phi: float,
    cutoff: int | None = None,
) -> DensityOperator:
    """Closed-form reduced state of the unbalanced cat after phase and loss.

    With alpha = alpha(a) fixed by the photon budget, alpha_eta = alpha
    sqrt(eta) and alpha_mu = alpha sqrt(1 - eta):

        rho = N_u^2 [ |c><c| + a^2 |0><0|
                      + a e^(-alpha_mu^2 / 2) (|c><0| + |0><c|) ]

    where |c> = |alpha_eta e^(i phi)>.
    """
    from .states import UCS, n_u, solve_alpha_of_a

    UCS(a, n_phi)  # validates the parameter ranges
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {eta}")
    alpha = solve_alpha_of_a(a, n_phi)
    if cutoff is None:
        cutoff = default_cutoff(alpha**2)
    alpha_eta = alpha * np.sqrt(eta)
    alpha_mu = alpha * np.sqrt(1.0 - eta)
    nu2 = n_u(a, alpha) ** 2
    c = coherent_amplitudes(alpha_eta * np.exp(1j * phi), cutoff)
    tail = 1.0 - float(np.vdot(c, c).real)
    if tail > 1e-11:
        raise TruncationError(
            f"cutoff {cutoff} leaves tail {tail:.2e} for amplitude {alpha_eta:.3f}"
        )
    vac = np.zeros(cutoff + 1, dtype=complex)
    vac[0] = 1.0
    cross = a * np.exp(-(alpha_mu**2) / 2.0)
    mat = nu2 * (
        np.outer(c, c.conj())
        + a**2 * np.outer(vac, vac)
        + cross * (np.outer(c, vac) + np.outer(vac, c.conj()))
    )
    if np.all(mat.imag == 0.0):
        mat = mat.real
    tail_loss = max(1.0 - float(np.trace(mat).real), 0.0)
    return DensityOperator(mat, cutoff, 1, tail_loss=tail_loss)
