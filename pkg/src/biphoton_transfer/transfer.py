"""End-to-end nonlocal transfer of a unitary across the correlated pair.

Apply the signal-side operator U'_s to the correlated biphoton state,
project the signal photon, and recover on the idler the action of the
requested unitary on the requested input. Both the dense-matrix route and
the translation-invariant kernel (circular convolution) route are provided
and must agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import (
    BiphotonState,
    Distribution,
    LatticeError,
    LatticeSpec,
    StateVector,
    fidelity,
    make_correlated_state,
)
from .unitaries import ConvolutionKernel, UnitaryOperator, construct_transfer_unitary

__all__ = [
    "ProjectionVector",
    "TransferResult",
    "ProjectionAnnihilatesState",
    "apply_signal_unitary",
    "project_signal",
    "transfer_localized",
    "transfer_general",
    "transfer_kernel_route",
    "prepare_correlated_state_via_circuit",
]

PROBABILITY_FLOOR = 1e-15


class ProjectionAnnihilatesState(LatticeError):
    """Projection probability below the numerical floor."""


@dataclass(frozen=True)
class ProjectionVector:
    """Signal projection |chi> with coefficients A(k')."""

    lattice: LatticeSpec
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex).reshape(self.lattice.size)
        if abs(np.linalg.norm(c) - 1.0) > 1e-12:
            raise LatticeError("projection vector must be normalized")
        object.__setattr__(self, "coefficients", c)
        c.setflags(write=False)


@dataclass(frozen=True)
class TransferResult:
    idler_state: StateVector
    success_probability: float
    fidelity_vs_direct: float | None = None


def apply_signal_unitary(psi: BiphotonState, us: UnitaryOperator) -> BiphotonState:
    """(U'_s ⊗ I) |psi>; contracts the signal index."""
    if psi.lattice != us.lattice:
        raise LatticeError("biphoton state and unitary live on different lattices")
    return BiphotonState(psi.lattice, us.matrix @ psi.amplitudes)


def project_signal(psi: BiphotonState, chi: ProjectionVector) -> TransferResult:
    """Condition on the signal outcome |chi>; returns normalized idler state.

    idler(j) = sum_k' A*(k') amplitude(k', j); the success probability is the
    squared norm of that contraction.
    """
    if psi.lattice != chi.lattice:
        raise LatticeError("biphoton state and projection live on different lattices")
    idler = chi.coefficients.conj() @ psi.amplitudes
    prob = float(np.sum(np.abs(idler) ** 2))
    if prob < PROBABILITY_FLOOR:
        raise ProjectionAnnihilatesState(
            f"projection probability {prob:.3e} below floor {PROBABILITY_FLOOR:.0e}"
        )
    return TransferResult(
        idler_state=StateVector(psi.lattice, idler / np.sqrt(prob)),
        success_probability=prob,
    )


def _negated(state: StateVector) -> StateVector:
    return StateVector(state.lattice, state.amplitudes[::-1].copy())


def _run_transfer(u_op: UnitaryOperator, phi0: StateVector,
                  raw_sign_convention: bool) -> TransferResult:
    lattice = u_op.lattice
    psi = make_correlated_state(lattice)
    us = construct_transfer_unitary(u_op)
    psi = apply_signal_unitary(psi, us)
    chi = ProjectionVector(lattice, phi0.amplitudes.conj())  # A(k') = C(k')*
    partial = project_signal(psi, chi)
    direct = StateVector(lattice, u_op.apply(phi0.amplitudes)).normalized()
    idler = partial.idler_state
    fid = fidelity(idler, direct)
    if raw_sign_convention:
        idler = _negated(idler)
    return TransferResult(idler, partial.success_probability, fid)


def transfer_localized(u_op: UnitaryOperator, k0,
                       raw_sign_convention: bool = False) -> TransferResult:
    """Transfer U acting on the single mode |k0>."""
    phi0 = StateVector(u_op.lattice, u_op.lattice.basis_vector(k0))
    return _run_transfer(u_op, phi0, raw_sign_convention)


def transfer_general(u_op: UnitaryOperator, phi0: StateVector,
                     raw_sign_convention: bool = False) -> TransferResult:
    """Transfer U acting on an arbitrary normalized input state."""
    if u_op.lattice != phi0.lattice:
        raise LatticeError("unitary and input state live on different lattices")
    phi0.require_normalized()
    return _run_transfer(u_op, phi0, raw_sign_convention)


def transfer_kernel_route(u: ConvolutionKernel, d: StateVector) -> ConvolutionKernel:
    """Effective kernel v_m = sum_l d_l u_{m-l} (circular convolution).

    Driving the signal with v and projecting on |0> puts the idler in
    sum_m v_m |k_m>, i.e. the same output the dense route produces.
    """
    lattice = u.lattice
    if lattice != d.lattice:
        raise LatticeError("kernel and input state live on different lattices")
    m = lattice.half_span
    if lattice.dims == 1:
        u_mod = np.roll(u.u, -m)
        d_mod = np.roll(d.amplitudes, -m)
        v_mod = np.fft.ifft(np.fft.fft(u_mod) * np.fft.fft(d_mod))
        v = np.roll(v_mod, m)
    else:
        u_mod = np.roll(u.u, (-m, -m), axis=(0, 1))
        d_mod = np.roll(d.amplitudes.reshape(lattice.shape), (-m, -m), axis=(0, 1))
        v_mod = np.fft.ifft2(np.fft.fft2(u_mod) * np.fft.fft2(d_mod))
        v = np.roll(v_mod, (m, m), axis=(0, 1))
    return ConvolutionKernel(lattice, v, u.leakage)


def kernel_output_state(v: ConvolutionKernel) -> StateVector:
    """Idler state sum_m v_m |k_m> after projecting the v-driven signal on |0>."""
    return StateVector(v.lattice, v.u.reshape(v.lattice.size)).normalized()


def kernel_output_distribution(v: ConvolutionKernel) -> Distribution:
    p = v.probabilities().reshape(v.lattice.size)
    return Distribution(v.lattice, p / p.sum())


def prepare_correlated_state_via_circuit(lattice: LatticeSpec) -> BiphotonState:
    """Build sum_k |k>|-k> from |0>|0> with explicit gates.

    Register 1 gets a uniform superposition (d-dimensional Hadamard acting
    on the zero mode), a generalized controlled-X maps |j>|k> to
    |j>|(j+k) mod d> on the centered index set, and the anti-identity
    negates register 2. The result is asserted against the closed form.
    """
    if lattice.dims != 1:
        raise LatticeError("circuit preparation is defined for 1D lattices")
    n = lattice.modes_per_axis
    m = lattice.half_span
    amp = np.zeros((n, n), dtype=complex)
    amp[lattice.offset(0), lattice.offset(0)] = 1.0
    # d-dimensional Hadamard on register 1: |0> -> uniform superposition
    idx = np.arange(n)
    omega = np.exp(2j * np.pi / n)
    had = omega ** (np.outer(idx - m, idx - m)) / np.sqrt(n)
    amp = had @ amp
    # controlled-X: |j>|k> -> |j>|(j+k) mod d> on centered indices
    out = np.zeros_like(amp)
    for oj in range(n):
        j = oj - m
        for ok in range(n):
            k = ok - m
            t = (j + k + m) % n - m  # centered wrap of j + k
            out[oj, t + m] += amp[oj, ok]
    # anti-identity on register 2: |k> -> |-k>
    out = out[:, ::-1]
    result = BiphotonState(lattice, out)
    target = make_correlated_state(lattice)
    if np.max(np.abs(result.amplitudes - target.amplitudes)) > 1e-12:
        raise LatticeError("circuit preparation disagrees with the closed form")
    return result
