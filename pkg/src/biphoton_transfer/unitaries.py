"""Unitary operators over the momentum lattice.

Covers dense matrices, translation-invariant convolution kernels extracted
from phase masks (the grating's Fourier coefficients), the circulant
matrices they induce, and the signal-side transfer construction
U'_s(k', k) = U(-k, k').
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import circulant, qr

from .lattice import LatticeSpec, LatticeError, negation_permutation
from .masks import PhaseMask, UndersampledMaskError

__all__ = [
    "UnitaryOperator",
    "ConvolutionKernel",
    "UndersampledMaskError",
    "kernel_from_phase",
    "kernel_from_phase_2d",
    "dense_from_kernel",
    "construct_transfer_unitary",
    "random_unitary",
    "check_unitarity",
]

KERNEL_NORM_TOL = 1e-9
MAX_KERNEL_LEAKAGE = 1e-6


@dataclass(frozen=True)
class UnitaryOperator:
    lattice: LatticeSpec
    matrix: np.ndarray

    def __post_init__(self):
        d = self.lattice.size
        m = np.asarray(self.matrix, dtype=complex).reshape(d, d)
        object.__setattr__(self, "matrix", m)
        m.setflags(write=False)

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        return self.matrix @ amplitudes


@dataclass(frozen=True)
class ConvolutionKernel:
    """Translation-invariant kernel u_m over shifts -M..M (centered layout).

    ``leakage`` is the squared weight beyond |m| <= M dropped by the
    truncation; it must stay below MAX_KERNEL_LEAKAGE for the circulant
    to be unitary at tolerance.
    """

    lattice: LatticeSpec
    u: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex).reshape(self.lattice.shape)
        object.__setattr__(self, "u", u)
        u.setflags(write=False)

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.u) ** 2))

    def coefficient(self, m) -> complex:
        return complex(self.u[self._pos(m)])

    def _pos(self, m):
        msp = self.lattice.half_span
        if self.lattice.dims == 1:
            return int(np.asarray(m).reshape(())) + msp
        mx, my = (int(v) for v in m)
        return (mx + msp, my + msp)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.u) ** 2

    def shifted(self, shift) -> "ConvolutionKernel":
        """Exact circular displacement u_m -> u_{m - p} per axis."""
        if self.lattice.dims == 1:
            p = shift[0] if np.ndim(shift) else int(shift)
            return ConvolutionKernel(self.lattice, np.roll(self.u, p), self.leakage)
        px, py = (int(v) for v in shift)
        return ConvolutionKernel(self.lattice, np.roll(self.u, (px, py), axis=(0, 1)),
                                 self.leakage)


def _extract_kernel(phase_grid: np.ndarray, lattice: LatticeSpec) -> ConvolutionKernel:
    m = lattice.half_span
    idx = np.arange(-m, m + 1)
    if lattice.dims == 1:
        s = phase_grid.shape[0]
        full = np.fft.fft(np.exp(1j * phase_grid)) / s
        u = full[idx % s]
    else:
        s = phase_grid.shape[0]
        full = np.fft.fft2(np.exp(1j * phase_grid)) / s**2
        u = full[np.ix_(idx % s, idx % s)]
    leakage = max(0.0, 1.0 - float(np.sum(np.abs(u) ** 2)))
    return ConvolutionKernel(lattice, u, leakage)


def kernel_from_phase(mask: PhaseMask) -> ConvolutionKernel:
    """Fourier coefficients u_m of exp(i phi(x)) over one period.

    The periodic part is sampled and transformed; integer linear ramps are
    applied afterwards as exact circular mode shifts.
    """
    lattice = mask.lattice
    if mask.samples_per_period < 8 * lattice.half_span:
        raise UndersampledMaskError(
            f"S = {mask.samples_per_period} < 8 M = {8 * lattice.half_span}"
        )
    kernel = _extract_kernel(mask.phase_grid(include_linear=False), lattice)
    if kernel.leakage > MAX_KERNEL_LEAKAGE:
        raise LatticeError(
            f"kernel leakage {kernel.leakage:.3e} exceeds {MAX_KERNEL_LEAKAGE:.0e}; "
            f"increase modes_per_axis"
        )
    shift = mask.linear_shift
    if any(shift):
        kernel = kernel.shifted(shift)
    return kernel


def kernel_from_phase_2d(mask: PhaseMask) -> ConvolutionKernel:
    """2D counterpart of :func:`kernel_from_phase`."""
    if mask.lattice.dims != 2:
        raise LatticeError("kernel_from_phase_2d needs a 2D mask")
    return kernel_from_phase(mask)


def dense_from_kernel(kernel: ConvolutionKernel) -> UnitaryOperator:
    """Circulant matrix U(k', k) = u_{(k' - k) mod N} (per axis in 2D)."""
    lattice = kernel.lattice
    if abs(kernel.norm_sq - 1.0) > KERNEL_NORM_TOL + kernel.leakage:
        raise LatticeError(f"kernel not normalized: sum |u|^2 = {kernel.norm_sq!r}")
    n = lattice.modes_per_axis
    m = lattice.half_span
    if lattice.dims == 1:
        u_mod = np.roll(kernel.u, -m)  # index by m mod N
        return UnitaryOperator(lattice, circulant(u_mod))
    u_mod = np.roll(kernel.u, (-m, -m), axis=(0, 1))
    o = np.arange(n)
    diff = (o[:, None] - o[None, :]) % n
    # U[(ax',ay'),(ax,ay)] = u_mod[(ax'-ax)%n, (ay'-ay)%n]
    dx = np.broadcast_to(diff[:, :, None, None], (n, n, n, n))
    dy = np.broadcast_to(diff[None, None, :, :], (n, n, n, n))
    big = u_mod[dx, dy]
    # axes (ax', ax, ay', ay) -> rows (ax', ay'), cols (ax, ay)
    big = big.transpose(0, 2, 1, 3).reshape(n * n, n * n)
    return UnitaryOperator(lattice, big)


def construct_transfer_unitary(u_op: UnitaryOperator) -> UnitaryOperator:
    """Signal-side operator with elements U'_s(k', k) = U(-k, k')."""
    mat = u_op.matrix
    neg = negation_permutation(u_op.lattice)
    return UnitaryOperator(u_op.lattice, mat[neg, :].T.copy())


def random_unitary(lattice: LatticeSpec, seed: int) -> UnitaryOperator:
    """Haar-style unitary from QR of a seeded complex Gaussian matrix."""
    d = lattice.size
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return UnitaryOperator(lattice, q * ph)


def check_unitarity(u_op: UnitaryOperator, tol: float = 1e-9) -> tuple[bool, float]:
    """(passes, max |U^dag U - I| element)."""
    mat = u_op.matrix
    dev = float(np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0]))))
    return dev <= tol, dev
