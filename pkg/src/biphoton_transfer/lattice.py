"""Discrete momentum lattice and single-/two-photon state containers.

Modes carry a quantized transverse momentum k_m = m * delta_k with
m in -M..M on an odd-sized periodic lattice (N = 2M + 1 per axis).
All heavier machinery (circulant unitaries, transfer protocol, optics)
is built on the types defined here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LatticeError",
    "LatticeSpec",
    "StateVector",
    "BiphotonState",
    "Distribution",
    "make_correlated_state",
    "negate_index",
    "fidelity",
    "distribution_of",
]

NORM_TOL = 1e-12


class LatticeError(ValueError):
    """Invalid lattice parameters or mismatched lattice operands."""


@dataclass(frozen=True)
class LatticeSpec:
    """Finite periodic momentum lattice.

    Parameters
    ----------
    modes_per_axis:
        Odd N >= 3; modes are indexed -M..M with M = (N - 1) // 2.
    dims:
        1 or 2 transverse dimensions.
    lambda_x:
        Characteristic spatial period; the momentum quantum is
        delta_k = 2 pi / lambda_x.
    """

    modes_per_axis: int
    dims: int = 1
    lambda_x: float = 1.0

    def __post_init__(self):
        if self.dims not in (1, 2):
            raise LatticeError(f"dims must be 1 or 2, got {self.dims}")
        n = self.modes_per_axis
        if not isinstance(n, (int, np.integer)) or n < 3 or n % 2 == 0:
            raise LatticeError(f"modes_per_axis must be odd and >= 3, got {n}")
        if self.lambda_x <= 0:
            raise LatticeError(f"lambda_x must be positive, got {self.lambda_x}")

    @property
    def half_span(self) -> int:
        return (self.modes_per_axis - 1) // 2

    @property
    def delta_k(self) -> float:
        return 2.0 * np.pi / self.lambda_x

    @property
    def size(self) -> int:
        """Total mode count N**dims."""
        return self.modes_per_axis ** self.dims

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.modes_per_axis,) * self.dims

    def indices(self) -> np.ndarray:
        """Signed per-axis indices -M..M."""
        m = self.half_span
        return np.arange(-m, m + 1)

    def offset(self, index) -> int:
        """Flat (row-major) offset of a signed mode index."""
        m = self.half_span
        if self.dims == 1:
            i = int(np.asarray(index).reshape(()))
            self._check_axis(i)
            return i + m
        ix, iy = (int(v) for v in index)
        self._check_axis(ix)
        self._check_axis(iy)
        return (ix + m) * self.modes_per_axis + (iy + m)

    def index_of(self, offset: int):
        """Inverse of :meth:`offset`."""
        m = self.half_span
        if self.dims == 1:
            return offset - m
        return (offset // self.modes_per_axis - m, offset % self.modes_per_axis - m)

    def basis_vector(self, index) -> np.ndarray:
        v = np.zeros(self.size, dtype=complex)
        v[self.offset(index)] = 1.0
        return v

    def _check_axis(self, i: int):
        if abs(i) > self.half_span:
            raise LatticeError(
                f"index component {i} outside -{self.half_span}..{self.half_span}"
            )


def negate_index(index, lattice: LatticeSpec):
    """Component-wise negation m -> -m (an involution; N odd keeps it closed)."""
    if lattice.dims == 1:
        i = int(np.asarray(index).reshape(()))
        lattice._check_axis(i)
        return -i
    ix, iy = (int(v) for v in index)
    lattice._check_axis(ix)
    lattice._check_axis(iy)
    return (-ix, -iy)


def negation_permutation(lattice: LatticeSpec) -> np.ndarray:
    """Flat offsets of the negated modes.

    Negation reverses every axis, which for a row-major layout is a full
    reversal of the flat index.
    """
    return np.arange(lattice.size)[::-1].copy()


@dataclass(frozen=True)
class StateVector:
    """Normalized single-photon state over lattice modes (flat layout)."""

    lattice: LatticeSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(self.lattice.size)
        object.__setattr__(self, "amplitudes", amp)
        amp.setflags(write=False)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm
        if n == 0.0:
            raise LatticeError("cannot normalize the zero state")
        return StateVector(self.lattice, self.amplitudes / n)

    def require_normalized(self, tol: float = NORM_TOL):
        if abs(self.norm - 1.0) > tol:
            raise LatticeError(f"state not normalized: |norm - 1| = {abs(self.norm - 1.0):.3e}")
        return self

    def amplitude(self, index) -> complex:
        return complex(self.amplitudes[self.lattice.offset(index)])


@dataclass(frozen=True)
class BiphotonState:
    """Two-photon amplitude tensor over (signal mode, idler mode) pairs."""

    lattice: LatticeSpec
    amplitudes: np.ndarray  # shape (size, size), [signal, idler]

    def __post_init__(self):
        d = self.lattice.size
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(d, d)
        object.__setattr__(self, "amplitudes", amp)
        amp.setflags(write=False)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def require_normalized(self, tol: float = NORM_TOL):
        if abs(self.norm - 1.0) > tol:
            raise LatticeError(f"biphoton state not normalized: norm = {self.norm!r}")
        return self

    def signal_marginal(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def idler_marginal(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=0)


@dataclass(frozen=True)
class Distribution:
    """Probability law P(m) over lattice modes."""

    lattice: LatticeSpec
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float).reshape(self.lattice.size)
        if np.any(p < -1e-15):
            raise LatticeError("negative probability entry")
        p = np.clip(p, 0.0, None)
        object.__setattr__(self, "probabilities", p)
        p.setflags(write=False)

    @property
    def total(self) -> float:
        return float(self.probabilities.sum())

    def renormalized(self) -> "Distribution":
        t = self.total
        if t <= 0.0:
            raise LatticeError("cannot renormalize an all-zero distribution")
        return Distribution(self.lattice, self.probabilities / t)

    def probability(self, index) -> float:
        return float(self.probabilities[self.lattice.offset(index)])

    def grid(self) -> np.ndarray:
        """Probabilities reshaped to the per-axis lattice grid."""
        return self.probabilities.reshape(self.lattice.shape)


def make_correlated_state(lattice: LatticeSpec) -> BiphotonState:
    """Momentum-anticorrelated pair: sum_k |k>_s |-k>_i / sqrt(N**dims)."""
    d = lattice.size
    amp = np.fliplr(np.eye(d, dtype=complex)) / np.sqrt(d)
    return BiphotonState(lattice, amp)


def _check_same_lattice(a: LatticeSpec, b: LatticeSpec):
    if a != b:
        raise LatticeError(f"lattice mismatch: {a} vs {b}")


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2; global-phase invariant and symmetric."""
    _check_same_lattice(a.lattice, b.lattice)
    ov = np.vdot(a.amplitudes, b.amplitudes)
    return float(min(abs(ov) ** 2, 1.0))


def distribution_of(s: StateVector) -> Distribution:
    """Occupation probabilities P(m) = |amplitude(m)|^2."""
    return Distribution(s.lattice, np.abs(s.amplitudes) ** 2)
