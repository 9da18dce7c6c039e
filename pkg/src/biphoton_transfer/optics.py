"""Sampled-field optical bench: holograms, far field, camera binning, noise.

The hologram plane holds one period of the mask (or its Bolduc phase-
amplitude encoding on a blazed carrier); the camera sits in the Fourier
plane, where lattice modes land every ``pixels_per_mode`` pixels. Poisson
shot noise turns theory distributions into synthetic experimental ones,
compared through the Bhattacharyya-squared similarity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Distribution, LatticeError, LatticeSpec
from .masks import PhaseMask
from .unitaries import ConvolutionKernel

__all__ = [
    "HologramSpec",
    "CameraSpec",
    "PixelImage",
    "synthesize_hologram",
    "extract_first_order",
    "field_from_kernel",
    "far_field",
    "bin_to_modes",
    "windowed_distribution",
    "sample_poisson",
    "similarity",
    "add_zeroth_order_leakage",
    "total_variation",
]

DEFAULT_CARRIER_RATIO = 50  # lambda_x / lambda_y of the blazed carrier
DEFAULT_CARRIER_SAMPLES = 32  # samples per carrier period along y


@dataclass(frozen=True)
class HologramSpec:
    """Phase-only or Bolduc phase-amplitude hologram of a target field."""

    mask: PhaseMask
    amplitude: np.ndarray | None = None  # target |field| in [0, 1], per x sample
    phase_override: np.ndarray | None = None  # target arg(field); defaults to mask
    encode_mode: str = "phase-only"  # "phase-only" | "bolduc"
    carrier_ratio: int = DEFAULT_CARRIER_RATIO  # lambda_x / lambda_y

    def __post_init__(self):
        if self.encode_mode not in ("phase-only", "bolduc"):
            raise LatticeError(f"unknown encode_mode {self.encode_mode!r}")
        if self.encode_mode == "bolduc":
            if self.carrier_ratio <= 10:
                raise LatticeError(
                    "bolduc carrier must satisfy lambda_y < lambda_x / 10"
                )
            if self.amplitude is not None:
                a = np.asarray(self.amplitude, dtype=float)
                if np.any(a < 0) or np.any(a > 1 + 1e-12):
                    raise LatticeError("amplitude target must lie in [0, 1]")


@dataclass(frozen=True)
class CameraSpec:
    pixels_per_mode: int = 5
    window: int = 9              # displayed modes: |m| <= window per axis
    counts_total: float = 1e4    # expected photons for noise sampling

    def __post_init__(self):
        if self.pixels_per_mode < 1:
            raise LatticeError("pixels_per_mode must be >= 1")
        if self.window < 0:
            raise LatticeError("window must be >= 0")


@dataclass(frozen=True)
class PixelImage:
    """Non-negative intensity grid in the camera plane."""

    intensity: np.ndarray
    pixels_per_mode: int
    pixel_pitch: float = 1.0

    def __post_init__(self):
        arr = np.asarray(self.intensity, dtype=float)
        if np.any(arr < 0):
            raise LatticeError("negative intensity")
        object.__setattr__(self, "intensity", arr)
        arr.setflags(write=False)


def _sinc_inverse(a: np.ndarray) -> np.ndarray:
    """Solve sinc(s) = a for s in [0, 1]; sinc(s) = sin(pi s) / (pi s)."""
    s = np.linspace(0.0, 1.0, 4097)
    vals = np.sinc(s)  # numpy sinc is the normalized one
    # sinc is decreasing on [0, 1]; interp needs ascending sample points
    return np.interp(np.clip(a, 0.0, 1.0), vals[::-1], s[::-1])


def synthesize_hologram(spec: HologramSpec) -> np.ndarray:
    """Full 2D sampled phase grid (y rows, x columns) over one mask period.

    Phase-only mode replicates phi(x) along y. Bolduc mode returns the
    single phase grid whose first diffraction order along y carries
    a(x) exp(i phi(x)): Phi = M * Mod(F + 2 pi y / lambda_y, 2 pi) with
    sinc(1 - M) = a and F = phi + pi (1 - M).
    """
    mask = spec.mask
    if mask.lattice.dims != 1:
        raise LatticeError("hologram synthesis operates on 1D masks")
    phi = (mask.phase_grid(include_linear=True)
           if spec.phase_override is None else
           np.asarray(spec.phase_override, dtype=float))
    s_x = phi.shape[0]
    if spec.encode_mode == "phase-only":
        s_y = s_x
        return np.broadcast_to(phi, (s_y, s_x)).copy()
    a = (np.ones(s_x) if spec.amplitude is None
         else np.asarray(spec.amplitude, dtype=float))
    s_dev = _sinc_inverse(a)          # 1 - M
    m_mod = 1.0 - s_dev
    f_phase = phi + np.pi * s_dev     # compensates the carrier-order phase
    s_y = spec.carrier_ratio * DEFAULT_CARRIER_SAMPLES
    y = np.arange(s_y) / s_y          # in units of lambda_x
    carrier = 2.0 * np.pi * spec.carrier_ratio * y
    theta = np.mod(f_phase[None, :] + carrier[:, None], 2.0 * np.pi)
    return m_mod[None, :] * theta


def extract_first_order(hologram: np.ndarray, carrier_ratio: int) -> np.ndarray:
    """Demodulated first-diffraction-order field a(x) exp(i phi(x)).

    Crops the single y-frequency bin at the carrier (a band one mode
    spacing wide) of the one-period hologram grid.
    """
    s_y = hologram.shape[0]
    spectrum = np.fft.fft(np.exp(1j * hologram), axis=0) / s_y
    return spectrum[carrier_ratio % s_y, :]


def field_from_kernel(kernel: ConvolutionKernel, samples: int) -> np.ndarray:
    """Real-space field sum_m v_m exp(i m delta_k x) over one period (1D)."""
    if kernel.lattice.dims != 1:
        raise LatticeError("field_from_kernel supports 1D kernels")
    m = kernel.lattice.half_span
    x = np.arange(samples) / samples  # in periods
    modes = np.arange(-m, m + 1)
    return kernel.u @ np.exp(2j * np.pi * np.outer(modes, x))


def far_field(field, pixels_per_mode: int = 5,
              is_phase: bool = False) -> PixelImage:
    """Centered squared-magnitude DFT of the tiled aperture field.

    The one-period field is tiled ``pixels_per_mode`` times per axis, which
    makes the lattice modes land exactly every ``pixels_per_mode`` pixels
    in the Fourier plane.
    """
    if isinstance(field, PhaseMask):
        arr = np.exp(1j * field.phase_grid(include_linear=True))
    else:
        arr = np.exp(1j * np.asarray(field)) if is_phase else np.asarray(field, dtype=complex)
    reps = pixels_per_mode
    if arr.ndim == 1:
        tiled = np.tile(arr, reps)
        spot = np.fft.fftshift(np.fft.fft(tiled))
    elif arr.ndim == 2:
        tiled = np.tile(arr, (reps, reps))
        spot = np.fft.fftshift(np.fft.fft2(tiled))
    else:
        raise LatticeError("far_field expects a 1D or 2D field")
    return PixelImage(np.abs(spot) ** 2, pixels_per_mode)


def bin_to_modes(img: PixelImage, cam: CameraSpec) -> tuple[Distribution, float]:
    """Sum mode-centered pixel bins and renormalize over the window.

    Returns the windowed distribution and the out-of-window leakage
    fraction of the total intensity.
    """
    if cam.pixels_per_mode != img.pixels_per_mode:
        raise LatticeError("camera pixels_per_mode disagrees with the image metadata")
    r = img.pixels_per_mode
    w = cam.window
    half = r // 2
    arr = img.intensity
    dims = arr.ndim
    length = arr.shape[0]
    center = length // 2
    if center + w * r + half >= length or center - w * r - half < 0:
        raise LatticeError("mode window exceeds the image extent")
    modes = np.arange(-w, w + 1)
    if dims == 1:
        vals = np.array([
            arr[center + m * r - half: center + m * r + half + 1].sum()
            for m in modes
        ])
    else:
        vals = np.array([
            [arr[center + mx * r - half: center + mx * r + half + 1,
                 center + my * r - half: center + my * r + half + 1].sum()
             for my in modes]
            for mx in modes
        ])
    total = float(arr.sum())
    in_window = float(vals.sum())
    leakage = 0.0 if total == 0 else max(0.0, 1.0 - in_window / total)
    window_lattice = LatticeSpec(2 * w + 1, dims, 1.0)
    dist = Distribution(window_lattice, vals.reshape(window_lattice.size) / in_window)
    return dist, leakage


def windowed_distribution(source, window: int) -> Distribution:
    """Restrict a mode distribution (or kernel) to |m| <= window and renormalize."""
    if isinstance(source, ConvolutionKernel):
        probs = source.probabilities()
        lattice = source.lattice
    elif isinstance(source, Distribution):
        probs = source.grid()
        lattice = source.lattice
    else:
        raise LatticeError("windowed_distribution expects a Distribution or kernel")
    m = lattice.half_span
    if window > m:
        raise LatticeError(f"window {window} exceeds lattice half-span {m}")
    sl = slice(m - window, m + window + 1)
    block = probs[sl] if lattice.dims == 1 else probs[sl, sl]
    window_lattice = LatticeSpec(2 * window + 1, lattice.dims, 1.0)
    return Distribution(window_lattice, block.reshape(window_lattice.size) / block.sum())


def sample_poisson(p: Distribution, counts_total: float, seed: int):
    """Independent Poisson draws with means counts_total * P(m).

    Returns ``(empirical, counts)``; ``empirical`` is None when no photon
    was recorded (similarity is then undefined).
    """
    rng = np.random.default_rng(seed)
    counts = rng.poisson(counts_total * p.probabilities)
    total = counts.sum()
    if total == 0:
        return None, counts
    return Distribution(p.lattice, counts / total), counts


def similarity(p_exp: Distribution, p_th: Distribution) -> float:
    """Bhattacharyya-squared estimator s = (sum_m sqrt(P_exp P_th))^2."""
    if p_exp.lattice != p_th.lattice:
        raise LatticeError("similarity needs distributions on the same window")
    a = p_exp.probabilities / p_exp.total
    b = p_th.probabilities / p_th.total
    s = float(np.sum(np.sqrt(a * b)) ** 2)
    return min(s, 1.0)


def add_zeroth_order_leakage(p: Distribution, eps: float) -> Distribution:
    """Mix in undiffracted light: add eps at m = 0 and renormalize."""
    if eps < 0:
        raise LatticeError("leakage must be non-negative")
    probs = p.probabilities.copy()
    probs[p.lattice.offset(0 if p.lattice.dims == 1 else (0, 0))] += eps
    return Distribution(p.lattice, probs / probs.sum())


def total_variation(p: Distribution, q: Distribution) -> float:
    if p.lattice != q.lattice:
        raise LatticeError("total variation needs a common window")
    return 0.5 * float(np.abs(p.probabilities / p.total - q.probabilities / q.total).sum())
