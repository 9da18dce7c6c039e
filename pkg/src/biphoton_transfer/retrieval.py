"""Two-plane Gerchberg-Saxton phase retrieval with multi-restart selection.

The iteration alternates between imposing the near-field amplitude and the
far-field amplitude (square root of the measured intensity), both on grids
of identical size. Restarts differ only in the seeded random initial
phase; the best run minimizes the summed pixel distance between the
reconstructed and measured near-field amplitudes.

The recorded per-iteration trace uses the summed squared amplitude
deviation, which is guaranteed non-increasing for this iteration; the
plain summed distance (used for best-run selection) is not monotone and
can fluctuate by percent-level amounts near convergence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeError
from .optics import PixelImage

__all__ = [
    "GsConfig",
    "GsResult",
    "gs_retrieve",
    "align_phase",
    "error_metric",
    "forward_far_intensity",
    "wrap_phase",
]


@dataclass(frozen=True)
class GsConfig:
    n_runs: int = 200
    n_iters: int = 200
    seed: int = 0
    stop_tolerance: float | None = None  # improvement over 10 iterations
    selection_metric: str = "l1"         # "l1" | "l2"

    def __post_init__(self):
        if self.n_runs < 1 or self.n_iters < 1:
            raise LatticeError("n_runs and n_iters must be >= 1")
        if self.selection_metric not in ("l1", "l2"):
            raise LatticeError("selection_metric must be 'l1' or 'l2'")


@dataclass(frozen=True)
class GsResult:
    phase: np.ndarray          # retrieved phase of the best run
    error_trace: np.ndarray    # (n_runs, n_iters) monotone squared-error trace
    selection_errors: np.ndarray  # final per-run summed distance
    best_run_index: int
    final_error: float
    iterations_run: int


def wrap_phase(p: np.ndarray) -> np.ndarray:
    """Map phase differences to (-pi, pi]."""
    return np.angle(np.exp(1j * p))


def error_metric(field_grid: np.ndarray, near_amp: np.ndarray,
                 metric: str = "l1") -> float:
    """Summed pixel distance between |field| and the measured amplitude."""
    d = np.abs(np.abs(field_grid) - near_amp)
    if metric == "l1":
        return float(d.sum())
    return float((d**2).sum())


def forward_far_intensity(near_amp: np.ndarray, phase: np.ndarray) -> PixelImage:
    """Conjugate-plane intensity of near_amp * exp(i phase) (same grid size)."""
    f = np.fft.fftn(near_amp * np.exp(1j * phase))
    return PixelImage(np.fft.fftshift(np.abs(f) ** 2), pixels_per_mode=1)


def gs_retrieve(near_amp: np.ndarray, far_intensity, cfg: GsConfig) -> GsResult:
    """Retrieve the near-field phase from the two conjugate-plane amplitudes.

    ``far_intensity`` may be a PixelImage (centered) or a raw centered
    array of the same shape as ``near_amp``.
    """
    near_amp = np.asarray(near_amp, dtype=float)
    inten = far_intensity.intensity if isinstance(far_intensity, PixelImage) \
        else np.asarray(far_intensity, dtype=float)
    if inten.shape != near_amp.shape:
        raise LatticeError(
            f"far grid {inten.shape} does not match near grid {near_amp.shape}"
        )
    if not (np.all(np.isfinite(inten)) and np.all(np.isfinite(near_amp))):
        raise LatticeError("non-finite intensity or amplitude input")
    far_amp = np.sqrt(np.fft.ifftshift(np.clip(inten, 0.0, None)))

    axes = tuple(range(1, near_amp.ndim + 1))
    rng = np.random.default_rng(cfg.seed)
    theta0 = rng.uniform(0.0, 2.0 * np.pi, (cfg.n_runs,) + near_amp.shape)
    field_grid = near_amp[None] * np.exp(1j * theta0)

    trace = np.zeros((cfg.n_runs, cfg.n_iters))
    sel = np.zeros(cfg.n_runs)
    g = field_grid
    it_done = 0
    for it in range(cfg.n_iters):
        f = np.fft.fftn(field_grid, axes=axes)
        f = far_amp[None] * np.exp(1j * np.angle(f))
        g = np.fft.ifftn(f, axes=axes)
        dev = np.abs(np.abs(g) - near_amp[None])
        trace[:, it] = (dev**2).sum(axis=axes)
        sel = dev.sum(axis=axes) if cfg.selection_metric == "l1" \
            else trace[:, it]
        field_grid = near_amp[None] * np.exp(1j * np.angle(g))
        it_done = it + 1
        if cfg.stop_tolerance is not None and it >= 10:
            if np.max(trace[:, it - 10] - trace[:, it]) < cfg.stop_tolerance:
                trace = trace[:, : it + 1]
                break
    best = int(np.argmin(sel))
    return GsResult(
        phase=np.angle(g[best]),
        error_trace=trace,
        selection_errors=sel,
        best_run_index=best,
        final_error=float(sel[best]),
        iterations_run=it_done,
    )


def _reflect(arr: np.ndarray) -> np.ndarray:
    """Grid version of x -> -x (index 0 stays put on a periodic grid)."""
    out = arr
    for ax in range(arr.ndim):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


def align_phase(retrieved: np.ndarray, reference: np.ndarray,
                weights: np.ndarray | None = None,
                search_shifts: bool = True):
    """Align a retrieved phase to a reference modulo the GS ambiguities.

    Removes the weighted circular-mean global offset, searches circular
    spatial shifts (uniform near amplitude makes every shift an exact
    degenerate solution), and tests the conjugate-and-reflect twin.

    Returns ``(aligned, residual_rms, twin_flag)``.
    """
    retrieved = np.asarray(retrieved, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if retrieved.shape != reference.shape:
        raise LatticeError("grid size mismatch")
    w = np.ones_like(reference) if weights is None else np.asarray(weights, dtype=float)
    w = w / w.sum()
    z_ref = np.exp(1j * reference)

    best = None
    for is_twin, cand in ((False, retrieved), (True, -_reflect(retrieved))):
        z_c = np.exp(1j * cand)
        if search_shifts:
            # corr[a] = sum_x z_c(x + a) conj(z_ref(x)); rolling by -a aligns
            corr = np.fft.ifftn(np.fft.fftn(z_c) * np.conj(np.fft.fftn(z_ref)))
            peak = np.unravel_index(np.argmax(np.abs(corr)), corr.shape)
            shift = tuple(int(-p) % n for p, n in zip(peak, corr.shape))
        else:
            shift = (0,) * retrieved.ndim
        cand_shifted = np.roll(cand, shift, axis=tuple(range(retrieved.ndim)))
        offset = np.angle(np.sum(w * np.exp(1j * (cand_shifted - reference))))
        aligned = cand_shifted - offset
        resid = wrap_phase(aligned - reference)
        rms = float(np.sqrt(np.sum(w * resid**2)))
        if best is None or rms < best[1]:
            best = (aligned, rms, is_twin)
    aligned, rms, is_twin = best
    twin_flag = bool(is_twin and rms < 0.5)  # only flag a meaningful twin match
    return aligned, rms, twin_flag
