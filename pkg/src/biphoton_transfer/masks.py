"""Phase-mask grammar: superpositions of sinusoidal gratings plus linear ramps.

A mask is a sum of terms, each either

* a sinusoid ``amplitude * sin/cos(harmonic * delta_k * x_axis)``,
* a product of such factors across axes (e.g. ``a * sin(dk x) cos(dk y)``),
* or a linear ramp ``p * delta_k * x`` with integer p, which acts as an
  exact p-mode displacement and is kept symbolic instead of being sampled.

Masks are periodic with period lambda_x per axis; one period sampled at S
points per axis is all that kernel extraction needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeSpec, LatticeError

__all__ = [
    "MaskTerm",
    "MaskFactor",
    "PhaseMask",
    "MaskParseError",
    "UndersampledMaskError",
    "sample_phase",
    "parse_mask_terms",
    "load_mask_file",
    "PAPER_MASKS_1D",
    "PAPER_MASKS_2D",
]

DEFAULT_SAMPLES_1D = 256
DEFAULT_SAMPLES_2D = 128


class MaskParseError(ValueError):
    """Malformed mask term description."""


class UndersampledMaskError(LatticeError):
    """Mask sampled too coarsely for reliable kernel extraction."""


@dataclass(frozen=True)
class MaskFactor:
    fn: str          # "sin" | "cos"
    harmonic: int = 1
    axis: str = "x"  # "x" | "y"

    def __post_init__(self):
        if self.fn not in ("sin", "cos"):
            raise MaskParseError(f"factor fn must be sin|cos, got {self.fn!r}")
        if self.axis not in ("x", "y"):
            raise MaskParseError(f"factor axis must be x|y, got {self.axis!r}")
        if int(self.harmonic) < 1:
            raise MaskParseError(f"harmonic must be >= 1, got {self.harmonic}")


@dataclass(frozen=True)
class MaskTerm:
    """One additive contribution to the phase profile."""

    amplitude: float
    factors: tuple[MaskFactor, ...] = ()
    linear_axis: str | None = None  # set for ramp terms; amplitude must be integer

    def __post_init__(self):
        if self.linear_axis is None:
            if not self.factors:
                raise MaskParseError("non-linear term needs at least one factor")
        else:
            if self.factors:
                raise MaskParseError("linear term takes no sinusoidal factors")
            if abs(self.amplitude - round(self.amplitude)) > 1e-12:
                raise MaskParseError(
                    f"linear coefficient must be an integer multiple of delta_k, "
                    f"got {self.amplitude}"
                )


@dataclass(frozen=True)
class PhaseMask:
    """Sampled one-period phase grid plus symbolic integer linear shifts."""

    lattice: LatticeSpec
    terms: tuple[MaskTerm, ...]
    samples_per_period: int = 0  # 0 -> per-dims default

    def __post_init__(self):
        s = self.samples_per_period
        if s == 0:
            s = DEFAULT_SAMPLES_1D if self.lattice.dims == 1 else DEFAULT_SAMPLES_2D
            object.__setattr__(self, "samples_per_period", s)
        if self.samples_per_period < 8 * self.lattice.half_span:
            raise UndersampledMaskError(
                f"samples_per_period = {self.samples_per_period} undersamples the "
                f"lattice (need >= 8 M = {8 * self.lattice.half_span})"
            )

    @property
    def linear_shift(self) -> tuple[int, ...]:
        """Integer mode displacement per axis from ramp terms."""
        shift = {"x": 0, "y": 0}
        for t in self.terms:
            if t.linear_axis is not None:
                shift[t.linear_axis] += int(round(t.amplitude))
        if self.lattice.dims == 1:
            return (shift["x"],)
        return (shift["x"], shift["y"])

    def phase_grid(self, include_linear: bool = False) -> np.ndarray:
        """Real phase over one period: shape (S,) in 1D, (S, S) in 2D (x, y)."""
        return sample_phase(self, include_linear=include_linear)

    def phase_at(self, x, y=None, include_linear: bool = True):
        """Evaluate the analytic phase at physical coordinates."""
        dk = self.lattice.delta_k
        x = np.asarray(x, dtype=float)
        coords = {"x": x}
        if self.lattice.dims == 2:
            if y is None:
                raise LatticeError("2D mask needs both x and y")
            coords["y"] = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(*coords.values()).shape)
        for t in self.terms:
            if t.linear_axis is not None:
                if include_linear:
                    out = out + t.amplitude * dk * coords[t.linear_axis]
                continue
            term = np.full_like(out, t.amplitude)
            for f in t.factors:
                trig = np.sin if f.fn == "sin" else np.cos
                term = term * trig(f.harmonic * dk * coords[f.axis])
            out = out + term
        return out


def sample_phase(mask: PhaseMask, include_linear: bool = False) -> np.ndarray:
    s = mask.samples_per_period
    lam = mask.lattice.lambda_x
    x = np.arange(s) * (lam / s)
    if mask.lattice.dims == 1:
        return mask.phase_at(x, include_linear=include_linear)
    gx, gy = np.meshgrid(x, x, indexing="ij")
    return mask.phase_at(gx, gy, include_linear=include_linear)


def parse_mask_terms(entries, lattice: LatticeSpec,
                     samples_per_period: int = 0) -> PhaseMask:
    """Build a PhaseMask from a list of term dictionaries.

    Term forms::

        {"fn": "sin"|"cos", "amplitude": a, "harmonic": n, "axis": "x"|"y"}
        {"fn": "linear", "amplitude": p, "axis": "x"|"y"}    # integer p
        {"fn": "product", "amplitude": a, "factors": [{...}, {...}]}
    """
    terms = []
    for i, e in enumerate(entries):
        try:
            fn = e["fn"]
            amp = float(e["amplitude"])
            if fn == "linear":
                terms.append(MaskTerm(amp, linear_axis=e.get("axis", "x")))
            elif fn == "product":
                factors = tuple(
                    MaskFactor(f["fn"], int(f.get("harmonic", 1)), f.get("axis", "x"))
                    for f in e["factors"]
                )
                terms.append(MaskTerm(amp, factors))
            elif fn in ("sin", "cos"):
                terms.append(MaskTerm(
                    amp,
                    (MaskFactor(fn, int(e.get("harmonic", 1)), e.get("axis", "x")),),
                ))
            else:
                raise MaskParseError(f"unknown term fn {fn!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise MaskParseError(f"mask term {i}: {exc}") from exc
    for t in terms:
        if lattice.dims == 1:
            axes = {f.axis for f in t.factors} | ({t.linear_axis} - {None})
            if "y" in axes:
                raise MaskParseError("y-axis term in a 1D mask")
    return PhaseMask(lattice, tuple(terms), samples_per_period)


def load_mask_file(path, samples_per_period: int = 0) -> PhaseMask:
    """Read a mask description file.

    Format (lines; '#' comments allowed)::

        dims 1
        lambda 0.142857
        modes 31
        term sin 1.9 harmonic=1 axis=x
        term linear 1 axis=x
        term product 2.8 sin:1:x cos:1:y
    """
    dims = None
    lam = None
    modes = None
    entries = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            key = parts[0].lower()
            try:
                if key == "dims":
                    dims = int(parts[1])
                elif key == "lambda":
                    lam = float(parts[1])
                elif key == "modes":
                    modes = int(parts[1])
                elif key == "term":
                    entries.append(_parse_term_line(parts[1:]))
                else:
                    raise MaskParseError(f"unknown directive {key!r}")
            except (IndexError, ValueError, MaskParseError) as exc:
                raise MaskParseError(f"{path}:{lineno}: {exc}") from exc
    if dims is None or lam is None or modes is None:
        raise MaskParseError(f"{path}: dims, lambda, and modes are all required")
    lattice = LatticeSpec(modes, dims, lam)
    return parse_mask_terms(entries, lattice, samples_per_period)


def _parse_term_line(parts):
    fn = parts[0].lower()
    if fn not in ("sin", "cos", "linear", "product"):
        raise MaskParseError(f"unknown term fn {fn!r}")
    amp = float(parts[1])
    if fn == "product":
        factors = []
        for spec in parts[2:]:
            bits = spec.split(":")
            factors.append({"fn": bits[0], "harmonic": int(bits[1]), "axis": bits[2]})
        return {"fn": "product", "amplitude": amp, "factors": factors}
    entry = {"fn": fn, "amplitude": amp}
    for opt in parts[2:]:
        k, v = opt.split("=")
        entry[k] = v if k == "axis" else int(v)
    return entry


def _sin(a, n=1, axis="x"):
    return {"fn": "sin", "amplitude": a, "harmonic": n, "axis": axis}


def _cos(a, n=1, axis="x"):
    return {"fn": "cos", "amplitude": a, "harmonic": n, "axis": axis}


# The four 1D and two 2D gratings used throughout the bundled scenarios.
PAPER_MASKS_1D = {
    "phi1": [_sin(1.3, 1), _cos(1.5, 2)],
    "phi2": [_sin(1.9, 1)],
    "phi3": [_cos(1.0, 1)],
    "phi4": [_cos(1.0, 1), {"fn": "linear", "amplitude": 1, "axis": "x"}],
}

PAPER_MASKS_2D = {
    "phi1": [{"fn": "product", "amplitude": 2.8,
              "factors": [{"fn": "sin", "harmonic": 1, "axis": "x"},
                          {"fn": "cos", "harmonic": 1, "axis": "y"}]}],
    "phi2": [_sin(1.4, 1, "x"), _sin(1.4, 1, "y")],
}
