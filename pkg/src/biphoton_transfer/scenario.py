"""Scenario files and the end-to-end pipeline they drive.

A scenario bundles a lattice, a phase mask (or a seeded dense unitary),
an input state, camera and noise settings, and retrieval configuration.
Scenarios are TOML documents (JSON is accepted as an alternate encoding);
every random choice flows from seeds declared in the file.
"""

from __future__ import annotations

import json
import os
import time
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, asdict

import numpy as np

from .gridio import (
    atomic_write_text,
    save_distribution_csv,
    save_grid_csv,
    _fmt,
)
from .lattice import (
    Distribution,
    LatticeError,
    LatticeSpec,
    StateVector,
)
from .masks import PhaseMask, parse_mask_terms
from .optics import (
    DEFAULT_CARRIER_RATIO,
    CameraSpec,
    HologramSpec,
    bin_to_modes,
    extract_first_order,
    far_field,
    field_from_kernel,
    sample_poisson,
    similarity,
    synthesize_hologram,
    total_variation,
    windowed_distribution,
)
from .retrieval import GsConfig, align_phase, forward_far_intensity, gs_retrieve
from .transfer import (
    kernel_output_distribution,
    transfer_general,
    transfer_kernel_route,
)
from .unitaries import dense_from_kernel, kernel_from_phase, random_unitary

__all__ = [
    "Scenario",
    "ScenarioError",
    "RunReport",
    "load_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "serialize_scenario",
    "run_scenario",
    "run_suite",
    "emit_plot_data",
]


class ScenarioError(ValueError):
    """Malformed scenario document."""


@dataclass(frozen=True)
class Scenario:
    name: str
    lattice: LatticeSpec
    mask_terms: tuple | None = None           # raw term dicts, or None
    mask_samples: int = 0
    unitary_seed: int | None = None           # dense random unitary instead of mask
    input_modes: tuple = (0,)
    input_coefficients: tuple = ((1.0, 0.0),)  # complex as (re, im)
    projection_k0: int | tuple = 0
    camera: CameraSpec = field(default_factory=CameraSpec)
    noise_seed: int = 0
    gs: GsConfig = field(default_factory=GsConfig)
    output_directory: str = "out"

    def input_state(self) -> StateVector:
        amp = np.zeros(self.lattice.size, dtype=complex)
        for mode, (re, im) in zip(self.input_modes, self.input_coefficients):
            amp[self.lattice.offset(mode)] = re + 1j * im
        return StateVector(self.lattice, amp).normalized()

    def mask(self) -> PhaseMask | None:
        if self.mask_terms is None:
            return None
        return parse_mask_terms(list(self.mask_terms), self.lattice, self.mask_samples)


def scenario_from_dict(doc: dict, origin: str = "<scenario>") -> Scenario:
    try:
        lat = doc["lattice"]
        lattice = LatticeSpec(
            int(lat["modes_per_axis"]),
            int(lat.get("dims", 1)),
            float(lat.get("lambda_x", 1.0)),
        )
        mask_terms = None
        mask_samples = 0
        unitary_seed = None
        if "mask" in doc:
            mask_terms = tuple(dict(t) for t in doc["mask"]["terms"])
            mask_samples = int(doc["mask"].get("samples_per_period", 0))
        if "unitary" in doc:
            unitary_seed = int(doc["unitary"]["seed"])
        if (mask_terms is None) == (unitary_seed is None):
            raise ScenarioError("exactly one of [mask] or [unitary] is required")
        inp = doc.get("input", {})
        modes = inp.get("modes", [0] if lattice.dims == 1 else [[0, 0]])
        modes = tuple(tuple(m) if isinstance(m, list) else int(m) for m in modes)
        coeffs = tuple(tuple(float(v) for v in c)
                       for c in inp.get("coefficients", [[1.0, 0.0]]))
        if len(modes) != len(coeffs):
            raise ScenarioError("input modes and coefficients differ in length")
        proj = doc.get("projection", {}).get("k0", 0 if lattice.dims == 1 else [0, 0])
        proj = tuple(proj) if isinstance(proj, list) else int(proj)
        cam = doc.get("camera", {})
        camera = CameraSpec(
            int(cam.get("pixels_per_mode", 5)),
            int(cam.get("window", 9)),
            float(cam.get("counts_total", 1e4)),
        )
        if camera.window > lattice.half_span:
            raise ScenarioError(
                f"camera window {camera.window} exceeds lattice half-span "
                f"{lattice.half_span}"
            )
        gs_doc = doc.get("gs", {})
        gs = GsConfig(
            int(gs_doc.get("n_runs", 200 if lattice.dims == 1 else 100)),
            int(gs_doc.get("n_iters", 200 if lattice.dims == 1 else 100)),
            int(gs_doc.get("seed", 0)),
            gs_doc.get("stop_tolerance"),
            gs_doc.get("selection_metric", "l1"),
        )
        return Scenario(
            name=str(doc.get("name", os.path.splitext(os.path.basename(origin))[0])),
            lattice=lattice,
            mask_terms=mask_terms,
            mask_samples=mask_samples,
            unitary_seed=unitary_seed,
            input_modes=modes,
            input_coefficients=coeffs,
            projection_k0=proj,
            camera=camera,
            noise_seed=int(doc.get("noise", {}).get("seed", 0)),
            gs=gs,
            output_directory=str(doc.get("output", {}).get("directory", "out")),
        )
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, LatticeError) as exc:
        raise ScenarioError(f"{origin}: {exc}") from exc


def load_scenario(path) -> Scenario:
    try:
        if str(path).endswith(".json"):
            with open(path) as fh:
                doc = json.load(fh)
        else:
            with open(path, "rb") as fh:
                doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: top-level document must be a table")
    return scenario_from_dict(doc, origin=str(path))


def scenario_to_dict(sc: Scenario) -> dict:
    doc: dict = {
        "name": sc.name,
        "lattice": {
            "dims": sc.lattice.dims,
            "modes_per_axis": sc.lattice.modes_per_axis,
            "lambda_x": sc.lattice.lambda_x,
        },
        "input": {
            "modes": [list(m) if isinstance(m, tuple) else m for m in sc.input_modes],
            "coefficients": [list(c) for c in sc.input_coefficients],
        },
        "projection": {"k0": list(sc.projection_k0)
                       if isinstance(sc.projection_k0, tuple) else sc.projection_k0},
        "camera": {
            "pixels_per_mode": sc.camera.pixels_per_mode,
            "window": sc.camera.window,
            "counts_total": sc.camera.counts_total,
        },
        "noise": {"seed": sc.noise_seed},
        "gs": {
            "n_runs": sc.gs.n_runs,
            "n_iters": sc.gs.n_iters,
            "seed": sc.gs.seed,
            "selection_metric": sc.gs.selection_metric,
        },
        "output": {"directory": sc.output_directory},
    }
    if sc.gs.stop_tolerance is not None:
        doc["gs"]["stop_tolerance"] = sc.gs.stop_tolerance
    if sc.mask_terms is not None:
        doc["mask"] = {"terms": [dict(t) for t in sc.mask_terms]}
        if sc.mask_samples:
            doc["mask"]["samples_per_period"] = sc.mask_samples
    if sc.unitary_seed is not None:
        doc["unitary"] = {"seed": sc.unitary_seed}
    return doc


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return _fmt(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k} = {_toml_value(x)}" for k, x in v.items()) + "}"
    raise ScenarioError(f"cannot serialize value {v!r}")


def serialize_scenario(sc: Scenario) -> str:
    """Canonical TOML rendering (round-trips through load)."""
    doc = scenario_to_dict(sc)
    lines = [f"name = {_toml_value(doc['name'])}", ""]
    for section in ("lattice", "mask", "unitary", "input", "projection",
                    "camera", "noise", "gs", "output"):
        if section not in doc:
            continue
        lines.append(f"[{section}]")
        for k, v in doc[section].items():
            lines.append(f"{k} = {_toml_value(v)}")
        lines.append("")
    return "\n".join(lines)


@dataclass
class RunReport:
    name: str
    dims: int
    modes_per_axis: int
    transfer_fidelity: float
    success_probability: float
    route_total_variation: float | None
    theory_window: list
    sampled_window: list | None
    counts_total: float | None
    similarity_noiseless: float | None
    similarity_noisy: float | None
    window_leakage: float | None
    gs_rms_error: float | None
    gs_best_run: int | None
    gs_monotone: bool | None
    timings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def run_scenario(sc: Scenario, out_dir: str | None = None,
                 run_gs: bool = True, run_optics: bool = True) -> RunReport:
    """Execute transfer -> optics -> noise -> similarity -> retrieval."""
    t0 = time.perf_counter()
    timings: dict = {}
    out = out_dir or sc.output_directory
    lattice = sc.lattice
    phi0 = sc.input_state()
    mask = sc.mask()

    if mask is not None:
        kernel = kernel_from_phase(mask)
        u_op = dense_from_kernel(kernel)
    else:
        kernel = None
        u_op = random_unitary(lattice, sc.unitary_seed)

    result = transfer_general(u_op, phi0)
    timings["transfer_s"] = time.perf_counter() - t0

    route_tv = None
    theory_windowed = None
    v_kernel = None
    if kernel is not None:
        v_kernel = transfer_kernel_route(kernel, phi0)
        dense_dist = Distribution(
            lattice, np.abs(result.idler_state.amplitudes) ** 2)
        route_tv = total_variation(
            kernel_output_distribution(v_kernel), dense_dist.renormalized())
        theory_windowed = windowed_distribution(
            kernel_output_distribution(v_kernel), sc.camera.window)

    sampled = sim_noiseless = sim_noisy = leak = None
    counts = None
    binned = None
    if run_optics and kernel is not None:
        t1 = time.perf_counter()
        localized = len(sc.input_modes) == 1 and not any(
            np.atleast_1d(sc.input_modes[0]))
        if lattice.dims == 2 or localized:
            img = far_field(mask, sc.camera.pixels_per_mode)
        else:
            # amplitude-and-phase target: encode the convolved kernel field
            s_x = mask.samples_per_period
            target = field_from_kernel(v_kernel, s_x)
            holo = synthesize_hologram(HologramSpec(
                mask,
                amplitude=np.abs(target) / np.abs(target).max(),
                phase_override=np.angle(target),
                encode_mode="bolduc",
            ))
            extracted = extract_first_order(holo, DEFAULT_CARRIER_RATIO)
            img = far_field(extracted, sc.camera.pixels_per_mode)
        binned, leak = bin_to_modes(img, sc.camera)
        sim_noiseless = similarity(binned, theory_windowed)
        sampled_dist, counts = sample_poisson(
            binned, sc.camera.counts_total, sc.noise_seed)
        if sampled_dist is not None:
            sim_noisy = similarity(sampled_dist, theory_windowed)
            sampled = sampled_dist
        timings["optics_s"] = time.perf_counter() - t1

    gs_rms = gs_best = gs_mono = None
    if run_gs and mask is not None:
        t2 = time.perf_counter()
        phase_ref = mask.phase_grid(include_linear=True)
        near_amp = np.ones_like(phase_ref)
        near_amp = near_amp / np.sqrt(near_amp.size)
        far_int = forward_far_intensity(near_amp, phase_ref)
        gs_result = gs_retrieve(near_amp, far_int, sc.gs)
        _, gs_rms, _ = align_phase(gs_result.phase, phase_ref)
        gs_best = gs_result.best_run_index
        diffs = np.diff(gs_result.error_trace, axis=1)
        gs_mono = bool(np.max(diffs, initial=-np.inf) <= 1e-12)
        timings["gs_s"] = time.perf_counter() - t2

    timings["total_s"] = time.perf_counter() - t0
    report = RunReport(
        name=sc.name,
        dims=lattice.dims,
        modes_per_axis=lattice.modes_per_axis,
        transfer_fidelity=result.fidelity_vs_direct,
        success_probability=result.success_probability,
        route_total_variation=route_tv,
        theory_window=(theory_windowed.probabilities.tolist()
                       if theory_windowed is not None else
                       (np.abs(result.idler_state.amplitudes) ** 2).tolist()),
        sampled_window=sampled.probabilities.tolist() if sampled is not None else None,
        counts_total=sc.camera.counts_total if sampled is not None else None,
        similarity_noiseless=sim_noiseless,
        similarity_noisy=sim_noisy,
        window_leakage=leak,
        gs_rms_error=gs_rms,
        gs_best_run=gs_best,
        gs_monotone=gs_mono,
        timings=timings,
    )

    if out:
        os.makedirs(out, exist_ok=True)
        if theory_windowed is not None:
            save_distribution_csv(os.path.join(out, "distribution_theory.csv"),
                                  theory_windowed)
        if sampled is not None:
            save_distribution_csv(os.path.join(out, "distribution_sampled.csv"),
                                  sampled, counts)
        if run_gs and mask is not None:
            save_grid_csv(os.path.join(out, "phase_retrieved.csv"), gs_result.phase)
            save_grid_csv(os.path.join(out, "phase_reference.csv"), phase_ref)
        atomic_write_text(os.path.join(out, "report.json"), report.to_json())
    return report


def run_suite(directory, out_dir: str | None = None,
              run_gs: bool = True) -> tuple[list, list]:
    """Run every scenario file in a directory; isolate per-scenario failures.

    Returns (reports, failures) where failures is a list of
    (path, exception) pairs.
    """
    paths = sorted(
        os.path.join(directory, p) for p in os.listdir(directory)
        if p.endswith((".toml", ".json"))
    )
    reports, failures = [], []
    for path in paths:
        try:
            sc = load_scenario(path)
            sub = os.path.join(out_dir, sc.name) if out_dir else sc.output_directory
            reports.append(run_scenario(sc, out_dir=sub, run_gs=run_gs))
        except Exception as exc:  # noqa: BLE001 - failures become table rows
            failures.append((path, exc))
    return reports, failures


def suite_table(reports, failures) -> str:
    lines = ["scenario,fidelity,similarity,success_probability"]
    for r in reports:
        sim = "" if r.similarity_noisy is None else _fmt(r.similarity_noisy)
        lines.append(
            f"{r.name},{_fmt(r.transfer_fidelity)},{sim},"
            f"{_fmt(r.success_probability)}"
        )
    for path, exc in failures:
        lines.append(f"{os.path.basename(path)},ERROR,,{type(exc).__name__}: {exc}")
    return "\n".join(lines) + "\n"


def emit_plot_data(report: RunReport, out_dir: str):
    """Write bar-chart-ready per-mode CSV files for a finished run."""
    os.makedirs(out_dir, exist_ok=True)
    n = round(len(report.theory_window) ** (1.0 / report.dims))
    w = (n - 1) // 2
    theory = np.asarray(report.theory_window)
    sampled = (np.asarray(report.sampled_window)
               if report.sampled_window is not None else None)
    lines = []
    total = report.counts_total or 1.0
    if report.dims == 1:
        header = "m,P_theory" + (",P_sampled,poisson_error" if sampled is not None else "")
        lines.append(header)
        for i, m in enumerate(range(-w, w + 1)):
            row = f"{m},{_fmt(theory[i])}"
            if sampled is not None:
                # relative Poisson error bar on the sampled frequency
                row += f",{_fmt(sampled[i])},{_fmt(np.sqrt(max(sampled[i], 0) / total))}"
            lines.append(row)
    else:
        header = "m_x,m_y,P_theory" + (",P_sampled" if sampled is not None else "")
        lines.append(header)
        i = 0
        for mx in range(-w, w + 1):
            for my in range(-w, w + 1):
                row = f"{mx},{my},{_fmt(theory[i])}"
                if sampled is not None:
                    row += f",{_fmt(sampled[i])}"
                lines.append(row)
                i += 1
    atomic_write_text(os.path.join(out_dir, f"{report.name}_modes.csv"),
                      "\n".join(lines) + "\n")
