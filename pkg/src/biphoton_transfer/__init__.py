"""Nonlocal transfer of lattice unitaries across momentum-correlated photons.

Library layout:

* :mod:`~biphoton_transfer.lattice`   -- momentum lattice and state containers
* :mod:`~biphoton_transfer.masks`     -- sinusoidal phase-mask grammar
* :mod:`~biphoton_transfer.unitaries` -- kernels, circulants, transfer unitary
* :mod:`~biphoton_transfer.transfer`  -- the steering protocol itself
* :mod:`~biphoton_transfer.optics`    -- holograms, far field, camera, noise
* :mod:`~biphoton_transfer.retrieval` -- Gerchberg-Saxton phase retrieval
* :mod:`~biphoton_transfer.scenario`  -- scenario files and the full pipeline
"""

from .lattice import (
    BiphotonState,
    Distribution,
    LatticeError,
    LatticeSpec,
    StateVector,
    distribution_of,
    fidelity,
    make_correlated_state,
    negate_index,
)
from .masks import PAPER_MASKS_1D, PAPER_MASKS_2D, PhaseMask, load_mask_file, parse_mask_terms
from .unitaries import (
    ConvolutionKernel,
    UnitaryOperator,
    check_unitarity,
    construct_transfer_unitary,
    dense_from_kernel,
    kernel_from_phase,
    kernel_from_phase_2d,
    random_unitary,
)
from .transfer import (
    ProjectionAnnihilatesState,
    ProjectionVector,
    TransferResult,
    apply_signal_unitary,
    prepare_correlated_state_via_circuit,
    project_signal,
    transfer_general,
    transfer_kernel_route,
    transfer_localized,
)
from .optics import (
    CameraSpec,
    HologramSpec,
    PixelImage,
    bin_to_modes,
    far_field,
    sample_poisson,
    similarity,
    synthesize_hologram,
    windowed_distribution,
)
from .retrieval import GsConfig, GsResult, align_phase, error_metric, gs_retrieve
from .scenario import RunReport, Scenario, load_scenario, run_scenario, run_suite

__version__ = "0.1.0"
