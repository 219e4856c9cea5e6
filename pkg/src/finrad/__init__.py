"""Finite-geometry Radon/Fourier toolkit.

Exact discrete projections on prime-power grids, fractal k-space sampling
patterns, incoherence analysis, and iterative reconstruction.
"""

from .geometry import GridGeometry, Slope, M, S, centre_wrap, is_prime, next_prime, smallest_prime_factor
from .radon import (
    Sinogram,
    back_project,
    dfst_slice,
    drt_forward,
    drt_inverse,
    drt_project,
    multiplicity_map,
    slice_points,
    slice_samples,
)
from .sampling import (
    CartesianSpec,
    Dims,
    FractalSpec,
    SamplingMask,
    actual_reduction,
    build_cartesian,
    build_pfrac,
    cartesian_for_reduction,
    deterministic_slopes,
    load_mask,
    pfrac_for_reduction,
    random_slopes,
    save_mask,
)
from .incoherence import (
    IncoherenceReport,
    PsfProbe,
    psf,
    report_csv_header,
    report_csv_row,
    spr_exact,
    spr_monte_carlo,
)
from .metrics import MetricsReport, metrics_report, psnr, rmse, ssim
from .recon import (
    CsBaselineConfig,
    DivergenceError,
    HSchedule,
    KSpace,
    NlmParams,
    ReconConfig,
    ReconResult,
    ScheduleKind,
    Solver,
    cs_baseline,
    ffr,
    fsirt,
    h_schedule_eval,
    nlm_denoise,
    rss_combine,
    zero_fill,
)
from .phantom import PadResult, pad_to_prime, shepp_logan
from .kio import read_fcsk, read_image, read_pgm, to_uint8, write_fcsk, write_pgm, write_png
from .experiment import (
    CSV_COLUMNS,
    ExperimentPlan,
    InputSpec,
    MaskPlan,
    NoiseModel,
    ReconPlan,
    load_plan,
    parse_plan,
    run_experiment,
    sinogram_from_kspace,
    undersample,
)

__version__ = "0.1.0"
