"""specrec: snapshot compressive spectral imaging reconstruction.

Simulates coded-mask spectral measurements and reconstructs the cube by
alternating a measurement-consistency projection, per-band total
variation denoising, and frequency-domain convolutional sparse coding
with a cross-band group-sparsity constraint.
"""

from .core import (
    Image2D,
    Region,
    SolverParams,
    SpectralCube,
    extract_band,
    mean_spectrum,
    normalize_cube,
    replace_band,
)
from .forward import (
    Measurement,
    SystemMasks,
    add_noise,
    adjoint,
    build_system,
    forward,
    generate_mask,
    gram_diagonal,
)
from .tv import tv_chambolle, tv_objective, tv_value
from .gap import GapTrace, gap_projection_step, gap_tv_solve
from .csc import (
    AdmmState,
    CoeffStack,
    ConvDictionary,
    DictSpectrum,
    csc_denoise,
    dict_fft,
    dual_update,
    group_shrink,
    lowpass_split,
    reconstruct_from_coeffs,
    solve_rank1_system,
    x_update,
)
from .pipeline import (
    CompareFixture,
    CompareScene,
    Method,
    RunTrace,
    compare_methods,
    reconstruct,
    write_compare_csv,
)
from .metrics import MetricsReport, compute_report, psnr, sam_region, ssim, ssim_cube
from .synthetic import dct_dictionary, get_scene, synthetic_cube
from .io import (
    FormatError,
    export_png,
    export_png_rgb,
    load_cube_dir,
    load_dictionary,
    load_measurement,
    load_raw,
    save_raw,
)
from .cli import run_cli

__version__ = "0.1.0"

__all__ = [
    "AdmmState",
    "CoeffStack",
    "CompareFixture",
    "CompareScene",
    "ConvDictionary",
    "DictSpectrum",
    "FormatError",
    "GapTrace",
    "Image2D",
    "Measurement",
    "Method",
    "MetricsReport",
    "Region",
    "RunTrace",
    "SolverParams",
    "SpectralCube",
    "SystemMasks",
    "add_noise",
    "adjoint",
    "build_system",
    "compare_methods",
    "compute_report",
    "csc_denoise",
    "dct_dictionary",
    "dict_fft",
    "dual_update",
    "export_png",
    "export_png_rgb",
    "extract_band",
    "forward",
    "gap_projection_step",
    "gap_tv_solve",
    "generate_mask",
    "get_scene",
    "gram_diagonal",
    "group_shrink",
    "load_cube_dir",
    "load_dictionary",
    "load_measurement",
    "load_raw",
    "lowpass_split",
    "mean_spectrum",
    "normalize_cube",
    "psnr",
    "reconstruct",
    "reconstruct_from_coeffs",
    "replace_band",
    "run_cli",
    "sam_region",
    "save_raw",
    "solve_rank1_system",
    "ssim",
    "ssim_cube",
    "synthetic_cube",
    "tv_chambolle",
    "tv_objective",
    "tv_value",
    "write_compare_csv",
    "x_update",
]
