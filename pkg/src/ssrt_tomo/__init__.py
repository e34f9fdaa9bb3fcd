"""Scale space Radon transform (SSRT) tomography toolkit.

Forward projection with Gaussian-profile strips, SSRT-based filtered
backprojection, Poisson-Gaussian CT noise simulation and the experiment
harness used to compare it with classical Radon FBP.
"""

from ssrt_tomo.geometry import Image, Provenance, Sinogram, SinogramGeometry, make_geometry, normalize_image
from ssrt_tomo.phantom import disk_phantom, gaussian_blob, load_pgm, save_pgm, shepp_logan
from ssrt_tomo.projection import (
    GaussianKernel,
    apply_geometric_transform,
    radon_forward,
    ssrt_direct,
    ssrt_forward,
    ssrt_pixel_footprint,
    unit_square_radon,
)
from ssrt_tomo.filters import (
    FilterSpec,
    combined_response,
    filter_projections,
    frequency_grid,
    gaussian_spectrum,
    wiener_response,
)
from ssrt_tomo.noise import NoiseModel, add_ct_noise, corrupt, to_line_integrals, to_transmission
from ssrt_tomo.reconstruction import (
    ReconConfig,
    backproject,
    deconvolve_sinogram,
    fst_residual,
    reconstruct,
    reconstruct_deconv_rad_fbp,
    reconstruct_radon_fbp,
    reconstruct_ssrt_fbp,
)
from ssrt_tomo.metrics import QualityReport, profile_mae, psnr, ssim
from ssrt_tomo.experiment import SweepConfig, render_heatmap, run_sweep, sigma_opt_ridge

__version__ = "0.1.0"
