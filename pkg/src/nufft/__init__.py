from src.nufft.gridding import Gridder, degrid_forward, grid_adjoint
from src.nufft.kernel import GriddingKernel, beatty_beta, build_kernel
from src.nufft.transform import (
    Apodization,
    Nufft,
    compute_apodization,
    crop_center,
    fft_centered,
    gridding_reconstruction,
    ifft_centered,
    nufft_adjoint,
    nufft_forward,
    pad_center,
)
