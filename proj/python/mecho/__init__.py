"""Multi-echo MRI reconstruction from partial k-space.

Images are float64 arrays of shape (echoes, height, width).
"""

from ._mecho import (
    DomainError,
    FormatError,
    InvalidArgument,
    IoError,
    KSpaceData,
    NumericalError,
    SamplingMask,
    adjoint,
    default_params,
    fft2_unitary,
    generate_mask,
    generate_phantom,
    haar_dwt2,
    haar_idwt2,
    load_mef,
    method_names,
    reconstruct,
    row_soft_threshold,
    save_mef,
    select_corner,
    set_thread_count,
    simulate_acquisition,
    snr_db,
    soft_threshold,
)

__all__ = [
    "DomainError",
    "FormatError",
    "InvalidArgument",
    "IoError",
    "KSpaceData",
    "NumericalError",
    "SamplingMask",
    "adjoint",
    "default_params",
    "fft2_unitary",
    "generate_mask",
    "generate_phantom",
    "haar_dwt2",
    "haar_idwt2",
    "load_mef",
    "method_names",
    "reconstruct",
    "row_soft_threshold",
    "save_mef",
    "select_corner",
    "set_thread_count",
    "simulate_acquisition",
    "snr_db",
    "soft_threshold",
]
