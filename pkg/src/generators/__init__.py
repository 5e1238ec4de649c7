"""
회로 생성 모듈
프랙탈 fan-out 커플러, Haar 컨볼루션 필터
"""

from .fractal import (
    Chirality,
    FractalSpec,
    LayerDims,
    layer_dimensions,
    branch_angle,
    lattice_ratio,
    layer_profile,
    generate_coupler,
    generate_coupler_array,
    measurement_configurations,
)
from .haar import (
    HaarKernel,
    KernelSet,
    FilterUnit,
    default_kernel_set,
    connection_count,
    generate_filter_unit,
    tile_filter_array,
    unit_profile,
)

__all__ = [
    # Fractal
    'Chirality',
    'FractalSpec',
    'LayerDims',
    'layer_dimensions',
    'branch_angle',
    'lattice_ratio',
    'layer_profile',
    'generate_coupler',
    'generate_coupler_array',
    'measurement_configurations',
    # Haar
    'HaarKernel',
    'KernelSet',
    'FilterUnit',
    'default_kernel_set',
    'connection_count',
    'generate_filter_unit',
    'tile_filter_array',
    'unit_profile',
]
