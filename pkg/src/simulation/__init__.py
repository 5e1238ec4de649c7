"""
광학 시뮬레이션 모듈
비간섭 전력 흐름, 손실 보정, 분기 통계
"""

from .optics import (
    LossModel,
    SplitModel,
    propagate_power,
    reverse_characterize,
    transmission_matrix,
    reverse_matrix,
    haar_convolve,
    mode_count,
)
from .calibration import calibrate_losses, predict_measurements
from .statistics import splitting_histogram, splitting_report, fit_split_to_central

__all__ = [
    'LossModel',
    'SplitModel',
    'propagate_power',
    'reverse_characterize',
    'transmission_matrix',
    'reverse_matrix',
    'haar_convolve',
    'mode_count',
    'calibrate_losses',
    'predict_measurements',
    'splitting_histogram',
    'splitting_report',
    'fit_split_to_central',
]
