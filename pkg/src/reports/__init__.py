"""
리포트 생성 모듈
2D/3D 인터커넥트 스케일링
"""

from .scaling_report import ScalingMode, ScalingModel, ScalingReport, footprint, scaling_report

__all__ = [
    'ScalingMode',
    'ScalingModel',
    'ScalingReport',
    'footprint',
    'scaling_report',
]
