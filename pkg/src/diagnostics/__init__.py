"""
진단 모듈
제조성 검증 (간격, 굽힘 반경, 종횡비)
"""

from .validator import (
    ManufacturingLimits,
    ClearanceViolation,
    ValidationReport,
    check_clearance,
    check_bend_radius,
    check_aspect_ratio,
    validate_circuit,
)

__all__ = [
    'ManufacturingLimits',
    'ClearanceViolation',
    'ValidationReport',
    'check_clearance',
    'check_bend_radius',
    'check_aspect_ratio',
    'validate_circuit',
]
