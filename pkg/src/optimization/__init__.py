"""
최적화 모듈
Haar 필터 출력 포트 배정 전수 탐색
"""

from .port_assignment import (
    AssignmentGeometry,
    assignment_space_size,
    optimize_assignment,
    optimize_port_assignment,
)

__all__ = [
    'AssignmentGeometry',
    'assignment_space_size',
    'optimize_assignment',
    'optimize_port_assignment',
]
