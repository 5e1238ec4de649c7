"""
WaveRoute - 예외 정의
파라미터 오류, 기하 퇴화, 구조 오류, 생성 실패, 파일 포맷 오류
"""

from typing import Optional, Tuple


class WaverouteError(Exception):
    """WaveRoute 기본 예외"""


class ParameterError(WaverouteError, ValueError):
    """잘못된 파라미터 (pitch <= 0, 유효하지 않은 spec 등)"""


class DegenerateGeometryError(ParameterError):
    """퇴화된 기하 (p0 == p1, 길이 0 세그먼트 등)"""


class StructuralError(WaverouteError):
    """회로 구조 오류 (순환 그래프, 중앙 포트 없음 등)"""


class GenerationError(WaverouteError):
    """
    회로 생성 실패
    검증기가 충돌을 찾은 경우 해당 세그먼트 쌍을 함께 보고
    """

    def __init__(self, message: str, offending_pair: Optional[Tuple[str, str]] = None):
        super().__init__(message)
        self.offending_pair = offending_pair


class NetlistFormatError(WaverouteError):
    """넷리스트 파일 형식 오류"""
