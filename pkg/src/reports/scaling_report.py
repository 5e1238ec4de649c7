"""
WaveRoute - 인터커넥트 스케일링 리포트
2D 크로스바 vs 3D 체적 배치의 면적/높이 비교
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple, Union
import logging

import numpy as np
import pandas as pd

from ..core.errors import ParameterError
from ..io.files import atomic_write_text

logger = logging.getLogger(__name__)

UM2_PER_MM2 = 1.0e6


class ScalingMode(Enum):
    """배치 방식"""
    CROSSBAR_2D = "crossbar2d"  # 입력 행 × 출력 열
    VOLUMETRIC_3D = "volumetric3d"  # 입출력 포트 각각 전용 평면


@dataclass(frozen=True)
class ScalingModel:
    """스케일링 모델 (포트 pitch µm)"""
    mode: ScalingMode
    port_pitch: float = 20.0

    def __post_init__(self):
        if not self.port_pitch > 0:
            raise ParameterError(f"Port pitch must be positive, got {self.port_pitch}")


def footprint(model: ScalingModel, n_inputs: int, n_outputs: int) -> Tuple[float, float]:
    """
    인터커넥트 점유 면적과 높이

    Returns:
        (area mm², height µm)
    """
    if n_inputs < 1 or n_outputs < 1:
        raise ParameterError(f"Port counts must be >= 1, got N_I={n_inputs}, N_O={n_outputs}")
    p = model.port_pitch
    if model.mode is ScalingMode.CROSSBAR_2D:
        return (n_inputs * p) * (n_outputs * p) / UM2_PER_MM2, 0.0
    return max(n_inputs, n_outputs) * p * p / UM2_PER_MM2, n_inputs * p


@dataclass
class ScalingReport:
    """스케일링 표 + log-log 기울기"""
    table: pd.DataFrame
    slope_2d: Optional[float]
    slope_3d: Optional[float]
    pitch: float

    def summary(self) -> Dict:
        return {
            "pitch_um": self.pitch,
            "rows": len(self.table),
            "slope_area_2d": self.slope_2d,
            "slope_area_3d": self.slope_3d,
        }

    def to_csv(self, path: Union[str, Path]) -> Path:
        text = self.table.to_csv(index=False, float_format="%.10g", lineterminator="\n")
        target = atomic_write_text(path, text)
        logger.info(f"✅ Scaling report written: {target}")
        return target


def loglog_slope(n: np.ndarray, values: np.ndarray) -> Optional[float]:
    """log(values) vs log(n) 1차 fit 기울기 (점 2개 미만이면 None)"""
    n = np.asarray(n, dtype=float)
    if len(np.unique(n)) < 2:
        return None
    slope, _ = np.polyfit(np.log(n), np.log(np.asarray(values, dtype=float)), 1)
    return float(slope)


def scaling_report(pitch: float = 20.0, n_range: Iterable[int] = (16, 64, 256, 1024, 4096)) -> ScalingReport:
    """
    N_I = N_O = N 에 대한 2D/3D 면적 표
    기대 기울기: 2D ≈ 2, 3D ≈ 1
    """
    values = sorted({int(n) for n in n_range})
    if not values:
        raise ParameterError("N range must not be empty")
    crossbar = ScalingModel(ScalingMode.CROSSBAR_2D, pitch)
    volumetric = ScalingModel(ScalingMode.VOLUMETRIC_3D, pitch)

    rows = []
    for n in values:
        area_2d, _ = footprint(crossbar, n, n)
        area_3d, height_3d = footprint(volumetric, n, n)
        rows.append({"N": n, "area_2d_mm2": area_2d, "area_3d_mm2": area_3d, "height_3d_um": height_3d})
    table = pd.DataFrame(rows, columns=["N", "area_2d_mm2", "area_3d_mm2", "height_3d_um"])

    report = ScalingReport(
        table=table,
        slope_2d=loglog_slope(table["N"], table["area_2d_mm2"]),
        slope_3d=loglog_slope(table["N"], table["area_3d_mm2"]),
        pitch=pitch,
    )
    if report.slope_2d is not None:
        logger.info(f"📊 Area slopes: 2D={report.slope_2d:.3f}, 3D={report.slope_3d:.3f}")
    return report
