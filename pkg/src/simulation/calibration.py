"""
WaveRoute - 손실 분리 보정
세 가지 측정 (표준 1×9, 3배 확대 1×9, 1×81) → (I, P, C)
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple
import logging

import numpy as np

from ..core.errors import ParameterError
from .optics import LossModel, SplitModel, coupler_loss_db

logger = logging.getLogger(__name__)

# 행: 측정 구성, 열: (I, P, C) 계수
MEASUREMENT_MATRIX = np.array([
    [1.0, 1.0, 1.0],  # L_1x9        = I + P + C
    [1.0, 3.0, 1.0],  # L~_1x9 (×3)  = I + 3P + C
    [1.0, 4.0, 2.0],  # L_1x81       = I + 4P + 2C
])
MEASUREMENT_NAMES = ("standard_1x9", "scaled_1x9", "standard_1x81")


@dataclass(frozen=True)
class LossMeasurements:
    """세 가지 구성의 측정 손실 (dB)"""
    standard_1x9: float
    scaled_1x9: float
    standard_1x81: float

    def as_array(self) -> np.ndarray:
        return np.array([self.standard_1x9, self.scaled_1x9, self.standard_1x81])

    def to_dict(self) -> Dict[str, float]:
        return dict(zip(MEASUREMENT_NAMES, self.as_array().tolist()))


def calibrate_losses(l_1x9: float, l_1x9_triple: float, l_1x81: float) -> LossModel:
    """
    3×3 선형계 풀이로 (I, P, C) 분리

    음수 성분은 경고 후 0 으로 절단 (원시 해는 solve_losses)
    """
    components = solve_losses(l_1x9, l_1x9_triple, l_1x81)
    negative = [name for name, value in zip("IPC", components) if value < 0]
    if negative:
        logger.warning(f"⚠️ Negative loss component(s) {negative}: {np.round(components, 4).tolist()} dB")
        components = np.clip(components, 0.0, None)
    model = LossModel(*components.tolist())
    logger.info(f"✅ Calibrated losses: I={model.injection_db:.2f} dB, P={model.propagation_db:.2f} dB, C={model.coupling_db:.2f} dB")
    return model


def solve_losses(l_1x9: float, l_1x9_triple: float, l_1x81: float) -> np.ndarray:
    """측정값 → (I, P, C) 원시 해 (음수 가능)"""
    measured = np.array([l_1x9, l_1x9_triple, l_1x81], dtype=float)
    if not np.isfinite(measured).all():
        raise ParameterError(f"Measurements must be finite, got {measured.tolist()}")
    return np.linalg.solve(MEASUREMENT_MATRIX, measured)


def predict_measurements(lm: LossModel) -> LossMeasurements:
    """손실 모델 → 세 구성의 예측 손실 (dB, 해석식)"""
    values = MEASUREMENT_MATRIX @ np.array(lm.as_tuple())
    return LossMeasurements(*values.tolist())


def simulate_measurements(
    lm: Optional[LossModel] = None, sm: Optional[SplitModel] = None
) -> LossMeasurements:
    """생성된 세 구성 커플러 위 전력 흐름 시뮬레이션 손실 (dB)"""
    from ..generators.fractal import measurement_configurations

    circuits = measurement_configurations()
    values = [coupler_loss_db(circuits[name], lm, sm) for name in MEASUREMENT_NAMES]
    return LossMeasurements(*values)


def calibration_residual(lm: LossModel, measured: Tuple[float, float, float]) -> np.ndarray:
    """예측 − 측정 (dB)"""
    return predict_measurements(lm).as_array() - np.asarray(measured, dtype=float)
