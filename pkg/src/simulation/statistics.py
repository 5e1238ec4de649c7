"""
WaveRoute - 분기 비율 통계
중앙 출력 포트 비율 / 주변 포트 분포, 측정값 대비 모델 한계 플래그
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple
import logging

from ..core.errors import ParameterError, StructuralError
from ..models.geometry import Circuit, Port
from .optics import LossModel, PowerMap, SplitModel, propagate_power

logger = logging.getLogger(__name__)

# 측정 중앙 비율 (평균, 허용 편차)
MEASURED_CENTRAL_1X9 = (0.42, 0.04)
MEASURED_CENTRAL_1X81 = (0.33, 0.06)


def central_port(circuit: Circuit) -> Port:
    """출력 격자의 기하학적 중앙 포트 (짝수 격자면 StructuralError)"""
    outputs = circuit.outputs()
    if not outputs:
        raise StructuralError(f"Circuit '{circuit.name}' has no output ports")
    rows = sorted({p.grid_index[0] for p in outputs})
    cols = sorted({p.grid_index[1] for p in outputs})
    if len(rows) % 2 == 0 or len(cols) % 2 == 0:
        raise StructuralError(f"Output grid {len(rows)}x{len(cols)} has no central port")
    center = (rows[len(rows) // 2], cols[len(cols) // 2])
    for port in outputs:
        if port.grid_index == center:
            return port
    raise StructuralError(f"No output port at grid center {center}")


def splitting_histogram(out: PowerMap, circuit: Circuit) -> Tuple[float, List[float]]:
    """
    출력 전력 분포

    Returns:
        (중앙 포트 비율, 나머지 포트 비율 오름차순)
    """
    center = central_port(circuit)
    total = sum(out[k] for k in sorted(out))
    if total <= 0:
        raise ParameterError("Output power map carries no power")
    central = out[center.id] / total
    others = sorted(out[k] / total for k in sorted(out) if k != center.id)
    return central, others


@dataclass
class SplittingReport:
    """분기 통계 + 측정 대비 판정"""
    central_fraction: float
    off_center: List[float] = field(default_factory=list)
    measured: Tuple[float, float] = MEASURED_CENTRAL_1X81
    within_band: bool = True
    message: str = ""

    def to_dict(self) -> Dict:
        return {
            "central_fraction": self.central_fraction,
            "off_center_min": min(self.off_center) if self.off_center else None,
            "off_center_max": max(self.off_center) if self.off_center else None,
            "measured_central": self.measured[0],
            "measured_tolerance": self.measured[1],
            "within_band": self.within_band,
            "message": self.message,
        }


def splitting_report(
    circuit: Circuit,
    sm: Optional[SplitModel] = None,
    measured: Optional[Tuple[float, float]] = None,
    lm: Optional[LossModel] = None,
) -> SplittingReport:
    """
    단일 커플러 분기 통계와 측정 대역 비교

    measured 미지정 시 층 수에 따라 1×9 / 1×81 측정값 사용. lm 미지정 시 무손실 (순수 분배).
    대역 밖이면 모델 한계로 플래그 (실패 아님).
    """
    inputs = circuit.inputs()
    if len(inputs) != 1:
        raise StructuralError(f"Splitting statistics need a single coupler, got {len(inputs)} inputs")
    if measured is None:
        layers = int(circuit.metadata.get("params", {}).get("layers", 1))
        measured = MEASURED_CENTRAL_1X9 if layers == 1 else MEASURED_CENTRAL_1X81

    out = propagate_power(circuit, {inputs[0].id: 1.0}, lm or LossModel.lossless(), sm)
    central, others = splitting_histogram(out, circuit)
    mean, tolerance = measured
    within = abs(central - mean) <= tolerance + 1e-12
    if within:
        message = f"central fraction {central:.4f} within measured {mean:.2f} ± {tolerance:.2f}"
    else:
        message = (
            f"central fraction {central:.4f} outside measured {mean:.2f} ± {tolerance:.2f}: "
            f"independent per-layer splits do not reproduce the cascaded measurement (model limitation)"
        )
        logger.warning(f"⚠️ {message}")
    return SplittingReport(central, others, (mean, tolerance), within, message)


def fit_split_to_central(target: float = MEASURED_CENTRAL_1X81[0], layers: int = 2) -> SplitModel:
    """
    캐스케이드 중앙 비율이 target 이 되는 층별 균일 SplitModel
    f_c = target^(1/layers)
    """
    if not 0.0 < target < 1.0:
        raise ParameterError(f"Target central fraction must be in (0, 1), got {target}")
    if layers < 1:
        raise ParameterError(f"Layer count must be >= 1, got {layers}")
    return SplitModel((target ** (1.0 / layers),) * layers)
