"""
WaveRoute - 비간섭 광 전력 흐름 시뮬레이션
주입 손실 I, 전파 손실 P, 분기 결합 손실 C 모델 + 분기 비율 모델

내부 계산은 선형 스케일, dB 는 모델 경계에서만 사용
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple
import logging
import math

import numpy as np
import pandas as pd

from ..core.curves import arc_length
from ..core.errors import ParameterError, StructuralError
from ..models.geometry import Circuit, PortRole

logger = logging.getLogger(__name__)

PowerMap = Dict[str, float]

DEFAULT_CENTRAL_FRACTION = 0.42
XY_TOLERANCE = 1e-6  # µm


def db_to_linear(db: float) -> float:
    return 10.0 ** (-db / 10.0)


def linear_to_db(ratio: float) -> float:
    if ratio <= 0:
        return math.inf
    return -10.0 * math.log10(ratio)


@dataclass(frozen=True)
class LossModel:
    """
    손실 모델 (dB)

    reference_length: P 가 적용되는 기준 길이 (µm). None 이면 표준 1×9 커플러 값
    node_coupling: 노드/출력 포트 id 별 C 재정의 (필터별 결합 손실)
    """
    injection_db: float = 2.71
    propagation_db: float = 1.14
    coupling_db: float = 1.67
    reference_length: Optional[float] = None
    node_coupling: Mapping[str, float] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        for name in ("injection_db", "propagation_db", "coupling_db"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ParameterError(f"{name} must be finite and >= 0, got {value}")
        if self.reference_length is not None and not self.reference_length > 0:
            raise ParameterError(f"Reference length must be positive, got {self.reference_length}")
        for vertex, value in self.node_coupling.items():
            if not math.isfinite(value) or value < 0:
                raise ParameterError(f"Coupling loss for {vertex} must be >= 0, got {value}")

    @classmethod
    def lossless(cls) -> "LossModel":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def parse(cls, text: str) -> "LossModel":
        """'I,P,C' 문자열"""
        try:
            values = [float(v) for v in text.split(",")]
        except ValueError:
            raise ParameterError(f"Loss must be 'I,P,C' in dB, got {text!r}") from None
        if len(values) != 3:
            raise ParameterError(f"Loss must have three components I,P,C, got {text!r}")
        return cls(*values)

    @property
    def is_lossless(self) -> bool:
        return (
            self.injection_db == 0 and self.propagation_db == 0 and self.coupling_db == 0
            and not any(self.node_coupling.values())
        )

    def resolved_reference_length(self) -> float:
        if self.reference_length is not None:
            return self.reference_length
        return standard_reference_length()

    def coupling_for(self, vertex_id: str, is_node: bool) -> float:
        """정점 결합 손실 (dB): 재정의 > 노드 기본 C > 포트 0"""
        if vertex_id in self.node_coupling:
            return float(self.node_coupling[vertex_id])
        return self.coupling_db if is_node else 0.0

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.injection_db, self.propagation_db, self.coupling_db)


@dataclass(frozen=True)
class SplitModel:
    """
    층별 중앙 자식 비율 f_c(l)
    나머지 (1 − f_c) 는 중앙 외 자식에 균등 분배. 층 수보다 짧으면 마지막 값 반복
    """
    central_fractions: Tuple[float, ...] = (DEFAULT_CENTRAL_FRACTION,)

    def __post_init__(self):
        fractions = tuple(float(f) for f in self.central_fractions)
        if not fractions:
            raise ParameterError("SplitModel needs at least one central fraction")
        for f in fractions:
            if not 0.0 < f < 1.0:
                raise ParameterError(f"Central fraction must be in (0, 1), got {f}")
        object.__setattr__(self, "central_fractions", fractions)

    @classmethod
    def uniform(cls, b: int = 9) -> "SplitModel":
        return cls((1.0 / b,))

    @classmethod
    def parse(cls, text: str) -> "SplitModel":
        """'0.42' 또는 '0.57,0.57' 문자열"""
        try:
            return cls(tuple(float(v) for v in text.split(",")))
        except ValueError:
            raise ParameterError(f"Split must be a comma list of fractions, got {text!r}") from None

    def fraction(self, layer: int) -> float:
        index = min(max(layer, 1), len(self.central_fractions)) - 1
        return self.central_fractions[index]

    def weights(self, layer: int, n_children: int, central: Optional[int]) -> List[float]:
        """자식별 분배 가중치 (합 = 1)"""
        if n_children <= 0:
            return []
        if n_children == 1:
            return [1.0]
        if central is None:
            return [1.0 / n_children] * n_children
        f_c = self.fraction(layer)
        others = (1.0 - f_c) / (n_children - 1)
        return [f_c if k == central else others for k in range(n_children)]


@dataclass
class TransferGraph:
    """
    세그먼트 DAG 위 선형 전달 계수

    edge 계수 = 분배 가중치 × 전파 감쇠, 정점 이득 = 결합 손실
    """
    order: List[str]
    incoming: Dict[str, List[Tuple[str, float]]]
    outgoing: Dict[str, List[Tuple[str, float]]]
    gains: Dict[str, float]
    injection_gain: float
    inputs: List[str]
    outputs: List[str]
    fan_out: Dict[str, int]
    fan_in: Dict[str, int]

    def run(self, sources: Mapping[str, np.ndarray], reverse: bool = False) -> Dict[str, np.ndarray]:
        """
        위상 순서 전파 (reverse 시 역방향 그래프, 동일 계수)

        Args:
            sources: 정점 id → 주입 전력 벡터 (동시 다중 주입)
        """
        width = len(next(iter(sources.values()))) if sources else 1
        order = self.order[::-1] if reverse else self.order
        feeds = self.outgoing if reverse else self.incoming
        zero = np.zeros(width)
        level: Dict[str, np.ndarray] = {}
        for vertex in order:
            total = zero
            if vertex in sources:
                total = np.asarray(sources[vertex], dtype=float) * self.injection_gain
            for upstream, coefficient in feeds[vertex]:
                total = total + level[upstream] * coefficient
            level[vertex] = total * self.gains[vertex]
        return level


def _central_child(circuit: Circuit, node_id: str, targets: Sequence[str]) -> Optional[int]:
    origin = circuit.vertex_position(node_id)
    for k, target in enumerate(targets):
        p = circuit.vertex_position(target)
        if abs(p.x - origin.x) <= XY_TOLERANCE and abs(p.y - origin.y) <= XY_TOLERANCE:
            return k
    return None


def build_transfer_graph(
    circuit: Circuit, lm: Optional[LossModel] = None, sm: Optional[SplitModel] = None
) -> TransferGraph:
    """Circuit + 모델 → 전달 계수 그래프 (순환 시 StructuralError)"""
    lm = lm or LossModel()
    sm = sm or SplitModel()
    order = circuit.topological_order()
    reference = lm.resolved_reference_length() if lm.propagation_db > 0 else 1.0

    by_source: Dict[str, List] = {}
    for seg in sorted(circuit.segments, key=lambda s: s.id):
        by_source.setdefault(seg.source, []).append(seg)

    incoming: Dict[str, List[Tuple[str, float]]] = {v: [] for v in order}
    outgoing: Dict[str, List[Tuple[str, float]]] = {v: [] for v in order}
    for source, segments in by_source.items():
        is_node = source in circuit.node_map
        if is_node:
            targets = [s.target for s in segments]
            layer = circuit.node_map[source].layer
            weights = sm.weights(layer, len(segments), _central_child(circuit, source, targets))
        else:
            # 포트는 연결된 모든 도파로를 전 전력으로 구동
            weights = [1.0] * len(segments)
        for seg, weight in zip(segments, weights):
            attenuation = 1.0
            if lm.propagation_db > 0:
                attenuation = db_to_linear(lm.propagation_db * arc_length(seg.path) / reference)
            coefficient = weight * attenuation
            incoming[seg.target].append((seg.source, coefficient))
            outgoing[seg.source].append((seg.target, coefficient))

    for feeds in (incoming, outgoing):
        for vertex in feeds:
            feeds[vertex].sort(key=lambda item: item[0])

    gains = {
        v: db_to_linear(lm.coupling_for(v, v in circuit.node_map)) for v in order
    }
    inputs = sorted(p.id for p in circuit.inputs())
    outputs = sorted(p.id for p in circuit.outputs())
    return TransferGraph(
        order=order,
        incoming=incoming,
        outgoing=outgoing,
        gains=gains,
        injection_gain=db_to_linear(lm.injection_db),
        inputs=inputs,
        outputs=outputs,
        fan_out={v: len(outgoing[v]) for v in order},
        fan_in={v: len(incoming[v]) for v in order},
    )


def _check_drive(circuit: Circuit, drive: Mapping[str, float], role: PortRole) -> None:
    for port_id, power in drive.items():
        port = circuit.port(port_id)
        if port.role is not role:
            raise ParameterError(f"Port {port_id} is not an {role.value} port")
        if not math.isfinite(power) or power < 0:
            raise ParameterError(f"Power at {port_id} must be finite and >= 0, got {power}")


def propagate_power(
    circuit: Circuit,
    inputs: Mapping[str, float],
    lm: Optional[LossModel] = None,
    sm: Optional[SplitModel] = None,
    graph: Optional[TransferGraph] = None,
) -> PowerMap:
    """
    입력 포트 구동 → 출력 포트 전력 (선형)

    입력마다 I 1회, 세그먼트마다 P · 길이/기준길이, 노드마다 C 후 분배,
    병합 출력 포트는 선형 합산
    """
    _check_drive(circuit, inputs, PortRole.INPUT)
    graph = graph or build_transfer_graph(circuit, lm, sm)
    sources = {port_id: np.array([power]) for port_id, power in sorted(inputs.items())}
    level = graph.run(sources)
    return {port_id: float(level[port_id][0]) for port_id in graph.outputs}


def reverse_characterize(
    circuit: Circuit,
    output_port: str,
    lm: Optional[LossModel] = None,
    sm: Optional[SplitModel] = None,
    power: float = 1.0,
    graph: Optional[TransferGraph] = None,
) -> PowerMap:
    """출력 포트 역주입 → 입력 포트 방출 전력 (역방향 DAG, 동일 계수)"""
    _check_drive(circuit, {output_port: power}, PortRole.OUTPUT)
    graph = graph or build_transfer_graph(circuit, lm, sm)
    level = graph.run({output_port: np.array([power])}, reverse=True)
    return {port_id: float(level[port_id][0]) for port_id in graph.inputs}


def transmission_matrix(
    circuit: Circuit, lm: Optional[LossModel] = None, sm: Optional[SplitModel] = None
) -> pd.DataFrame:
    """입력 → 출력 전달 행렬 (행 = 출력 포트, 열 = 입력 포트)"""
    graph = build_transfer_graph(circuit, lm, sm)
    eye = np.eye(len(graph.inputs))
    level = graph.run({port_id: eye[k] for k, port_id in enumerate(graph.inputs)})
    data = np.array([level[o] for o in graph.outputs]).reshape(len(graph.outputs), len(graph.inputs))
    return pd.DataFrame(data, index=graph.outputs, columns=graph.inputs)


def reverse_matrix(
    circuit: Circuit, lm: Optional[LossModel] = None, sm: Optional[SplitModel] = None
) -> pd.DataFrame:
    """출력 → 입력 역방향 행렬 (행 = 입력 포트, 열 = 출력 포트)"""
    graph = build_transfer_graph(circuit, lm, sm)
    eye = np.eye(len(graph.outputs))
    level = graph.run({port_id: eye[k] for k, port_id in enumerate(graph.outputs)}, reverse=True)
    data = np.array([level[i] for i in graph.inputs]).reshape(len(graph.inputs), len(graph.outputs))
    return pd.DataFrame(data, index=graph.inputs, columns=graph.outputs)


def injected_power(circuit: Circuit, inputs: Mapping[str, float]) -> float:
    """주입 전력 합 (포트 구동 전력 × 연결 도파로 수)"""
    fan_out: Dict[str, int] = {}
    for seg in circuit.segments:
        fan_out[seg.source] = fan_out.get(seg.source, 0) + 1
    return float(sum(power * fan_out.get(port_id, 0) for port_id, power in sorted(inputs.items())))


def total_loss_db(circuit: Circuit, inputs: Mapping[str, float], outputs: Mapping[str, float]) -> float:
    """전체 손실 (dB) = −10·log10(출력 합 / 주입 합)"""
    injected = injected_power(circuit, inputs)
    if injected <= 0:
        raise ParameterError("No power injected")
    return linear_to_db(sum(outputs[k] for k in sorted(outputs)) / injected)


def coupler_loss_db(
    circuit: Circuit, lm: Optional[LossModel] = None, sm: Optional[SplitModel] = None
) -> float:
    """모든 입력 단위 구동 시 전체 손실 (dB)"""
    drive = {p.id: 1.0 for p in circuit.inputs()}
    return total_loss_db(circuit, drive, propagate_power(circuit, drive, lm, sm))


def route_lengths(circuit: Circuit) -> Dict[str, float]:
    """단일 입력 회로의 출력 포트별 경로 길이 (µm)"""
    lengths = {seg.id: arc_length(seg.path) for seg in circuit.segments}
    by_target = {}
    for seg in circuit.segments:
        by_target.setdefault(seg.target, []).append(seg)
    result = {}
    for port in circuit.outputs():
        total, vertex = 0.0, port.id
        while vertex in by_target:
            feeds = by_target[vertex]
            if len(feeds) != 1:
                raise StructuralError(f"Vertex {vertex} has {len(feeds)} feeds; route is not unique")
            total += lengths[feeds[0].id]
            vertex = feeds[0].source
        result[port.id] = total
    return result


@lru_cache(maxsize=None)
def standard_reference_length(central_fraction: float = DEFAULT_CENTRAL_FRACTION) -> float:
    """
    기준 길이: 표준 1×9 커플러 (b=9, L=1, D0=20, k=4) 의 분배 가중 평균 경로 길이 (µm)
    """
    from ..generators.fractal import FractalSpec, generate_coupler

    circuit = generate_coupler(FractalSpec())
    graph = build_transfer_graph(circuit, LossModel(0.0, 0.0, 0.0, reference_length=1.0), SplitModel((central_fraction,)))
    lengths = route_lengths(circuit)
    drive = {p.id: np.array([1.0]) for p in circuit.inputs()}
    level = graph.run(drive)
    weights = {o: float(level[o][0]) for o in graph.outputs}
    reference = sum(weights[o] * lengths[o] for o in graph.outputs) / sum(weights.values())
    logger.debug(f"Standard reference length: {reference:.3f} µm")
    return reference


def haar_convolve(
    circuit: Circuit,
    image: np.ndarray,
    lm: Optional[LossModel] = None,
    sm: Optional[SplitModel] = None,
) -> np.ndarray:
    """
    필터 배열 컨볼루션

    입력 포트 (i, j) 를 image[i, j] 로 구동, 필터 f 유닛 (u, v) 출력 전력 반환.
    lm 미지정 시 무손실.

    Returns:
        (9, n_u, n_v) 특징 맵
    """
    from ..generators.haar import KERNEL_SIZE, FILTER_COUNT, KernelSet

    if "kernels" not in circuit.metadata:
        raise StructuralError(f"Circuit '{circuit.name}' carries no kernel set")
    ks = KernelSet.from_dict(circuit.metadata["kernels"])
    image = np.asarray(image, dtype=float)
    rows = 1 + max(p.grid_index[0] for p in circuit.inputs())
    cols = 1 + max(p.grid_index[1] for p in circuit.inputs())
    if image.shape != (rows, cols):
        raise ParameterError(f"Image shape {image.shape} does not match input grid ({rows}, {cols})")
    if (image < 0).any() or not np.isfinite(image).all():
        raise ParameterError("Image intensities must be finite and non-negative")

    drive = {p.id: float(image[p.grid_index]) for p in circuit.inputs()}
    out = propagate_power(circuit, drive, lm or LossModel.lossless(), sm or SplitModel())

    n_u, n_v = rows // KERNEL_SIZE, cols // KERNEL_SIZE
    features = np.zeros((FILTER_COUNT, n_u, n_v))
    for f in range(FILTER_COUNT):
        r, c = ks.position(f)
        for u in range(n_u):
            for v in range(n_v):
                features[f, u, v] = out[f"out_{KERNEL_SIZE * u + r}_{KERNEL_SIZE * v + c}"]
    return features


def mode_count(d: float, delta_n: float, wavelength: float) -> float:
    """모드 수 M = 0.5·(π·d·Δn/λ)² (M < 1 이면 단일 모드)"""
    if not d > 0 or not wavelength > 0:
        raise ParameterError(f"Diameter and wavelength must be positive, got d={d}, λ={wavelength}")
    if delta_n < 0:
        raise ParameterError(f"Index contrast must be >= 0, got {delta_n}")
    return 0.5 * (math.pi * d * delta_n / wavelength) ** 2


def single_mode_diameter(delta_n: float, wavelength: float) -> float:
    """M = 1 이 되는 직경 (이보다 작으면 단일 모드)"""
    if not delta_n > 0 or not wavelength > 0:
        raise ParameterError(f"Index contrast and wavelength must be positive, got Δn={delta_n}, λ={wavelength}")
    return wavelength * math.sqrt(2.0) / (math.pi * delta_n)
