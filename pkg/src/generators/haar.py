"""
WaveRoute - Haar 컨볼루션 필터 생성기
3×3 Boolean 커널 9개 → 9 입력 / 9 출력 필터 유닛, stride 3 타일 배열
"""

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union
import json
import logging

import numpy as np

from ..core.curves import KnotProfile, graph_path
from ..core.errors import GenerationError, ParameterError
from ..diagnostics.validator import ManufacturingLimits, check_clearance
from ..models.geometry import Circuit, Point3, Port, PortRole, Segment, WaveguidePath, DEFAULT_DIAMETER
from .fractal import Chirality

logger = logging.getLogger(__name__)

KERNEL_SIZE = 3
FILTER_COUNT = 9

# 유닛 공용 측면 프로파일 (ζ, y) - xy = P + (Q − P)·(ζ − i·y(ζ))
# 같은 z 에서 두 연결의 xy 차이 = D0·[(1 − μ)·a + μ·b] (a, b 는 정수 격자 벡터)
# 매듭점은 μ 가 그런 조합의 영점 (1/3, 1/2, 2/3 실수축 및 복소 영점) 을 피해 가도록 배치
UNIT_PROFILE_KNOTS: Tuple[Tuple[float, float], ...] = (
    (0.0, 0.0),
    (0.12, 0.030),
    (0.25, 0.044),
    (1.0 / 3.0, 0.050),
    (0.385, 0.037),
    (0.44, 0.047),
    (0.5, 0.066),
    (0.56, 0.047),
    (0.615, 0.037),
    (2.0 / 3.0, 0.050),
    (0.75, 0.044),
    (0.88, 0.030),
    (1.0, 0.0),
)


@dataclass(frozen=True)
class HaarKernel:
    """3×3 Boolean 가중치 (0: dark, 1: light)"""
    weights: Tuple[Tuple[bool, ...], ...]
    name: str = ""

    def __post_init__(self):
        rows = tuple(tuple(bool(w) for w in row) for row in self.weights)
        if len(rows) != KERNEL_SIZE or any(len(row) != KERNEL_SIZE for row in rows):
            raise ParameterError(f"Kernel must be 3x3, got {self.weights}")
        if not any(any(row) for row in rows):
            raise ParameterError(f"Kernel '{self.name}' has no weight equal to 1")
        object.__setattr__(self, "weights", rows)

    @classmethod
    def from_array(cls, values: Sequence[Sequence[int]], name: str = "") -> "HaarKernel":
        array = np.asarray(values)
        if array.shape != (KERNEL_SIZE, KERNEL_SIZE):
            raise ParameterError(f"Kernel must be 3x3, got shape {array.shape}")
        if not np.isin(array, (0, 1)).all():
            raise ParameterError(f"Kernel '{name}' must be Boolean (0/1)")
        return cls(tuple(tuple(bool(v) for v in row) for row in array), name)

    def as_array(self) -> np.ndarray:
        return np.array(self.weights, dtype=int)

    @property
    def ones(self) -> int:
        return int(self.as_array().sum())

    def support(self) -> List[Tuple[int, int]]:
        """가중치 1 인 (p, q) 목록"""
        return [(p, q) for p in range(KERNEL_SIZE) for q in range(KERNEL_SIZE) if self.weights[p][q]]


@dataclass(frozen=True)
class KernelSet:
    """
    커널 9개 + 출력 포트 배정

    assignment[f] = 필터 f 의 출력 격자 위치 k (0..8, (r, c) = divmod(k, 3))
    """
    kernels: Tuple[HaarKernel, ...]
    assignment: Tuple[int, ...] = tuple(range(FILTER_COUNT))

    def __post_init__(self):
        if len(self.kernels) != FILTER_COUNT:
            raise ParameterError(f"KernelSet needs exactly {FILTER_COUNT} kernels, got {len(self.kernels)}")
        if sorted(self.assignment) != list(range(FILTER_COUNT)):
            raise ParameterError(f"Assignment must be a permutation of 0..8, got {self.assignment}")
        object.__setattr__(self, "kernels", tuple(self.kernels))
        object.__setattr__(self, "assignment", tuple(int(k) for k in self.assignment))

    def with_assignment(self, assignment: Sequence[int]) -> "KernelSet":
        return KernelSet(self.kernels, tuple(assignment))

    def position(self, f: int) -> Tuple[int, int]:
        """필터 f 출력 포트의 유닛 내 (r, c)"""
        return divmod(self.assignment[f], KERNEL_SIZE)

    @cached_property
    def filter_at(self) -> Dict[int, int]:
        """출력 위치 k → 필터 index"""
        return {k: f for f, k in enumerate(self.assignment)}

    def stack(self) -> np.ndarray:
        """(9, 3, 3) 가중치 배열"""
        return np.stack([k.as_array() for k in self.kernels])

    def to_dict(self) -> Dict:
        return {
            "names": [k.name for k in self.kernels],
            "weights": [k.as_array().tolist() for k in self.kernels],
            "assignment": list(self.assignment),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "KernelSet":
        try:
            weights = data["weights"]
        except (KeyError, TypeError):
            raise ParameterError("Kernel block needs a 'weights' list") from None
        names = data.get("names") or [f"F{i + 1}" for i in range(len(weights))]
        kernels = tuple(HaarKernel.from_array(w, n) for w, n in zip(weights, names))
        assignment = data.get("assignment", list(range(FILTER_COUNT)))
        return cls(kernels, tuple(assignment))


def default_kernel_set() -> KernelSet:
    """
    기본 커널 세트 (연결 37개)
    F1 전체, F2 왼쪽 두 열, F3 위쪽 두 행, F4 왼쪽 열, F5 오른쪽 열,
    F6 위 행, F7 아래 행, F8 가운데 열, F9 가운데 화소
    """
    patterns = [
        [[1, 1, 1], [1, 1, 1], [1, 1, 1]],
        [[1, 1, 0], [1, 1, 0], [1, 1, 0]],
        [[1, 1, 1], [1, 1, 1], [0, 0, 0]],
        [[1, 0, 0], [1, 0, 0], [1, 0, 0]],
        [[0, 0, 1], [0, 0, 1], [0, 0, 1]],
        [[1, 1, 1], [0, 0, 0], [0, 0, 0]],
        [[0, 0, 0], [0, 0, 0], [1, 1, 1]],
        [[0, 1, 0], [0, 1, 0], [0, 1, 0]],
        [[0, 0, 0], [0, 1, 0], [0, 0, 0]],
    ]
    return KernelSet(tuple(HaarKernel.from_array(p, f"F{i + 1}") for i, p in enumerate(patterns)))


def uniform_kernel_set(pattern: Sequence[Sequence[int]]) -> KernelSet:
    """9개 모두 같은 패턴인 커널 세트 (테스트/축퇴 케이스용)"""
    return KernelSet(tuple(HaarKernel.from_array(pattern, f"F{i + 1}") for i in range(FILTER_COUNT)))


def load_kernel_set(path: Union[str, Path]) -> KernelSet:
    """JSON 파일 (넷리스트 'kernels' 블록 또는 블록 자체) 에서 커널 세트 로드"""
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    block = data.get("kernels", data) if isinstance(data, dict) else None
    if not block:
        raise ParameterError(f"No kernel block in {path}")
    return KernelSet.from_dict(block)


def connection_count(ks: KernelSet) -> int:
    """전체 연결 수 = 모든 커널의 1 가중치 합"""
    return sum(k.ones for k in ks.kernels)


@dataclass(frozen=True)
class FilterUnit(Circuit):
    """Haar 필터 유닛/배열 (metadata['kernels'] 에 커널 세트 보관)"""

    @property
    def kernel_set(self) -> KernelSet:
        return KernelSet.from_dict(self.metadata["kernels"])

    @property
    def unit_grid(self) -> Tuple[int, int]:
        grid = self.metadata.get("params", {}).get("units", [1, 1])
        return int(grid[0]), int(grid[1])

    def output_port_id(self, f: int, u: int = 0, v: int = 0) -> str:
        r, c = self.kernel_set.position(f)
        return f"out_{KERNEL_SIZE * u + r}_{KERNEL_SIZE * v + c}"

    def input_port_id(self, p: int, q: int, u: int = 0, v: int = 0) -> str:
        return f"in_{KERNEL_SIZE * u + p}_{KERNEL_SIZE * v + q}"


@dataclass(frozen=True)
class _Connection:
    f: int
    p: int
    q: int


def _connections(ks: KernelSet) -> List[_Connection]:
    return [_Connection(f, p, q) for f, kernel in enumerate(ks.kernels) for p, q in kernel.support()]


def unit_profile(chirality: Chirality = Chirality.RIGHT) -> KnotProfile:
    """유닛 공용 프로파일 (LEFT 는 측면 bow 방향 반전)"""
    xs, ys = zip(*UNIT_PROFILE_KNOTS)
    return KnotProfile(tuple(xs), tuple(ys), chirality.sign)


def _connection_path(
    ks: KernelSet, conn: _Connection, d0: float, height: float,
    profile: KnotProfile, diameter: float,
) -> WaveguidePath:
    """입력 (p, q) → 필터 f 출력 포트 (유닛 원점 기준, 수직 연결은 직선)"""
    r, c = ks.position(conn.f)
    start = Point3(conn.p * d0, conn.q * d0, height)
    end = Point3(r * d0, c * d0, 0.0)
    return graph_path(start, end, profile, diameter)


def _translated(path: WaveguidePath, dx: float, dy: float) -> WaveguidePath:
    if dx == 0.0 and dy == 0.0:
        return path
    return WaveguidePath(tuple(Point3(p.x + dx, p.y + dy, p.z) for p in path.control_points), path.diameter)


def _build(
    ks: KernelSet,
    template: Sequence[Tuple[_Connection, WaveguidePath]],
    d0: float,
    height: float,
    units: Tuple[int, int],
    params: Dict,
) -> FilterUnit:
    """유닛 템플릿을 (units) 격자로 배치해 회로 구성"""
    n_u, n_v = units
    ports: List[Port] = []
    segments: List[Segment] = []
    span = KERNEL_SIZE * d0
    for u in range(n_u):
        for v in range(n_v):
            for p in range(KERNEL_SIZE):
                for q in range(KERNEL_SIZE):
                    i, j = KERNEL_SIZE * u + p, KERNEL_SIZE * v + q
                    ports.append(Port(f"in_{i}_{j}", (i, j), Point3(i * d0, j * d0, height), PortRole.INPUT))
    for u in range(n_u):
        for v in range(n_v):
            for k in range(FILTER_COUNT):
                r, c = divmod(k, KERNEL_SIZE)
                i, j = KERNEL_SIZE * u + r, KERNEL_SIZE * v + c
                ports.append(Port(f"out_{i}_{j}", (i, j), Point3(i * d0, j * d0, 0.0), PortRole.OUTPUT))
    ports.sort(key=lambda port: (port.role.value != "input", port.grid_index))

    for u in range(n_u):
        for v in range(n_v):
            for conn, path in template:
                r, c = ks.position(conn.f)
                source = f"in_{KERNEL_SIZE * u + conn.p}_{KERNEL_SIZE * v + conn.q}"
                target = f"out_{KERNEL_SIZE * u + r}_{KERNEL_SIZE * v + c}"
                segments.append(Segment(
                    f"s{len(segments):05d}", _translated(path, u * span, v * span), source, target,
                ))

    metadata = {
        "name": "haar-unit" if units == (1, 1) else f"haar-{n_u * KERNEL_SIZE}x{n_v * KERNEL_SIZE}",
        "generator": "haar",
        "params": {**params, "d0": d0, "height": height, "units": [n_u, n_v]},
        "units": {"length": "um", "loss": "dB"},
        "kernels": ks.to_dict(),
    }
    return FilterUnit(tuple(ports), (), tuple(segments), metadata)


def route_unit(
    ks: KernelSet,
    d0: float = 20.0,
    height: float = 80.0,
    chirality: Chirality = Chirality.RIGHT,
    diameter: float = DEFAULT_DIAMETER,
    limits: Optional[ManufacturingLimits] = None,
) -> Tuple[List[Tuple[_Connection, WaveguidePath]], Dict]:
    """
    유닛 배선 (공용 프로파일) 및 간격 검증

    모든 연결이 같은 프로파일을 공유하므로 입력 또는 출력 포트를 공유하는 쌍도
    공유 포트에서만 만남. D0 = 20, 높이 80 기준 최소 여유 ≈ 0.6 µm.

    Raises:
        GenerationError: 간격 위반 시 (가장 가까운 세그먼트 쌍 포함)
    """
    if not d0 > 0 or not height > 0:
        raise ParameterError(f"D0 and height must be positive, got D0={d0}, height={height}")
    limits = limits or ManufacturingLimits()
    profile = unit_profile(chirality)
    template = [
        (conn, _connection_path(ks, conn, d0, height, profile, diameter))
        for conn in _connections(ks)
    ]
    params = {
        "chirality": chirality.value,
        "diameter": diameter,
        "routing": "knot-profile",
        "profile": [list(knot) for knot in UNIT_PROFILE_KNOTS],
    }

    unit = _build(ks, template, d0, height, (1, 1), params)
    violations = check_clearance(unit, limits.clearance, limits)
    if violations:
        worst = min(violations, key=lambda v: v.distance)
        logger.error(f"❌ Haar unit routing: {len(violations)} clearance violation(s)")
        raise GenerationError(
            f"Haar unit routing failed: {worst.id_a} / {worst.id_b} at {worst.distance:.3f} µm",
            offending_pair=(worst.id_a, worst.id_b),
        )
    logger.debug(f"Haar unit routed: {len(template)} connections, profile {chirality.value}")
    return template, params


def generate_filter_unit(
    ks: Optional[KernelSet] = None,
    d0: float = 20.0,
    height: float = 80.0,
    chirality: Chirality = Chirality.RIGHT,
    diameter: float = DEFAULT_DIAMETER,
    limits: Optional[ManufacturingLimits] = None,
) -> FilterUnit:
    """
    단일 필터 유닛
    입력 3×3 (z = height), 출력 3×3 (z = 0), K_f(p, q) = 1 인 (p, q) 마다 직접 배선
    """
    ks = ks or default_kernel_set()
    template, params = route_unit(ks, d0, height, chirality, diameter, limits)
    unit = _build(ks, template, d0, height, (1, 1), params)
    logger.info(f"✅ Haar unit: 9 inputs, 9 outputs, {len(unit.segments)} connections")
    return unit


def tile_filter_array(
    ks: Optional[KernelSet] = None,
    image_side: int = 21,
    d0: float = 20.0,
    height: float = 80.0,
    chirality: Chirality = Chirality.RIGHT,
    diameter: float = DEFAULT_DIAMETER,
    limits: Optional[ManufacturingLimits] = None,
) -> FilterUnit:
    """
    stride 3 필터 배열
    image_side × image_side 입력, (image_side/3)² 유닛 (겹침 없음)
    """
    if image_side < KERNEL_SIZE or image_side % KERNEL_SIZE:
        raise ParameterError(f"Image side must be a positive multiple of 3, got {image_side}")
    ks = ks or default_kernel_set()
    n = image_side // KERNEL_SIZE
    template, params = route_unit(ks, d0, height, chirality, diameter, limits)
    array = _build(ks, template, d0, height, (n, n), {**params, "image_side": image_side})
    logger.info(
        f"✅ Haar array {image_side}x{image_side}: {n * n} units, "
        f"{len(array.inputs())} inputs, {len(array.outputs())} outputs"
    )
    return array
