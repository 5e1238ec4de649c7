"""
WaveRoute - 프랙탈 fan-out 커플러 생성기
FractalSpec → 충돌 없는 3D 커플러 기하 (단일 커플러 및 출력 격자 공유 어레이)

재귀 규칙: D_L = D0, H_L = k·D0, D_l = √b·D_{l+1}, H_l = √b·H_{l+1}
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple
import logging
import math

from ..core.config import worker_count
from ..core.curves import RampProfile, graph_path, straight_path
from ..core.errors import ParameterError
from ..models.geometry import (
    BifurcationNode, Circuit, Point3, Port, PortRole, Segment, WaveguidePath, DEFAULT_DIAMETER,
)

logger = logging.getLogger(__name__)

MERGE_TOLERANCE = 1e-6  # µm


class Chirality(Enum):
    """연결 곡선의 측면 bow 방향성"""
    LEFT = "left"
    RIGHT = "right"

    @property
    def sign(self) -> float:
        return 1.0 if self is Chirality.RIGHT else -1.0


@dataclass(frozen=True)
class FractalSpec:
    """
    프랙탈 커플러 파라미터

    b: branching ratio (완전제곱수 >= 4)
    layers: 분기 층수 L
    d0: 출력 pitch (µm)
    height_factor: H_L = k·D0
    scale: 모든 H_l, D_l 배율 (손실 측정용 확대 커플러)
    stem_fraction: 층 위에 올리는 입력 stem 길이 / ΣH_l (각 층은 정확히 H_l 하강)
    bow_factor: 측면 bow 깊이 / (D_l · 격자비 r)
    ramp_factor: bow ramp 폭 / r (수평 진행 기준)
    z_bow_factor: 수평 진행 지연 λ, g(ζ) = ζ − λ·sin(πζ), 하향 처짐 ≈ λ·H_l
    """
    b: int = 9
    layers: int = 1
    d0: float = 20.0
    height_factor: float = 4.0
    chirality: Chirality = Chirality.RIGHT
    diameter: float = DEFAULT_DIAMETER
    scale: float = 1.0
    stem_fraction: float = 0.2
    bow_factor: float = 0.14
    ramp_factor: float = 0.25
    z_bow_factor: float = 0.1

    def __post_init__(self):
        root = math.isqrt(self.b) if isinstance(self.b, int) and self.b > 0 else 0
        if root < 2 or root * root != self.b:
            raise ParameterError(f"b must be a perfect square >= 4, got {self.b}")
        if not (isinstance(self.layers, int) and self.layers >= 1):
            raise ParameterError(f"layers must be an integer >= 1, got {self.layers}")
        if not self.d0 > 0:
            raise ParameterError(f"D0 must be positive, got {self.d0}")
        if not self.height_factor > 0:
            raise ParameterError(f"height factor must be positive, got {self.height_factor}")
        if not self.diameter > 0:
            raise ParameterError(f"diameter must be positive, got {self.diameter}")
        if not self.scale > 0:
            raise ParameterError(f"scale must be positive, got {self.scale}")
        if not 0.0 < self.stem_fraction < 1.0:
            raise ParameterError(f"stem fraction must be in (0, 1), got {self.stem_fraction}")
        if not self.bow_factor >= 0.0:
            raise ParameterError(f"bow factor must be >= 0, got {self.bow_factor}")
        if not 0.0 < self.ramp_factor <= 0.5:
            raise ParameterError(f"ramp factor must be in (0, 0.5], got {self.ramp_factor}")
        if not 0.0 <= self.z_bow_factor < 1.0 / math.pi:
            raise ParameterError(f"z-bow factor must be in [0, 1/π), got {self.z_bow_factor}")
        if not isinstance(self.chirality, Chirality):
            object.__setattr__(self, "chirality", Chirality(self.chirality))

    @property
    def root(self) -> int:
        """√b (자식 격자 한 변)"""
        return math.isqrt(self.b)

    @property
    def output_count(self) -> int:
        return self.b ** self.layers

    @property
    def output_side(self) -> int:
        return self.root ** self.layers

    @property
    def output_pitch(self) -> float:
        return self.scale * self.d0

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["chirality"] = self.chirality.value
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "FractalSpec":
        fields = dict(data)
        if "chirality" in fields:
            fields["chirality"] = Chirality(fields["chirality"])
        return cls(**{k: v for k, v in fields.items() if k in cls.__dataclass_fields__})


@dataclass(frozen=True)
class LayerDims:
    """층별 (H_l, D_l), index 0 = layer 1"""
    heights: Tuple[float, ...]
    pitches: Tuple[float, ...]

    @property
    def total_height(self) -> float:
        return float(sum(self.heights))

    def layer(self, l: int) -> Tuple[float, float]:
        """layer l (1-based) 의 (H_l, D_l)"""
        return self.heights[l - 1], self.pitches[l - 1]


def layer_dimensions(spec: FractalSpec) -> LayerDims:
    """재귀 층 치수 계산"""
    root = float(spec.root)
    d_last = spec.scale * spec.d0
    h_last = spec.scale * spec.height_factor * spec.d0
    heights = tuple(h_last * root ** (spec.layers - l) for l in range(1, spec.layers + 1))
    pitches = tuple(d_last * root ** (spec.layers - l) for l in range(1, spec.layers + 1))
    return LayerDims(heights, pitches)


def child_offsets(spec: FractalSpec) -> List[Tuple[float, float]]:
    """√b × √b 자식 격자 오프셋 (D_l 단위, 부모 중심)"""
    half = (spec.root - 1) / 2.0
    return [(i - half, j - half) for i in range(spec.root) for j in range(spec.root)]


def branch_angle(spec: FractalSpec) -> Tuple[float, float]:
    """
    분기 각도 (축 방향, 대각 방향) [deg]
    arctan(최대 자식 측면 오프셋 / 층 높이) - 모든 층에서 동일
    """
    angles = layer_branch_angles(spec)
    return angles[0]


def layer_branch_angles(spec: FractalSpec) -> List[Tuple[float, float]]:
    """층별 분기 각도 목록"""
    dims = layer_dimensions(spec)
    reach = (spec.root - 1) / 2.0
    result = []
    for h, d in zip(dims.heights, dims.pitches):
        axial = math.degrees(math.atan(reach * d / h))
        diagonal = math.degrees(math.atan(math.sqrt(2.0) * reach * d / h))
        result.append((axial, diagonal))
    return result


def _vertex_key(kind: str, layer: int, x: float, y: float) -> Tuple[str, int, int, int]:
    return (kind, layer, int(round(x / MERGE_TOLERANCE)), int(round(y / MERGE_TOLERANCE)))


def lattice_ratio(spec: FractalSpec, layer: int, input_multiple: Optional[int] = None) -> float:
    """
    layer 의 부모 격자 pitch / D_l (1 로 상한)

    부모 위치 차이는 D_1 … D_{l-1} 과 입력 pitch 의 정수 결합이므로
    pitch = gcd(√b^{L-1}, …, √b^{L-l+1}, k)·D_L (k = 입력 pitch / 출력 pitch, 단일 입력이면 제외)
    """
    terms = [spec.root ** (spec.layers - j) for j in range(1, layer)]
    if input_multiple is not None:
        terms.append(int(input_multiple))
    if not terms:
        return 1.0
    return min(1.0, math.gcd(*terms) / spec.root ** (spec.layers - layer))


def layer_profile(spec: FractalSpec, ratio: float = 1.0) -> RampProfile:
    """층 곡선 공통 프로파일 (bow 깊이, ramp 폭은 격자비에 비례)"""
    return RampProfile(
        depth=spec.bow_factor * ratio,
        ramp=spec.ramp_factor * ratio,
        lag=spec.z_bow_factor,
        sign=spec.chirality.sign,
    )


def branch_path(
    spec: FractalSpec, parent: Point3, child: Point3, ratio: float = 1.0
) -> WaveguidePath:
    """
    부모 → 자식 연결 곡선 (z 에 대한 그래프)

    같은 층의 모든 곡선이 한 프로파일을 공유하므로 같은 높이에서 진행도가 같다.
    중앙 자식은 수직 직선.
    """
    return graph_path(parent, child, layer_profile(spec, ratio), spec.diameter)


def _layer_levels(dims: LayerDims, z_base: float) -> List[float]:
    """노드 z 위치: [z_node_1, ..., z_node_L, z_output], 층 l 은 정확히 H_l 하강"""
    levels = [z_base + dims.total_height]
    for h in dims.heights:
        levels.append(levels[-1] - h)
    levels[-1] = z_base
    return levels


def generate_coupler_array(
    spec: FractalSpec,
    grid: Tuple[int, int] = (1, 1),
    input_pitch: Optional[float] = None,
    origin: Optional[Point3] = None,
    max_workers: Optional[int] = None,
) -> Circuit:
    """
    n × m 입력 커플러 어레이 생성

    공유 출력 격자에서 위치가 일치하는 출력 포트와 분기 노드는 하나로 병합.
    input_pitch 는 출력 pitch 의 정수배여야 함 (기본 = 출력 pitch).
    """
    n, m = int(grid[0]), int(grid[1])
    if n < 1 or m < 1:
        raise ParameterError(f"Grid must be at least 1x1, got {grid}")
    out_pitch = spec.output_pitch
    if input_pitch is None:
        input_pitch = out_pitch
    ratio = input_pitch / out_pitch
    if round(ratio) < 1 or abs(ratio - round(ratio)) > 1e-9:
        raise ParameterError(
            f"Input pitch {input_pitch} must be an integer multiple of output pitch {out_pitch}"
        )

    dims = layer_dimensions(spec)
    x0, y0 = (origin.x, origin.y) if origin is not None else (0.0, 0.0)
    stem = spec.stem_fraction * dims.total_height
    z_base = origin.z - dims.total_height - stem if origin is not None else 0.0
    levels = _layer_levels(dims, z_base)
    z_input = origin.z if origin is not None else levels[0] + stem
    multiple = int(round(ratio)) if n * m > 1 else None

    positions: Dict[Tuple, Point3] = {}
    inputs: Dict[Tuple, Tuple[int, int]] = {}
    edges: List[Tuple[Tuple, Tuple, WaveguidePath]] = []

    # 입력 포트 + stem
    frontier: List[Tuple] = []
    for a in range(n):
        for c in range(m):
            x, y = x0 + a * input_pitch, y0 + c * input_pitch
            in_key = _vertex_key("in", 0, x, y)
            node_key = _vertex_key("node", 1, x, y)
            positions[in_key] = Point3(x, y, z_input)
            positions[node_key] = Point3(x, y, levels[0])
            inputs[in_key] = (a, c)
            edges.append((in_key, node_key, straight_path(positions[in_key], positions[node_key], spec.diameter)))
            frontier.append(node_key)

    offsets = child_offsets(spec)
    workers = max_workers or worker_count()

    for l in range(1, spec.layers + 1):
        _, d_l = dims.layer(l)
        last = l == spec.layers
        z_child = levels[l]
        parents = sorted(set(frontier))
        lattice = lattice_ratio(spec, l, multiple)

        def build(parent_key, d_l=d_l, last=last, z_child=z_child, l=l, lattice=lattice):
            parent = positions[parent_key]
            built = []
            for di, dj in offsets:
                cx, cy = parent.x + di * d_l, parent.y + dj * d_l
                key = _vertex_key("out", 0, cx, cy) if last else _vertex_key("node", l + 1, cx, cy)
                child = Point3(cx, cy, z_child)
                built.append((key, child, branch_path(spec, parent, child, lattice)))
            return parent_key, built

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(build, parents))

        frontier = []
        for parent_key, built in results:
            for key, child, path in built:
                positions.setdefault(key, child)
                edges.append((parent_key, key, path))
                frontier.append(key)

    circuit = _assemble(spec, positions, inputs, edges, out_pitch)
    circuit.metadata.update({
        "name": f"fractal-{n}x{m}-1x{spec.output_count}",
        "generator": "fractal",
        "params": {**spec.to_dict(), "grid": [n, m], "input_pitch": input_pitch},
        "units": {"length": "um", "loss": "dB"},
    })
    logger.info(
        f"✅ Fractal array {n}x{m} (b={spec.b}, L={spec.layers}): "
        f"N_I={len(circuit.inputs())}, N_O={len(circuit.outputs())}, segments={len(circuit.segments)}"
    )
    return circuit


def _assemble(
    spec: FractalSpec,
    positions: Dict[Tuple, Point3],
    inputs: Dict[Tuple, Tuple[int, int]],
    edges: List[Tuple[Tuple, Tuple, WaveguidePath]],
    out_pitch: float,
) -> Circuit:
    """키 기반 정점/엣지 → 결정적 id 부여 후 Circuit 구성"""
    out_keys = sorted(k for k in positions if k[0] == "out")
    xs = [positions[k].x for k in out_keys]
    ys = [positions[k].y for k in out_keys]
    x_min, y_min = min(xs), min(ys)

    ids: Dict[Tuple, str] = {}
    ports: List[Port] = []
    for key, (a, c) in sorted(inputs.items(), key=lambda item: item[1]):
        ids[key] = f"in_{a}_{c}"
        ports.append(Port(ids[key], (a, c), positions[key], PortRole.INPUT))

    out_entries = []
    for key in out_keys:
        p = positions[key]
        index = (int(round((p.x - x_min) / out_pitch)), int(round((p.y - y_min) / out_pitch)))
        out_entries.append((index, key))
    for index, key in sorted(out_entries):
        ids[key] = f"out_{index[0]}_{index[1]}"
        ports.append(Port(ids[key], index, positions[key], PortRole.OUTPUT))

    node_keys = sorted(
        (k for k in positions if k[0] == "node"),
        key=lambda k: (k[1], positions[k].x, positions[k].y),
    )
    counters: Dict[int, int] = {}
    for key in node_keys:
        layer = key[1]
        counters[layer] = counters.get(layer, 0) + 1
        ids[key] = f"n{layer}_{counters[layer]:04d}"

    order = {key: rank for rank, key in enumerate(sorted(ids, key=lambda k: ids[k]))}
    edges = sorted(edges, key=lambda e: (order[e[0]], order[e[1]]))

    children: Dict[str, List[str]] = {}
    segments = []
    for k, (src, dst, path) in enumerate(edges):
        segments.append(Segment(f"s{k:05d}", path, ids[src], ids[dst]))
        children.setdefault(ids[src], []).append(ids[dst])

    nodes = [
        BifurcationNode(ids[key], positions[key], key[1], tuple(sorted(children.get(ids[key], []))))
        for key in node_keys
    ]
    return Circuit(tuple(ports), tuple(nodes), tuple(segments), {})


def generate_coupler(spec: FractalSpec, input_point: Optional[Point3] = None) -> Circuit:
    """
    단일 1 × b^L 커플러
    input_point 미지정 시 (0, 0, H_total)
    """
    circuit = generate_coupler_array(spec, (1, 1), origin=input_point)
    circuit.metadata["name"] = f"fractal-1x{spec.output_count}"
    return circuit


def measurement_configurations(spec: Optional[FractalSpec] = None) -> Dict[str, Circuit]:
    """
    손실 분리 측정용 3가지 커플러
    - standard_1x9: 기본 1 × b
    - scaled_1x9: H_L, D_L 을 √b 배 확대한 1 × b
    - standard_1x81: 2층 1 × b²
    """
    base = spec or FractalSpec()
    single = FractalSpec.from_dict({**base.to_dict(), "layers": 1, "scale": 1.0})
    scaled = FractalSpec.from_dict({**base.to_dict(), "layers": 1, "scale": float(base.root)})
    double = FractalSpec.from_dict({**base.to_dict(), "layers": 2, "scale": 1.0})
    return {
        "standard_1x9": generate_coupler(single),
        "scaled_1x9": generate_coupler(scaled),
        "standard_1x81": generate_coupler(double),
    }
