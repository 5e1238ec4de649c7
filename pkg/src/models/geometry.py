"""
WaveRoute - 기하 데이터 모델
Point3, WaveguidePath, Port, BifurcationNode, Segment, Circuit

좌표계: z 축이 광 전파/성장 방향 (입력 평면 z = H_total, 출력 평면 z = 0)
단위: µm
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Dict, Iterator, List, Optional, Tuple
import math

import networkx as nx
import numpy as np

from ..core.errors import ParameterError, StructuralError


DEFAULT_DIAMETER = 1.2  # µm
C1_TOLERANCE_DEG = 1.0


@dataclass(frozen=True)
class Point3:
    """3D 좌표 (µm)"""
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ParameterError(f"Non-finite coordinate: ({self.x}, {self.y}, {self.z})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.x, self.y, self.z)

    @classmethod
    def from_array(cls, values) -> "Point3":
        return cls(float(values[0]), float(values[1]), float(values[2]))


@dataclass(frozen=True)
class WaveguidePath:
    """
    도파로 중심선 (piecewise cubic Bézier) + 직경

    control_points: 4, 7, 10, ... 개 (세그먼트끼리 끝점 공유)
    """
    control_points: Tuple[Point3, ...]
    diameter: float = DEFAULT_DIAMETER

    def __post_init__(self):
        count = len(self.control_points)
        if count < 4 or count % 3 != 1:
            raise ParameterError(f"Control point count must be >= 4 and = 1 mod 3, got {count}")
        if not self.diameter > 0:
            raise ParameterError(f"Diameter must be positive, got {self.diameter}")
        self._check_tangent_continuity()

    def _check_tangent_continuity(self) -> None:
        """내부 접합점 C¹ 연속성 확인 (1° 이내)"""
        cp = self.points
        for joint in range(3, len(cp) - 1, 3):
            incoming = cp[joint] - cp[joint - 1]
            outgoing = cp[joint + 1] - cp[joint]
            n_in, n_out = np.linalg.norm(incoming), np.linalg.norm(outgoing)
            if n_in < 1e-12 or n_out < 1e-12:
                continue
            cos_angle = np.clip(np.dot(incoming, outgoing) / (n_in * n_out), -1.0, 1.0)
            angle = math.degrees(math.acos(cos_angle))
            if angle > C1_TOLERANCE_DEG:
                raise ParameterError(f"Tangent discontinuity {angle:.2f}° at control point {joint}")

    @cached_property
    def points(self) -> np.ndarray:
        """제어점 배열 (n, 3)"""
        return np.array([p.as_tuple() for p in self.control_points], dtype=float)

    @property
    def segment_count(self) -> int:
        return (len(self.control_points) - 1) // 3

    @property
    def start(self) -> Point3:
        return self.control_points[0]

    @property
    def end(self) -> Point3:
        return self.control_points[-1]

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        """
        전역 파라미터 t ∈ [0, segment_count] 에서 곡선 위치 계산

        Returns:
            (len(t), 3) 배열
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        n = self.segment_count
        index = np.clip(np.floor(t).astype(int), 0, n - 1)
        u = (t - index)[:, None]
        cp = self.points
        p0 = cp[3 * index]
        p1 = cp[3 * index + 1]
        p2 = cp[3 * index + 2]
        p3 = cp[3 * index + 3]
        w = 1.0 - u
        return w ** 3 * p0 + 3 * w ** 2 * u * p1 + 3 * w * u ** 2 * p2 + u ** 3 * p3

    def start_direction(self) -> np.ndarray:
        """시작점에서 곡선을 따라 나가는 단위 방향"""
        return _leaving_direction(self.points)

    def end_direction(self) -> np.ndarray:
        """끝점에서 곡선을 거슬러 나가는 단위 방향 (끝점 기준 바깥 방향)"""
        return _leaving_direction(self.points[::-1])

    def mirrored_x(self, x0: float = 0.0) -> "WaveguidePath":
        """x = x0 평면 (y,z 평면) 기준 거울상"""
        return WaveguidePath(
            tuple(Point3(2 * x0 - p.x, p.y, p.z) for p in self.control_points),
            self.diameter,
        )


def _leaving_direction(cp: np.ndarray) -> np.ndarray:
    for k in range(1, len(cp)):
        d = cp[k] - cp[0]
        norm = np.linalg.norm(d)
        if norm > 1e-12:
            return d / norm
    return np.zeros(3)


class PortRole(Enum):
    """포트 역할"""
    INPUT = "input"
    OUTPUT = "output"


@dataclass(frozen=True)
class Port:
    """입출력 포트"""
    id: str
    grid_index: Tuple[int, int]
    position: Point3
    role: PortRole


@dataclass(frozen=True)
class BifurcationNode:
    """분기점 (layer l, 자식 참조)"""
    id: str
    position: Point3
    layer: int
    children: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Segment:
    """도파로 세그먼트 (source/target 은 포트 또는 노드 id)"""
    id: str
    path: WaveguidePath
    source: str
    target: str

    @property
    def diameter(self) -> float:
        return self.path.diameter


@dataclass(frozen=True)
class Circuit:
    """
    라우팅 DAG + 기하
    입력 평면에서 출력 평면 방향으로 향하는 세그먼트 그래프
    """
    ports: Tuple[Port, ...] = ()
    nodes: Tuple[BifurcationNode, ...] = ()
    segments: Tuple[Segment, ...] = ()
    metadata: Dict[str, Any] = field(default_factory=dict, compare=True, hash=False)

    @property
    def name(self) -> str:
        return str(self.metadata.get("name", ""))

    def inputs(self) -> List[Port]:
        return [p for p in self.ports if p.role is PortRole.INPUT]

    def outputs(self) -> List[Port]:
        return [p for p in self.ports if p.role is PortRole.OUTPUT]

    @cached_property
    def port_map(self) -> Dict[str, Port]:
        return {p.id: p for p in self.ports}

    @cached_property
    def node_map(self) -> Dict[str, BifurcationNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def segment_map(self) -> Dict[str, Segment]:
        return {s.id: s for s in self.segments}

    def port(self, port_id: str) -> Port:
        try:
            return self.port_map[port_id]
        except KeyError:
            raise ParameterError(f"Unknown port id: {port_id}") from None

    def vertex_position(self, vertex_id: str) -> Point3:
        if vertex_id in self.port_map:
            return self.port_map[vertex_id].position
        if vertex_id in self.node_map:
            return self.node_map[vertex_id].position
        raise StructuralError(f"Unknown vertex: {vertex_id}")

    def incident_segments(self, vertex_id: str) -> List[Segment]:
        return [s for s in self.segments if vertex_id in (s.source, s.target)]

    def iter_paths(self) -> Iterator[Tuple[str, WaveguidePath]]:
        for seg in self.segments:
            yield seg.id, seg.path

    def to_graph(self) -> nx.MultiDiGraph:
        """세그먼트 그래프 (edge key = segment id)"""
        graph = nx.MultiDiGraph()
        for port in self.ports:
            graph.add_node(port.id, kind="port", role=port.role)
        for node in self.nodes:
            graph.add_node(node.id, kind="node", layer=node.layer)
        for seg in self.segments:
            for vertex in (seg.source, seg.target):
                if vertex not in graph:
                    raise StructuralError(f"Segment {seg.id} references unknown vertex {vertex}")
            graph.add_edge(seg.source, seg.target, key=seg.id)
        return graph

    def topological_order(self) -> List[str]:
        """결정적 위상 정렬 (순환 시 StructuralError)"""
        graph = self.to_graph()
        try:
            return list(nx.lexicographical_topological_sort(graph, key=str))
        except nx.NetworkXUnfeasible:
            raise StructuralError(f"Circuit '{self.name}' segment graph contains a cycle") from None

    def validate_structure(self) -> Tuple[bool, List[str]]:
        """
        구조 불변조건 검증
        - DAG
        - 모든 출력 포트가 어떤 입력 포트에서 도달 가능
        - 노드 자식 수 <= branching ratio
        - 같은 역할 포트 위치 중복 없음, 입력/출력 평면 분리
        """
        errors = []
        graph = self.to_graph()

        if not nx.is_directed_acyclic_graph(graph):
            errors.append("segment graph is not acyclic")
        else:
            reachable = set()
            for port in self.inputs():
                reachable |= nx.descendants(graph, port.id)
            for port in self.outputs():
                if port.id not in reachable:
                    errors.append(f"output {port.id} unreachable from any input")

        branching = self.metadata.get("params", {}).get("b")
        if branching is not None:
            for node in self.nodes:
                if graph.out_degree(node.id) > int(branching):
                    errors.append(f"node {node.id} has {graph.out_degree(node.id)} children > b={branching}")

        for role in PortRole:
            ports = [p for p in self.ports if p.role is role]
            positions = {p.position.as_tuple() for p in ports}
            if len(positions) != len(ports):
                errors.append(f"duplicate {role.value} port positions")

        in_z = {round(p.position.z, 9) for p in self.inputs()}
        out_z = {round(p.position.z, 9) for p in self.outputs()}
        if len(in_z) > 1 or len(out_z) > 1:
            errors.append("ports of one role do not share a plane")
        if in_z and out_z and in_z & out_z:
            errors.append("input and output planes coincide")

        return len(errors) == 0, errors

    def summary(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "inputs": len(self.inputs()),
            "outputs": len(self.outputs()),
            "nodes": len(self.nodes),
            "segments": len(self.segments),
        }
