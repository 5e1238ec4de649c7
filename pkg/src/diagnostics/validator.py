"""
WaveRoute - 제조성 검증
충돌/간격, 굽힘 반경, 종횡비 검사
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.spatial import cKDTree

from ..core.curves import (
    DEFAULT_SAMPLE_PITCH, arc_length, discrete_curvature_radius, sample_path, segment_distances,
)
from ..core.errors import ParameterError
from ..models.geometry import Circuit, Point3, Segment

logger = logging.getLogger(__name__)


@dataclass
class ManufacturingLimits:
    """
    제조 임계값 (공정 데이터로 보정 전 기본값)
    """
    clearance: float = 0.5  # µm - 표면 간 최소 간격
    r_min: float = 2.0  # µm - 최소 굽힘 반경
    junction_factor: float = 2.0  # 접합부 제외 길이 = factor · d
    sample_pitch: float = DEFAULT_SAMPLE_PITCH

    def __post_init__(self):
        if self.clearance < 0:
            raise ParameterError(f"Clearance must be >= 0, got {self.clearance}")
        if not self.r_min > 0:
            raise ParameterError(f"r_min must be positive, got {self.r_min}")
        if not self.sample_pitch > 0:
            raise ParameterError(f"Sampling pitch must be positive, got {self.sample_pitch}")

    def threshold(self, d_a: float, d_b: float) -> float:
        """중심선 간 최소 허용 거리"""
        return 0.5 * (d_a + d_b) + self.clearance

    def check_distance(self, distance: float, d_a: float, d_b: float) -> Tuple[bool, Optional[str]]:
        """중심선 거리 확인"""
        limit = self.threshold(d_a, d_b)
        if distance < limit:
            return False, f"간격 위반: {distance:.3f} µm (허용: {limit:.3f} µm)"
        return True, None

    def check_radius(self, radius: float) -> Tuple[bool, Optional[str]]:
        """굽힘 반경 확인"""
        if radius < self.r_min:
            return False, f"굽힘 반경 위반: {radius:.3f} µm (최소: {self.r_min} µm)"
        return True, None


@dataclass(frozen=True)
class ClearanceViolation:
    """세그먼트 쌍 간격 위반"""
    id_a: str
    id_b: str
    distance: float  # µm (중심선)
    location: Point3

    def to_dict(self) -> Dict:
        return {
            "pair": [self.id_a, self.id_b],
            "distance": self.distance,
            "location": list(self.location.as_tuple()),
        }


@dataclass
class ValidationReport:
    """검증 결과"""
    clearance_violations: List[ClearanceViolation] = field(default_factory=list)
    min_bend_radius_found: float = math.inf
    bend_violations: List[str] = field(default_factory=list)
    max_aspect_ratio: float = 0.0
    structure_errors: List[str] = field(default_factory=list)
    thresholds: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not (self.clearance_violations or self.bend_violations or self.structure_errors)

    @property
    def violations(self) -> List[ClearanceViolation]:
        return self.clearance_violations

    def to_dict(self) -> Dict:
        """JSON 직렬화용 (inf → None)"""
        def finite(value: float) -> Optional[float]:
            return value if math.isfinite(value) else None

        return {
            "pass": self.passed,
            "clearance_violations": [v.to_dict() for v in self.clearance_violations],
            "min_bend_radius_found": finite(self.min_bend_radius_found),
            "bend_violations": list(self.bend_violations),
            "max_aspect_ratio": finite(self.max_aspect_ratio),
            "structure_errors": list(self.structure_errors),
            "thresholds": dict(self.thresholds),
        }


@dataclass
class _SampledCircuit:
    """브로드 페이즈용 전역 샘플 테이블"""
    points: np.ndarray  # (n, 3)
    owner: np.ndarray  # 점 → 세그먼트 index
    arc: np.ndarray  # 세그먼트 시작점부터 누적 호길이
    first: np.ndarray  # 세그먼트별 첫 점 index
    last: np.ndarray  # 세그먼트별 마지막 점 index
    lengths: np.ndarray  # 세그먼트별 총 호길이


def _sample_segments(segments: Sequence[Segment], pitch: float) -> _SampledCircuit:
    chunks, owners, arcs, first, last, lengths = [], [], [], [], [], []
    offset = 0
    for index, seg in enumerate(segments):
        pts = sample_path(seg.path, pitch)
        cumulative = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
        chunks.append(pts)
        owners.append(np.full(len(pts), index))
        arcs.append(cumulative)
        first.append(offset)
        last.append(offset + len(pts) - 1)
        lengths.append(cumulative[-1])
        offset += len(pts)
    return _SampledCircuit(
        np.concatenate(chunks), np.concatenate(owners), np.concatenate(arcs),
        np.array(first), np.array(last), np.array(lengths),
    )


def _leaving_tangent(seg: Segment, vertex: str) -> np.ndarray:
    return seg.path.start_direction() if seg.source == vertex else seg.path.end_direction()


def junction_exclusion(
    seg_a: Segment, seg_b: Segment, vertex: str, threshold: float, junction_factor: float = 2.0
) -> float:
    """
    공유 정점 주변 제외 길이
    ℓ = max(factor·d, threshold / sin(θ/2)), θ = 정점에서 나가는 두 접선 사이 각
    """
    ta = _leaving_tangent(seg_a, vertex)
    tb = _leaving_tangent(seg_b, vertex)
    theta = math.acos(float(np.clip(np.dot(ta, tb), -1.0, 1.0)))
    base = junction_factor * max(seg_a.diameter, seg_b.diameter)
    half = math.sin(theta / 2.0)
    return max(base, threshold / half) if half > 1e-9 else math.inf


def _shared_vertices(seg_a: Segment, seg_b: Segment) -> List[str]:
    return sorted({seg_a.source, seg_a.target} & {seg_b.source, seg_b.target})


def _edge_pairs(index: np.ndarray, sampled: _SampledCircuit) -> Tuple[np.ndarray, np.ndarray]:
    """점 index → 인접 폴리라인 edge 두 개의 시작 index"""
    owner = sampled.owner[index]
    after = np.where(index == sampled.last[owner], index - 1, index)
    before = np.where(index == sampled.first[owner], index, index - 1)
    return before, after


def check_clearance(
    circuit: Circuit,
    min_surface_clearance: float = 0.5,
    limits: Optional[ManufacturingLimits] = None,
) -> List[ClearanceViolation]:
    """
    세그먼트 쌍 간격 검사

    중심선 거리 < (d_a + d_b)/2 + clearance 인 모든 비순서 쌍 보고.
    공유 노드/포트에서 만나는 쌍은 접합부 제외 길이 안쪽 구간을 무시.

    Returns:
        (id_a, id_b) 순으로 정렬된 위반 목록 (쌍마다 최소 거리 1개)
    """
    if min_surface_clearance < 0:
        raise ParameterError(f"Clearance must be >= 0, got {min_surface_clearance}")
    limits = limits or ManufacturingLimits(clearance=min_surface_clearance)
    if limits.clearance != min_surface_clearance:
        limits = ManufacturingLimits(
            clearance=min_surface_clearance, r_min=limits.r_min,
            junction_factor=limits.junction_factor, sample_pitch=limits.sample_pitch,
        )
    segments = circuit.segments
    if len(segments) < 2:
        return []

    max_d = max(s.diameter for s in segments)
    reach = limits.threshold(max_d, max_d)
    pitch = max(limits.sample_pitch, reach)
    sampled = _sample_segments(segments, pitch)

    # 브로드 페이즈: 서로 다른 세그먼트의 근접 샘플 쌍
    tree = cKDTree(sampled.points)
    pairs = tree.query_pairs(r=reach + pitch, output_type="ndarray")
    if len(pairs) == 0:
        return []
    pairs = pairs[sampled.owner[pairs[:, 0]] != sampled.owner[pairs[:, 1]]]
    swap = sampled.owner[pairs[:, 0]] > sampled.owner[pairs[:, 1]]
    pairs[swap] = pairs[swap][:, ::-1]
    if len(pairs) == 0:
        return []

    # 내로우 페이즈: 인접 edge 간 선분 거리
    i, j = pairs[:, 0], pairs[:, 1]
    edges_i = _edge_pairs(i, sampled)
    edges_j = _edge_pairs(j, sampled)
    pts = sampled.points
    best = np.full(len(pairs), np.inf)
    loc = np.zeros((len(pairs), 3))
    for ei in edges_i:
        for ej in edges_j:
            dist, ca, cb = segment_distances(pts[ei], pts[ei + 1], pts[ej], pts[ej + 1])
            better = dist < best
            best = np.where(better, dist, best)
            loc[better] = 0.5 * (ca[better] + cb[better])

    seg_i = sampled.owner[i]
    seg_j = sampled.owner[j]
    diam = np.array([s.diameter for s in segments])
    limit = 0.5 * (diam[seg_i] + diam[seg_j]) + limits.clearance
    close = best < limit

    candidates = np.flatnonzero(close)
    if len(candidates) == 0:
        return []

    # 세그먼트 쌍별 그룹
    codes = seg_i[candidates].astype(np.int64) * len(segments) + seg_j[candidates]
    order = np.argsort(codes, kind="stable")
    candidates, codes = candidates[order], codes[order]
    _, starts = np.unique(codes, return_index=True)
    bounds = list(starts) + [len(candidates)]

    violations: Dict[Tuple[int, int], Tuple[float, np.ndarray]] = {}
    for g in range(len(starts)):
        group = candidates[bounds[g]:bounds[g + 1]]
        a, b = int(seg_i[group[0]]), int(seg_j[group[0]])
        keep = np.ones(len(group), dtype=bool)

        # 접합부 제외
        thr = limits.threshold(segments[a].diameter, segments[b].diameter)
        cap = 0.5 * min(sampled.lengths[a], sampled.lengths[b])
        for vertex in _shared_vertices(segments[a], segments[b]):
            ell = min(junction_exclusion(segments[a], segments[b], vertex, thr, limits.junction_factor), cap)
            arc_i, arc_j = sampled.arc[i[group]], sampled.arc[j[group]]
            s_i = arc_i if segments[a].source == vertex else sampled.lengths[a] - arc_i
            s_j = arc_j if segments[b].source == vertex else sampled.lengths[b] - arc_j
            keep &= (s_i >= ell) & (s_j >= ell)

        if keep.any():
            kept = group[keep]
            k = kept[int(np.argmin(best[kept]))]
            violations[(a, b)] = (float(best[k]), loc[k])

    result = []
    for (a, b), (dist, where) in violations.items():
        id_a, id_b = sorted((segments[a].id, segments[b].id))
        result.append(ClearanceViolation(id_a, id_b, dist, Point3.from_array(where)))
    result.sort(key=lambda v: (v.id_a, v.id_b))
    for v in result:
        logger.warning(f"⚠️ Clearance violation {v.id_a} / {v.id_b}: {v.distance:.3f} µm at {v.location.as_tuple()}")
    return result


def segment_min_radius(seg: Segment, pitch: float = DEFAULT_SAMPLE_PITCH) -> float:
    """세그먼트 최소 곡률 반경 (직선은 inf)"""
    radius = discrete_curvature_radius(sample_path(seg.path, pitch))
    return float(radius.min()) if radius.size else math.inf


def check_bend_radius(
    circuit: Circuit, r_min: float = 2.0, pitch: float = DEFAULT_SAMPLE_PITCH
) -> Tuple[float, List[str]]:
    """
    굽힘 반경 검사

    Returns:
        (최소 곡률 반경, r_min 미만 세그먼트 id 목록)
    """
    if not r_min > 0:
        raise ParameterError(f"r_min must be positive, got {r_min}")
    minimum = math.inf
    flagged = []
    for seg in circuit.segments:
        radius = segment_min_radius(seg, pitch)
        minimum = min(minimum, radius)
        if radius < r_min:
            flagged.append(seg.id)
            logger.warning(f"⚠️ Bend radius {radius:.3f} µm < {r_min} µm on {seg.id}")
    return minimum, sorted(flagged)


def check_aspect_ratio(circuit: Circuit, pitch: float = DEFAULT_SAMPLE_PITCH) -> float:
    """
    최대 종횡비 (비지지 길이 / 직경)
    정보 제공용 (합격/불합격 없음)
    """
    ratios = []
    for seg in circuit.segments:
        length = arc_length(seg.path, pitch)
        if length <= 1e-9:
            logger.warning(f"⚠️ Zero-length segment {seg.id} excluded from aspect ratio")
            continue
        ratios.append(length / seg.diameter)
    return max(ratios) if ratios else 0.0


def validate_circuit(circuit: Circuit, limits: Optional[ManufacturingLimits] = None) -> ValidationReport:
    """구조 + 간격 + 굽힘 반경 + 종횡비 종합 검증"""
    limits = limits or ManufacturingLimits()
    structure_ok, structure_errors = circuit.validate_structure()
    for error in structure_errors:
        logger.warning(f"⚠️ Structure: {error}")

    violations = check_clearance(circuit, limits.clearance, limits)
    min_radius, bend_flags = check_bend_radius(circuit, limits.r_min, limits.sample_pitch)
    aspect = check_aspect_ratio(circuit, limits.sample_pitch)

    report = ValidationReport(
        clearance_violations=violations,
        min_bend_radius_found=min_radius,
        bend_violations=bend_flags,
        max_aspect_ratio=aspect,
        structure_errors=structure_errors,
        thresholds={"clearance": limits.clearance, "r_min": limits.r_min},
    )
    status = "✅ PASS" if report.passed else "❌ FAIL"
    logger.info(
        f"{status} {circuit.name or 'circuit'}: violations={len(violations)}, "
        f"min radius={min_radius:.2f} µm, max aspect={aspect:.1f}"
    )
    return report


def create_manufacturing_limits(**overrides) -> ManufacturingLimits:
    """기본 제조 임계값 생성"""
    return ManufacturingLimits(**overrides)
