"""
WaveRoute - 곡선 유틸리티
Bézier 중심선 샘플링, 굽힘 생성, 쌍 최소 거리
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Tuple
import math

import numpy as np
from scipy.interpolate import PchipInterpolator

from ..models.geometry import Point3, WaveguidePath, DEFAULT_DIAMETER
from .errors import DegenerateGeometryError, ParameterError


DEFAULT_SAMPLE_PITCH = 0.25  # µm (≈ d/5)
_TABLE_OVERSAMPLE = 4
_MIN_TABLE_STEPS = 32
_Z_AXIS = np.array([0.0, 0.0, 1.0])


def _check_pitch(pitch: float) -> None:
    if not pitch > 0:
        raise ParameterError(f"Sampling pitch must be positive, got {pitch}")


def _arc_table(path: WaveguidePath, pitch: float) -> Tuple[np.ndarray, np.ndarray]:
    """조밀한 (파라미터, 누적 호길이) 테이블"""
    cp = path.points
    params = []
    for k in range(path.segment_count):
        hull = np.linalg.norm(np.diff(cp[3 * k:3 * k + 4], axis=0), axis=1).sum()
        steps = max(_MIN_TABLE_STEPS, int(math.ceil(hull / pitch)) * _TABLE_OVERSAMPLE)
        local = np.linspace(0.0, 1.0, steps + 1)
        if k > 0:
            local = local[1:]
        params.append(k + local)
    t = np.concatenate(params)
    pts = path.evaluate(t)
    cumulative = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    return t, cumulative


def arc_length(path: WaveguidePath, pitch: float = DEFAULT_SAMPLE_PITCH) -> float:
    """중심선 호길이 (µm)"""
    _check_pitch(pitch)
    _, cumulative = _arc_table(path, pitch)
    return float(cumulative[-1])


def sample_path(path: WaveguidePath, pitch: float = DEFAULT_SAMPLE_PITCH) -> np.ndarray:
    """
    호길이 등간격 샘플링

    연속 샘플 간 거리 <= pitch, 첫/마지막 점은 경로 끝점과 동일

    Returns:
        (n, 3) 배열
    """
    _check_pitch(pitch)
    t_table, cumulative = _arc_table(path, pitch)
    total = cumulative[-1]
    intervals = max(1, int(math.ceil(total / pitch - 1e-9)))

    while True:
        targets = np.linspace(0.0, total, intervals + 1)
        t = np.interp(targets, cumulative, t_table)
        pts = path.evaluate(t)
        pts[0] = path.points[0]
        pts[-1] = path.points[-1]
        spacing = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        if spacing.size == 0 or spacing.max() <= pitch * (1.0 + 1e-9):
            return pts
        intervals += 1


def sample_points(path: WaveguidePath, pitch: float = DEFAULT_SAMPLE_PITCH) -> Tuple[Point3, ...]:
    """sample_path 의 Point3 버전"""
    return tuple(Point3.from_array(p) for p in sample_path(path, pitch))


def _unit(v: np.ndarray, name: str) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        raise ParameterError(f"{name} must be a non-zero vector")
    return v / norm


def bow_direction(chord: np.ndarray) -> np.ndarray:
    """
    측면 bow 방향 (t_mid × z)
    수직 현에서는 +x 로 대체
    """
    lateral = np.cross(chord / np.linalg.norm(chord), _Z_AXIS)
    norm = np.linalg.norm(lateral)
    if norm < 1e-9:
        return np.array([1.0, 0.0, 0.0])
    return lateral / norm


def make_bend(
    p0: Point3,
    p1: Point3,
    t0: Sequence[float],
    t1: Sequence[float],
    bow: float = 0.0,
    z_bow: float = 0.0,
    diameter: float = DEFAULT_DIAMETER,
) -> WaveguidePath:
    """
    p0 → p1 굽힘 생성

    중점을 현 기준 (t_mid × z) 방향으로 bow 만큼, -z 방향으로 z_bow 만큼 이동.
    중점에서 두 cubic 이 현 방향 접선으로 C¹ 접합.

    Args:
        t0, t1: 끝점 단위 접선
        bow: 측면 변위 (부호 = chirality)
        z_bow: 하향 변위 (출력 평면 방향)
    """
    a = p0.as_array()
    b = p1.as_array()
    chord = b - a
    length = np.linalg.norm(chord)
    if length < 1e-12:
        raise DegenerateGeometryError(f"Bend endpoints coincide at {p0}")

    d0 = _unit(np.asarray(t0, dtype=float), "t0")
    d1 = _unit(np.asarray(t1, dtype=float), "t1")
    t_mid = chord / length

    mid = 0.5 * (a + b) + bow * bow_direction(chord) - z_bow * _Z_AXIS
    h0 = np.linalg.norm(mid - a) / 3.0
    h1 = np.linalg.norm(b - mid) / 3.0

    cp = np.array([
        a,
        a + h0 * d0,
        mid - h0 * t_mid,
        mid,
        mid + h1 * t_mid,
        b - h1 * d1,
        b,
    ])
    cp[0], cp[3], cp[6] = a, mid, b
    return WaveguidePath(tuple(Point3.from_array(p) for p in cp), diameter)


def straight_path(p0: Point3, p1: Point3, diameter: float = DEFAULT_DIAMETER) -> WaveguidePath:
    """직선 cubic (제어점 1/3 등분)"""
    a, b = p0.as_array(), p1.as_array()
    if np.linalg.norm(b - a) < 1e-12:
        raise DegenerateGeometryError(f"Straight path endpoints coincide at {p0}")
    cp = [a, a + (b - a) / 3.0, a + 2.0 * (b - a) / 3.0, b]
    points = [p0] + [Point3.from_array(p) for p in cp[1:3]] + [p1]
    return WaveguidePath(tuple(points), diameter)


@dataclass(frozen=True)
class RampProfile:
    """
    plateau 측면 프로파일 (sine ramp) + 수평 진행 지연

    μ(ζ) = g − i·sign·depth·s(g),  g(ζ) = ζ − lag·sin(πζ)
    s: [0, ramp] 에서 0 → 1, [1 − ramp, 1] 에서 1 → 0 (C¹)
    """
    depth: float
    ramp: float
    lag: float = 0.0
    sign: float = 1.0
    pieces: int = 24

    def __post_init__(self):
        if not 0.0 < self.ramp <= 0.5:
            raise ParameterError(f"Ramp width must be in (0, 0.5], got {self.ramp}")
        if not 0.0 <= self.lag < 1.0 / math.pi:
            raise ParameterError(f"Lag must be in [0, 1/π), got {self.lag}")
        if self.pieces < 1:
            raise ParameterError(f"Piece count must be >= 1, got {self.pieces}")

    @property
    def knots(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.pieces + 1)

    def _plateau(self, g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        k = math.pi / (2.0 * self.ramp)
        s = np.ones_like(g)
        ds = np.zeros_like(g)
        rise = g < self.ramp
        fall = g > 1.0 - self.ramp
        s[rise] = np.sin(k * g[rise])
        ds[rise] = k * np.cos(k * g[rise])
        s[fall] = np.sin(k * (1.0 - g[fall]))
        ds[fall] = -k * np.cos(k * (1.0 - g[fall]))
        return s, ds

    def evaluate(self, zeta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(μ, dμ/dζ) 복소 배열"""
        zeta = np.asarray(zeta, dtype=float)
        g = zeta - self.lag * np.sin(math.pi * zeta)
        dg = 1.0 - self.lag * math.pi * np.cos(math.pi * zeta)
        s, ds = self._plateau(g)
        bow = 1j * self.sign * self.depth
        return g - bow * s, dg * (1.0 - bow * ds)


@dataclass(frozen=True)
class KnotProfile:
    """
    매듭점 측면 프로파일 (PCHIP)

    μ(ζ) = ζ − i·sign·y(ζ), y 는 (xs, ys) 를 지나는 단조 보존 cubic.
    매듭점 사이 구간이 cubic 이므로 Bézier 변환이 정확함.
    """
    xs: Tuple[float, ...]
    ys: Tuple[float, ...]
    sign: float = 1.0

    def __post_init__(self):
        if len(self.xs) != len(self.ys) or len(self.xs) < 2:
            raise ParameterError("Knot profile needs matching xs/ys with at least two knots")
        if self.xs[0] != 0.0 or self.xs[-1] != 1.0 or np.any(np.diff(self.xs) <= 0):
            raise ParameterError("Knot xs must increase strictly from 0 to 1")
        if self.ys[0] != 0.0 or self.ys[-1] != 0.0:
            raise ParameterError("Knot profile must vanish at both ends")

    @cached_property
    def _spline(self) -> PchipInterpolator:
        return PchipInterpolator(np.asarray(self.xs), np.asarray(self.ys))

    @property
    def knots(self) -> np.ndarray:
        return np.asarray(self.xs, dtype=float)

    def mirrored(self) -> "KnotProfile":
        return KnotProfile(self.xs, self.ys, -self.sign)

    def evaluate(self, zeta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(μ, dμ/dζ) 복소 배열"""
        zeta = np.asarray(zeta, dtype=float)
        y = self._spline(zeta)
        dy = self._spline.derivative()(zeta)
        bow = 1j * self.sign
        return zeta - bow * y, 1.0 - bow * dy


def graph_path(
    start: Point3,
    end: Point3,
    profile,
    diameter: float = DEFAULT_DIAMETER,
) -> WaveguidePath:
    """
    z 에 대한 그래프 곡선 (Hermite 표본 → piecewise cubic Bézier, C¹)

    ζ ∈ [0, 1]: xy = start + offset·μ(ζ) (복소 곱), z = start.z − drop·ζ
    같은 프로파일을 쓰는 두 곡선의 같은 z 에서의 xy 차이는 두 끝점 차이의 affine 결합.

    Args:
        end: start 보다 낮은 끝점
        profile: RampProfile 또는 KnotProfile
    """
    drop = start.z - end.z
    if not drop > 0:
        raise ParameterError(f"Graph path must descend, got drop {drop}")
    offset = complex(end.x - start.x, end.y - start.y)
    if abs(offset) < 1e-12:
        return straight_path(start, end, diameter)

    zeta = profile.knots
    mu, dmu = profile.evaluate(zeta)
    xy = complex(start.x, start.y) + offset * mu
    dxy = offset * dmu
    pts = np.column_stack([xy.real, xy.imag, start.z - drop * zeta])
    tangents = np.column_stack([dxy.real, dxy.imag, np.full(len(zeta), -drop)])
    pts[0] = start.as_array()
    pts[-1] = end.as_array()

    cp = [pts[0]]
    for k in range(len(zeta) - 1):
        step = (zeta[k + 1] - zeta[k]) / 3.0
        cp.extend([pts[k] + step * tangents[k], pts[k + 1] - step * tangents[k + 1], pts[k + 1]])
    return WaveguidePath(tuple(Point3.from_array(p) for p in cp), diameter)


def segment_distances(
    p: np.ndarray, q: np.ndarray, r: np.ndarray, s: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    선분 [p,q] 와 [r,s] 의 최근접 거리 (벡터화)

    Returns:
        (distance, closest_on_pq, closest_on_rs)
    """
    d1 = q - p
    d2 = s - r
    w = p - r
    a = np.einsum("ij,ij->i", d1, d1)
    e = np.einsum("ij,ij->i", d2, d2)
    f = np.einsum("ij,ij->i", d2, w)
    c = np.einsum("ij,ij->i", d1, w)
    b = np.einsum("ij,ij->i", d1, d2)
    eps = 1e-18

    denom = a * e - b * b
    general = denom > 1e-12 * a * e
    with np.errstate(divide="ignore", invalid="ignore"):
        safe_a = np.where(a > eps, a, 1.0)
        safe_e = np.where(e > eps, e, 1.0)
        s_below = np.where(a > eps, np.clip(-c / safe_a, 0.0, 1.0), 0.0)
        s_above = np.where(a > eps, np.clip((b - c) / safe_a, 0.0, 1.0), 0.0)

        # 평행 선분은 s = 0 에서 시작
        s_par = np.where(general, np.clip((b * f - c * e) / np.where(general, denom, 1.0), 0.0, 1.0), 0.0)
        s_par = np.where(a <= eps, 0.0, s_par)
        s_par = np.where((e <= eps) & (a > eps), s_below, s_par)
        t_par = np.where(e > eps, (b * s_par + f) / safe_e, 0.0)

        below = t_par < 0.0
        above = t_par > 1.0
        t_par = np.clip(t_par, 0.0, 1.0)
        s_par = np.where(below, s_below, np.where(above, s_above, s_par))

    closest_1 = p + s_par[:, None] * d1
    closest_2 = r + t_par[:, None] * d2
    dist = np.linalg.norm(closest_1 - closest_2, axis=1)
    return dist, closest_1, closest_2


def polyline_distance(
    a: np.ndarray, b: np.ndarray, chunk: int = 4096
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    두 폴리라인 간 최소 선분-선분 거리

    Returns:
        (distance, point_on_a, point_on_b)
    """
    if len(a) < 2 or len(b) < 2:
        raise ParameterError("Polylines need at least two points")
    a0, a1 = a[:-1], a[1:]
    b0, b1 = b[:-1], b[1:]
    best = (math.inf, a[0], b[0])
    rows = max(1, chunk // len(b0))
    for start in range(0, len(a0), rows):
        stop = min(len(a0), start + rows)
        ia = np.repeat(np.arange(start, stop), len(b0))
        ib = np.tile(np.arange(len(b0)), stop - start)
        dist, ca, cb = segment_distances(a0[ia], a1[ia], b0[ib], b1[ib])
        k = int(np.argmin(dist))
        if dist[k] < best[0]:
            best = (float(dist[k]), ca[k], cb[k])
    return best


def min_pair_distance(a: WaveguidePath, b: WaveguidePath, pitch: float = DEFAULT_SAMPLE_PITCH) -> float:
    """
    두 경로 중심선 간 최소 거리 (µm)
    인자 순서에 대해 대칭
    """
    _check_pitch(pitch)
    first, second = sorted((a, b), key=lambda p: p.points.tobytes())
    distance, _, _ = polyline_distance(sample_path(first, pitch), sample_path(second, pitch))
    return distance


def discrete_curvature_radius(points: np.ndarray) -> np.ndarray:
    """
    3점 외접원 반지름 (폴리라인 내부 점마다)
    직선 구간은 inf
    """
    if len(points) < 3:
        return np.array([])
    p, q, r = points[:-2], points[1:-1], points[2:]
    a = np.linalg.norm(q - p, axis=1)
    b = np.linalg.norm(r - q, axis=1)
    c = np.linalg.norm(r - p, axis=1)
    area2 = np.linalg.norm(np.cross(q - p, r - p), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        radius = np.where(area2 > 1e-12 * np.maximum(a * b, 1e-30), a * b * c / (2.0 * area2), np.inf)
    return radius


def circular_arc(
    center: Point3, radius: float, start_deg: float, end_deg: float,
    pieces: int = 4, diameter: float = DEFAULT_DIAMETER,
) -> WaveguidePath:
    """xy 평면 원호 (cubic 근사, 조각당 handle = 4/3·tan(φ/4)·R)"""
    if not radius > 0:
        raise ParameterError(f"Arc radius must be positive, got {radius}")
    angles = np.radians(np.linspace(start_deg, end_deg, pieces + 1))
    phi = angles[1] - angles[0]
    handle = 4.0 / 3.0 * math.tan(phi / 4.0) * radius
    c = center.as_array()
    cp = []
    for k in range(pieces):
        t0, t1 = angles[k], angles[k + 1]
        p0 = c + radius * np.array([math.cos(t0), math.sin(t0), 0.0])
        p3 = c + radius * np.array([math.cos(t1), math.sin(t1), 0.0])
        d0 = np.array([-math.sin(t0), math.cos(t0), 0.0])
        d1 = np.array([-math.sin(t1), math.cos(t1), 0.0])
        if k == 0:
            cp.append(p0)
        cp.extend([p0 + handle * d0, p3 - handle * d1, p3])
    return WaveguidePath(tuple(Point3.from_array(p) for p in cp), diameter)
