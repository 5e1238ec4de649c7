"""
WaveRoute - STL 메쉬 내보내기
도파로마다 직경 d 의 관 (sides 면 링, 양 끝 캡) 으로 삼각분할
"""

from io import BytesIO
from pathlib import Path
from typing import List, Tuple, Union
import logging

import numpy as np
import stl
from stl import mesh

from ..core.curves import sample_path
from ..core.errors import ParameterError
from ..models.geometry import Circuit, WaveguidePath
from .files import atomic_write_bytes

logger = logging.getLogger(__name__)

DEFAULT_SIDES = 16
DEFAULT_RING_PITCH = 1.0  # µm
STL_HEADER = b"waveroute tube mesh (units: um)".ljust(80, b" ")


def _frames(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """평행 이동 프레임 (접선, 법선)"""
    tangents = np.gradient(points, axis=0)
    tangents /= np.linalg.norm(tangents, axis=1)[:, None]
    reference = np.array([1.0, 0.0, 0.0])
    if abs(np.dot(reference, tangents[0])) > 0.9:
        reference = np.array([0.0, 1.0, 0.0])
    normal = reference - np.dot(reference, tangents[0]) * tangents[0]
    normals = np.empty_like(points)
    normals[0] = normal / np.linalg.norm(normal)
    for k in range(1, len(points)):
        t = tangents[k]
        n = normals[k - 1] - np.dot(normals[k - 1], t) * t
        norm = np.linalg.norm(n)
        normals[k] = n / norm if norm > 1e-12 else normals[k - 1]
    return tangents, normals


def tube_triangles(path: WaveguidePath, sides: int = DEFAULT_SIDES, ring_pitch: float = DEFAULT_RING_PITCH) -> np.ndarray:
    """
    단일 관 삼각형 (m, 3, 3), 바깥 방향 법선

    측면 2·sides·(rings − 1), 캡 2·(sides − 2)
    """
    if sides < 3:
        raise ParameterError(f"Tube needs at least 3 sides, got {sides}")
    centers = sample_path(path, ring_pitch)
    tangents, normals = _frames(centers)
    binormals = np.cross(tangents, normals)
    radius = 0.5 * path.diameter
    phi = 2.0 * np.pi * np.arange(sides) / sides
    rings = (
        centers[:, None, :]
        + radius * np.cos(phi)[None, :, None] * normals[:, None, :]
        + radius * np.sin(phi)[None, :, None] * binormals[:, None, :]
    )

    triangles: List[np.ndarray] = []
    nxt = np.roll(np.arange(sides), -1)
    for i in range(len(rings) - 1):
        a, b = rings[i], rings[i][nxt]
        d, c = rings[i + 1], rings[i + 1][nxt]
        triangles.append(np.stack([a, b, d], axis=1))
        triangles.append(np.stack([b, c, d], axis=1))
    fan = np.arange(1, sides - 1)
    start, end = rings[0], rings[-1]
    triangles.append(np.stack([np.repeat(start[:1], len(fan), axis=0), start[fan + 1], start[fan]], axis=1))
    triangles.append(np.stack([np.repeat(end[:1], len(fan), axis=0), end[fan], end[fan + 1]], axis=1))
    return np.concatenate(triangles)


def circuit_mesh(circuit: Circuit, sides: int = DEFAULT_SIDES, ring_pitch: float = DEFAULT_RING_PITCH) -> mesh.Mesh:
    """회로 전체 관 메쉬 (세그먼트 id 순)"""
    if sides < 3:
        raise ParameterError(f"Tube needs at least 3 sides, got {sides}")
    parts = [tube_triangles(seg.path, sides, ring_pitch) for seg in sorted(circuit.segments, key=lambda s: s.id)]
    data = np.zeros(sum(len(p) for p in parts), dtype=mesh.Mesh.dtype)
    result = mesh.Mesh(data, remove_empty_areas=False)
    if parts:
        result.vectors[:] = np.concatenate(parts)
        result.update_normals()
    return result


def export_mesh(
    circuit: Circuit,
    path: Union[str, Path],
    sides: int = DEFAULT_SIDES,
    ring_pitch: float = DEFAULT_RING_PITCH,
) -> Path:
    """바이너리 STL 저장 (고정 헤더, 바이트 결정적)"""
    tubes = circuit_mesh(circuit, sides, ring_pitch)
    buffer = BytesIO()
    tubes.save(Path(path).name, fh=buffer, mode=stl.Mode.BINARY, update_normals=False)
    data = STL_HEADER + buffer.getvalue()[len(STL_HEADER):]
    target = atomic_write_bytes(path, data)
    logger.info(f"✅ Mesh exported: {target} ({len(circuit.segments)} tubes, {len(tubes.vectors)} triangles)")
    return target
