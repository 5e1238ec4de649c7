"""
WaveRoute - 직접 레이저 묘화용 툴패스 내보내기
도파로당 폴리라인 블록 ("x y z", µm, 소수점 4자리), 아래층부터 위로
"""

from pathlib import Path
from typing import List, Union
import logging

import numpy as np

from ..core.curves import sample_path
from ..core.errors import ParameterError
from ..models.geometry import Circuit
from .files import atomic_write_text

logger = logging.getLogger(__name__)

DEFAULT_TOOLPATH_PITCH = 0.5  # µm


def _format(value: float) -> str:
    text = f"{value:.4f}"
    return "0.0000" if text == "-0.0000" else text


def toolpath_blocks(circuit: Circuit, sample_pitch: float = DEFAULT_TOOLPATH_PITCH) -> List[np.ndarray]:
    """
    세그먼트별 폴리라인 (각각 z 오름차순 방향)
    블록 순서: 최저 z, 세그먼트 id
    """
    if not sample_pitch > 0:
        raise ParameterError(f"Toolpath pitch must be positive, got {sample_pitch}")
    blocks = []
    for seg in circuit.segments:
        points = sample_path(seg.path, sample_pitch)
        if points[0, 2] > points[-1, 2]:
            points = points[::-1]
        blocks.append((float(points[:, 2].min()), seg.id, points))
    blocks.sort(key=lambda item: (item[0], item[1]))
    return [points for _, _, points in blocks]


def render_toolpath(circuit: Circuit, sample_pitch: float = DEFAULT_TOOLPATH_PITCH) -> str:
    """툴패스 텍스트 (블록 사이 빈 줄)"""
    chunks = []
    for points in toolpath_blocks(circuit, sample_pitch):
        chunks.append("\n".join(" ".join(_format(v) for v in p) for p in points))
    return "\n\n".join(chunks) + ("\n" if chunks else "")


def export_toolpath(
    circuit: Circuit, path: Union[str, Path], sample_pitch: float = DEFAULT_TOOLPATH_PITCH
) -> Path:
    """툴패스 파일 저장"""
    target = atomic_write_text(path, render_toolpath(circuit, sample_pitch))
    logger.info(f"✅ Toolpath exported: {target} ({len(circuit.segments)} blocks)")
    return target
