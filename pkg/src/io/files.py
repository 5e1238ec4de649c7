"""
WaveRoute - 파일 쓰기 유틸리티
모든 출력은 임시 파일 작성 후 rename (원자적 교체)
"""

from pathlib import Path
from typing import Any, Union
import json
import logging
import os
import tempfile

logger = logging.getLogger(__name__)


def atomic_write_bytes(path: Union[str, Path], data: bytes) -> Path:
    """같은 디렉토리 임시 파일 → os.replace"""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=str(target.parent))
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_name, target)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except FileNotFoundError:
            pass
        raise
    logger.debug(f"Wrote {len(data)} bytes to {target}")
    return target


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path: Union[str, Path], payload: Any) -> Path:
    """정렬된 키, 2칸 들여쓰기 JSON (바이트 결정적)"""
    text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False)
    return atomic_write_text(path, text + "\n")
