"""
WaveRoute - 설정 관리
config/waveroute.yaml (또는 동일 스키마 JSON) → WaverouteConfig
"""

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union
import json
import logging
import os

import psutil
import yaml

from .errors import ParameterError

logger = logging.getLogger(__name__)

THREADS_ENV = "WAVEROUTE_THREADS"
DEFAULT_CONFIG_PATH = Path(__file__).resolve().parents[2] / "config" / "waveroute.yaml"


@dataclass
class GeometryConfig:
    """기하 기본값"""
    diameter: float = 1.2  # µm
    sample_pitch: float = 0.25  # µm


@dataclass
class FractalConfig:
    """프랙탈 커플러 기본값"""
    b: int = 9
    layers: int = 1
    d0: float = 20.0
    height_factor: float = 4.0
    chirality: str = "right"
    stem_fraction: float = 0.2
    bow_factor: float = 0.14
    ramp_factor: float = 0.25
    z_bow_factor: float = 0.1


@dataclass
class HaarConfig:
    """Haar 필터 기본값"""
    d0: float = 20.0
    height: float = 80.0
    image_side: int = 21
    kernels_file: Optional[str] = None


@dataclass
class ValidationConfig:
    """제조성 검증 임계값"""
    clearance: float = 0.5  # µm (표면 간)
    r_min: float = 2.0  # µm
    junction_factor: float = 2.0  # 접합부 제외 길이 = factor · d


@dataclass
class OpticsConfig:
    """손실 모델 / 분기 모델 기본값"""
    injection_db: float = 2.71
    propagation_db: float = 1.14
    coupling_db: float = 1.67
    central_fraction: List[float] = field(default_factory=lambda: [0.42])
    wavelength: float = 0.635  # µm
    delta_n: float = 0.5


@dataclass
class ScalingConfig:
    """스케일링 리포트 기본값"""
    pitch: float = 20.0
    n_values: List[int] = field(default_factory=lambda: [16, 64, 256, 1024, 4096])


@dataclass
class RuntimeConfig:
    """실행 환경"""
    threads: Optional[int] = None
    log_level: str = "INFO"


@dataclass
class WaverouteConfig:
    """전체 설정"""
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    fractal: FractalConfig = field(default_factory=FractalConfig)
    haar: HaarConfig = field(default_factory=HaarConfig)
    validation: ValidationConfig = field(default_factory=ValidationConfig)
    optics: OpticsConfig = field(default_factory=OpticsConfig)
    scaling: ScalingConfig = field(default_factory=ScalingConfig)
    runtime: RuntimeConfig = field(default_factory=RuntimeConfig)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "WaverouteConfig":
        """섹션 dict → 설정 (알 수 없는 키는 경고 후 무시)"""
        data = data or {}
        sections = {}
        for section in fields(cls):
            section_type = section.default_factory
            raw = data.get(section.name) or {}
            if not isinstance(raw, dict):
                raise ParameterError(f"Config section '{section.name}' must be a mapping")
            known = {f.name for f in fields(section_type)}
            unknown = set(raw) - known
            if unknown:
                logger.warning(f"⚠️ Unknown keys in [{section.name}]: {sorted(unknown)}")
            sections[section.name] = section_type(**{k: v for k, v in raw.items() if k in known})
        extra = set(data) - {f.name for f in fields(cls)}
        if extra:
            logger.warning(f"⚠️ Unknown config sections: {sorted(extra)}")
        return cls(**sections)


def load_config(path: Optional[Union[str, Path]] = None) -> WaverouteConfig:
    """
    설정 파일 로드
    .json 은 json, 그 외는 YAML. 파일이 없으면 기본 설정 사용.
    """
    config_path = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            if config_path.suffix.lower() == ".json":
                data = json.load(f)
            else:
                data = yaml.safe_load(f)
        logger.info(f"✅ Config loaded: {config_path}")
    except FileNotFoundError:
        logger.warning(f"⚠️ Config file not found: {config_path} (using defaults)")
        data = {}
    except (yaml.YAMLError, json.JSONDecodeError) as e:
        raise ParameterError(f"Malformed config file {config_path}: {e}") from e
    return WaverouteConfig.from_dict(data)


def worker_count(configured: Optional[int] = None) -> int:
    """
    작업 스레드 수
    WAVEROUTE_THREADS 환경 변수 > 설정값 > CPU 코어 수
    """
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            logger.warning(f"⚠️ Ignoring non-integer {THREADS_ENV}={raw!r}")
        else:
            if value >= 1:
                return value
            logger.warning(f"⚠️ Ignoring {THREADS_ENV}={value} (< 1)")
    if configured:
        return max(1, int(configured))
    return psutil.cpu_count(logical=True) or 1


def create_default_config() -> WaverouteConfig:
    """기본 설정 생성"""
    return WaverouteConfig()
