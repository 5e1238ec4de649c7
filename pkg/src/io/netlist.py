"""
WaveRoute - JSON 넷리스트 입출력
블록: meta, ports, nodes, segments, (kernels)
단위는 항상 µm / dB (meta.units 에 명시)
"""

from pathlib import Path
from typing import Any, Dict, List, Union
import json
import logging

from ..core.errors import NetlistFormatError, ParameterError
from ..generators.haar import FilterUnit
from ..models.geometry import (
    BifurcationNode, Circuit, Point3, Port, PortRole, Segment, WaveguidePath,
)
from .files import write_json

logger = logging.getLogger(__name__)

FORMAT_NAME = "waveroute-netlist"
FORMAT_VERSION = 1
DEFAULT_UNITS = {"length": "um", "loss": "dB"}


def circuit_to_dict(circuit: Circuit) -> Dict[str, Any]:
    """Circuit → 넷리스트 문서"""
    meta = {k: v for k, v in circuit.metadata.items() if k != "kernels"}
    meta.setdefault("units", dict(DEFAULT_UNITS))
    document: Dict[str, Any] = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "meta": meta,
        "ports": [
            {
                "id": p.id,
                "role": p.role.value,
                "grid_index": list(p.grid_index),
                "position": list(p.position.as_tuple()),
            }
            for p in circuit.ports
        ],
        "nodes": [
            {
                "id": n.id,
                "layer": n.layer,
                "position": list(n.position.as_tuple()),
                "children": list(n.children),
            }
            for n in circuit.nodes
        ],
        "segments": [
            {
                "id": s.id,
                "from": s.source,
                "to": s.target,
                "diameter": s.diameter,
                "control_points": [list(p.as_tuple()) for p in s.path.control_points],
            }
            for s in circuit.segments
        ],
    }
    if "kernels" in circuit.metadata:
        document["kernels"] = circuit.metadata["kernels"]
    return document


def _point(values: Any, where: str) -> Point3:
    if not isinstance(values, list) or len(values) != 3:
        raise NetlistFormatError(f"{where}: expected [x, y, z], got {values!r}")
    try:
        return Point3(float(values[0]), float(values[1]), float(values[2]))
    except (TypeError, ValueError, ParameterError) as e:
        raise NetlistFormatError(f"{where}: {e}") from e


def circuit_from_dict(document: Dict[str, Any]) -> Circuit:
    """넷리스트 문서 → Circuit (Haar 생성물은 FilterUnit)"""
    if not isinstance(document, dict) or document.get("format") != FORMAT_NAME:
        raise NetlistFormatError("Not a waveroute netlist document")
    if document.get("version") != FORMAT_VERSION:
        raise NetlistFormatError(f"Unsupported netlist version {document.get('version')!r}")
    try:
        ports = tuple(
            Port(
                str(p["id"]),
                tuple(int(v) for v in p["grid_index"]),
                _point(p["position"], f"port {p['id']}"),
                PortRole(p["role"]),
            )
            for p in document.get("ports", [])
        )
        nodes = tuple(
            BifurcationNode(
                str(n["id"]),
                _point(n["position"], f"node {n['id']}"),
                int(n["layer"]),
                tuple(str(c) for c in n.get("children", [])),
            )
            for n in document.get("nodes", [])
        )
        segments: List[Segment] = []
        for s in document.get("segments", []):
            points = tuple(
                _point(cp, f"segment {s['id']}") for cp in s["control_points"]
            )
            path = WaveguidePath(points, float(s["diameter"]))
            segments.append(Segment(str(s["id"]), path, str(s["from"]), str(s["to"])))
    except NetlistFormatError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise NetlistFormatError(f"Malformed netlist entry: {e}") from e

    metadata = dict(document.get("meta", {}))
    if "kernels" in document:
        metadata["kernels"] = document["kernels"]
    cls = FilterUnit if metadata.get("generator") == "haar" else Circuit
    return cls(ports, nodes, tuple(segments), metadata)


def export_netlist(circuit: Circuit, path: Union[str, Path]) -> Path:
    """JSON 넷리스트 저장 (키 정렬, 원자적 쓰기)"""
    target = write_json(path, circuit_to_dict(circuit))
    logger.info(f"✅ Netlist exported: {target} ({len(circuit.ports)} ports, {len(circuit.segments)} segments)")
    return target


def import_netlist(path: Union[str, Path]) -> Circuit:
    """JSON 넷리스트 로드"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise NetlistFormatError(f"Invalid JSON in {path}: {e}") from e
    circuit = circuit_from_dict(document)
    logger.info(f"✅ Netlist imported: {path} ({circuit.summary()})")
    return circuit
