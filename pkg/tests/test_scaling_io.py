"""
스케일링 리포트 및 파일 입출력 테스트 (넷리스트, STL, 툴패스)
"""

import unittest
import sys
import io
import os
import json
import tempfile

# Fix Windows console encoding
if sys.platform == 'win32':
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8')
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding='utf-8')

# Add src directory to path
sys.path.append(os.path.dirname(os.path.dirname(__file__)))

import numpy as np
import pandas as pd

from src.core.curves import arc_length, straight_path
from src.core.errors import NetlistFormatError, ParameterError
from src.generators.fractal import FractalSpec, generate_coupler, generate_coupler_array
from src.generators.haar import FilterUnit, generate_filter_unit
from src.io.mesh_export import STL_HEADER, circuit_mesh, export_mesh, tube_triangles
from src.io.netlist import circuit_from_dict, circuit_to_dict, export_netlist, import_netlist
from src.io.toolpath_export import export_toolpath, render_toolpath, toolpath_blocks
from src.models.geometry import Circuit, Point3, Segment
from src.reports.scaling_report import (
    ScalingMode,
    ScalingModel,
    footprint,
    loglog_slope,
    scaling_report,
)


def _single_segment(length=10.0):
    path = straight_path(Point3(0, 0, length), Point3(0, 0, 0))
    return Circuit((), (), (Segment("s00000", path, "a", "b"),), {"name": "single"})


class TestScalingReport(unittest.TestCase):
    """2D/3D 스케일링 테스트"""

    def test_1_footprint(self):
        """
        Test 1: 3D 225 입력 / 529 출력, pitch 20 → 0.2116 mm²
        """
        print("\n" + "="*80)
        print("Test 1: 점유 면적")
        print("="*80)

        volumetric = ScalingModel(ScalingMode.VOLUMETRIC_3D, 20.0)
        area, height = footprint(volumetric, 225, 529)
        self.assertAlmostEqual(area, 0.2116, places=12)
        self.assertEqual(height, 225 * 20.0)

        crossbar = ScalingModel(ScalingMode.CROSSBAR_2D, 20.0)
        self.assertEqual(footprint(crossbar, 1, 1), (400.0 / 1e6, 0.0))

        with self.assertRaises(ParameterError):
            footprint(crossbar, 0, 5)
        with self.assertRaises(ParameterError):
            ScalingModel(ScalingMode.CROSSBAR_2D, 0.0)
        print(f"  3D 면적: {area:.4f} mm²")
        print("✅ 점유 면적 통과")

    def test_2_slopes(self):
        """
        Test 2: log-log 기울기 2D = 2.00, 3D = 1.00
        """
        print("\n" + "="*80)
        print("Test 2: 스케일링 기울기")
        print("="*80)

        report = scaling_report(20.0, [16, 64, 256])
        self.assertAlmostEqual(report.slope_2d, 2.0, delta=0.01)
        self.assertAlmostEqual(report.slope_3d, 1.0, delta=0.01)
        self.assertEqual(list(report.table.columns), ["N", "area_2d_mm2", "area_3d_mm2", "height_3d_um"])

        single = scaling_report(20.0, [100])
        self.assertEqual(len(single.table), 1)
        self.assertIsNone(single.slope_2d)
        self.assertIsNone(loglog_slope(np.array([5, 5]), np.array([1.0, 2.0])))
        with self.assertRaises(ParameterError):
            scaling_report(20.0, [])
        print(f"  2D: {report.slope_2d:.3f}, 3D: {report.slope_3d:.3f}")
        print("✅ 스케일링 기울기 통과")

    def test_3_csv(self):
        """
        Test 3: CSV 저장 및 재로드
        """
        print("\n" + "="*80)
        print("Test 3: CSV 저장")
        print("="*80)

        report = scaling_report()
        with tempfile.TemporaryDirectory() as tmp:
            path = report.to_csv(os.path.join(tmp, "scaling.csv"))
            loaded = pd.read_csv(path)
        self.assertEqual(list(loaded["N"]), [16, 64, 256, 1024, 4096])
        np.testing.assert_allclose(loaded["area_3d_mm2"], report.table["area_3d_mm2"], rtol=1e-9)
        print("✅ CSV 저장 통과")


class TestNetlist(unittest.TestCase):
    """JSON 넷리스트 테스트"""

    def test_1_roundtrip(self):
        """
        Test 1: 내보내기 → 가져오기 = 동일 회로 (프랙탈, Haar)
        """
        print("\n" + "="*80)
        print("Test 1: 넷리스트 왕복")
        print("="*80)

        circuits = [generate_coupler(FractalSpec()), generate_coupler_array(FractalSpec(layers=2), (2, 2)), generate_filter_unit()]
        with tempfile.TemporaryDirectory() as tmp:
            for k, circuit in enumerate(circuits):
                path = export_netlist(circuit, os.path.join(tmp, f"c{k}.json"))
                loaded = import_netlist(path)
                self.assertEqual(loaded, circuit)
                self.assertIs(type(loaded), type(circuit))
        self.assertIsInstance(loaded, FilterUnit)
        print("✅ 넷리스트 왕복 통과")

    def test_2_document_layout(self):
        """
        Test 2: 1×9 문서 구조 (포트 10, 노드 1, 세그먼트 10, 단위 µm)
        """
        print("\n" + "="*80)
        print("Test 2: 넷리스트 문서 구조")
        print("="*80)

        document = circuit_to_dict(generate_coupler(FractalSpec()))
        roles = [p["role"] for p in document["ports"]]
        self.assertEqual(roles.count("input"), 1)
        self.assertEqual(roles.count("output"), 9)
        self.assertEqual(len(document["nodes"]), 1)
        self.assertEqual(len(document["segments"]), 10)
        self.assertEqual(document["meta"]["units"]["length"], "um")
        self.assertEqual(document["meta"]["generator"], "fractal")
        self.assertEqual(document["meta"]["params"]["b"], 9)

        empty = circuit_to_dict(Circuit())
        self.assertEqual((empty["ports"], empty["nodes"], empty["segments"]), ([], [], []))
        self.assertEqual(circuit_from_dict(empty).segments, ())
        print("✅ 문서 구조 통과")

    def test_3_malformed(self):
        """
        Test 3: 잘못된 문서 → NetlistFormatError
        """
        print("\n" + "="*80)
        print("Test 3: 잘못된 넷리스트")
        print("="*80)

        good = circuit_to_dict(generate_coupler(FractalSpec()))
        bad_format = dict(good, format="other")
        bad_version = dict(good, version=99)
        bad_segment = json.loads(json.dumps(good))
        del bad_segment["segments"][0]["control_points"]
        bad_point = json.loads(json.dumps(good))
        bad_point["ports"][0]["position"] = [0.0, 1.0]
        for document in (bad_format, bad_version, bad_segment, bad_point, []):
            with self.assertRaises(NetlistFormatError):
                circuit_from_dict(document)

        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "broken.json")
            with open(path, "w", encoding="utf-8") as f:
                f.write("{not json")
            with self.assertRaises(NetlistFormatError):
                import_netlist(path)
        print("✅ 잘못된 넷리스트 거부")

    def test_4_deterministic_bytes(self):
        """
        Test 4: 같은 회로 → 같은 바이트
        """
        print("\n" + "="*80)
        print("Test 4: 넷리스트 결정성")
        print("="*80)

        with tempfile.TemporaryDirectory() as tmp:
            a = export_netlist(generate_coupler(FractalSpec()), os.path.join(tmp, "a.json"))
            b = export_netlist(generate_coupler(FractalSpec()), os.path.join(tmp, "b.json"))
            self.assertEqual(a.read_bytes(), b.read_bytes())
        print("✅ 넷리스트 결정성 통과")


class TestMeshExport(unittest.TestCase):
    """STL 관 메쉬 테스트"""

    def test_1_prism_counts(self):
        """
        Test 1: 직선 10 µm, sides=3 → 측면 3·(rings−1)·2 + 캡 2
        """
        print("\n" + "="*80)
        print("Test 1: 프리즘 삼각형 수")
        print("="*80)

        path = straight_path(Point3(0, 0, 10), Point3(0, 0, 0))
        triangles = tube_triangles(path, sides=3, ring_pitch=1.0)
        rings = 11
        self.assertEqual(len(triangles), 3 * (rings - 1) * 2 + 2)

        # 오일러 특성: 닫힌 관 V − E + F = 2
        vertices = {tuple(np.round(v, 9)) for v in triangles.reshape(-1, 3)}
        edges = set()
        for tri in triangles:
            keys = [tuple(np.round(v, 9)) for v in tri]
            for a, b in ((0, 1), (1, 2), (2, 0)):
                edges.add(frozenset((keys[a], keys[b])))
        self.assertEqual(len(vertices) - len(edges) + len(triangles), 2)

        with self.assertRaises(ParameterError):
            tube_triangles(path, sides=2)
        print("✅ 프리즘 삼각형 수 통과")

    def test_2_outward_normals(self):
        """
        Test 2: 측면 법선이 관 축 바깥을 향함
        """
        print("\n" + "="*80)
        print("Test 2: 바깥 방향 법선")
        print("="*80)

        tubes = circuit_mesh(_single_segment(), sides=16)
        side = 2 * 16 * 10
        centroids = tubes.vectors[:side].mean(axis=1)
        radial = np.einsum("ij,ij->i", tubes.normals[:side, :2], centroids[:, :2])
        self.assertTrue(np.all(radial > 0))
        # 캡: 시작 (z=10) 은 +z, 끝 (z=0) 은 −z
        self.assertTrue(np.all(tubes.normals[side:side + 14, 2] > 0))
        self.assertTrue(np.all(tubes.normals[side + 14:, 2] < 0))
        print("✅ 법선 방향 통과")

    def test_3_surface_area(self):
        """
        Test 3: 1×9 커플러 관 10개, 표면적 ≈ π·d·Σ길이 (5% 이내)
        """
        print("\n" + "="*80)
        print("Test 3: 메쉬 표면적")
        print("="*80)

        coupler = generate_coupler(FractalSpec())
        tubes = circuit_mesh(coupler, sides=16)
        v = tubes.vectors
        area = 0.5 * np.linalg.norm(np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]), axis=1).sum()
        analytic = np.pi * 1.2 * sum(arc_length(s.path) for s in coupler.segments)
        self.assertLess(abs(area - analytic) / analytic, 0.05)
        print(f"  메쉬: {area:.1f} µm², 해석: {analytic:.1f} µm²")
        print("✅ 표면적 통과")

    def test_4_binary_file(self):
        """
        Test 4: 바이너리 STL 크기/헤더/결정성
        """
        print("\n" + "="*80)
        print("Test 4: STL 파일")
        print("="*80)

        circuit = _single_segment()
        with tempfile.TemporaryDirectory() as tmp:
            a = export_mesh(circuit, os.path.join(tmp, "a.stl"), sides=8).read_bytes()
            b = export_mesh(circuit, os.path.join(tmp, "b.stl"), sides=8).read_bytes()
        triangles = 2 * 8 * 10 + 2 * 6
        self.assertEqual(a, b)
        self.assertEqual(a[:80], STL_HEADER)
        self.assertEqual(int.from_bytes(a[80:84], "little"), triangles)
        self.assertEqual(len(a), 84 + 50 * triangles)
        print("✅ STL 파일 통과")


class TestToolpathExport(unittest.TestCase):
    """툴패스 내보내기 테스트"""

    def test_1_vertical_segment(self):
        """
        Test 1: 수직 10 µm, pitch 5 → 좌표 3줄 (아래에서 위로)
        """
        print("\n" + "="*80)
        print("Test 1: 수직 세그먼트 툴패스")
        print("="*80)

        text = render_toolpath(_single_segment(), 5.0)
        lines = text.strip().split("\n")
        self.assertEqual(lines, ["0.0000 0.0000 0.0000", "0.0000 0.0000 5.0000", "0.0000 0.0000 10.0000"])
        with self.assertRaises(ParameterError):
            render_toolpath(_single_segment(), 0.0)
        print("✅ 수직 세그먼트 통과")

    def test_2_block_count(self):
        """
        Test 2: 블록 수 = 세그먼트 수 (Haar 유닛 37), 아래층부터 정렬
        """
        print("\n" + "="*80)
        print("Test 2: 툴패스 블록")
        print("="*80)

        unit = generate_filter_unit()
        with tempfile.TemporaryDirectory() as tmp:
            text = export_toolpath(unit, os.path.join(tmp, "unit.txt")).read_text(encoding="utf-8")
        self.assertEqual(len(text.strip().split("\n\n")), 37)

        coupler = generate_coupler(FractalSpec())
        blocks = toolpath_blocks(coupler)
        self.assertEqual(len(blocks), len(coupler.segments))
        lowest = [b[:, 2].min() for b in blocks]
        self.assertEqual(lowest, sorted(lowest))
        self.assertTrue(all(b[0, 2] <= b[-1, 2] for b in blocks))
        print("✅ 툴패스 블록 통과")


if __name__ == '__main__':
    unittest.main(verbosity=2)
