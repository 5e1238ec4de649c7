"""
제조성 검증기 테스트: 간격, 굽힘 반경, 종횡비, 접합부 제외
"""

import unittest
import sys
import io
import os
import math

# Fix Windows console encoding
if sys.platform == 'win32':
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8')
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding='utf-8')

# Add src directory to path
sys.path.append(os.path.dirname(os.path.dirname(__file__)))

from src.core.curves import circular_arc, make_bend, min_pair_distance, straight_path
from src.core.errors import ParameterError
from src.diagnostics.validator import (
    ManufacturingLimits,
    check_aspect_ratio,
    check_bend_radius,
    check_clearance,
    validate_circuit,
)
from src.generators.fractal import FractalSpec, generate_coupler
from src.models.geometry import Circuit, Point3, Port, PortRole, Segment


def _segment(seg_id, a, b, diameter=1.2):
    return Segment(seg_id, straight_path(Point3(*a), Point3(*b), diameter), f"{seg_id}_a", f"{seg_id}_b")


def _loose(*segments):
    """포트 없이 세그먼트만 가진 회로 (간격 검사용)"""
    return Circuit((), (), tuple(segments), {"name": "loose"})


class TestValidator(unittest.TestCase):
    """제조성 검증 테스트"""

    def test_1_limits(self):
        """
        Test 1: 임계값 계산 및 검증
        """
        print("\n" + "="*80)
        print("Test 1: 제조 임계값")
        print("="*80)

        limits = ManufacturingLimits()
        self.assertAlmostEqual(limits.threshold(1.2, 1.2), 1.7)
        ok, msg = limits.check_distance(1.5, 1.2, 1.2)
        self.assertFalse(ok)
        self.assertIn("간격 위반", msg)
        self.assertEqual(limits.check_radius(3.0), (True, None))

        with self.assertRaises(ParameterError):
            ManufacturingLimits(clearance=-0.1)
        with self.assertRaises(ParameterError):
            ManufacturingLimits(r_min=0.0)
        print("✅ 임계값 통과")

    def test_2_parallel_lines(self):
        """
        Test 2: 평행 직선 - 1.5 µm 위반, 3 µm 통과
        """
        print("\n" + "="*80)
        print("Test 2: 평행 직선 간격")
        print("="*80)

        a = _segment("a", (0, 0, 0), (50, 0, 0))
        near = _segment("b", (0, 1.5, 0), (50, 1.5, 0))
        far = _segment("c", (0, 3.0, 0), (50, 3.0, 0))

        violations = check_clearance(_loose(a, near), 0.5)
        self.assertEqual(len(violations), 1)
        self.assertEqual((violations[0].id_a, violations[0].id_b), ("a", "b"))
        self.assertAlmostEqual(violations[0].distance, 1.5, places=6)

        self.assertEqual(check_clearance(_loose(a, far), 0.5), [])
        # clearance 를 키우면 3 µm 도 위반
        self.assertEqual(len(check_clearance(_loose(a, far), 2.0)), 1)
        print("✅ 평행 직선 통과")

    def test_3_plant_and_detect(self):
        """
        Test 3: 충돌 없는 커플러에 교차 도파로 삽입 → 해당 쌍만 검출
        """
        print("\n" + "="*80)
        print("Test 3: 삽입 충돌 검출")
        print("="*80)

        coupler = generate_coupler(FractalSpec())
        self.assertEqual(check_clearance(coupler, 0.5), [])

        stem = coupler.segment_map["s00000"]
        mid_z = 0.5 * (stem.path.start.z + stem.path.end.z)
        intruder = Segment(
            "x99999",
            straight_path(Point3(-10.0, 0.0, mid_z), Point3(10.0, 0.0, mid_z)),
            "x_a", "x_b",
        )
        planted = Circuit(coupler.ports, coupler.nodes, coupler.segments + (intruder,), coupler.metadata)

        violations = check_clearance(planted, 0.5)
        pairs = {(v.id_a, v.id_b) for v in violations}
        self.assertIn(("s00000", "x99999"), pairs)
        self.assertTrue(all("x99999" in pair for pair in pairs))
        hit = [v for v in violations if v.id_a == "s00000"][0]
        self.assertAlmostEqual(hit.distance, 0.0, places=6)
        self.assertAlmostEqual(hit.location.z, mid_z, places=3)
        print(f"  검출 쌍: {sorted(pairs)}")
        print("✅ 삽입 충돌 검출 통과")

    def test_4_junction_exclusion(self):
        """
        Test 4: 같은 노드에서 갈라지는 세그먼트는 접합부 근처에서 위반 아님
        """
        print("\n" + "="*80)
        print("Test 4: 접합부 제외")
        print("="*80)

        node = Point3(0, 0, 10)
        left = Segment("a", straight_path(node, Point3(-20, 0, 0)), "n", "out_a")
        right = Segment("b", straight_path(node, Point3(20, 0, 0)), "n", "out_b")
        self.assertEqual(check_clearance(_loose(left, right), 0.5), [])

        # 노드를 공유하지 않으면 같은 기하라도 위반
        left_free = Segment("a", left.path, "n1", "out_a")
        right_free = Segment("b", right.path, "n2", "out_b")
        self.assertEqual(len(check_clearance(_loose(left_free, right_free), 0.5)), 1)
        print("✅ 접합부 제외 통과")

    def test_5_bend_radius(self):
        """
        Test 5: 반경 10 µm 원호 - r_min 2 통과, r_min 12 위반
        """
        print("\n" + "="*80)
        print("Test 5: 굽힘 반경")
        print("="*80)

        arc = Segment("arc", circular_arc(Point3(0, 0, 0), 10.0, 0.0, 90.0), "u", "v")
        circuit = _loose(arc)

        radius, flagged = check_bend_radius(circuit, 2.0)
        self.assertLess(abs(radius - 10.0), 0.05)
        self.assertEqual(flagged, [])

        radius, flagged = check_bend_radius(circuit, 12.0)
        self.assertEqual(flagged, ["arc"])

        straight_radius, _ = check_bend_radius(_loose(_segment("s", (0, 0, 0), (10, 0, 0))))
        self.assertTrue(math.isinf(straight_radius))
        print(f"  최소 반경: {radius:.3f} µm")
        print("✅ 굽힘 반경 통과")

    def test_6_aspect_ratio(self):
        """
        Test 6: 60 µm 직선, 직경 1.2 → 종횡비 50
        """
        print("\n" + "="*80)
        print("Test 6: 종횡비")
        print("="*80)

        circuit = _loose(_segment("s", (0, 0, 60), (0, 0, 0)), _segment("t", (5, 0, 30), (5, 0, 0)))
        self.assertAlmostEqual(check_aspect_ratio(circuit), 50.0, places=6)
        self.assertEqual(check_aspect_ratio(_loose()), 0.0)
        print("✅ 종횡비 50 통과")

    def test_7_validation_report(self):
        """
        Test 7: 종합 리포트 (pass 플래그, JSON 직렬화)
        """
        print("\n" + "="*80)
        print("Test 7: 종합 검증 리포트")
        print("="*80)

        report = validate_circuit(generate_coupler(FractalSpec()))
        data = report.to_dict()
        self.assertTrue(data["pass"])
        self.assertEqual(data["clearance_violations"], [])
        self.assertGreater(data["min_bend_radius_found"], 2.0)
        self.assertGreater(data["max_aspect_ratio"], 0.0)
        self.assertEqual(data["thresholds"], {"clearance": 0.5, "r_min": 2.0})

        # 구조 오류: 출력 포트가 입력에서 도달 불가
        orphan = Port("out_9_9", (9, 9), Point3(500, 500, 0), PortRole.OUTPUT)
        coupler = generate_coupler(FractalSpec())
        broken = Circuit(coupler.ports + (orphan,), coupler.nodes, coupler.segments, coupler.metadata)
        report = validate_circuit(broken)
        self.assertFalse(report.passed)
        self.assertTrue(any("out_9_9" in e for e in report.structure_errors))
        print("✅ 종합 리포트 통과")

    def test_8_distance_matches_finer_sampling(self):
        """
        Test 8: 보고 거리는 10배 촘촘한 재계산과 샘플 pitch 이내
        """
        print("\n" + "="*80)
        print("Test 8: 촘촘한 재계산 비교")
        print("="*80)

        limits = ManufacturingLimits()
        t = [0.0, 0.0, -1.0]
        bend = make_bend(Point3(0, 0, 80), Point3(20, 10, 0), t, t, bow=6.0, z_bow=10.0)
        cases = [
            make_bend(Point3(0.4, 0.9, 80), Point3(20.4, 10.9, 0), t, t, bow=6.0, z_bow=10.0),
            make_bend(Point3(1.0, 0, 80), Point3(21, 10, 0), t, t, bow=5.0, z_bow=12.0),
        ]
        for other in cases:
            a = Segment("a", bend, "a_in", "a_out")
            b = Segment("b", other, "b_in", "b_out")
            violations = check_clearance(_loose(a, b), limits.clearance, limits)
            self.assertEqual(len(violations), 1)
            fine = min_pair_distance(bend, other, limits.sample_pitch / 10.0)
            self.assertLessEqual(abs(violations[0].distance - fine), limits.sample_pitch)
            print(f"  보고 {violations[0].distance:.4f} µm, 재계산 {fine:.4f} µm")
        print("✅ 촘촘한 재계산 통과")


if __name__ == '__main__':
    unittest.main(verbosity=2)
