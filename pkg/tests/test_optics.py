"""
광학 시뮬레이션 테스트: 전력 전파, 손실 보정, 분기 통계, 역방향 특성, Haar 컨볼루션
"""

import unittest
import sys
import io
import os

# Fix Windows console encoding
if sys.platform == 'win32':
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8')
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding='utf-8')

# Add src directory to path
sys.path.append(os.path.dirname(os.path.dirname(__file__)))

import numpy as np

from src.core.errors import ParameterError, StructuralError
from src.generators.fractal import FractalSpec, generate_coupler, generate_coupler_array
from src.generators.haar import default_kernel_set, generate_filter_unit, tile_filter_array
from src.simulation.calibration import (
    calibrate_losses,
    calibration_residual,
    predict_measurements,
    simulate_measurements,
    solve_losses,
)
from src.simulation.optics import (
    LossModel,
    SplitModel,
    coupler_loss_db,
    haar_convolve,
    injected_power,
    mode_count,
    propagate_power,
    reverse_characterize,
    reverse_matrix,
    single_mode_diameter,
    standard_reference_length,
    transmission_matrix,
)
from src.simulation.statistics import (
    central_port,
    fit_split_to_central,
    splitting_report,
)


class TestPowerPropagation(unittest.TestCase):
    """전력 전파 및 손실 테스트"""

    @classmethod
    def setUpClass(cls):
        cls.coupler_1x9 = generate_coupler(FractalSpec())
        cls.coupler_1x81 = generate_coupler(FractalSpec(layers=2))

    def test_1_lossless_conservation(self):
        """
        Test 1: 무손실 모델 - 출력 합 = 입력 전력
        """
        print("\n" + "="*80)
        print("Test 1: 무손실 전력 보존")
        print("="*80)

        for circuit in (self.coupler_1x9, self.coupler_1x81):
            drive = {circuit.inputs()[0].id: 2.5}
            out = propagate_power(circuit, drive, LossModel.lossless())
            self.assertAlmostEqual(sum(out.values()), 2.5, places=12)
            self.assertTrue(all(v > 0 for v in out.values()))
        print("✅ 무손실 보존 통과")

    def test_2_loss_1x9(self):
        """
        Test 2: 기본 1×9 커플러 손실 5.52 dB (±0.05)
        """
        print("\n" + "="*80)
        print("Test 2: 1×9 손실")
        print("="*80)

        loss = coupler_loss_db(self.coupler_1x9, LossModel())
        self.assertLess(abs(loss - 5.52), 0.05)
        out = propagate_power(self.coupler_1x9, {"in_0_0": 1.0}, LossModel())
        self.assertLess(abs(sum(out.values()) - 10 ** (-5.52 / 10)), 0.005)
        print(f"  손실: {loss:.3f} dB, 출력 합: {sum(out.values()):.4f}")
        print("✅ 1×9 손실 통과")

    def test_3_loss_1x81(self):
        """
        Test 3: 기본 1×81 커플러 손실 I + 2C + 4P = 10.61 dB (±0.05)
        """
        print("\n" + "="*80)
        print("Test 3: 1×81 손실")
        print("="*80)

        loss = coupler_loss_db(self.coupler_1x81, LossModel())
        self.assertLess(abs(loss - 10.61), 0.05)
        print(f"  손실: {loss:.3f} dB")
        print("✅ 1×81 손실 통과")

    def test_4_model_validation(self):
        """
        Test 4: 모델 파라미터 검증 및 문자열 파싱
        """
        print("\n" + "="*80)
        print("Test 4: 손실/분배 모델 검증")
        print("="*80)

        self.assertEqual(LossModel.parse("2.71,1.14,1.67").as_tuple(), (2.71, 1.14, 1.67))
        self.assertEqual(SplitModel.parse("0.57,0.57").central_fractions, (0.57, 0.57))
        for text in ("1,2", "a,b,c"):
            with self.assertRaises(ParameterError):
                LossModel.parse(text)
        with self.assertRaises(ParameterError):
            LossModel(-1.0, 0.0, 0.0)
        with self.assertRaises(ParameterError):
            SplitModel((1.2,))
        with self.assertRaises(ParameterError):
            propagate_power(self.coupler_1x9, {"in_0_0": -1.0})
        with self.assertRaises(ParameterError):
            propagate_power(self.coupler_1x9, {"out_0_0": 1.0})

        sm = SplitModel((0.5, 0.3))
        self.assertEqual(sm.fraction(1), 0.5)
        self.assertEqual(sm.fraction(5), 0.3)
        self.assertAlmostEqual(sum(sm.weights(2, 9, 4)), 1.0, places=12)
        print("✅ 모델 검증 통과")

    def test_5_reference_length(self):
        """
        Test 5: 기준 길이 - 1×9 경로보다 길고 반복 호출 시 동일
        """
        print("\n" + "="*80)
        print("Test 5: 기준 길이")
        print("="*80)

        reference = standard_reference_length()
        self.assertGreater(reference, 80.0)
        self.assertLess(reference, 120.0)
        self.assertEqual(standard_reference_length(), reference)
        print(f"  기준 길이: {reference:.3f} µm")
        print("✅ 기준 길이 통과")

    def test_6_array_merged_outputs(self):
        """
        Test 6: 어레이 병합 출력 포트는 여러 입력 전력을 선형 합산
        """
        print("\n" + "="*80)
        print("Test 6: 병합 출력 선형 합산")
        print("="*80)

        array = generate_coupler_array(FractalSpec(), (2, 1))
        lossless = LossModel.lossless()
        a = propagate_power(array, {"in_0_0": 1.0}, lossless)
        b = propagate_power(array, {"in_1_0": 1.0}, lossless)
        both = propagate_power(array, {"in_0_0": 1.0, "in_1_0": 1.0}, lossless)
        for port_id in both:
            self.assertAlmostEqual(both[port_id], a[port_id] + b[port_id], places=12)
        self.assertAlmostEqual(injected_power(array, {"in_0_0": 1.0, "in_1_0": 1.0}), 2.0)
        self.assertEqual(len(array.outputs()), 12)
        print("✅ 병합 출력 통과")


class TestLossCalibration(unittest.TestCase):
    """손실 분리 보정 테스트"""

    def test_1_calibrate(self):
        """
        Test 1: (5.52, 7.80, 10.61) → (2.71, 1.14, 1.67) dB
        """
        print("\n" + "="*80)
        print("Test 1: 손실 보정")
        print("="*80)

        model = calibrate_losses(5.52, 7.80, 10.61)
        np.testing.assert_allclose(model.as_tuple(), (2.71, 1.14, 1.67), atol=0.01)
        residual = calibration_residual(model, (5.52, 7.80, 10.61))
        self.assertLess(np.abs(residual).max(), 1e-12)
        print(f"  I={model.injection_db:.2f}, P={model.propagation_db:.2f}, C={model.coupling_db:.2f} dB")
        print("✅ 손실 보정 통과")

    def test_2_predict_roundtrip(self):
        """
        Test 2: 임의 모델 → 예측 → 보정 = 원 모델
        """
        print("\n" + "="*80)
        print("Test 2: 예측/보정 일관성")
        print("="*80)

        rng = np.random.default_rng(3)
        for _ in range(20):
            model = LossModel(*rng.uniform(0.0, 5.0, size=3).tolist())
            predicted = predict_measurements(model)
            recovered = calibrate_losses(*predicted.as_array().tolist())
            np.testing.assert_allclose(recovered.as_tuple(), model.as_tuple(), atol=1e-9)
        print("✅ 예측/보정 일관성 통과")

    def test_3_negative_components_clipped(self):
        """
        Test 3: 음수 해는 0 으로 절단 (원시 해 보존)
        """
        print("\n" + "="*80)
        print("Test 3: 음수 성분 처리")
        print("="*80)

        raw = solve_losses(5.0, 4.0, 10.0)
        self.assertLess(raw[1], 0.0)
        model = calibrate_losses(5.0, 4.0, 10.0)
        self.assertEqual(model.propagation_db, 0.0)
        with self.assertRaises(ParameterError):
            solve_losses(5.0, float("nan"), 10.0)
        print("✅ 음수 성분 처리 통과")

    def test_4_simulated_measurements(self):
        """
        Test 4: 생성된 세 구성 시뮬레이션 손실 ≈ 해석 예측
        """
        print("\n" + "="*80)
        print("Test 4: 세 구성 시뮬레이션")
        print("="*80)

        simulated = simulate_measurements(LossModel())
        predicted = predict_measurements(LossModel())
        np.testing.assert_allclose(simulated.as_array(), predicted.as_array(), atol=0.05)
        print(f"  시뮬레이션: {simulated.to_dict()}")
        print("✅ 세 구성 시뮬레이션 통과")


class TestModesAndSplitting(unittest.TestCase):
    """모드 수 및 분기 통계 테스트"""

    def test_1_mode_count(self):
        """
        Test 1: M(1.2, 0.5, 0.635) = 4.41, d = 0.3 은 단일 모드
        """
        print("\n" + "="*80)
        print("Test 1: 모드 수")
        print("="*80)

        self.assertAlmostEqual(mode_count(1.2, 0.5, 0.635), 4.41, delta=0.01)
        self.assertLess(mode_count(0.3, 0.5, 0.635), 1.0)
        d_single = single_mode_diameter(0.5, 0.635)
        self.assertAlmostEqual(mode_count(d_single, 0.5, 0.635), 1.0, places=9)
        with self.assertRaises(ParameterError):
            mode_count(0.0, 0.5, 0.635)
        print(f"  단일 모드 직경: {d_single:.3f} µm")
        print("✅ 모드 수 통과")

    def test_2_central_fraction_1x9(self):
        """
        Test 2: 1×9 중앙 비율 0.42 (측정 대역 안)
        """
        print("\n" + "="*80)
        print("Test 2: 1×9 분기 통계")
        print("="*80)

        coupler = generate_coupler(FractalSpec())
        self.assertEqual(central_port(coupler).grid_index, (1, 1))
        report = splitting_report(coupler)
        self.assertAlmostEqual(report.central_fraction, 0.42, places=9)
        self.assertTrue(report.within_band)
        self.assertEqual(len(report.off_center), 8)
        self.assertAlmostEqual(report.off_center[0], 0.58 / 8, places=9)
        print("✅ 1×9 분기 통계 통과")

    def test_3_central_fraction_1x81(self):
        """
        Test 3: 1×81 캐스케이드 중앙 비율 0.1764 (측정 0.33 ± 0.06 밖 → 플래그)
        """
        print("\n" + "="*80)
        print("Test 3: 1×81 분기 통계")
        print("="*80)

        coupler = generate_coupler(FractalSpec(layers=2))
        report = splitting_report(coupler)
        self.assertAlmostEqual(report.central_fraction, 0.1764, places=9)
        self.assertFalse(report.within_band)
        self.assertIn("model limitation", report.message)

        fitted = fit_split_to_central(0.33, 2)
        refit = splitting_report(coupler, fitted)
        self.assertAlmostEqual(refit.central_fraction, 0.33, places=9)
        self.assertTrue(refit.within_band)
        out = propagate_power(coupler, {"in_0_0": 1.0}, LossModel.lossless(), fitted)
        self.assertAlmostEqual(sum(out.values()), 1.0, places=12)
        print(f"  기본: {report.central_fraction:.4f}, 보정 f_c: {fitted.central_fractions}")
        print("✅ 1×81 분기 통계 통과")

    def test_4_even_grid_has_no_center(self):
        """
        Test 4: 짝수 출력 격자 (b=4) 는 중앙 포트 없음
        """
        print("\n" + "="*80)
        print("Test 4: 짝수 격자")
        print("="*80)

        with self.assertRaises(StructuralError):
            central_port(generate_coupler(FractalSpec(b=4)))
        print("✅ 짝수 격자 처리 통과")

    def test_5_mode_count_monotonic(self):
        """
        Test 5: 모드 수는 d, Δn 에 대해 증가, λ 에 대해 감소
        """
        print("\n" + "="*80)
        print("Test 5: 모드 수 단조성")
        print("="*80)

        diameters = np.linspace(0.2, 3.0, 15)
        by_d = [mode_count(d, 0.5, 0.635) for d in diameters]
        self.assertTrue(np.all(np.diff(by_d) > 0))
        by_dn = [mode_count(1.2, dn, 0.635) for dn in np.linspace(0.05, 1.0, 15)]
        self.assertTrue(np.all(np.diff(by_dn) > 0))
        by_wl = [mode_count(1.2, 0.5, wl) for wl in np.linspace(0.4, 1.6, 15)]
        self.assertTrue(np.all(np.diff(by_wl) < 0))
        self.assertEqual(mode_count(1.2, 0.0, 0.635), 0.0)
        print("✅ 모드 수 단조성 통과")


class TestReverseAndConvolution(unittest.TestCase):
    """역방향 특성 및 Haar 컨볼루션 테스트"""

    def test_1_reciprocity(self):
        """
        Test 1: 역방향 행렬 = 전달 행렬 전치
        """
        print("\n" + "="*80)
        print("Test 1: 상반성")
        print("="*80)

        for circuit in (generate_filter_unit(), generate_coupler_array(FractalSpec(), (2, 2))):
            forward = transmission_matrix(circuit, LossModel())
            backward = reverse_matrix(circuit, LossModel())
            np.testing.assert_allclose(
                backward.values, forward.loc[backward.columns, backward.index].values.T, rtol=1e-12
            )
        print("✅ 상반성 통과")

    def test_2_reverse_support(self):
        """
        Test 2: 필터 f 출력 역주입 → 커널 1 위치 입력에서만 방출
        """
        print("\n" + "="*80)
        print("Test 2: 역방향 특성")
        print("="*80)

        unit = generate_filter_unit()
        ks = unit.kernel_set
        for f, kernel in enumerate(ks.kernels):
            emitted = reverse_characterize(unit, unit.output_port_id(f), LossModel.lossless())
            lit = sorted(k for k, v in emitted.items() if v > 0)
            expected = sorted(unit.input_port_id(p, q) for p, q in kernel.support())
            self.assertEqual(lit, expected)
            for port_id in expected:
                self.assertAlmostEqual(emitted[port_id], 1.0, places=12)

        with self.assertRaises(ParameterError):
            reverse_characterize(unit, "in_0_0")
        print("✅ 역방향 특성 통과")

    def test_3_convolution_matches_brute_force(self):
        """
        Test 3: 무손실 필터 배열 출력 = 직접 stride 3 컨볼루션 (임의 이미지 100개)
        """
        print("\n" + "="*80)
        print("Test 3: Haar 컨볼루션")
        print("="*80)

        array = tile_filter_array(default_kernel_set(), image_side=9)
        weights = default_kernel_set().stack()
        rng = np.random.default_rng(11)
        for _ in range(100):
            image = rng.uniform(0.0, 1.0, size=(9, 9))
            features = haar_convolve(array, image)
            blocks = image.reshape(3, 3, 3, 3).transpose(0, 2, 1, 3)
            expected = np.einsum("fpq,uvpq->fuv", weights, blocks)
            np.testing.assert_allclose(features, expected, rtol=1e-12, atol=1e-12)
        print("✅ 컨볼루션 일치 (100개 이미지)")

    def test_4_convolution_input_checks(self):
        """
        Test 4: 이미지 크기/값 검증, 커널 없는 회로 거부
        """
        print("\n" + "="*80)
        print("Test 4: 컨볼루션 입력 검증")
        print("="*80)

        unit = generate_filter_unit()
        with self.assertRaises(ParameterError):
            haar_convolve(unit, np.ones((4, 4)))
        with self.assertRaises(ParameterError):
            haar_convolve(unit, -np.ones((3, 3)))
        with self.assertRaises(StructuralError):
            haar_convolve(generate_coupler(FractalSpec()), np.ones((1, 1)))

        features = haar_convolve(unit, np.ones((3, 3)))
        np.testing.assert_allclose(features[:, 0, 0], [k.ones for k in unit.kernel_set.kernels])
        print("✅ 입력 검증 통과")

    def test_5_convolution_21x21(self):
        """
        Test 5: 21×21 이미지 → (9, 7, 7) 특징 맵, 직접 컨볼루션과 일치
        """
        print("\n" + "="*80)
        print("Test 5: 21×21 컨볼루션")
        print("="*80)

        ks = default_kernel_set()
        array = tile_filter_array(ks, image_side=21)
        weights = ks.stack()
        rng = np.random.default_rng(21)
        for _ in range(5):
            image = rng.uniform(0.0, 1.0, size=(21, 21))
            features = haar_convolve(array, image)
            self.assertEqual(features.shape, (9, 7, 7))
            blocks = image.reshape(7, 3, 7, 3).transpose(0, 2, 1, 3)
            expected = np.einsum("fpq,uvpq->fuv", weights, blocks)
            np.testing.assert_allclose(features, expected, rtol=1e-12, atol=1e-12)
        print("✅ 21×21 컨볼루션 통과")

    def test_6_linearity(self):
        """
        Test 6: 출력 전력은 입력 전력에 선형 (중첩)
        """
        print("\n" + "="*80)
        print("Test 6: 선형성 / 중첩")
        print("="*80)

        rng = np.random.default_rng(5)
        lm = LossModel()
        for circuit in (generate_coupler_array(FractalSpec(), (2, 2)), generate_filter_unit()):
            ids = [p.id for p in circuit.inputs()]
            a = dict(zip(ids, rng.uniform(0.0, 2.0, len(ids))))
            b = dict(zip(ids, rng.uniform(0.0, 2.0, len(ids))))
            alpha, beta = 0.7, 2.5
            mixed = {k: alpha * a[k] + beta * b[k] for k in ids}
            out_a = propagate_power(circuit, a, lm)
            out_b = propagate_power(circuit, b, lm)
            out_mixed = propagate_power(circuit, mixed, lm)
            for port_id, value in out_mixed.items():
                self.assertAlmostEqual(value, alpha * out_a[port_id] + beta * out_b[port_id], places=10)

            zero = propagate_power(circuit, {k: 0.0 for k in ids}, lm)
            self.assertTrue(all(v == 0.0 for v in zero.values()))
        print("✅ 선형성 통과")


if __name__ == '__main__':
    unittest.main(verbosity=2)
