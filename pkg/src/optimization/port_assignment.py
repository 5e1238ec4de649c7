"""
WaveRoute - 필터 → 출력 포트 배정 최적화
9! = 362880 배정 전수 탐색 (총 직선 배선 길이 최소)
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import permutations
from typing import Callable, Optional, Tuple
import logging
import math

import numpy as np

from ..core.config import worker_count
from ..core.errors import ParameterError
from ..generators.haar import FILTER_COUNT, KERNEL_SIZE, KernelSet

logger = logging.getLogger(__name__)

COST_DECIMALS = 9
MAX_FACTORIAL_ARGUMENT = 20  # 20! < 2^63

# (배정 배열 (m, n)) → 비용 배열 (m,)
Objective = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class AssignmentGeometry:
    """
    배정 비용 계산용 유닛 기하
    입력 (p, q) → (p·d0, q·d0, height), 출력 k → (r·d0, c·d0, 0)
    """
    d0: float = 20.0
    height: float = 80.0

    def __post_init__(self):
        if not self.d0 > 0 or self.height < 0:
            raise ParameterError(f"Invalid assignment geometry: d0={self.d0}, height={self.height}")

    def input_positions(self) -> np.ndarray:
        """(9, 3) 입력 위치, index = 3p + q"""
        return np.array([
            (p * self.d0, q * self.d0, self.height)
            for p in range(KERNEL_SIZE) for q in range(KERNEL_SIZE)
        ])

    def output_positions(self) -> np.ndarray:
        """(9, 3) 출력 위치, index = k = 3r + c"""
        return np.array([
            (r * self.d0, c * self.d0, 0.0)
            for r in range(KERNEL_SIZE) for c in range(KERNEL_SIZE)
        ])


def assignment_space_size(n_filters: int) -> int:
    """배정 경우의 수 n!"""
    if not isinstance(n_filters, int) or n_filters < 1:
        raise ParameterError(f"Filter count must be an integer >= 1, got {n_filters}")
    if n_filters > MAX_FACTORIAL_ARGUMENT:
        raise OverflowError(f"{n_filters}! exceeds the 64-bit assignment index range")
    return math.factorial(n_filters)


def wiring_cost_matrix(
    weights: np.ndarray, input_positions: np.ndarray, output_positions: np.ndarray
) -> np.ndarray:
    """
    C[f, k] = Σ_{inputs} K_f(input) · |input − output_k|

    Args:
        weights: (n_filters, n_inputs) 0/1
        input_positions: (n_inputs, 3)
        output_positions: (n_ports, 3)
    """
    weights = np.asarray(weights, dtype=float)
    distances = np.linalg.norm(
        np.asarray(input_positions, dtype=float)[:, None, :] - np.asarray(output_positions, dtype=float)[None, :, :],
        axis=2,
    )
    return weights @ distances


def linear_objective(cost_matrix: np.ndarray) -> Objective:
    """배정 비용 = Σ_f C[f, perm[f]]"""
    cost_matrix = np.asarray(cost_matrix, dtype=float)
    rows = np.arange(cost_matrix.shape[0])

    def evaluate(perms: np.ndarray) -> np.ndarray:
        return cost_matrix[rows, perms].sum(axis=1)

    return evaluate


def _block(n: int, first: int) -> np.ndarray:
    """first 로 시작하는 모든 순열 (사전순)"""
    if n == 1:
        return np.zeros((1, 1), dtype=np.int8)
    rest = [k for k in range(n) if k != first]
    tails = np.array(list(permutations(rest)), dtype=np.int8).reshape(-1, n - 1)
    return np.hstack([np.full((len(tails), 1), first, dtype=np.int8), tails])


def optimize_assignment(
    cost_matrix: Optional[np.ndarray] = None,
    n: Optional[int] = None,
    objective: Optional[Objective] = None,
    max_workers: Optional[int] = None,
) -> Tuple[Tuple[int, ...], float]:
    """
    전수 탐색 배정 최적화

    동점은 사전순으로 가장 작은 순열. 첫 원소별 블록을 병렬 평가 후 순서대로 축약.

    Returns:
        (permutation, cost)
    """
    if objective is None:
        if cost_matrix is None:
            raise ParameterError("Either a cost matrix or an objective is required")
        cost_matrix = np.asarray(cost_matrix, dtype=float)
        if cost_matrix.ndim != 2 or cost_matrix.shape[0] != cost_matrix.shape[1]:
            raise ParameterError(f"Cost matrix must be square, got shape {cost_matrix.shape}")
        objective = linear_objective(cost_matrix)
        n = cost_matrix.shape[0]
    if n is None:
        raise ParameterError("Problem size n is required with a custom objective")
    total = assignment_space_size(n)

    def evaluate(first: int) -> Tuple[float, Tuple[int, ...]]:
        perms = _block(n, first)
        costs = np.round(objective(perms), COST_DECIMALS)
        k = int(np.argmin(costs))
        return float(costs[k]), tuple(int(v) for v in perms[k])

    workers = max_workers or worker_count()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(evaluate, range(n)))

    best_cost, best_perm = results[0]
    for cost, perm in results[1:]:
        if cost < best_cost:
            best_cost, best_perm = cost, perm
    logger.debug(f"Evaluated {total} assignments, best cost {best_cost:.3f}")
    return best_perm, best_cost


def optimize_port_assignment(
    ks: KernelSet,
    geometry: Optional[AssignmentGeometry] = None,
    objective: Optional[Objective] = None,
    max_workers: Optional[int] = None,
) -> Tuple[Tuple[int, ...], float]:
    """
    Haar 커널 세트의 최적 출력 포트 배정 (총 직선 배선 길이 µm)

    objective 지정 시 기본 길이 비용 대신 사용 (예: 교차 수)
    """
    geometry = geometry or AssignmentGeometry()
    weights = ks.stack().reshape(FILTER_COUNT, -1)
    matrix = wiring_cost_matrix(weights, geometry.input_positions(), geometry.output_positions())
    perm, cost = optimize_assignment(
        matrix if objective is None else None,
        n=FILTER_COUNT,
        objective=objective,
        max_workers=max_workers,
    )
    logger.info(f"✅ Port assignment {list(perm)}: wire length {cost:.2f} µm over {assignment_space_size(FILTER_COUNT)} candidates")
    return perm, cost
