"""
Multiplier update, residuals, the feasibility metric and the objective-based
stopping rule. Plain functions over float sequences.
"""

from typing import List, Sequence, Tuple

import numpy as np

from mwen.core.errors import ModelBuildError


def _same_length(*series: Sequence[float]) -> None:
    lengths = {len(s) for s in series}
    if len(lengths) > 1:
        raise ModelBuildError(f"Series lengths differ: {sorted(lengths)}")


def dual_update(
    multipliers: Sequence[float],
    rho: float,
    mem_power: Sequence[float],
    water_power: Sequence[float],
) -> List[float]:
    """lambda_t + rho * (P_E,t - P_W,t)"""
    _same_length(multipliers, mem_power, water_power)
    lam = np.asarray(multipliers, dtype=float)
    gap = np.asarray(mem_power, dtype=float) - np.asarray(water_power, dtype=float)
    return (lam + rho * gap).tolist()


def residuals(
    mem_power: Sequence[float],
    water_power: Sequence[float],
    previous_mem: Sequence[float] = None,
    previous_water: Sequence[float] = None,
) -> Tuple[List[float], List[float]]:
    """
    Primal residual r = P_E - P_W and dual residual s = r - r_previous

    Without a previous iterate the previous residual is taken as zero, so
    the first dual residual equals the first primal residual.
    """
    _same_length(mem_power, water_power)
    r = np.asarray(mem_power, dtype=float) - np.asarray(water_power, dtype=float)
    if previous_mem is None or previous_water is None:
        r_prev = np.zeros_like(r)
    else:
        _same_length(mem_power, previous_mem, previous_water)
        r_prev = np.asarray(previous_mem, dtype=float) - np.asarray(previous_water, dtype=float)
    return r.tolist(), (r - r_prev).tolist()


def feasibility_metric(r: Sequence[float], s: Sequence[float]) -> float:
    """sqrt(||r||^2 + ||s||^2)"""
    return float(np.sqrt(np.dot(r, r) + np.dot(s, s)))


def norm(values: Sequence[float]) -> float:
    return float(np.linalg.norm(np.asarray(values, dtype=float)))


def ob_stop_check(
    objectives: Sequence[float],
    eps_history: Sequence[float],
    window: int,
    beta: float,
) -> bool:
    """
    Objective-based stopping rule

    Stops when the windowed mean of the MEM cost moved by at most ``beta``
    (relative) since the previous iteration and the latest eps is no larger
    than the mean eps over the window. Needs ``window + 1`` entries.
    """
    if len(objectives) < window + 1 or len(eps_history) < window:
        return False
    current = float(np.mean(objectives[-window:]))
    previous = float(np.mean(objectives[-window - 1:-1]))
    rate = abs(current - previous) / max(abs(previous), 1e-12)
    return rate <= beta and eps_history[-1] <= float(np.mean(eps_history[-window:]))
