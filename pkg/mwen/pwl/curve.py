"""
Max-affine pump curves and the data they are fitted to.
"""

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator

from mwen.core.errors import ModelBuildError, ReportIOError
from mwen.scenario.models import PumpQuadratic

logger = logging.getLogger(__name__)

SLOPE_TOL = 1e-9


class FitDataset(BaseModel):
    """m points (flow m3/h, power kW) sorted by flow"""

    model_config = ConfigDict(frozen=True)

    flows: Tuple[float, ...]
    powers: Tuple[float, ...]

    @model_validator(mode="after")
    def _check(self) -> "FitDataset":
        if len(self.flows) != len(self.powers):
            raise ValueError(f"{len(self.flows)} flows but {len(self.powers)} powers")
        if len(self.flows) < 2:
            raise ValueError(f"need at least 2 points, got {len(self.flows)}")
        if len(set(self.flows)) != len(self.flows):
            raise ValueError("flow values must be distinct")
        return self

    @classmethod
    def from_points(cls, points: Sequence[Tuple[float, float]]) -> "FitDataset":
        ordered = sorted((float(w), float(y)) for w, y in points)
        return cls(flows=tuple(w for w, _ in ordered), powers=tuple(y for _, y in ordered))

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "FitDataset":
        """Two-column CSV (flow, power); a header row is optional"""
        try:
            frame = pd.read_csv(path, header=None, comment="#")
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise ReportIOError(f"Cannot read pump data: {e}", str(path))
        frame = frame.apply(pd.to_numeric, errors="coerce").dropna()
        if frame.shape[1] < 2:
            raise ModelBuildError(f"Pump data {path} needs two columns (flow, power)")
        return cls.from_points(list(zip(frame.iloc[:, 0], frame.iloc[:, 1])))

    @property
    def size(self) -> int:
        return len(self.flows)

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.flows, dtype=float), np.asarray(self.powers, dtype=float)


class PwlCurve(BaseModel):
    """Convex max-affine curve: segments sorted by strictly increasing slope"""

    model_config = ConfigDict(frozen=True)

    segments: Tuple[Tuple[float, float], ...]
    domain: Tuple[float, float]
    breakpoints: Tuple[float, ...] = ()
    sse: float = 0.0

    @property
    def slopes(self) -> List[float]:
        return [a for a, _ in self.segments]

    def value(self, flow: float) -> float:
        return max(a * flow + b for a, b in self.segments)

    def knots(self) -> List[float]:
        """Domain ends with the breakpoints in between"""
        return [self.domain[0], *self.breakpoints, self.domain[1]]

    def to_json(self) -> Dict[str, Any]:
        return {
            "segments": [list(s) for s in self.segments],
            "breakpoints": list(self.breakpoints),
            "domain": list(self.domain),
            "sse": self.sse,
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "PwlCurve":
        return cls(
            segments=tuple(tuple(s) for s in data["segments"]),
            breakpoints=tuple(data.get("breakpoints", ())),
            domain=tuple(data["domain"]),
            sse=data.get("sse", 0.0),
        )


def sample_quadratic(pump: PumpQuadratic, interval: Tuple[float, float], m: int) -> FitDataset:
    """m evenly spaced samples of c1*W^2 + c2*W + c3 over the interval"""
    lo, hi = float(interval[0]), float(interval[1])
    if m < 2:
        raise ModelBuildError(f"Need at least 2 samples, got {m}")
    if not hi > lo:
        raise ModelBuildError(f"Degenerate sampling interval [{lo}, {hi}]")
    flows = np.linspace(lo, hi, m)
    return FitDataset(flows=tuple(float(w) for w in flows), powers=tuple(pump.power(float(w)) for w in flows))


def normalize_segments(
    segments: Sequence[Tuple[float, float]],
    domain: Tuple[float, float],
    sse: float = 0.0,
) -> PwlCurve:
    """
    Reduce arbitrary affine pieces to the upper envelope over the domain

    Duplicate slopes collapse onto the highest intercept, pieces that never
    attain the maximum inside the domain are dropped, and the breakpoints are
    the intersections of consecutive survivors.
    """
    lo, hi = float(domain[0]), float(domain[1])
    pieces = sorted(((float(a), float(b)) for a, b in segments), key=lambda s: (s[0], -s[1]))
    if not pieces:
        raise ModelBuildError("No segments to normalize")

    collapsed: List[Tuple[float, float]] = []
    for a, b in pieces:
        if collapsed and abs(a - collapsed[-1][0]) <= SLOPE_TOL * max(1.0, abs(a)):
            if b > collapsed[-1][1]:
                collapsed[-1] = (a, b)
            continue
        collapsed.append((a, b))

    # active piece at the left end; ties go to the steeper piece
    current = max(range(len(collapsed)), key=lambda j: (collapsed[j][0] * lo + collapsed[j][1], collapsed[j][0]))
    envelope = [collapsed[current]]
    breakpoints: List[float] = []
    position = lo
    while True:
        a_cur, b_cur = collapsed[current]
        best_j, best_x = -1, math.inf
        for j in range(current + 1, len(collapsed)):
            a_j, b_j = collapsed[j]
            crossing = (b_cur - b_j) / (a_j - a_cur)
            if crossing < best_x - 1e-12 or (abs(crossing - best_x) <= 1e-12 and j > best_j):
                best_j, best_x = j, crossing
        if best_j < 0 or best_x >= hi - 1e-12 * max(1.0, abs(hi)):
            break
        best_x = max(best_x, position)
        if breakpoints and best_x <= breakpoints[-1]:
            envelope.pop()
            breakpoints.pop()
        elif best_x <= lo:
            envelope.pop()
        else:
            breakpoints.append(best_x)
        envelope.append(collapsed[best_j])
        current, position = best_j, best_x
    return PwlCurve(segments=tuple(envelope), domain=(lo, hi), breakpoints=tuple(breakpoints), sse=float(sse))


def eval_pwl(curve: PwlCurve, flow: float) -> float:
    """max over segments of a*W + b, with W clamped into the curve domain"""
    lo, hi = curve.domain
    if flow < lo or flow > hi:
        clamped = min(max(flow, lo), hi)
        logger.warning(f"Flow {flow} outside curve domain [{lo}, {hi}]; evaluating at {clamped}")
        flow = clamped
    return curve.value(flow)


def curve_sse(curve_segments: Sequence[Tuple[float, float]], data: FitDataset) -> float:
    flows, powers = data.arrays()
    slopes = np.array([a for a, _ in curve_segments])
    intercepts = np.array([b for _, b in curve_segments])
    fitted = np.max(np.outer(flows, slopes) + intercepts, axis=1)
    return float(np.sum((fitted - powers) ** 2))
