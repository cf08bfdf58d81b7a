"""Brute-force reference implementations for the oracle tests.

Everything in here deliberately avoids the library's own code paths:
box IoU comes from rasterized pixel counting, mask IoU from dense
arrays, the motion filter from a literal textbook recursion with
explicit matrix inverses, the pathway optimum from full 3^T
enumeration, and the selection rules from plain argmax loops. When a
test disagrees with one of these, the library is wrong, not the oracle;
oracle outputs are never regenerated to match the code under test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

__all__ = [
    "dense_box_iou",
    "dense_mask_iou",
    "DenseKalmanOracle",
    "exhaustive_best_trajectory",
    "topk_window_oracle",
    "samurai_choice_oracle",
    "him_choice_oracle",
]


def dense_box_iou(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> float:
    """Pixel-count IoU of two integer-aligned boxes via rasterization.

    Boxes are (x, y, w, h) with integer fields; a pixel belongs to a box
    when its integer coordinates satisfy x <= px < x + w (likewise for
    y). Exact for integer-aligned inputs.
    """
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    x0, y0 = min(ax, bx), min(ay, by)
    width = max(ax + aw, bx + bw) - x0
    height = max(ay + ah, by + bh) - y0
    if width <= 0 or height <= 0:
        return 0.0
    ga = np.zeros((height, width), dtype=bool)
    gb = np.zeros((height, width), dtype=bool)
    ga[ay - y0: ay - y0 + ah, ax - x0: ax - x0 + aw] = True
    gb[by - y0: by - y0 + bh, bx - x0: bx - x0 + bw] = True
    union = int((ga | gb).sum())
    if union == 0:
        return 0.0
    return int((ga & gb).sum()) / union


def dense_mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Pixel-count IoU of two dense boolean masks; 0 when either is empty."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError("mask shapes differ")
    if not a.any() or not b.any():
        return 0.0
    return int((a & b).sum()) / int((a | b).sum())


class DenseKalmanOracle:
    """Textbook constant-velocity filter recursion, matrices spelled out.

    State [cx, cy, w, h, vcx, vcy, vw, vh], dt = 1, explicit inverse in
    the gain. Independent of :mod:`trackmem.motion` by construction.
    """

    def __init__(self, box: tuple[float, float, float, float],
                 process_noise: float, measurement_noise: float,
                 initial_cov_scale: float):
        x, y, w, h = box
        self.x = np.array([x + w / 2.0, y + h / 2.0, w, h, 0.0, 0.0, 0.0, 0.0])
        self.P = initial_cov_scale * np.eye(8)
        self.q = process_noise
        self.r = measurement_noise
        self.F = np.eye(8)
        for i in range(4):
            self.F[i, i + 4] = 1.0
        self.H = np.hstack([np.eye(4), np.zeros((4, 4))])

    def predict(self) -> tuple[float, float, float, float]:
        self.x = self.F @ self.x
        self.P = self.F @ self.P @ self.F.T + self.q * np.eye(8)
        cx, cy, w, h = self.x[:4]
        w = max(w, 1e-6)
        h = max(h, 1e-6)
        return (cx - w / 2.0, cy - h / 2.0, w, h)

    def update(self, box: tuple[float, float, float, float]) -> None:
        x, y, w, h = box
        z = np.array([x + w / 2.0, y + h / 2.0, w, h])
        innovation = z - self.H @ self.x
        s = self.H @ self.P @ self.H.T + self.r * np.eye(4)
        gain = self.P @ self.H.T @ np.linalg.inv(s)
        self.x = self.x + gain @ innovation
        self.P = (np.eye(8) - gain @ self.H) @ self.P


def exhaustive_best_trajectory(
    s_mask_rows: list[list[float]], epsilon: float
) -> tuple[tuple[int, ...], float]:
    """Enumerate all 3^T proposal choices; return the score-maximal one.

    Scores accumulate left to right exactly like the beam recursion.
    Ties resolve to the lexicographically smallest index sequence, which
    enumeration order provides for free with a strict comparison.
    """
    best_traj: tuple[int, ...] | None = None
    best_score = -math.inf
    for traj in itertools.product(range(3), repeat=len(s_mask_rows)):
        score = 0.0
        for t, k in enumerate(traj):
            score = score + math.log(s_mask_rows[t][k] + epsilon)
        if score > best_score:
            best_score = score
            best_traj = traj
    return best_traj, best_score


def topk_window_oracle(
    scored: list[tuple[int, float]], k: int
) -> list[int]:
    """Top-k window frames by (score desc, frame desc), output chronological."""
    ranked = sorted(scored, key=lambda item: (-item[1], -item[0]))
    return sorted(frame for frame, _ in ranked[:k])


def samurai_choice_oracle(
    s_mask: list[float], s_obj: list[float], s_kf: list[float], alpha: float
) -> int | None:
    """Plain loop over the three proposals; None when none qualifies."""
    best_idx = None
    best_score = None
    for i in range(len(s_mask)):
        if s_obj[i] <= 0.0:
            continue
        score = alpha * s_kf[i] + (1.0 - alpha) * s_mask[i]
        if best_score is None or score > best_score:
            best_idx, best_score = i, score
    return best_idx


def him_choice_oracle(
    s_coarse: list[float], s_fine: list[float], s_iou: list[float],
    alpha: float, beta: float, tau_conf: float,
) -> tuple[int, float, bool]:
    """Two-stage confidence logic replayed with plain loops."""
    stage1 = [alpha * c + (1.0 - alpha) * i for c, i in zip(s_coarse, s_iou)]
    if max(stage1) >= tau_conf:
        confs, used_fine = stage1, False
    else:
        confs = [alpha * c + beta * f + (1.0 - alpha - beta) * i
                 for c, f, i in zip(s_coarse, s_fine, s_iou)]
        used_fine = True
    best = 0
    for i in range(1, len(confs)):
        if confs[i] > confs[best]:
            best = i
    return best, confs[best], used_fine
