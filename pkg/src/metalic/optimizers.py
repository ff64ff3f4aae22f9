"""Two-phase training engines: full-batch ADAM and L-BFGS with strong Wolfe.

Both operate on a flat parameter vector and an ``objective_with_grad``
callable returning ``(loss, gradient)``.  Everything is deterministic given
the objective: no internal randomness.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class OptimizerDivergedError(FloatingPointError):
    """Loss became non-finite during optimization."""

    def __init__(self, iteration: int, loss: float, params: np.ndarray):
        super().__init__(f"non-finite loss {loss} at iteration {iteration}")
        self.iteration = iteration
        self.loss = loss
        self.params = np.array(params)


class StopReason(str, Enum):
    GRAD_TOLERANCE = "grad_tolerance"
    PARAM_CHANGE = "param_change"
    MAX_ITERATIONS = "max_iterations"
    LINE_SEARCH_FAILED = "line_search_failed"


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    epochs: int = 10_000

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must lie in [0, 1)")


@dataclass(frozen=True)
class LbfgsConfig:
    max_iterations: int = 50_000
    grad_tolerance: float = 1e-6
    param_change_tolerance: float = 1e-9
    memory: int = 10
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    max_line_search: int = 25

    def __post_init__(self):
        if self.grad_tolerance <= 0 or self.param_change_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.memory < 1:
            raise ValueError("memory must be >= 1")


def adam_run(objective_with_grad, initial: np.ndarray, cfg: AdamConfig,
             seed: int = 0, trace=None) -> tuple[np.ndarray, float]:
    """Standard ADAM with bias correction over full-batch gradients.

    ``seed`` is accepted for interface stability; the collocation sets are
    fixed per problem instance so each epoch is a deterministic full pass.
    """
    del seed
    theta = np.array(initial, dtype=float)
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    loss = None
    for t in range(1, cfg.epochs + 1):
        loss, grad = objective_with_grad(theta)
        if not np.isfinite(loss):
            raise OptimizerDivergedError(t - 1, loss, theta)
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad
        m_hat = m / (1.0 - cfg.beta1**t)
        v_hat = v / (1.0 - cfg.beta2**t)
        step = cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
        theta = theta - step
        if trace is not None:
            trace(t - 1, float(loss), float(np.linalg.norm(grad)), cfg.learning_rate)
    final_loss, _ = objective_with_grad(theta)
    if not np.isfinite(final_loss):
        raise OptimizerDivergedError(cfg.epochs, final_loss, theta)
    return theta, float(final_loss)


def _two_loop(grad, s_list, y_list, rho_list):
    q = grad.copy()
    alphas = []
    for s, y, rho in zip(reversed(s_list), reversed(y_list), reversed(rho_list)):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if s_list:
        s, y = s_list[-1], y_list[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(zip(s_list, y_list, rho_list), reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return q


def _zoom(obj, x, d, f0, gtd0, lo, hi, c1, c2, budget):
    """Wolfe zoom on the bracket [lo, hi]; entries are (t, f, gtd)."""
    t_lo, f_lo, gtd_lo = lo
    t_hi, f_hi, _ = hi
    for _ in range(budget):
        t = 0.5 * (t_lo + t_hi)
        f_t, g_t = obj(x + t * d)
        gtd_t = float(g_t @ d)
        if not np.isfinite(f_t) or f_t > f0 + c1 * t * gtd0 or f_t >= f_lo:
            t_hi, f_hi = t, f_t
        else:
            if abs(gtd_t) <= -c2 * gtd0:
                return t, f_t, g_t, True
            if gtd_t * (t_hi - t_lo) >= 0:
                t_hi, f_hi = t_lo, f_lo
            t_lo, f_lo, gtd_lo = t, f_t, gtd_t
    return None, None, None, False


def _strong_wolfe(obj, x, f0, g0, d, t_init, cfg: LbfgsConfig):
    """Bracketing strong-Wolfe search; returns (t, f, g, ok)."""
    c1, c2 = cfg.wolfe_c1, cfg.wolfe_c2
    gtd0 = float(g0 @ d)
    t_prev, f_prev, gtd_prev = 0.0, f0, gtd0
    t = t_init
    for trial in range(cfg.max_line_search):
        f_t, g_t = obj(x + t * d)
        gtd_t = float(g_t @ d)
        budget = cfg.max_line_search - trial - 1
        if not np.isfinite(f_t) or f_t > f0 + c1 * t * gtd0 or (trial > 0 and f_t >= f_prev):
            return _zoom(obj, x, d, f0, gtd0, (t_prev, f_prev, gtd_prev), (t, f_t, gtd_t),
                         c1, c2, budget)
        if abs(gtd_t) <= -c2 * gtd0:
            return t, f_t, g_t, True
        if gtd_t >= 0:
            return _zoom(obj, x, d, f0, gtd0, (t, f_t, gtd_t), (t_prev, f_prev, gtd_prev),
                         c1, c2, budget)
        t_prev, f_prev, gtd_prev = t, f_t, gtd_t
        t = min(2.0 * t, 1e10)
    return None, None, None, False


def lbfgs_run(objective_with_grad, initial: np.ndarray, cfg: LbfgsConfig,
              trace=None) -> tuple[np.ndarray, float, StopReason]:
    """Two-loop-recursion L-BFGS with strong-Wolfe line search.

    Stops on gradient norm, parameter change, iteration budget, or a
    repeated line-search failure (after one steepest-descent fallback).
    """
    x = np.array(initial, dtype=float)
    f, g = objective_with_grad(x)
    if not np.isfinite(f):
        raise OptimizerDivergedError(0, f, x)
    if np.linalg.norm(g) <= cfg.grad_tolerance:
        return x, float(f), StopReason.GRAD_TOLERANCE

    s_list: list[np.ndarray] = []
    y_list: list[np.ndarray] = []
    rho_list: list[float] = []
    reason = StopReason.MAX_ITERATIONS

    for it in range(cfg.max_iterations):
        d = -_two_loop(g, s_list, y_list, rho_list)
        if float(g @ d) >= 0.0:  # stale curvature made d non-descent
            d = -g
        t_init = min(1.0, 1.0 / max(np.sum(np.abs(g)), 1e-12)) if it == 0 else 1.0

        t, f_new, g_new, ok = _strong_wolfe(objective_with_grad, x, f, g, d, t_init, cfg)
        if not ok:
            fallback = -g
            t, f_new, g_new, ok = _strong_wolfe(
                objective_with_grad, x, f, g, fallback, t_init, cfg
            )
            if not ok:
                reason = StopReason.LINE_SEARCH_FAILED
                break
            d = fallback

        step = t * d
        x_new = x + step
        y = g_new - g
        sy = float(step @ y)
        if sy > 1e-13 * np.linalg.norm(step) * np.linalg.norm(y):
            s_list.append(step)
            y_list.append(y)
            rho_list.append(1.0 / sy)
            if len(s_list) > cfg.memory:
                s_list.pop(0)
                y_list.pop(0)
                rho_list.pop(0)
        x, f, g = x_new, f_new, g_new
        if trace is not None:
            trace(it, float(f), float(np.linalg.norm(g)), float(t))
        if not np.isfinite(f):
            raise OptimizerDivergedError(it, f, x)
        if np.linalg.norm(g) <= cfg.grad_tolerance:
            reason = StopReason.GRAD_TOLERANCE
            break
        if np.max(np.abs(step)) <= cfg.param_change_tolerance:
            reason = StopReason.PARAM_CHANGE
            break
    return x, float(f), reason
