"""Projection gradient solver for the continuous max-flow problem.

Given fixed capacities ``C_s``, ``C_t`` (per pixel) and ``C`` (spatial), the
solver maximises the augmented Lagrangian

    L = sum p_s + lam * (div p - p_s + p_t) - c/2 * ||div p - p_s + p_t||^2

by cycling through spatial, sink, source and multiplier updates. The
multiplier ``lam`` is the relaxed label of each pixel.
"""

from dataclasses import dataclass, field, replace
from typing import List

import numpy as np

from .errors import NumericalDivergence, ShapeMismatch
from .grid import divergence, gradient

SOURCE_MODES = ("derived", "as_printed")


@dataclass(frozen=True)
class FlowState:
    """Source, sink and spatial flows plus the multiplier ``lam``."""

    p_s: np.ndarray
    p_t: np.ndarray
    p: np.ndarray  # shape (2, H, W)
    lam: np.ndarray

    @property
    def shape(self):
        return self.lam.shape

    @classmethod
    def zeros(cls, shape, lam=0.0):
        return cls(
            p_s=np.zeros(shape),
            p_t=np.zeros(shape),
            p=np.zeros((2,) + tuple(shape)),
            lam=np.full(shape, float(lam)),
        )

    def residual_field(self):
        """Flow-conservation violation ``div p - p_s + p_t``."""
        return divergence(self.p) - self.p_s + self.p_t

    def is_finite(self):
        return all(np.isfinite(a).all() for a in (self.p_s, self.p_t, self.p, self.lam))


@dataclass(frozen=True)
class InnerSolverConfig:
    """Parameters of the inner max-flow loop.

    ``source_mode="derived"`` uses the exact maximiser of the Lagrangian in
    ``p_s``; ``"as_printed"`` uses ``p_s = (1 + c G) / (2c)`` with
    ``G = p_t - lam + div p / c``.
    """

    c: float = 0.3
    gamma: float = 0.11
    max_iters: int = 300
    tol: float = 1e-4
    source_mode: str = "derived"
    clamp_source: bool = True

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be > 0, got {self.c}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be >= 0, got {self.max_iters}")
        if self.source_mode not in SOURCE_MODES:
            raise ValueError(f"source_mode must be one of {SOURCE_MODES}, got {self.source_mode!r}")


@dataclass
class InnerDiagnostics:
    iterations_run: int = 0
    residual_history: List[float] = field(default_factory=list)
    final_residual: float = float("nan")


def _check_finite(arrays, what, iteration=None):
    for a in arrays:
        if not np.isfinite(a).all():
            raise NumericalDivergence(f"non-finite values in {what}; step size may be too large",
                                      inner_iteration=iteration)


def project_spatial(p, C):
    """Scale each flow vector so that its Euclidean norm is at most ``C``."""
    norm = np.hypot(p[0], p[1])
    if C <= 0:
        return np.zeros_like(p)
    scale = np.ones_like(norm)
    over = norm > C
    scale[over] = C / norm[over]
    return p * scale


def spatial_flow_step(state, C, cfg):
    """One projected gradient step on the spatial flow ``p``.

    Minimises ``||div p - D||^2 / 2`` with ``D = p_s + lam/c - p_t``; the
    descent direction is ``+grad(div p - D)`` because div is minus the
    adjoint of grad.
    """
    if C < 0:
        raise ValueError(f"spatial capacity must be >= 0, got {C}")
    D = state.p_s + state.lam / cfg.c - state.p_t
    p = state.p + cfg.gamma * gradient(divergence(state.p) - D)
    _check_finite([p], "spatial flow")
    return replace(state, p=project_spatial(p, C))


def sink_flow_step(state, C_t, cfg):
    F = state.p_s + state.lam / cfg.c - divergence(state.p)
    p_t = np.minimum(C_t, F)
    _check_finite([p_t], "sink flow")
    return replace(state, p_t=p_t)


def source_flow_step(state, C_s, cfg):
    div_p = divergence(state.p)
    if cfg.source_mode == "derived":
        p_s = div_p + state.p_t + (1.0 - state.lam) / cfg.c
    else:
        G = state.p_t - state.lam + div_p / cfg.c
        p_s = (1.0 + cfg.c * G) / (2.0 * cfg.c)
    if cfg.clamp_source:
        p_s = np.minimum(p_s, C_s)
    _check_finite([p_s], "source flow")
    return replace(state, p_s=p_s)


def multiplier_step(state, cfg):
    """Update ``lam`` by the conservation residual; returns ``(state, ||eps||_inf)``.

    ``lam`` is deliberately left unclamped here.
    """
    eps = state.residual_field()
    lam = state.lam - cfg.c * eps
    _check_finite([lam], "multiplier")
    return replace(state, lam=lam), float(np.abs(eps).max())


def solve_inner(init, caps, cfg=None):
    """Run the inner max-flow iteration until ``||eps||_inf <= tol``.

    Parameters
    ----------
    init : FlowState
        Starting flows and multiplier (warm start is allowed).
    caps : CapacityFields
        Only ``C_s``, ``C_t`` and ``C`` are read.
    cfg : InnerSolverConfig, optional

    Returns
    -------
    (FlowState, InnerDiagnostics)
        At least one sweep always runs, because a conserving start (such as
        a warm start from the previous capacities) says nothing about
        optimality. The only exception is ``tol = inf``, which returns the
        initial state untouched.
    """
    cfg = cfg or InnerSolverConfig()
    if caps.C_s.shape != init.shape or caps.C_t.shape != init.shape:
        raise ShapeMismatch(f"capacity shape {caps.C_s.shape} does not match state {init.shape}")
    if not init.is_finite():
        raise NumericalDivergence("initial state is not finite", inner_iteration=0)

    diag = InnerDiagnostics()
    state = init
    diag.final_residual = float(np.abs(state.residual_field()).max())
    if np.isinf(cfg.tol):
        return state, diag

    for k in range(1, cfg.max_iters + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                state = spatial_flow_step(state, caps.C, cfg)
                state = sink_flow_step(state, caps.C_t, cfg)
                state = source_flow_step(state, caps.C_s, cfg)
                state, residual = multiplier_step(state, cfg)
        except NumericalDivergence as exc:
            exc.inner_iteration = k
            raise
        diag.iterations_run = k
        diag.residual_history.append(residual)
        diag.final_residual = residual
        if residual <= cfg.tol:
            break
    return state, diag
