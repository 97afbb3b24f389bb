"""Outer loop: alternate the max-flow solve with capacity re-estimation."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .capacity import (
    CapacityFields,
    PriorConfig,
    mrf_multiplier,
    sink_capacity_update,
    source_capacity_update,
    spatial_capacity_update,
)
from .errors import EmptyImage, NumericalDivergence, ShapeMismatch
from .grid import gradient
from .solver import FlowState, InnerDiagnostics, InnerSolverConfig, solve_inner

INIT_STRATEGIES = ("percentile", "constants")
LEVEL_UPDATES = ("calibrated", "literal")


@dataclass(frozen=True)
class SegmenterConfig:
    """Settings for :func:`segment`.

    level_update
        ``"calibrated"`` (default) keeps the levels in intensity units: the
        MRF multipliers are evaluated on the relaxed-label memberships and
        act as spatial weights for the region-mean level estimates.
        ``"literal"`` feeds the raw flows through the direct level update
        (``s = G_s + beta (1 - p_s)``, ``t = G_t + beta p_t``), which drives
        the levels far outside [0, 1] within a couple of iterations.
    estimate_capacities
        False solves a single max-flow problem with the initial capacities.
    spatial_capacity
        Fixes ``C`` instead of deriving it from flow conservation.
    """

    inner: InnerSolverConfig = field(default_factory=InnerSolverConfig)
    prior: PriorConfig = field(default_factory=PriorConfig)
    max_outer: int = 20
    outer_tol: float = 1e-3
    threshold: float = 0.5
    init_strategy: str = "percentile"
    init_s: float = 0.35
    init_t: float = 0.3
    level_update: str = "calibrated"
    estimate_capacities: bool = True
    spatial_capacity: Optional[float] = None

    def __post_init__(self):
        if self.max_outer < 1:
            raise ValueError(f"max_outer must be >= 1, got {self.max_outer}")
        if not self.outer_tol > 0:
            raise ValueError(f"outer_tol must be > 0, got {self.outer_tol}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")
        if self.init_strategy not in INIT_STRATEGIES:
            raise ValueError(f"init_strategy must be one of {INIT_STRATEGIES}")
        if self.level_update not in LEVEL_UPDATES:
            raise ValueError(f"level_update must be one of {LEVEL_UPDATES}")
        if self.spatial_capacity is not None and self.spatial_capacity < 0:
            raise ValueError("spatial_capacity must be >= 0")


@dataclass
class SegmentationResult:
    mask: np.ndarray
    lam: np.ndarray
    capacities: CapacityFields
    energy_history: List[float]
    outer_iterations: int
    inner_diagnostics: List[InnerDiagnostics]
    capacity_deltas: List[float]
    converged: bool = False
    state: Optional[FlowState] = None


def _as_image(image):
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D image, got shape {image.shape}")
    if image.size == 0:
        raise EmptyImage("image has no pixels")
    if not np.isfinite(image).all():
        raise ValueError("image contains non-finite values")
    return image


def initialize(image, cfg=None):
    """Initial flows and capacities.

    The percentile strategy puts the source level at the 75th and the sink
    level at the 25th intensity percentile; the constants strategy uses
    ``cfg.init_s`` and ``cfg.init_t``. Flows start at ``p = 0`` and
    ``p_s = p_t = min(C_s, C_t)``, with ``lam = 0.5``.
    """
    cfg = cfg or SegmenterConfig()
    image = _as_image(image)
    if cfg.init_strategy == "percentile":
        s0, t0 = np.percentile(image, [75, 25])
    else:
        s0, t0 = cfg.init_s, cfg.init_t
    caps = CapacityFields.from_levels(image, s0, t0, cfg.prior.normalize_spatial,
                                      C=cfg.spatial_capacity)
    base = np.minimum(caps.C_s, caps.C_t)
    state = FlowState(p_s=base.copy(), p_t=base.copy(), p=np.zeros((2,) + image.shape),
                      lam=np.full(image.shape, 0.5))
    return state, caps


def threshold_mask(lam, threshold=0.5):
    """Binary mask ``lam >= threshold`` (ties go to the object)."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    return (np.asarray(lam) >= threshold).astype(np.uint8)


def energy(lam, caps):
    """Discrete labeling energy: data term plus ``C`` times total variation."""
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape != caps.C_s.shape:
        raise ShapeMismatch(f"label shape {lam.shape} does not match capacities {caps.C_s.shape}")
    data = np.sum((1.0 - lam) * caps.C_s + lam * caps.C_t)
    g = gradient(lam)
    tv = np.sum(np.hypot(g[0], g[1]))
    return float(data + caps.C * tv)


def foreground_mask(mask, image, invert=False):
    """Pick the brighter of ``mask`` and its complement as the foreground.

    Uniform masks are returned unchanged (inverted if requested).
    """
    mask = np.asarray(mask).astype(bool)
    image = np.asarray(image, dtype=np.float64)
    if mask.any() and not mask.all():
        if image[mask].mean() < image[~mask].mean():
            mask = ~mask
    if invert:
        mask = ~mask
    return mask.astype(np.uint8)


def _calibrated_levels(image, lam, caps, source_share, cfg):
    """MRF-weighted region means; returns ``(s, t, new_source_share)``."""
    u_s = np.clip(1.0 - lam, 0.0, 1.0)
    u_t = 1.0 - u_s
    sink_share = 1.0 - source_share
    G_s = mrf_multiplier(u_s, source_share, cfg.prior)
    G_t = mrf_multiplier(u_t, sink_share if cfg.prior.sink_uses_t_level else source_share,
                         cfg.prior)
    share = G_s / (G_s + G_t)
    w_s = u_s * share
    w_t = u_t * (1.0 - share)
    s = float((w_s * image).sum() / w_s.sum()) if w_s.sum() > 0 else caps.s_level
    t = float((w_t * image).sum() / w_t.sum()) if w_t.sum() > 0 else caps.t_level
    return s, t, share


def _update_capacities(image, state, caps, source_share, cfg):
    if cfg.level_update == "calibrated":
        s, t, source_share = _calibrated_levels(image, state.lam, caps, source_share, cfg)
        new = CapacityFields.from_levels(image, s, t, cfg.prior.normalize_spatial,
                                         C=cfg.spatial_capacity)
        return new, source_share
    C_s, s_next, _ = source_capacity_update(image, state.p_s, caps.s_level, cfg.prior)
    C_t, t_next, _ = sink_capacity_update(image, state.p_t, caps.s_level, caps.t_level, cfg.prior)
    C = cfg.spatial_capacity
    if C is None:
        C = spatial_capacity_update(C_s, C_t, cfg.prior.normalize_spatial)
    return CapacityFields(C_s, C_t, float(C), s_next, t_next), source_share


def segment(image, cfg=None):
    """Segment ``image`` into two regions without user-supplied capacities.

    Each outer iteration solves the max-flow problem for the current
    capacities (warm-started from the previous flows) and then re-estimates
    the capacities. The loop stops when neither ``C_s`` nor ``C_t`` moves by
    more than ``outer_tol`` in sup-norm, or after ``max_outer`` iterations.
    """
    cfg = cfg or SegmenterConfig()
    image = _as_image(image)
    state, caps = initialize(image, cfg)
    source_share = np.full(image.shape, 0.5)

    energies, diags, deltas = [], [], []
    outer = 0
    for outer in range(1, cfg.max_outer + 1):
        try:
            state, diag = solve_inner(state, caps, cfg.inner)
        except NumericalDivergence as exc:
            exc.outer_iteration = outer
            raise
        diags.append(diag)
        energies.append(energy(np.clip(state.lam, 0.0, 1.0), caps))
        if not cfg.estimate_capacities:
            deltas.append(0.0)
            break
        new_caps, source_share = _update_capacities(image, state, caps, source_share, cfg)
        with np.errstate(invalid="ignore", over="ignore"):
            delta = float(max(np.abs(new_caps.C_s - caps.C_s).max(),
                              np.abs(new_caps.C_t - caps.C_t).max()))
        if not (np.isfinite(delta) and np.isfinite(new_caps.C)):
            raise NumericalDivergence("capacity update produced non-finite values",
                                      outer_iteration=outer)
        deltas.append(delta)
        caps = new_caps
        if delta <= cfg.outer_tol:
            break

    return SegmentationResult(
        mask=threshold_mask(state.lam, cfg.threshold),
        lam=state.lam,
        capacities=caps,
        energy_history=energies,
        outer_iterations=outer,
        inner_diagnostics=diags,
        capacity_deltas=deltas,
        converged=bool(deltas) and deltas[-1] <= cfg.outer_tol,
        state=state,
    )
