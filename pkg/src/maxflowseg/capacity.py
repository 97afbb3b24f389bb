"""MAP updates of the flow capacities under a mean-filtering MRF prior.

Every capacity is an absolute difference between the image and a level
field: ``C_s = |I - s|`` and ``C_t = |I - t|``. The level fields are
refreshed from the current flows through the multiplier

    G(x) = exp( beta / (2 |N(x)|) * sum_{y in N(x)} (flow(y) + level(y)) )

where ``N(x)`` is the clipped square window of half-width ``radius``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .grid import box_neighborhood_sum, neighborhood_count


@dataclass(frozen=True)
class PriorConfig:
    """Parameters of the MRF prior over the level fields.

    ``sink_uses_t_level=False`` sums the *source* level inside the sink
    multiplier (the default); set it to True for the symmetric variant
    that uses the sink level.
    """

    beta: float = 5.0
    radius: int = 2
    sink_uses_t_level: bool = False
    exponent_cap: float = 50.0
    normalize_spatial: bool = True

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.radius < 0:
            raise ValueError(f"radius must be >= 0, got {self.radius}")
        if not self.exponent_cap > 0:
            raise ValueError(f"exponent_cap must be > 0, got {self.exponent_cap}")


@dataclass
class CapacityFields:
    C_s: np.ndarray
    C_t: np.ndarray
    C: float
    s_level: np.ndarray
    t_level: np.ndarray

    @classmethod
    def from_levels(cls, image, s_level, t_level, normalize=True, C=None):
        """Build capacities ``|I - s|``, ``|I - t|``; ``C`` from conservation unless given."""
        image = np.asarray(image, dtype=np.float64)
        s_level = np.broadcast_to(np.asarray(s_level, dtype=np.float64), image.shape).copy()
        t_level = np.broadcast_to(np.asarray(t_level, dtype=np.float64), image.shape).copy()
        C_s = np.abs(image - s_level)
        C_t = np.abs(image - t_level)
        if C is None:
            C = spatial_capacity_update(C_s, C_t, normalize)
        elif C < 0:
            raise ValueError(f"spatial capacity must be >= 0, got {C}")
        return cls(C_s=C_s, C_t=C_t, C=float(C), s_level=s_level, t_level=t_level)

    def scaled(self, factor):
        """Capacities multiplied by a positive constant (levels are kept)."""
        if not factor > 0:
            raise ValueError("factor must be positive")
        return CapacityFields(self.C_s * factor, self.C_t * factor, self.C * factor,
                              self.s_level, self.t_level)


def _same_shape(*arrays):
    shapes = {np.shape(a) for a in arrays}
    if len(shapes) != 1:
        raise ShapeMismatch(f"fields have different shapes: {sorted(shapes)}")


def mrf_multiplier(flow, level, cfg):
    """Mean-filtered exponential multiplier ``G`` over ``flow + level``.

    The exponent is clipped to ``+-cfg.exponent_cap`` before ``exp``.
    """
    flow = np.asarray(flow, dtype=np.float64)
    level = np.asarray(level, dtype=np.float64)
    _same_shape(flow, level)
    count = neighborhood_count(flow.shape, cfg.radius)
    window = box_neighborhood_sum(flow + level, cfg.radius)
    exponent = cfg.beta / (2.0 * count) * window
    return np.exp(np.clip(exponent, -cfg.exponent_cap, cfg.exponent_cap))


def source_capacity_update(image, p_s, s_level, cfg):
    """Refresh the source level and capacity.

    Returns
    -------
    (C_s, s_next, G_s)
        ``s_next = G_s + beta * (1 - p_s)`` and ``C_s = |I - s_next|``.
    """
    image = np.asarray(image, dtype=np.float64)
    _same_shape(image, p_s, s_level)
    G_s = mrf_multiplier(p_s, s_level, cfg)
    s_next = G_s + cfg.beta * (1.0 - np.asarray(p_s, dtype=np.float64))
    return np.abs(image - s_next), s_next, G_s


def sink_capacity_update(image, p_t, s_level, t_level, cfg):
    """Refresh the sink level and capacity.

    Returns
    -------
    (C_t, t_next, G_t)
        ``t_next = G_t + beta * p_t`` and ``C_t = |I - t_next|``.
    """
    image = np.asarray(image, dtype=np.float64)
    _same_shape(image, p_t, s_level, t_level)
    level = t_level if cfg.sink_uses_t_level else s_level
    G_t = mrf_multiplier(p_t, level, cfg)
    t_next = G_t + cfg.beta * np.asarray(p_t, dtype=np.float64)
    return np.abs(image - t_next), t_next, G_t


def spatial_capacity_update(C_s, C_t, normalize=True):
    """Spatial capacity from flow conservation: ``|sum C_s - sum C_t|``.

    With ``normalize`` the value is divided by the pixel count so that the
    regularisation weight does not grow with image size.
    """
    C_s = np.asarray(C_s, dtype=np.float64)
    C_t = np.asarray(C_t, dtype=np.float64)
    _same_shape(C_s, C_t)
    raw = abs(float(C_s.sum()) - float(C_t.sum()))
    return raw / C_s.size if normalize else raw
