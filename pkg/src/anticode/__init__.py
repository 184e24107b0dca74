"""Forbidden intersections for codes in [m]^n: exact tools and numeric checks."""
from .codes import (
    Code, Shape, Restriction, Subcube, BallSpec, Isomorphism, ShapeError,
    rank, unrank, agreement, ball, ball_size, best_ball, restrict, subcode,
    dictator, junta_from, junta_support, apply_isomorphism, is_isomorphic_small,
    is_t_intersecting, is_s_avoiding, measure, measure_under,
)

__version__ = "0.1.0"
