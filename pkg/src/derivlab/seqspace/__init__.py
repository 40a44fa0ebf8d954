"""Sequence-space norm engines."""

from .dual import DualNormResult, dual_norm, dual_norm_dense
from .spaces import (
    SpaceDescriptor,
    c0,
    dual_of,
    format_space,
    lp,
    norm,
    norm_dense,
    norms_dense,
    parse_space,
    tsirelson,
    tsirelson2,
    weighted_l2,
)
from .tsirelson import NormingFunctionalSet, norming_functionals
from .vector import SeqVector
