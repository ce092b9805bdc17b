"""Numerics for Gabor frames: STFT and Wigner transforms, modulation-space
norms, Weyl quantization, frame bounds and their dilation behaviour."""

__version__ = "0.1.0"

from .tfcore import (  # noqa: E402
    GridSpec,
    PhaseSpaceFunction,
    PhaseSpaceGrid,
    SampledSignal,
    TFPoint,
    Window,
    istft,
    make_window,
    stft,
    wigner,
)
from .gabor import AtomSet, FrameBounds, frame_bounds, frame_operator, frame_symbol  # noqa: E402
from .weyl import OperatorMatrix, spectral_edges, weyl_quantize  # noqa: E402
from .deform import SweepConfig, SweepResult, holder_fit, sweep  # noqa: E402

__all__ = [
    "AtomSet", "FrameBounds", "GridSpec", "OperatorMatrix", "PhaseSpaceFunction",
    "PhaseSpaceGrid", "SampledSignal", "SweepConfig", "SweepResult", "TFPoint", "Window",
    "frame_bounds", "frame_operator", "frame_symbol", "holder_fit", "istft", "make_window",
    "spectral_edges", "stft", "sweep", "weyl_quantize", "wigner",
]
