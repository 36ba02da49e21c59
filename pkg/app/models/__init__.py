"""In-memory containers for sampled realizations."""

from app.models.directed_sample import DirectedSample
from app.models.realization import BallBatch, BallRealization
from app.models.topology import SubtreeTopology

__all__ = [
    "SubtreeTopology",
    "BallBatch",
    "BallRealization",
    "DirectedSample",
]
