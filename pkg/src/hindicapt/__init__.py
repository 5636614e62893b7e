"""Hindi computer-assisted pronunciation training.

Devanagari G2P, synthetic mispronunciation corpora with ground-truth error
vectors, alignment-based word-level error detection with severity grading,
and per-phoneme articulatory feedback with sagittal tongue diagrams.
"""

from .errors import CaptError

__version__ = "0.1.0"

__all__ = ["CaptError", "__version__"]
