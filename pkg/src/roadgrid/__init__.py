"""Lane-level road grid maps: rasterization, augmentation, RDDF extraction and evaluation."""

__version__ = "0.1.0"
