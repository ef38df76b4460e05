"""pothole-seg - point-cloud semantic segmentation for road pothole detection."""

try:
    from pothole_seg._version import __version__
except ImportError:  # pragma: no cover - source checkout without setuptools-scm
    __version__ = "0.1.0"

__author__ = "Your Name"
__email__ = "your.email@example.com"
