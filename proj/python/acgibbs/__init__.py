"""Blocked Gibbs sampling for soft-thresholded sparse Bayesian models."""

try:
    from ._acgibbs import *  # noqa: F401,F403
    from ._acgibbs import __doc__  # noqa: F401
except ImportError:  # development layout: extension built next to the package
    from _acgibbs import *  # noqa: F401,F403
