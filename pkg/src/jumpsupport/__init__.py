"""Support of the law of SDEs driven by jump noise.

Lévy measure analysis (:mod:`levy`), Euler simulation of the jump SDE and
its truncated and tilted variants (:mod:`sde`), skeleton paths
(:mod:`skeleton`), path distances (:mod:`metric`), Poisson intensity tilts
(:mod:`tilt`) and Monte-Carlo support checks (:mod:`support`).
"""
from .errors import *  # noqa: F401,F403
from .kernels import BACKEND

__version__ = "0.1.0"
