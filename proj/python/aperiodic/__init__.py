from aperiodic._core import *  # noqa: F401,F403
from aperiodic._core import __doc__  # noqa: F401

__version__ = "0.1.0"
