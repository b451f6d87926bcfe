"""Byzantine-resilient distributed coordinate descent (ByRDiE) simulator."""

from byrdie._core import *  # noqa: F401,F403
from byrdie._core import __version__  # noqa: F401
