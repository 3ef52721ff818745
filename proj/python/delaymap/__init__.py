"""Network path-delay tracking, prediction, and measurement design.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface.
"""

from delaymap._core import *  # noqa: F401,F403
from delaymap._core import __version__  # noqa: F401
