"""Variable flow rate spraying simulator and control library.

The heavy lifting lives in the compiled ``spraysim._core`` extension; this
package re-exports its public surface.
"""

from spraysim._core import *  # noqa: F401,F403
from spraysim._core import __doc__  # noqa: F401

__version__ = "0.1.0"
