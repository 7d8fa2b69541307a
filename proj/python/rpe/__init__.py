"""Knowledge base completion with relation path embeddings.

The heavy lifting lives in the compiled `_rpe` extension; this package
re-exports its surface.
"""

from ._rpe import *  # noqa: F401,F403
from ._rpe import __version__  # noqa: F401
