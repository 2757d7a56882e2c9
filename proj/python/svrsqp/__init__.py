from ._svrsqp import *  # noqa: F401,F403
from ._svrsqp import __version__  # noqa: F401
