"""Adaptive-restart accelerated gradient schemes and their analysis tools."""

from ._kernels import BACKEND
from .dynamics import *  # noqa: F401,F403
from .exceptions import InputError, NumericError, RestartKitError
from .experiments import *  # noqa: F401,F403
from .momentum import *  # noqa: F401,F403
from .oracles import *  # noqa: F401,F403
from .restart import *  # noqa: F401,F403
from .solvers import *  # noqa: F401,F403

__version__ = "0.1.0"
