"""Proof objects, kernel checkers, derived rules and the file formats."""

from .core import *  # noqa: F401,F403
from .core import __all__ as _core_all
from .fileformat import *  # noqa: F401,F403
from .fileformat import __all__ as _ff_all
from .rules import *  # noqa: F401,F403
from .rules import __all__ as _rules_all

__all__ = [*_core_all, *_rules_all, *_ff_all]
