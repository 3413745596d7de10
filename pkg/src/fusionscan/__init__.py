"""Search filters for reduced fusion systems over finite 2-groups.

Groups are dense Cayley tables; see :mod:`fusionscan.groups`.  The two
decision procedures live in :mod:`fusionscan.criteria`.
"""

from __future__ import annotations

from .criteria import Caps, potentially_critical, search_verdict
from .fixtures import fixture
from .groups import Group
from .named import construct_named

__all__ = ["Caps", "Group", "construct_named", "fixture", "potentially_critical", "search_verdict"]
__version__ = "0.1.0"
