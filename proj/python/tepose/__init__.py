"""Python bindings for the temporally embedded pose estimation core."""

try:
    from ._core import *  # noqa: F401,F403  (installed wheel layout)
except ImportError:  # pragma: no cover - cmake build-tree layout
    from _core import *  # noqa: F401,F403
