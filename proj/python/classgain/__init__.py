"""Blind signal classification by compression gain."""

try:
    from ._classgain import *  # noqa: F401,F403
    from ._classgain import __version__  # noqa: F401
except ImportError:  # build-tree layout: extension lives next to the package
    from _classgain import *  # noqa: F401,F403
    from _classgain import __version__  # noqa: F401
