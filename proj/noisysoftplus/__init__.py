try:
    from ._nsp import *  # noqa: F401,F403
    from . import _nsp as _core
except ImportError:  # cmake build tree: extension lives next to the package
    from _nsp import *  # noqa: F401,F403
    import _nsp as _core

__doc__ = _core.__doc__
__version__ = "0.1.0"
