import os
import sys

# allow running the suite from a source checkout without installing
_SRC = os.path.join(os.path.dirname(__file__), "..", "src")
try:
    import mhdlab  # noqa: F401
except ImportError:
    sys.path.insert(0, os.path.abspath(_SRC))
