import os
import sys

# Allow running against the cmake build tree: TEPOSE_MODULE_DIR points at
# the directory holding the compiled _core extension.
_module_dir = os.environ.get("TEPOSE_MODULE_DIR")
if _module_dir:
    sys.path.insert(0, _module_dir)
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))
