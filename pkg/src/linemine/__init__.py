"""linemine - Line-level code completion mined from revision history."""

##############################################################################
# Python imports.
from importlib.metadata import version

##############################################################################
# Main app information.
__author__ = "linemine contributors"
__copyright__ = "Copyright 2026, linemine contributors"
__credits__ = ["linemine contributors"]
__version__ = version("linemine")
__licence__ = "GPLv3+"

### __init__.py ends here
