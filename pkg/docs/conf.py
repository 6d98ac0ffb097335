"""Sphinx configuration for the moneyflow documentation.

API pages come from the module docstrings; the guides are Markdown files
rendered through MyST.
"""

import os
import re
import sys

# -- Paths ---------------------------------------------------------------------

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
sys.path.insert(0, ROOT)


def _read_version() -> str:
    with open(os.path.join(ROOT, "pyproject.toml"), encoding="utf-8") as f:
        match = re.search(r'^version\s*=\s*"([^"]+)"', f.read(), re.MULTILINE)
    return match.group(1) if match else "0.0.0"


# -- Project information -------------------------------------------------------

project = "moneyflow"
copyright = "2026, moneyflow contributors"
author = "moneyflow contributors"
release = _read_version()
version = ".".join(release.split(".")[:2])

# -- General configuration -----------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.viewcode",
    "sphinx.ext.napoleon",  # Google-style docstrings
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",  # equations in the guides
    "myst_parser",
]

exclude_patterns = ["_build"]

# -- HTML output ---------------------------------------------------------------

html_theme = "sphinx_rtd_theme"

# -- Extension configuration ---------------------------------------------------

napoleon_google_docstring = True
napoleon_numpy_docstring = False
napoleon_include_init_with_doc = False
napoleon_use_param = True
napoleon_use_rtype = True
napoleon_attr_annotations = True

autodoc_default_options = {
    "members": True,
    "undoc-members": True,
    "show-inheritance": True,
}
autodoc_member_order = "bysource"
autodoc_typehints = "description"
# Docs build without the compiled CSV wheel installed.
autodoc_mock_imports = ["rapcsv", "aiofiles"]

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/", None),
}

myst_enable_extensions = [
    "colon_fence",
    "deflist",
    "dollarmath",
]
myst_heading_anchors = 3
