# Configuration file for the Sphinx documentation builder.
#
# This file only contains a selection of the most common options. For a full
# list see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# Pull syncindex version before we mess with the path.
from syncindex import __version__

# -- Path setup --------------------------------------------------------------

import os
import sys
sys.path.insert(1, os.path.abspath('../syncindex'))


# -- Project information -----------------------------------------------------

project = 'syncindex'
copyright = '2024, syncindex developers'
author = 'syncindex developers'

# The full version, including alpha/beta/rc tags
version = __version__
release = version


# -- General configuration ---------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.mathjax",
    "sphinx_rtd_theme",
    "myst_parser",
]

templates_path = ['_templates']

# The master toctree document.
master_doc = 'index'

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']


# -- Options for HTML output -------------------------------------------------

html_theme = "sphinx_rtd_theme"

html_static_path = ['_static']
