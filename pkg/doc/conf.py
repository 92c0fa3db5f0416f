# doubleritz documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import sys, os

sys.path.insert(0, os.path.abspath(os.path.join(os.pardir, "src")))

import doubleritz

# -- General configuration ------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
]

templates_path = ["_templates"]

source_suffix = ".rst"

master_doc = "index"

project = "doubleritz"
copyright = "2024, The doubleritz Developers"

version = ".".join(doubleritz.__version__.split(".")[:2])
release = doubleritz.__version__

exclude_patterns = ["_build"]

pygments_style = "sphinx"

# -- Options for HTML output ----------------------------------------------

html_theme = "default"

htmlhelp_basename = "doubleritzdoc"

# -- Options for manual page output ---------------------------------------

man_pages = [
    ("index", "doubleritz", "doubleritz Documentation", ["The doubleritz Developers"], 1)
]

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable", None),
}
