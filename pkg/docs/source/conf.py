# Sphinx configuration of the tamlab documentation.
# https://www.sphinx-doc.org/en/master/usage/configuration.html
import os
import sys

sys.path.insert(0, os.path.abspath('../../src'))


# -- Project information -----------------------------------------------------

project = 'tamlab'
copyright = '2026, tamlab developers'
release = '0.3.1'


# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.napoleon',
    'sphinx.ext.mathjax',
]

templates_path = ['_templates']
exclude_patterns = ['_build']

# the numerics tape and the benchmark builders import numpy at module level
autodoc_mock_imports = [
    'numpy',
    'pandas',
    'matplotlib',
    'tqdm',
]
autodoc_member_order = 'bysource'

napoleon_google_docstring = True
napoleon_numpy_docstring = False
napoleon_include_init_with_doc = False

intersphinx_mapping = {
    'python': ('https://docs.python.org/3/', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'pandas': ('https://pandas.pydata.org/docs/', None),
}


# -- Options for HTML output -------------------------------------------------

html_theme = 'bizstyle'
html_show_sourcelink = False
html_static_path = []
