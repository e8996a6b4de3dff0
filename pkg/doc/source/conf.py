# -*- coding: utf-8 -*-
#
# synprune documentation build configuration file.

import sys
import os

sys.path.insert(0, os.path.abspath(os.path.join('..', '..')))

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.intersphinx',
    'sphinx.ext.viewcode',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'synprune'
copyright = u'2026, the synprune developers'

# The version is kept in the VERSION file at the top of the repository.
with open(os.path.join('..', '..', 'VERSION')) as f:
    release = f.read().strip()
version = '.'.join(release.split('.')[:2])

exclude_patterns = []
pygments_style = 'sphinx'

# -- Options for HTML output ----------------------------------------------

html_theme = 'default'
html_static_path = ['_static']
htmlhelp_basename = 'synprunedoc'

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {
}
latex_documents = [
  ('index', 'synprune.tex', u'synprune Documentation',
   u'the synprune developers', 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    ('index', 'synprune', u'synprune Documentation',
     [u'the synprune developers'], 1)
]

intersphinx_mapping = {'python': ('https://docs.python.org/3', None),
                       'numpy': ('https://numpy.org/doc/stable', None)}
