# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors

from importlib.metadata import PackageNotFoundError
from importlib.metadata import version as get_version

from sphinx.util import logging

logger = logging.getLogger(__name__)

project = "dvsim"
copyright = "2024 dvsim contributors"
author = "dvsim contributors"

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.autosummary",
    "sphinx.ext.intersphinx",
    "sphinx.ext.napoleon",
    "sphinx.ext.viewcode",
    "sphinx_autodoc_typehints",
    "sphinx_copybutton",
    "sphinx_design",
    "myst_parser",
]

try:
    import sciline.sphinxext.domain_types  # noqa: F401

    extensions.append("sciline.sphinxext.domain_types")
    suppress_warnings = ["config.cache"]
except ModuleNotFoundError:
    pass

myst_enable_extensions = ["colon_fence", "deflist", "fieldlist"]
myst_heading_anchors = 3

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "scipp": ("https://scipp.github.io/", None),
    "sciline": ("https://scipp.github.io/sciline/", None),
    "pydantic": ("https://docs.pydantic.dev/latest/", None),
    "pandas": ("https://pandas.pydata.org/docs/", None),
}

autosummary_generate = True

napoleon_google_docstring = False
napoleon_numpy_docstring = True
napoleon_use_param = True
napoleon_use_rtype = False
napoleon_preprocess_types = True
napoleon_type_aliases = {"ndarray": "~numpy.ndarray"}
typehints_defaults = "comma"
typehints_use_rtype = False

# Domain types are NewTypes of the dvsim package.
sciline_domain_types_prefix = "dvsim"
sciline_domain_types_aliases = {
    "scipp._scipp.core.DataArray": "scipp.DataArray",
    "scipp._scipp.core.Variable": "scipp.Variable",
}

source_suffix = [".rst", ".md"]
master_doc = "index"
language = "en"
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]
warning_is_error = True

try:
    release = get_version("dvsim")
    version = ".".join(release.split(".")[:3])
except PackageNotFoundError:
    logger.info("Could not determine the dvsim version, using a dummy version.")
    release = version = "0.0.0-dev"

html_theme = "pydata_sphinx_theme"
html_title = "dvsim"
html_show_sourcelink = True
html_theme_options = {
    "primary_sidebar_end": ["edit-this-page", "sourcelink"],
    "secondary_sidebar_items": [],
    "navbar_persistent": ["search-button"],
    "show_nav_level": 1,
    "icon_links": [
        {
            "name": "GitHub",
            "url": "https://github.com/dvsim/dvsim",
            "icon": "fa-brands fa-github",
            "type": "fontawesome",
        },
    ],
}
html_context = {"doc_path": "docs"}
html_sidebars = {"**": ["sidebar-nav-bs", "page-toc"]}
