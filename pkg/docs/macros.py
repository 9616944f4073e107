"""
MkDocs macros to inject dynamic variables into documentation.
Reads version and package metadata from pyproject.toml.
"""

from pathlib import Path

import tomli


def define_env(env):
    """
    Called by mkdocs-macros-plugin.

    Makes ``{{ version }}``, ``{{ project_name }}`` and ``{{ description }}``
    available in every page, plus ``{{ oracle_cap }}`` and ``{{ llr_clip }}`` so the
    docs never drift from the library constants.
    """
    pyproject_path = Path(__file__).parent.parent / "pyproject.toml"
    with open(pyproject_path, "rb") as f:
        poetry = tomli.load(f)["tool"]["poetry"]

    env.variables["version"] = poetry["version"]
    env.variables["project_name"] = poetry["name"]
    env.variables["description"] = poetry["description"]

    from dmala_mimo.models.OracleTables import STATE_SPACE_CAP
    from dmala_mimo.models.SampleList import DEFAULT_LLR_CLIP

    env.variables["oracle_cap"] = STATE_SPACE_CAP
    env.variables["llr_clip"] = DEFAULT_LLR_CLIP
