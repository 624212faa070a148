"""Write the generated sections of the ``*.in`` files from ``pyproject.toml``.

Run through ``tox -e deps``, which then pins them with pip-compile-multi.
"""

import sys
from argparse import ArgumentParser
from pathlib import Path

import tomli

SEPARATOR = """
# --- END OF CUSTOM SECTION ---
# The following was generated by 'tox -e deps', DO NOT EDIT MANUALLY!
"""

SCIPP_NIGHTLY = (
    "https://github.com/scipp/scipp/releases/download/nightly/scipp-nightly"
)
WHEEL_PLATFORM = "manylinux_2_17_x86_64.manylinux2014_x86_64.whl"


def _clean(requirements: list[str]) -> list[str]:
    return [req.strip().strip('"') for req in requirements]


def read_requirements(pyproject: Path) -> tuple[list[str], list[str]]:
    """Return the runtime and the test requirements of the project."""
    with pyproject.open("rb") as f:
        project = tomli.load(f)["project"]
    runtime = project.get("dependencies")
    if runtime is None:
        raise RuntimeError(f"No dependencies found in {pyproject}")
    test = project.get("optional-dependencies", {}).get("test", [])
    return _clean(runtime), _clean(test)


def write_generated(name: str, requirements: list[str]) -> None:
    """Replace the generated section of ``<name>.in``, keeping the custom part."""
    path = Path(f"{name}.in")
    custom = ""
    if path.exists():
        custom, *generated = path.read_text().split(SEPARATOR)
        if not generated:
            custom = ""
    path.write_text(custom + SEPARATOR + "\n".join(requirements) + "\n")


def nightly_requirement(package: str) -> str:
    """Return a requirement installing ``package`` from its main branch."""
    org, _, repo = package.rpartition("/")
    org = org or "scipp"
    if repo == "scipp":
        tag = f"cp{sys.version_info.major}{sys.version_info.minor}"
        return f"scipp @ {SCIPP_NIGHTLY}-{tag}-{tag}-{WHEEL_PLATFORM}"
    return f"{repo} @ git+https://github.com/{org}/{repo}@main"


def main() -> None:
    parser = ArgumentParser(description=__doc__)
    parser.add_argument(
        "--nightly",
        default="",
        help="Comma separated packages to install from their main branch in the "
        "nightly environment.",
    )
    args = parser.parse_args()
    runtime, test = read_requirements(Path("..") / "pyproject.toml")
    write_generated("base", runtime)
    write_generated("basetest", test)

    nightly = [name for name in args.nightly.split(",") if name]
    names = tuple(name.rpartition("/")[2] for name in nightly)
    pinned = [req for req in runtime if not req.startswith(names)] if names else runtime
    write_generated("nightly", pinned + [nightly_requirement(n) for n in nightly])


if __name__ == "__main__":
    main()
