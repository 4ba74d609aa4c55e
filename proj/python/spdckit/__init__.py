"""SPDC photon-pair source design toolkit.

Python bindings over the C++ core: dispersion, phase matching, SPDC
spectra, joint spectral amplitudes, Sagnac-source states and quantum
state tomography.
"""

from pathlib import Path

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401


def data_dir() -> Path:
    """Directory holding the bundled crystal database."""
    return Path(__file__).resolve().parent / "data"


def crystal_path(name: str) -> Path:
    """Path of a bundled crystal file, e.g. crystal_path('ktp')."""
    path = data_dir() / "crystals" / f"{name.lower()}.crystal"
    if not path.exists():
        raise FileNotFoundError(f"no bundled crystal named {name!r}")
    return path
