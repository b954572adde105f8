"""Backend selection for the hot loops.

The compiled extension ``_ckernels`` is used when importable; otherwise (or when
``SPINGAS_PURE_PYTHON`` is set to a non-empty value other than ``0``) the numpy
reference implementation in ``_pykernels`` is used. Both expose the same functions.
"""

import os

from . import _pykernels as python_backend

try:
    from . import _ckernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and os.environ.get("SPINGAS_PURE_PYTHON", "0") in ("", "0"):
    backend = compiled_backend
    BACKEND = "compiled"
else:
    backend = python_backend
    BACKEND = "python"

apply_eig_block = backend.apply_eig_block
ising_apply_pair = backend.ising_apply_pair
lattice_walk = backend.lattice_walk
lattice_xx_run = backend.lattice_xx_run
lattice_ising_run = backend.lattice_ising_run
billiard_run = backend.billiard_run
