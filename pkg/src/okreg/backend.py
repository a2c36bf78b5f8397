"""Selects the kernel-evaluation core at import time.

The compiled extension is preferred; the NumPy fallback gives identical
results.  Set ``OKREG_BACKEND=python`` to force the fallback or
``OKREG_BACKEND=compiled`` to fail loudly when the extension is missing.
"""

import os

_choice = os.environ.get("OKREG_BACKEND", "").strip().lower()

if _choice == "python":
    from . import _pykern as impl

    COMPILED = False
else:
    try:
        from . import _ckern as impl  # type: ignore[no-redef]

        COMPILED = True
    except ImportError:
        if _choice == "compiled":
            raise
        from . import _pykern as impl  # type: ignore[no-redef]

        COMPILED = False

pair = impl.pair
cross = impl.cross
gram = impl.gram

SOB01 = 1
FERMI = 2
SOBR = 3
TRIANGULAR = 4
CONSTANT = 5
ZERO = 6
