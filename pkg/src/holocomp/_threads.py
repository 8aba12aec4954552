"""Pin BLAS thread counts before numpy loads.

Reports must be byte-identical across reruns, so the parallel reduction
order inside matrix products has to be fixed.  HOLOCOMP_THREADS overrides
the default cap of 4; explicit BLAS env vars win over the default but not
over HOLOCOMP_THREADS.
"""

import os

_BLAS_VARS = (
    "OPENBLAS_NUM_THREADS",
    "OMP_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


def _pin():
    requested = os.environ.get("HOLOCOMP_THREADS", "").strip()
    if requested.isdigit() and int(requested) > 0:
        for var in _BLAS_VARS:
            os.environ[var] = requested
        return
    for var in _BLAS_VARS:
        os.environ.setdefault(var, "4")


_pin()
