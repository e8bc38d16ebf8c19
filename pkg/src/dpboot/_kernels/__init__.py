"""Kernel backend selection.

The hot resampling loops have two implementations: a Cython extension
(`_ckern`, built by setup.py) and a numpy fallback (`pykern`). The compiled
one is used when importable; set DPBOOT_KERNELS=py or DPBOOT_KERNELS=c to
force a backend. `benchmarks/bench_kernels.py` compares the two.
"""

import os

from . import pykern

try:
    from . import _ckern
except ImportError:
    _ckern = None

_forced = os.environ.get("DPBOOT_KERNELS", "").strip().lower()
if _forced in ("py", "python"):
    _impl = pykern
elif _forced in ("c", "cy", "cython"):
    if _ckern is None:
        raise ImportError(
            "DPBOOT_KERNELS requested the compiled backend but dpboot._kernels._ckern "
            "is not built; run `pip install -e .` or `python setup.py build_ext --inplace`"
        )
    _impl = _ckern
else:
    _impl = _ckern if _ckern is not None else pykern

BACKEND = "cython" if _impl is not pykern else "python"

u64_block = _impl.u64_block
uniform_block = _impl.uniform_block
index_block = _impl.index_block
child_uniform_block = _impl.child_uniform_block
resample_means = _impl.resample_means
resample_medians = _impl.resample_medians
resample_privmedians = _impl.resample_privmedians
