"""Backend-switchable numeric kernels.

Two interchangeable implementations of the per-sample hot loops live here:

* :mod:`symshadows._kernels.numpy_impl` -- vectorized pure-NumPy reference.
* :mod:`symshadows._kernels.numba_impl` -- ``@njit``-compiled loops.

Both expose the same function names and signatures; see
:mod:`symshadows.backend` for selection rules.
"""
