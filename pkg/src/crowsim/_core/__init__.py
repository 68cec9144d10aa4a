"""Hot numerical kernels: compiled extension with a pure-Python fallback.

Import :mod:`crowsim._core.backend` for the selected implementation.
"""
