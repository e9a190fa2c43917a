"""Compiled kernels (optional); see :mod:`regionscope.kernels` for the dispatcher."""
