"""Process-wide kernel instance, selected by RISRSMA_BACKEND at import."""
from __future__ import annotations

from . import backend as _backend

BACKEND = _backend.active_backend()
kernels = _backend.load_kernels(BACKEND)
