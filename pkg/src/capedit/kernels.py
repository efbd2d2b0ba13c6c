"""Kernel backend selection and token-level helpers.

The compiled extension is used when importable; set CAPEDIT_PURE_PYTHON=1 to
force the pure-Python fallback. The two backends are contract-identical and
parity-tested.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

if os.environ.get("CAPEDIT_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]

        BACKEND = "c"
    except ImportError:
        from . import _kernels_py as _impl  # type: ignore[no-redef]

        BACKEND = "python"

OP_KEEP = 0
OP_DELETE = 1
OP_ADD = 2


def backend() -> str:
    """Name of the active backend: "c" or "python"."""
    return BACKEND


def encode_pair(a_tokens: Sequence[str], b_tokens: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """Map two token sequences onto a shared int32 vocabulary."""
    vocab: dict[str, int] = {}

    def enc(tokens: Sequence[str]) -> np.ndarray:
        return np.array([vocab.setdefault(t, len(vocab)) for t in tokens], dtype=np.int32)

    return enc(a_tokens), enc(b_tokens)


def lcs_tokens(a_tokens: Sequence[str], b_tokens: Sequence[str]) -> int:
    ea, eb = encode_pair(a_tokens, b_tokens)
    return int(_impl.lcs_len(ea, eb))


def edit_distance_tokens(a_tokens: Sequence[str], b_tokens: Sequence[str]) -> int:
    ea, eb = encode_pair(a_tokens, b_tokens)
    return int(_impl.edit_distance(ea, eb))


def op_codes(a_tokens: Sequence[str], b_tokens: Sequence[str]) -> bytes:
    """Canonical minimal op-code string (OP_KEEP/OP_DELETE/OP_ADD bytes)."""
    ea, eb = encode_pair(a_tokens, b_tokens)
    return bytes(_impl.edit_ops(ea, eb))


def lcs_ids(a: np.ndarray, b: np.ndarray) -> int:
    return int(_impl.lcs_len(a, b))


def edit_distance_ids(a: np.ndarray, b: np.ndarray) -> int:
    return int(_impl.edit_distance(a, b))


def op_codes_ids(a: np.ndarray, b: np.ndarray) -> bytes:
    return bytes(_impl.edit_ops(a, b))


def edit_distance_block(flat_a, off_a, flat_b, off_b, idx_a, idx_b, out) -> None:
    """Batch edit_distance over indexed pairs of packed sequences."""
    _impl.edit_distance_block(flat_a, off_a, flat_b, off_b, idx_a, idx_b, out)


def edit_steps_block(flat_a, off_a, flat_b, off_b, idx_a, idx_b, out) -> None:
    """Batch non-KEEP op count, routed through the canonical ops walk."""
    _impl.edit_steps_block(flat_a, off_a, flat_b, off_b, idx_a, idx_b, out)
