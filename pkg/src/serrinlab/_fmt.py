"""Number formatting shared by every file writer (17 significant digits)."""

from __future__ import annotations


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def fmt_degree(k: float) -> str:
    k = float(k)
    return str(int(k)) if k.is_integer() else fmt(k)
