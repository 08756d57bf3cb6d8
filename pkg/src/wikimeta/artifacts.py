"""Output formats shared by the CLI and the HTTP service."""

from __future__ import annotations

from typing import Callable, NamedTuple

from . import export, plots
from .errors import InvalidParameter


class Artifact(NamedTuple):
    content_type: str
    extension: str
    render: Callable  # (result, config) -> str


FORMATS = {
    "json": Artifact("application/json", "json", lambda r, c: export.to_json(r)),
    "csv": Artifact("text/csv", "csv", lambda r, c: export.to_csv(r)),
    "r": Artifact("text/plain", "R", lambda r, c: export.to_r_script(r.table, c)),
    "forest_svg": Artifact("image/svg+xml", "forest.svg", lambda r, c: plots.forest_svg(r).body),
    "funnel_svg": Artifact("image/svg+xml", "funnel.svg", lambda r, c: plots.funnel_svg(r).body),
}


def render(result, fmt, config=None):
    """Return ``(content_type, body_bytes)`` for one of :data:`FORMATS`."""
    try:
        artifact = FORMATS[fmt]
    except KeyError:
        raise InvalidParameter(f"unknown format {fmt!r}; expected one of "
                               + ", ".join(FORMATS), format=fmt) from None
    return artifact.content_type, artifact.render(result, config).encode("utf-8")


def summary_line(result):
    f, r = result.fixed, result.random
    return (f"k={f.k} fixed={f.effect:.4f} [{f.ci_low:.4f}, {f.ci_high:.4f}] "
            f"random={r.effect:.4f} [{r.ci_low:.4f}, {r.ci_high:.4f}] "
            f"I2={result.heterogeneity.I2:.1f}%")
