"""CSV, run-manifest and plot writers for experiment results."""

import csv
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from rtrimimo.config import RTRIMimoConfig
from rtrimimo.exceptions import OutputError
from rtrimimo.models import ExperimentSpec

logger = logging.getLogger(__name__)

MANIFEST_PREFIX = "# manifest: "


def format_value(value: Any, significant_digits: int = 12) -> str:
    """Render one CSV cell; floats use a fixed number of significant digits."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.{significant_digits}g}"
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def manifest_name(kind: str) -> str:
    return f"{kind}.manifest.json"


def write_csv(
    path: Path,
    columns: Sequence[str],
    rows: List[Dict[str, Any]],
    manifest: str,
    significant_digits: int = 12,
) -> Path:
    """
    Write result rows as UTF-8 CSV.

    The first line is a ``# manifest:`` comment naming the run manifest,
    followed by the header row. Output depends only on the rows, so equal
    results give byte-identical files.

    Raises:
        OutputError: If the file cannot be written
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(f"{MANIFEST_PREFIX}{manifest}\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_value(row[column], significant_digits) for column in columns])
    except OSError as e:
        raise OutputError(str(path), e) from e

    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def write_manifest(
    path: Path,
    spec: ExperimentSpec,
    settings: RTRIMimoConfig,
    version: str,
    passed: Optional[bool] = None,
) -> Path:
    """Write the JSON run manifest (spec, seed, library version, settings)."""
    manifest: Dict[str, Any] = {
        "kind": spec.kind.value,
        "seed": spec.seed,
        "version": version,
        "spec": spec.model_dump(mode="json"),
        "settings": settings.to_dict(),
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    if passed is not None:
        manifest["passed"] = passed

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise OutputError(str(path), e) from e

    logger.info(f"Wrote manifest {path}")
    return path


def write_plot(
    path: Path,
    rows: List[Dict[str, Any]],
    y_columns: Sequence[str],
    title: str,
    log_y: bool = False,
) -> Path:
    """
    Write an SVG line plot of ``y_columns`` against snr_db, one line per delta.

    Raises:
        OutputError: If matplotlib is missing or the file cannot be written
    """
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as e:
        raise OutputError(
            str(path), ImportError("plotting requires matplotlib; install with: pip install rtrimimo[plot]")
        ) from e

    deltas = sorted({row["delta"] for row in rows})
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    try:
        for column in y_columns:
            for delta in deltas:
                points = [row for row in rows if row["delta"] == delta]
                label = f"delta={delta:g}" if len(y_columns) == 1 else f"{column}, delta={delta:g}"
                ax.plot(
                    [row["snr_db"] for row in points],
                    [row[column] for row in points],
                    marker="o",
                    label=label,
                )
        if log_y:
            ax.set_yscale("log")
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel(y_columns[0] if len(y_columns) == 1 else "value")
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend()
        path.parent.mkdir(parents=True, exist_ok=True)
        # fixed hash salt keeps SVG ids stable between runs
        matplotlib.rcParams["svg.hashsalt"] = "rtrimimo"
        fig.savefig(path, format="svg", bbox_inches="tight")
    except OSError as e:
        raise OutputError(str(path), e) from e
    finally:
        plt.close(fig)

    logger.info(f"Wrote plot {path}")
    return path
