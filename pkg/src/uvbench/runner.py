"""Corpus execution: tag filtering, isolated parallel measurement, report output."""

from __future__ import annotations

import logging
import multiprocessing as mp
import os
import statistics
import time
from collections import deque
from dataclasses import dataclass, field
from multiprocessing.connection import wait
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .errors import BenchmarkError, OutputIOError
from .io import (ManifestEntry, atomic_write, format_cell, read_manifest, read_obj,
                 read_report_csv, write_report_csv, write_triangle_csv)
from .jacobian import triangle_measures
from .mesh import TriMesh, normalize_areas
from .metrics import MeshMetrics, compute_metrics, select_interesting
from .plots import write_histogram_svg, write_scatter_svg
from .topology import TagSet, TopologyInfo, compute_topology, evaluate_tags

logger = logging.getLogger(__name__)

TAG_NAMES = ("disk", "closed", "manifold", "small")

# metric column -> use log-scale bins
PLOTTED_METRICS = {
    "max_area_distortion": True,
    "avg_area_discrepancy": False,
    "min_singular_value": True,
    "max_singular_value": True,
    "pct_flipped": False,
    "max_angle_distortion": True,
    "avg_angle_discrepancy": False,
    "symmetric_dirichlet": True,
    "resolution": True,
    "artist_correlation": False,
    "cut_length": False,
    "artist_cut_length_match": False,
}


class NotParameterized(BenchmarkError):
    pass


def default_workers() -> int:
    env = os.environ.get("UVBENCH_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class TagFilter:
    """Per-tag requirement: True = require, False = forbid, None = ignore."""

    disk: bool | None = None
    closed: bool | None = None
    manifold: bool | None = None
    small: bool | None = None

    @property
    def active(self) -> bool:
        return any(getattr(self, t) is not None for t in TAG_NAMES)

    def accepts(self, tags: TagSet) -> bool:
        for name in TAG_NAMES:
            want = getattr(self, name)
            if want is not None and getattr(tags, name) != want:
                return False
        return True


def filter_by_tags(entries: Sequence, tags: Sequence[TagSet], filters: TagFilter) -> list:
    """Entries whose tags satisfy every require and forbid flag."""
    return [e for e, t in zip(entries, tags) if filters.accepts(t)]


@dataclass
class RunConfig:
    manifest: Path
    out_dir: Path
    filters: TagFilter = field(default_factory=TagFilter)
    workers: int = 1
    timeout: float = 300.0
    tiny_area: float = 1e-8
    interesting: tuple[str, ...] = ()
    eps_uv: float = 1e-6
    bins: int = 20

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not self.timeout > 0:
            raise ValueError("timeout must be > 0")


@dataclass(eq=False)
class MeshReport:
    """One report row: identity plus either metrics or a failure reason."""

    mesh_id: str
    n_vertices: int | None = None
    n_faces: int | None = None
    tags: TagSet | None = None
    topology: TopologyInfo | None = None
    metrics: MeshMetrics | None = None
    failure: str | None = None
    reference_metrics: MeshMetrics | None = None
    sigmas: tuple[np.ndarray, np.ndarray] | None = None  # candidate, reference

    def __post_init__(self):
        if (self.metrics is None) == (self.failure is None):
            raise ValueError("a report carries exactly one of metrics and failure")

    @property
    def ok(self) -> bool:
        return self.metrics is not None

    def as_cells(self, reference: bool = False) -> dict[str, Any]:
        cells: dict[str, Any] = {"filename": self.mesh_id, "n_vertices": self.n_vertices,
                                 "n_faces": self.n_faces}
        metrics = self.reference_metrics if reference else self.metrics
        if self.metrics is None or metrics is None:
            return cells
        if self.tags is not None:
            cells.update({f"tag_{t}": getattr(self.tags, t) for t in TAG_NAMES})
        if self.topology is not None:
            cells["genus"] = self.topology.genus
            cells["n_boundary_loops"] = self.topology.n_boundary_loops
            cells["pct_boundary_faces"] = 100.0 * self.topology.boundary_face_fraction
        cells.update(vars(metrics))
        return cells


class _ReferenceView:
    def __init__(self, report: MeshReport):
        self.report = report

    def as_cells(self):
        return self.report.as_cells(reference=True)


def _sigma_pairs(mesh: TriMesh, tiny_area: float) -> np.ndarray:
    m = triangle_measures(normalize_areas(mesh, tiny_area)[0])
    return np.column_stack([m.sigma1, m.sigma2])


def measure_entry(entry: ManifestEntry, config: RunConfig,
                  notify: Callable[[dict], None] = lambda info: None) -> MeshReport | None:
    """Measure one manifest entry; None when the tag filter rejects it.

    Raises on any failure; ``notify`` receives identity fields as soon as they
    are known so an empty row can still report them.
    """
    ref = read_obj(entry.reference_path)
    notify({"n_vertices": ref.n_vertices, "n_faces": ref.n_faces})
    topology = compute_topology(ref)
    tags = evaluate_tags(topology, ref.n_faces)
    notify({"tags": tags})
    if not config.filters.accepts(tags):
        return None
    if entry.candidate_path is None or not entry.candidate_path.is_file():
        raise NotParameterized("no parameterization provided")
    cand = read_obj(entry.candidate_path)
    if cand.uv is None:
        raise NotParameterized("candidate has no texture coordinates")
    if not np.all(np.isfinite(cand.uv)):
        raise BenchmarkError("NaN texture coordinates")
    metrics = compute_metrics(cand, ref, entry.variant, config.tiny_area, config.eps_uv)

    reference_metrics = None
    sigmas = None
    if ref.uv is not None:
        try:
            reference_metrics = compute_metrics(ref, ref, entry.variant, config.tiny_area,
                                                config.eps_uv)
        except BenchmarkError as exc:
            logger.info("%s: reference map not measurable: %s", entry.mesh_id, exc)
        if reference_metrics is not None and not metrics.remeshed:
            sigmas = (_sigma_pairs(cand, config.tiny_area), _sigma_pairs(ref, config.tiny_area))
    return MeshReport(entry.mesh_id, ref.n_vertices, ref.n_faces, tags, topology, metrics,
                      reference_metrics=reference_metrics, sigmas=sigmas)


# --- process pool -----------------------------------------------------------

def _child(fn, item, conn):
    try:
        result = fn(item, lambda info: conn.send(("partial", info)))
        conn.send(("ok", result))
    except BaseException as exc:  # noqa: BLE001 - reported to the parent
        conn.send(("error", f"{type(exc).__name__}: {exc}"))
    finally:
        conn.close()


@dataclass
class TaskOutcome:
    ok: bool
    value: Any = None
    error: str | None = None
    partial: dict = field(default_factory=dict)


def parallel_map(fn: Callable[[Any, Callable[[dict], None]], Any], items: Sequence,
                 workers: int, timeout: float) -> list[TaskOutcome]:
    """Run ``fn(item, notify)`` for every item, each in its own forked process.

    A task that raises, crashes or exceeds ``timeout`` seconds yields a failed
    outcome; other tasks are unaffected. Outcomes come back in input order.
    """
    ctx = mp.get_context("fork")
    outcomes = [TaskOutcome(False) for _ in items]
    pending = deque(range(len(items)))
    running: dict[Any, tuple[int, Any, float]] = {}
    while pending or running:
        while pending and len(running) < workers:
            i = pending.popleft()
            recv, send = ctx.Pipe(duplex=False)
            proc = ctx.Process(target=_child, args=(fn, items[i], send), daemon=True)
            proc.start()
            send.close()
            running[recv] = (i, proc, time.monotonic())

        deadline = min(start for _, _, start in running.values()) + timeout
        for conn in wait(list(running), timeout=max(0.0, deadline - time.monotonic())):
            i, proc, _ = running[conn]
            done = False
            try:
                while conn.poll():
                    kind, payload = conn.recv()
                    if kind == "partial":
                        outcomes[i].partial.update(payload)
                    else:
                        outcomes[i].ok = kind == "ok"
                        outcomes[i].value = payload if kind == "ok" else None
                        outcomes[i].error = None if kind == "ok" else payload
                        done = True
                        break
            except (EOFError, OSError):
                outcomes[i].error = "worker exited unexpectedly"
                done = True
            if done:
                del running[conn]
                conn.close()
                proc.join()
                if not outcomes[i].ok and outcomes[i].error is None:
                    outcomes[i].error = f"worker exited with code {proc.exitcode}"

        now = time.monotonic()
        for conn, (i, proc, start) in list(running.items()):
            if now - start >= timeout:
                proc.kill()
                proc.join()
                conn.close()
                del running[conn]
                outcomes[i].ok = False
                outcomes[i].error = f"timed out after {timeout:g} s"
    return outcomes


# --- aggregation ------------------------------------------------------------

def _column(rows: Sequence[dict], name: str) -> list[float]:
    out = []
    for row in rows:
        v = row.get(name)
        if v is None or v == "":
            continue
        out.append(float(v))
    return out


def aggregate_plots(rows: Sequence[dict], reference_rows: Sequence[dict] | None = None,
                    bins: int = 20) -> dict[str, str]:
    """One histogram per metric over measured rows, plus candidate-vs-reference scatters.

    Rows are dicts keyed by report column. Returns ``{file name: svg text}``.
    """
    plots = {}
    for name, log_scale in PLOTTED_METRICS.items():
        values = _column(rows, name)
        plots[f"{name}.svg"] = write_histogram_svg(
            values, bins, name.replace("_", " "), log_scale=log_scale, xlabel=name)
    if reference_rows:
        ref_by_id = {r["filename"]: r for r in reference_rows}
        for name, log_scale in PLOTTED_METRICS.items():
            xs, ys = [], []
            for row in rows:
                ref = ref_by_id.get(row["filename"])
                if ref is None or row.get(name) in (None, "") or ref.get(name) in (None, ""):
                    continue
                xs.append(float(ref[name]))
                ys.append(float(row[name]))
            if xs:
                plots[f"{name}_vs_reference.svg"] = write_scatter_svg(
                    xs, ys, f"{name.replace('_', ' ')}: method vs reference",
                    "reference", "method", log_scale=log_scale)
    return plots


@dataclass
class RunResult:
    reports: list[MeshReport]
    report_csv: str
    reference_csv: str
    interesting: list[str]
    files: dict[str, str]

    @property
    def n_succeeded(self) -> int:
        return sum(1 for r in self.reports if r.ok)

    @property
    def exit_code(self) -> int:
        return 0 if self.n_succeeded >= 1 else 1


def run_benchmark(config: RunConfig, work: Callable = measure_entry) -> RunResult:
    """Measure every selected manifest entry and write all outputs.

    ``work(entry, config, notify)`` computes one report; it is replaceable for
    testing. Outputs go to ``config.out_dir`` once everything has finished.
    """
    entries = read_manifest(config.manifest)
    outcomes = parallel_map(lambda e, notify: work(e, config, notify), entries,
                            config.workers, config.timeout)
    reports: list[MeshReport] = []
    for entry, outcome in zip(entries, outcomes):
        if outcome.ok:
            if outcome.value is not None:
                reports.append(outcome.value)
            continue
        tags = outcome.partial.get("tags")
        if tags is not None and not config.filters.accepts(tags):
            continue
        logger.warning("%s: empty row (%s)", entry.mesh_id, outcome.error)
        reports.append(MeshReport(entry.mesh_id, outcome.partial.get("n_vertices"),
                                  outcome.partial.get("n_faces"), failure=outcome.error))

    report_csv = write_report_csv(reports)
    reference_csv = write_report_csv([_ReferenceView(r) for r in reports])
    interesting = select_interesting([(r.mesh_id, r.metrics) for r in reports],
                                     config.interesting)

    files: dict[str, str] = {"report.csv": report_csv, "reference_report.csv": reference_csv}
    by_id = {r.mesh_id: r for r in reports}
    for mesh_id in interesting:
        r = by_id.get(mesh_id)
        if r is None or r.sigmas is None:
            logger.info("%s: no per-triangle comparison available", mesh_id)
            continue
        files[f"triangles/{mesh_id}.csv"] = write_triangle_csv(mesh_id, *r.sigmas)
    plots = aggregate_plots(read_report_csv(report_csv), read_report_csv(reference_csv),
                            config.bins)
    files.update({f"plots/{name}": svg for name, svg in plots.items()})

    try:
        for name, text in files.items():
            atomic_write(Path(config.out_dir) / name, text)
    except OSError as exc:
        raise OutputIOError(f"cannot write outputs to {config.out_dir}: {exc}") from exc
    return RunResult(reports, report_csv, reference_csv, interesting, files)


# --- dataset statistics -------------------------------------------------------

TAGS_COLUMNS = ["filename", "variant", "n_vertices", "n_edges", "n_faces",
                "euler_characteristic", "genus", "n_boundary_loops", "n_boundary_faces",
                "pct_boundary_faces", "vertex_manifold", "edge_manifold", "n_components",
                "tag_disk", "tag_closed", "tag_manifold", "tag_small"]


def tag_row(name: str, mesh: TriMesh, variant: str = "") -> dict[str, Any]:
    info = compute_topology(mesh)
    tags = evaluate_tags(info, mesh.n_faces)
    row = {"filename": name, "variant": variant, **vars(info),
           "pct_boundary_faces": 100.0 * info.boundary_face_fraction}
    row.update({f"tag_{t}": getattr(tags, t) for t in TAG_NAMES})
    return row


def format_tag_rows(rows: Sequence[dict]) -> str:
    lines = [",".join(TAGS_COLUMNS)]
    for row in rows:
        lines.append(",".join(format_cell(row.get(c)) for c in TAGS_COLUMNS))
    return "\n".join(lines) + "\n"


def dataset_statistics(rows: Sequence[dict]) -> dict[str, dict[str, float]]:
    """Medians of face count, boundary-face percentage and boundary loops.

    Grouped into ``all`` plus one group per variant present in the rows.
    """
    groups: dict[str, list[dict]] = {"all": list(rows)}
    for row in rows:
        if row.get("variant"):
            groups.setdefault(row["variant"], []).append(row)
    out = {}
    for name, members in groups.items():
        if not members:
            continue
        out[name] = {
            "n_meshes": len(members),
            "median_faces": statistics.median(r["n_faces"] for r in members),
            "median_pct_boundary_faces": statistics.median(
                r["pct_boundary_faces"] for r in members),
            "median_boundary_loops": statistics.median(r["n_boundary_loops"] for r in members),
        }
    return out
