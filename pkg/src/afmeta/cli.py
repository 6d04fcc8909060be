"""Command-line surface: score, metaeval, bias, synthesize, breakdown,
spa-plane, sensitivity, and generate.

Inputs are either WMT-style MQM TSV files or score directories (as written
by ``generate`` / ``synthesize``: adequacy.tsv + fluency.tsv penalty files,
optional all.tsv / other.tsv / metric.<name>.tsv, optional meta.json).
External metric scores arrive via ``--metric NAME=PATH[:higher|lower]``;
``all-mqm``, ``adequacy-mqm`` and ``fluency-mqm`` are builtin metric names.

Reports are CSVs (with embedded run metadata) plus SVG charts; re-running
with the same configuration reproduces every output bit for bit.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .data import (
    AlignMode,
    EvaluationSet,
    Orientation,
    ScoreMatrix,
    align,
    parse_mqm_file,
    parse_score_file,
)
from .errors import MetaEvalError, NoQualifyingPairs, ZeroVarianceSystem
from .metametrics import pairwise_accuracy, soft_pairwise_accuracy_many
from .protocols import (
    DEFAULT_INSTANCES,
    SentinelLine,
    SpaPlane,
    SPAPlanePoint,
    pa_breakdown,
    sensitivity,
    spa_plane,
)
from .report import run_metadata, write_csv, write_json
from .scoring import (
    ADEQUACY_MQM,
    ALL_MQM,
    FLUENCY_MQM,
    OTHER_MQM,
    MqmMatrices,
    Taxonomy,
    WeightScheme,
    mqm_matrices,
)
from .stats import AnovaMethod, PermutationConfig
from .synthesis import ComposedSetup, SetupSpec, bias_report, b_transform, build_setup, dominance_of
from .synthetic import SyntheticSpec, generate_dataset

logger = logging.getLogger(__name__)

BUILTIN_METRICS = {"all-mqm": "all", "adequacy-mqm": "adequacy", "fluency-mqm": "fluency"}
MACRO_LABEL = "macro-avg"

DEFAULTS: dict[str, object] = {
    "seed": 0,
    "resamples": 1000,
    "weights": None,
    "taxonomy": None,
    "systems": None,
    "metric": None,
    "out_dir": ".",
    "aggregate": "both",
    "align": "strict",
    "verbose": False,
}


@dataclass(frozen=True)
class MetricSpec:
    name: str
    path: str | None  # None for builtin metrics
    orientation: Orientation = Orientation.HIGHER_BETTER

    @classmethod
    def parse(cls, text: str) -> "MetricSpec":
        if "=" not in text:
            token = text.strip().lower()
            if token not in BUILTIN_METRICS:
                raise MetaEvalError(
                    f"metric {text!r} is not builtin ({sorted(BUILTIN_METRICS)}); "
                    "external metrics need NAME=PATH[:higher|lower]"
                )
            return cls(name=token, path=None)
        name, _, rest = text.partition("=")
        name = name.strip()
        if not name:
            raise MetaEvalError(f"empty metric name in {text!r}")
        orientation = Orientation.HIGHER_BETTER
        path = rest.strip()
        for suffix, value in ((":higher", Orientation.HIGHER_BETTER), (":lower", Orientation.LOWER_BETTER)):
            if path.lower().endswith(suffix):
                path = path[: -len(suffix)]
                orientation = value
        return cls(name=name, path=path, orientation=orientation)


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs; recorded verbatim into every report."""

    inputs: tuple[str, ...]
    seed: int
    resamples: int
    weights: WeightScheme
    weights_path: str | None
    taxonomy_choice: str | None
    setups: tuple[SetupSpec, ...]
    metrics: tuple[MetricSpec, ...]
    out_dir: Path
    aggregate: str
    align_mode: AlignMode
    extra_meta: Mapping[str, str] = field(default_factory=dict)

    @property
    def permutation(self) -> PermutationConfig:
        return PermutationConfig(resamples=self.resamples, seed=self.seed)

    def metadata(self, taxonomy_name: str = "") -> dict[str, str]:
        meta = run_metadata(
            seed=self.seed,
            resamples=self.resamples,
            weights=self.weights.describe(),
            taxonomy=taxonomy_name or (self.taxonomy_choice or "by-language-pair"),
            systems=";".join(s.label for s in self.setups),
            aggregate=self.aggregate,
        )
        meta.update(self.extra_meta)
        return meta


@dataclass
class LoadedSet:
    name: str
    eval_set: EvaluationSet
    mqm: MqmMatrices
    externals: dict[str, ScoreMatrix]
    taxonomy_name: str


def _taxonomy_for(choice: str | None, eval_set_lp: str) -> Taxonomy:
    if choice is None:
        return Taxonomy.for_language_pair(eval_set_lp)
    if choice in ("default", "enes"):
        return Taxonomy.builtin(choice)
    return Taxonomy.load(choice)


def _metric_file(spec: MetricSpec, set_name: str, n_sets: int) -> Path:
    path = Path(spec.path)
    if path.is_dir():
        for candidate in (path / f"{set_name}.tsv", path / f"{set_name}.json"):
            if candidate.exists():
                return candidate
        raise MetaEvalError(f"metric {spec.name!r}: no {set_name}.tsv or .json under {path}")
    if n_sets > 1:
        raise MetaEvalError(
            f"metric {spec.name!r} is a single file but {n_sets} evaluation sets were given; "
            "pass a directory with one <set-name>.tsv per set"
        )
    return path


def _load_score_dir(path: Path, cfg: RunConfig) -> LoadedSet:
    import json

    meta: dict = {}
    meta_path = path / "meta.json"
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8")).get("data", {})
    name = meta.get("name", path.name)
    language_pair = meta.get("language_pair", "")

    def load(stem: str) -> ScoreMatrix | None:
        for ext in (".tsv", ".json"):
            p = path / f"{stem}{ext}"
            if p.exists():
                return parse_score_file(p, Orientation.LOWER_BETTER, name=stem)
        return None

    adequacy = load("adequacy")
    fluency = load("fluency")
    if adequacy is None or fluency is None:
        raise MetaEvalError(f"score directory {path} needs adequacy.tsv and fluency.tsv")
    all_m = load("all")
    other = load("other")

    systems = adequacy.systems
    segments = adequacy.segments
    eval_set = EvaluationSet(
        name=name,
        language_pair=language_pair,
        systems=systems,
        segments=segments,
        candidates={(s, g): "" for s in systems for g in segments},
        annotations=(),
    )
    matrices = [m for m in (fluency, all_m, other) if m is not None]
    eval_set, aligned = align(eval_set, [adequacy, *matrices], cfg.align_mode)
    by_name = {m.name: m for m in aligned}
    adequacy = by_name["adequacy"]
    fluency = by_name["fluency"]
    other = by_name.get("other")
    all_m = by_name.get("all")
    if other is None:
        if all_m is not None:
            residual = all_m.raw - adequacy.raw - fluency.raw
            other = ScoreMatrix.from_raw(OTHER_MQM, residual, Orientation.LOWER_BETTER, eval_set.systems, eval_set.segments)
        else:
            other = ScoreMatrix.from_raw(
                OTHER_MQM, np.zeros((eval_set.n_systems, eval_set.n_segments)), Orientation.LOWER_BETTER, eval_set.systems, eval_set.segments
            )
    if all_m is None:
        all_m = ScoreMatrix.from_raw(
            ALL_MQM, adequacy.raw + fluency.raw + other.raw, Orientation.LOWER_BETTER, eval_set.systems, eval_set.segments
        )
    mqm = MqmMatrices(
        all=all_m.rename(ALL_MQM),
        adequacy=adequacy.rename(ADEQUACY_MQM),
        fluency=fluency.rename(FLUENCY_MQM),
        other=other.rename(OTHER_MQM),
    )
    return LoadedSet(name=name, eval_set=eval_set, mqm=mqm, externals={}, taxonomy_name="n/a")


def load_inputs(cfg: RunConfig) -> list[LoadedSet]:
    """Load every input, compute MQM matrices, and align external metrics."""
    sets: list[LoadedSet] = []
    file_metrics = [m for m in cfg.metrics if m.path is not None]
    for raw_path in cfg.inputs:
        path = Path(raw_path)
        if not path.exists():
            raise MetaEvalError(f"input {path} does not exist")
        if path.is_dir():
            loaded = _load_score_dir(path, cfg)
        else:
            eval_set = parse_mqm_file(path)
            taxonomy = _taxonomy_for(cfg.taxonomy_choice, eval_set.language_pair)
            eval_set, _ = align(eval_set, [], cfg.align_mode)
            mqm = mqm_matrices(eval_set, cfg.weights, taxonomy)
            loaded = LoadedSet(
                name=eval_set.name, eval_set=eval_set, mqm=mqm, externals={}, taxonomy_name=taxonomy.name
            )
        if file_metrics:
            parsed = [
                parse_score_file(
                    _metric_file(m, loaded.name, len(cfg.inputs)), m.orientation, name=m.name
                )
                for m in file_metrics
            ]
            eval_set, aligned = align(loaded.eval_set, parsed, cfg.align_mode)
            if eval_set.segments != loaded.eval_set.segments:
                taxonomy = _taxonomy_for(cfg.taxonomy_choice, eval_set.language_pair)
                if loaded.eval_set.annotations:
                    loaded.mqm = mqm_matrices(eval_set, cfg.weights, taxonomy)
                else:
                    loaded.mqm = MqmMatrices(
                        *(m.reindex(eval_set.systems, eval_set.segments) for m in loaded.mqm)
                    )
                loaded.eval_set = eval_set
            loaded.externals = {m.name: m for m in aligned}
        sets.append(loaded)
    return sets


def compose(loaded: LoadedSet, spec: SetupSpec) -> ComposedSetup:
    return build_setup(loaded.eval_set, spec, loaded.mqm, tuple(loaded.externals.values()))


def metric_matrix(composed: ComposedSetup, spec: MetricSpec) -> ScoreMatrix:
    if spec.path is None:
        return getattr(composed.mqm, BUILTIN_METRICS[spec.name])
    by_name = {m.name: m for m in composed.externals}
    return by_name[spec.name]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_score(cfg: RunConfig) -> int:
    sets = load_inputs(cfg)
    seg_rows = []
    sys_rows = []
    for loaded in sets:
        mqm = loaded.mqm
        raws = {name: matrix.raw for name, matrix in mqm.as_dict().items()}
        for si, system in enumerate(loaded.eval_set.systems):
            for gi, segment in enumerate(loaded.eval_set.segments):
                seg_rows.append(
                    [
                        loaded.name,
                        system,
                        segment,
                        raws[ALL_MQM][si, gi],
                        raws[ADEQUACY_MQM][si, gi],
                        raws[FLUENCY_MQM][si, gi],
                        raws[OTHER_MQM][si, gi],
                    ]
                )
            sys_rows.append(
                [
                    loaded.name,
                    system,
                    raws[ALL_MQM][si].mean(),
                    raws[ADEQUACY_MQM][si].mean(),
                    raws[FLUENCY_MQM][si].mean(),
                    raws[OTHER_MQM][si].mean(),
                ]
            )
    meta = cfg.metadata(sets[0].taxonomy_name if len(sets) == 1 else "per-set")
    write_csv(
        cfg.out_dir / "segment_scores.csv",
        ["eval_set", "system", "seg_id", "all", "adequacy", "fluency", "other"],
        seg_rows,
        meta,
    )
    write_csv(
        cfg.out_dir / "system_scores.csv",
        ["eval_set", "system", "all", "adequacy", "fluency", "other"],
        sys_rows,
        meta,
    )
    return 0


def _want_per_set(cfg: RunConfig) -> bool:
    return cfg.aggregate in ("per-set", "both")


def _want_macro(cfg: RunConfig, n_sets: int) -> bool:
    return cfg.aggregate in ("macro", "both") and n_sets > 1


def _anova_row(result) -> list[object]:
    return [result.f_statistic, result.p_value]


def cmd_bias(cfg: RunConfig) -> int:
    sets = load_inputs(cfg)
    rows = []
    for spec in cfg.setups:
        per_method: dict[str, list] = {"standard": [], "welch": []}
        for loaded in sets:
            composed = compose(loaded, spec)
            std = bias_report(composed.mqm.adequacy, composed.mqm.fluency, AnovaMethod.STANDARD)
            per_method["standard"].append((loaded.name, std))
            try:
                welch = bias_report(composed.mqm.adequacy, composed.mqm.fluency, AnovaMethod.WELCH)
            except (ZeroVarianceSystem, MetaEvalError) as exc:
                logger.warning("welch_undefined set=%s setup=%s reason=%s", loaded.name, spec.label, exc)
                welch = None
            per_method["welch"].append((loaded.name, welch))
        for method, reports in per_method.items():
            if _want_per_set(cfg):
                for set_name, report in reports:
                    if report is None:
                        rows.append([spec.label, set_name, method, "", "", "", "", "", "", "undefined", 1])
                        continue
                    rows.append(
                        [
                            spec.label,
                            set_name,
                            method,
                            *_anova_row(report.adequacy),
                            *_anova_row(report.fluency),
                            report.delta_p,
                            report.b_value,
                            report.dominant.value,
                            1,
                        ]
                    )
            if _want_macro(cfg, len(sets)):
                defined = [r for _, r in reports if r is not None]
                if not defined:
                    rows.append([spec.label, MACRO_LABEL, method, "", "", "", "", "", "", "undefined", 0])
                    continue
                delta = float(np.mean([r.delta_p for r in defined]))
                rows.append(
                    [
                        spec.label,
                        MACRO_LABEL,
                        method,
                        float(np.mean([r.adequacy.f_statistic for r in defined])),
                        float(np.mean([r.adequacy.p_value for r in defined])),
                        float(np.mean([r.fluency.f_statistic for r in defined])),
                        float(np.mean([r.fluency.p_value for r in defined])),
                        delta,
                        b_transform(delta),
                        dominance_of(delta).value,
                        len(defined),
                    ]
                )
    write_csv(
        cfg.out_dir / "bias.csv",
        [
            "setup",
            "eval_set",
            "method",
            "f_adequacy",
            "p_adequacy",
            "f_fluency",
            "p_fluency",
            "delta_p",
            "b_value",
            "dominant",
            "n_sets",
        ],
        rows,
        cfg.metadata(),
    )
    return 0


def cmd_metaeval(cfg: RunConfig) -> int:
    sets = load_inputs(cfg)
    metrics = cfg.metrics or (MetricSpec("all-mqm", None),)
    rows = []
    for spec in cfg.setups:
        per_metric: dict[str, list[tuple[float, float]]] = {m.name: [] for m in metrics}
        for loaded in sets:
            composed = compose(loaded, spec)
            human = composed.mqm.all
            mats = {m.name: metric_matrix(composed, m) for m in metrics}
            spa = soft_pairwise_accuracy_many(mats, human, cfg.permutation)
            values = {}
            for name, matrix in mats.items():
                pa = pairwise_accuracy(matrix, human)
                values[name] = (pa.value, spa[name].value)
                per_metric[name].append(values[name])
            if _want_per_set(cfg):
                rows.extend(_ranked_rows(spec.label, loaded.name, values))
        if _want_macro(cfg, len(sets)):
            macro = {
                name: (
                    float(np.mean([v[0] for v in vals])),
                    float(np.mean([v[1] for v in vals])),
                )
                for name, vals in per_metric.items()
            }
            rows.extend(_ranked_rows(spec.label, MACRO_LABEL, macro))
    write_csv(
        cfg.out_dir / "metaeval.csv",
        ["setup", "eval_set", "metric", "pa", "spa", "pa_rank", "spa_rank"],
        rows,
        cfg.metadata(),
    )
    return 0


def _ranked_rows(setup: str, set_name: str, values: Mapping[str, tuple[float, float]]) -> list[list[object]]:
    pa_order = sorted(values, key=lambda n: (-values[n][0], n))
    spa_order = sorted(values, key=lambda n: (-values[n][1], n))
    pa_rank = {n: i + 1 for i, n in enumerate(pa_order)}
    spa_rank = {n: i + 1 for i, n in enumerate(spa_order)}
    return [
        [setup, set_name, name, values[name][0], values[name][1], pa_rank[name], spa_rank[name]]
        for name in values
    ]


def cmd_synthesize(cfg: RunConfig) -> int:
    sets = load_inputs(cfg)
    for loaded in sets:
        for spec in cfg.setups:
            composed = compose(loaded, spec)
            base = cfg.out_dir / loaded.name / spec.label
            eval_set = composed.eval_set
            for matrix in composed.mqm:
                _write_score_tsv(base / f"{matrix.name.removesuffix('_mqm')}.tsv", matrix)
            for matrix in composed.externals:
                _write_score_tsv(base / f"metric.{matrix.name}.tsv", matrix)
            assignment = {
                aspect.value: {
                    segment: [loaded.eval_set.systems[idx] for idx in synth.assignment[j]]
                    for j, segment in enumerate(loaded.eval_set.segments)
                }
                for aspect, synth in composed.synthesized.items()
            }
            meta = cfg.metadata(loaded.taxonomy_name)
            write_json(
                base / "assignment.json",
                {"setup": spec.label, "tie_seed": spec.tie_seed, "rank_order": assignment},
                meta,
            )
            write_json(
                base / "meta.json",
                {
                    "name": eval_set.name,
                    "language_pair": eval_set.language_pair,
                    "n_systems": eval_set.n_systems,
                    "n_segments": eval_set.n_segments,
                    "setup": spec.label,
                },
                meta,
            )
    return 0


def _write_score_tsv(path: Path, matrix: ScoreMatrix) -> None:
    from .report import format_number, write_atomic

    lines = ["system\tseg_id\tscore"]
    raw = matrix.raw
    for si, system in enumerate(matrix.systems):
        for gi, segment in enumerate(matrix.segments):
            lines.append(f"{system}\t{segment}\t{format_number(float(raw[si, gi]))}")
    write_atomic(path, "\n".join(lines) + "\n")


def cmd_breakdown(cfg: RunConfig) -> int:
    from .charts import save_breakdown_svg

    sets = load_inputs(cfg)
    metrics = cfg.metrics or (MetricSpec("all-mqm", None),)
    rows = []
    for spec in cfg.setups:
        collected: dict[str, list] = {m.name: [] for m in metrics}
        for loaded in sets:
            composed = compose(loaded, spec)
            for m in metrics:
                result = pa_breakdown(metric_matrix(composed, m), composed.mqm.adequacy, composed.mqm.fluency)
                collected[m.name].append(result)
                if _want_per_set(cfg):
                    rows.append([spec.label, loaded.name, m.name, *_breakdown_cells(result)])
        macro_rows = []
        for m in metrics:
            results = collected[m.name]
            macro = _macro_breakdown(results)
            macro_rows.append((m.name, macro))
            if _want_macro(cfg, len(sets)):
                rows.append([spec.label, MACRO_LABEL, m.name, *macro])
        def bar(value):
            return float(value) if value != "" else 0.0

        chart_rows = [
            (name, bar(cells[1]), bar(cells[2]), bar(cells[3]), float(cells[0]) if cells[0] != "" else float("nan"))
            for name, cells in macro_rows
        ]
        if chart_rows:
            save_breakdown_svg(
                chart_rows,
                cfg.out_dir / f"breakdown-{spec.label}.svg",
                title=f"PA breakdown ({spec.label})",
            )
    write_csv(
        cfg.out_dir / "breakdown.csv",
        [
            "setup",
            "eval_set",
            "metric",
            "pa_concordant",
            "agree_adequacy",
            "agree_fluency",
            "metric_tie_fraction",
            "n_concordant",
            "n_discordant",
            "n_tied",
        ],
        rows,
        cfg.metadata(),
    )
    return 0


def _breakdown_cells(result) -> list[object]:
    def cell(v):
        return "" if v is None else v

    return [
        cell(result.pa_concordant),
        cell(result.agree_adequacy),
        cell(result.agree_fluency),
        cell(result.metric_tie_fraction),
        result.n_concordant,
        result.n_discordant,
        result.n_tied,
    ]


def _macro_breakdown(results) -> list[object]:
    def mean_of(getter):
        values = [getter(r) for r in results if getter(r) is not None]
        return float(np.mean(values)) if values else ""

    return [
        mean_of(lambda r: r.pa_concordant),
        mean_of(lambda r: r.agree_adequacy),
        mean_of(lambda r: r.agree_fluency),
        mean_of(lambda r: r.metric_tie_fraction),
        sum(r.n_concordant for r in results),
        sum(r.n_discordant for r in results),
        sum(r.n_tied for r in results),
    ]


def cmd_spa_plane(cfg: RunConfig, grid_step: float, instances: int, rescale: bool) -> int:
    from .charts import save_spa_plane_svg

    if not 0.0 < grid_step <= 1.0:
        raise MetaEvalError(f"--grid-step must be in (0, 1], got {grid_step}")
    sets = load_inputs(cfg)
    metrics = cfg.metrics or (MetricSpec("all-mqm", None),)
    steps = int(round(1.0 / grid_step))
    grid = tuple(round(i * grid_step, 10) for i in range(steps)) + (1.0,)
    rows = []
    for spec in cfg.setups:
        planes = []
        for loaded in sets:
            composed = compose(loaded, spec)
            mats = {m.name: metric_matrix(composed, m) for m in metrics}
            plane = spa_plane(
                mats,
                composed.mqm.adequacy,
                composed.mqm.fluency,
                cfg.permutation,
                grid=grid,
                instances=instances,
                rescale_aspects=rescale,
            )
            planes.append(plane)
            if _want_per_set(cfg):
                rows.extend(_plane_rows(spec.label, loaded.name, plane))
        macro = _macro_plane(planes)
        if _want_macro(cfg, len(sets)):
            rows.extend(_plane_rows(spec.label, MACRO_LABEL, macro))
        save_spa_plane_svg(macro, cfg.out_dir / f"spa_plane-{spec.label}.svg", title=f"SPA plane ({spec.label})")
    write_csv(
        cfg.out_dir / "spa_plane.csv",
        ["setup", "eval_set", "series", "label", "lambda", "spa_vs_fluency", "spa_vs_adequacy"],
        rows,
        cfg.metadata(),
    )
    return 0


def _plane_rows(setup: str, set_name: str, plane: SpaPlane) -> list[list[object]]:
    rows = [
        [setup, set_name, "metric", p.label, "", p.x, p.y] for p in plane.points
    ]
    for line in (plane.tradeoff, plane.adequacy_knowledge, plane.fluency_knowledge):
        for lam, p in zip(plane.grid, line.points):
            rows.append([setup, set_name, line.kind.value, p.label, lam, p.x, p.y])
    return rows


def _macro_plane(planes: Sequence[SpaPlane]) -> SpaPlane:
    if len(planes) == 1:
        return planes[0]

    def avg_points(series: Sequence[Sequence[SPAPlanePoint]]) -> tuple[SPAPlanePoint, ...]:
        return tuple(
            SPAPlanePoint(
                pts[0].label,
                x=float(np.mean([p.x for p in pts])),
                y=float(np.mean([p.y for p in pts])),
            )
            for pts in zip(*series)
        )

    def avg_line(lines: Sequence[SentinelLine]) -> SentinelLine:
        shadows = ()
        if all(line.shadows for line in lines):
            shadows = tuple(
                avg_points([line.shadows[r] for line in lines])
                for r in range(len(lines[0].shadows))
            )
        return SentinelLine(
            kind=lines[0].kind,
            points=avg_points([line.points for line in lines]),
            instances=lines[0].instances,
            shadows=shadows,
        )

    return SpaPlane(
        points=avg_points([plane.points for plane in planes]),
        tradeoff=avg_line([p.tradeoff for p in planes]),
        adequacy_knowledge=avg_line([p.adequacy_knowledge for p in planes]),
        fluency_knowledge=avg_line([p.fluency_knowledge for p in planes]),
        grid=planes[0].grid,
    )


def cmd_sensitivity(cfg: RunConfig) -> int:
    sets = load_inputs(cfg)
    builtin = [MetricSpec("all-mqm", None), MetricSpec("adequacy-mqm", None), MetricSpec("fluency-mqm", None)]
    metrics = builtin + [m for m in cfg.metrics if m.name not in BUILTIN_METRICS]
    rows = []
    collected: dict[tuple[str, str], list] = {}
    for loaded in sets:
        composed = compose(loaded, SetupSpec())
        for m in metrics:
            matrix = metric_matrix(composed, m)
            for axis, vary, hold in (
                ("adequacy", composed.mqm.adequacy, composed.mqm.fluency),
                ("fluency", composed.mqm.fluency, composed.mqm.adequacy),
            ):
                try:
                    result = sensitivity(matrix, vary, hold)
                    cells = [result.unnormalized, result.normalized, result.pairs_used]
                    collected.setdefault((m.name, axis), []).append(result)
                except NoQualifyingPairs:
                    logger.warning("no_qualifying_pairs set=%s metric=%s axis=%s", loaded.name, m.name, axis)
                    cells = ["", "", 0]
                if _want_per_set(cfg):
                    rows.append([loaded.name, m.name, axis, *cells])
    if _want_macro(cfg, len(sets)):
        for m in metrics:
            for axis in ("adequacy", "fluency"):
                results = collected.get((m.name, axis), [])
                if not results:
                    rows.append([MACRO_LABEL, m.name, axis, "", "", 0])
                    continue
                rows.append(
                    [
                        MACRO_LABEL,
                        m.name,
                        axis,
                        float(np.mean([r.unnormalized for r in results])),
                        float(np.mean([r.normalized for r in results])),
                        sum(r.pairs_used for r in results),
                    ]
                )
    write_csv(
        cfg.out_dir / "sensitivity.csv",
        ["eval_set", "metric", "axis", "unnormalized", "normalized", "pairs_used"],
        rows,
        cfg.metadata(),
    )
    return 0


def cmd_generate(cfg: RunConfig, spec: SyntheticSpec) -> int:
    dataset = generate_dataset(spec)
    base = cfg.out_dir
    for matrix in dataset.mqm:
        _write_score_tsv(base / f"{matrix.name.removesuffix('_mqm')}.tsv", matrix)
    meta = cfg.metadata("n/a")
    write_json(
        base / "meta.json",
        {
            "name": spec.name,
            "language_pair": "synthetic",
            "n_systems": spec.n_systems,
            "n_segments": spec.n_segments,
            "adequacy_means": list(spec.adequacy_means),
            "adequacy_stds": list(spec.adequacy_stds),
            "fluency_means": list(spec.fluency_means),
            "fluency_stds": list(spec.fluency_stds),
            "correlation": spec.correlation,
            "lattice": spec.lattice,
            "generator_seed": spec.seed,
        },
        meta,
    )
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _parse_range(text: str) -> tuple[float, float]:
    lo, _, hi = text.partition(":")
    if not hi:
        value = float(lo)
        return (value, value)
    return (float(lo), float(hi))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file mirroring the flags; explicit flags win")
    common.add_argument("--seed", type=int, help="base seed for every random draw (default 0)")
    common.add_argument("--resamples", type=int, help="permutation resamples (default 1000)")
    common.add_argument("--weights", help="penalty weight file (key = value)")
    common.add_argument("--taxonomy", help="'default', 'enes', or a taxonomy file path (default: by language pair)")
    common.add_argument(
        "--systems",
        action="append",
        help="meta-evaluation setup, e.g. original,synth-adequacy,synth-fluency (repeatable)",
    )
    common.add_argument("--metric", action="append", help="NAME=PATH[:higher|lower] or a builtin metric name")
    common.add_argument("--out-dir", help="output directory (default .)")
    common.add_argument("--aggregate", choices=["per-set", "macro", "both"], help="which rows to report")
    common.add_argument("--align", choices=["strict", "drop"], help="alignment mode (default strict)")
    common.add_argument("--verbose", action="store_true", default=None, help="log at INFO level")

    parser = argparse.ArgumentParser(prog="afmeta", description=__doc__)
    parser.add_argument("--version", action="version", version=f"afmeta {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, inputs: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        if inputs:
            p.add_argument("inputs", nargs="+", help="MQM TSV files or score directories")
        return p

    add("score", "write per-segment and per-system MQM score tables")
    add("metaeval", "PA/SPA of each metric against the All MQM scores, with ranks")
    add("bias", "adequacy/fluency ANOVA bias report (standard and Welch)")
    add("synthesize", "write composed setups as score files plus the rank-assignment manifest")
    add("breakdown", "concordant/discordant PA breakdown per metric, CSV plus stacked bars")
    plane = add("spa-plane", "SPA plane points and sentinel lines, CSV plus chart")
    plane.add_argument("--grid-step", type=float, default=0.05, help="lambda grid step (default 0.05)")
    plane.add_argument(
        "--instances", type=int, default=DEFAULT_INSTANCES, help="random instances per knowledge line (default 10)"
    )
    plane.add_argument(
        "--rescale-aspects",
        action="store_true",
        help="scale each aspect to unit variance before interpolating",
    )
    add("sensitivity", "per-metric score change per unit of adequacy/fluency penalty")

    gen = add("generate", "write a synthetic score dataset", inputs=False)
    gen.add_argument("--num-systems", type=int, required=True)
    gen.add_argument("--num-segments", type=int, required=True)
    gen.add_argument("--adequacy-means", type=_parse_range, default=(1.0, 6.0), help="LO:HI per-system mean range")
    gen.add_argument("--adequacy-std", type=float, default=2.0)
    gen.add_argument("--fluency-means", type=_parse_range, default=(1.0, 3.0), help="LO:HI per-system mean range")
    gen.add_argument("--fluency-std", type=float, default=1.0)
    gen.add_argument("--correlation", type=float, default=0.0)
    gen.add_argument("--lattice", type=float, default=0.1, help="quantization step, 0 disables")
    gen.add_argument("--name", default="synthetic")
    return parser


def _read_config_file(path: str) -> dict[str, object]:
    values: dict[str, object] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MetaEvalError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key in ("seed", "resamples"):
            values[key] = int(value)
        elif key in ("systems", "metric"):
            values[key] = [token.strip() for token in value.split(";") if token.strip()]
        elif key == "verbose":
            values[key] = value.lower() in ("1", "true", "yes", "on")
        elif key in DEFAULTS:
            values[key] = value
        else:
            raise MetaEvalError(f"{path}:{lineno}: unknown config key {key!r}")
    return values


def _resolve_args(args: argparse.Namespace) -> argparse.Namespace:
    config = _read_config_file(args.config) if getattr(args, "config", None) else {}
    for key, default in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, config.get(key, default))
    return args


def _run_config(args: argparse.Namespace) -> RunConfig:
    weights = WeightScheme.from_file(args.weights) if args.weights else WeightScheme()
    systems = args.systems or ["original"]
    setups = tuple(SetupSpec.parse(text, tie_seed=args.seed) for text in systems)
    metrics = tuple(MetricSpec.parse(text) for text in (args.metric or []))
    names = [m.name for m in metrics]
    if len(set(names)) != len(names):
        raise MetaEvalError(f"duplicate metric names: {names}")
    return RunConfig(
        inputs=tuple(getattr(args, "inputs", ())),
        seed=args.seed,
        resamples=args.resamples,
        weights=weights,
        weights_path=args.weights,
        taxonomy_choice=args.taxonomy,
        setups=setups,
        metrics=metrics,
        out_dir=Path(args.out_dir),
        aggregate=args.aggregate,
        align_mode=AlignMode.DROP_INCOMPLETE if args.align == "drop" else AlignMode.STRICT,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _resolve_args(args)
    except (MetaEvalError, ValueError, OSError) as exc:
        print(f"afmeta: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = _run_config(args)
        if args.command == "score":
            return cmd_score(cfg)
        if args.command == "metaeval":
            return cmd_metaeval(cfg)
        if args.command == "bias":
            return cmd_bias(cfg)
        if args.command == "synthesize":
            return cmd_synthesize(cfg)
        if args.command == "breakdown":
            return cmd_breakdown(cfg)
        if args.command == "spa-plane":
            return cmd_spa_plane(cfg, args.grid_step, args.instances, args.rescale_aspects)
        if args.command == "sensitivity":
            return cmd_sensitivity(cfg)
        if args.command == "generate":
            spec = SyntheticSpec(
                n_systems=args.num_systems,
                n_segments=args.num_segments,
                adequacy_means=tuple(np.linspace(*args.adequacy_means, args.num_systems)),
                adequacy_stds=(args.adequacy_std,) * args.num_systems,
                fluency_means=tuple(np.linspace(*args.fluency_means, args.num_systems)),
                fluency_stds=(args.fluency_std,) * args.num_systems,
                correlation=args.correlation,
                seed=args.seed,
                lattice=args.lattice,
                name=args.name,
            )
            return cmd_generate(cfg, spec)
        parser.error(f"unknown command {args.command!r}")
    except MetaEvalError as exc:
        print(f"afmeta: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"afmeta: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
