"""Monte Carlo size and power studies over a grid of (p, y) cells.

Every replication draws its panel from a stream seeded by
derive_seed(master_seed, p, y, model, replication), so the rejection counts
depend on the design alone and not on how replications are spread over
worker processes.
"""
# Python imports
import dataclasses
import json
import logging
import math
import multiprocessing
import os
import time
from importlib import resources
from typing import Optional, Tuple

# Project imports
from sncov import config, datagen, spectra, sphericity
from sncov.errors import ConfigError, DomainError, IncompleteReportError

logger = logging.getLogger(__name__)

DEFAULT_REPLICATIONS = 2000
BUILTIN_DESIGNS = ("table3", "table4", "table5", "table6", "iid")

# The layout shared by the size and power tables: rows are p, columns are
# (y, test) pairs.
PAPER_ROWS = (100, 200, 500)
PAPER_COLUMNS = ((0.5, "lr-sn"), (0.5, "jhn-sn"), (2.0, "jhn-sn"))


@dataclasses.dataclass(frozen=True)
class TestPlan:
    """A test and the y values it runs at (all of them when y_values is None)."""
    selector: sphericity.TestSelector
    y_values: Optional[Tuple[float, ...]] = None

    __test__ = False

    @classmethod
    def parse(cls, text):
        """Reads 'jhn-sn' or 'lr-sn@0.5' (a test restricted to y = 0.5)."""
        if "@" in text:
            name, ys = text.split("@", 1)
            try:
                y_values = tuple(float(y) for y in ys.split("/"))
            except ValueError:
                raise ConfigError("malformed test entry %r" % text)
        else:
            name, y_values = text, None
        try:
            return cls(sphericity.TestSelector.parse(name), y_values)
        except DomainError as e:
            raise ConfigError(str(e))

    def applies(self, y):
        return self.y_values is None or y in self.y_values

    def __str__(self):
        if self.y_values is None:
            return str(self.selector)
        return "%s@%s" % (self.selector, "/".join("%r" % y for y in self.y_values))


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    model: datagen.ModelKind
    sigma: str
    tests: Tuple[TestPlan, ...]
    p_list: Tuple[int, ...]
    y_list: Tuple[float, ...]
    replications: int = DEFAULT_REPLICATIONS
    alpha: float = sphericity.DEFAULT_ALPHA
    master_seed: int = config.DEFAULT_SEED
    name: str = "custom"
    layout: str = "custom"

    def validate(self):
        """Raises ConfigError unless every cell can run."""
        config.check_seed(self.master_seed, "MASTER_SEED")
        if self.replications < 1:
            raise ConfigError("replications must be at least 1, got %d" % self.replications)
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1), got %r" % self.alpha)
        if not self.tests:
            raise ConfigError("design %s names no tests" % self.name)
        if not self.p_list or not self.y_list:
            raise ConfigError("design %s has an empty grid" % self.name)
        if self.layout not in ("paper", "custom"):
            raise ConfigError("unknown layout %r" % self.layout)
        try:
            datagen.SigmaSpec.parse(self.sigma, 2)
        except DomainError as e:
            raise ConfigError(str(e))

        for y in self.y_list:
            if not y > 0:
                raise ConfigError("y must be positive, got %r" % y)
            for p in self.p_list:
                if sample_size(p, y) < 2 or p < 2:
                    raise ConfigError("cell p = %d, y = %g leaves fewer than 2 observations" % (p, y))
        for plan in self.tests:
            if plan.selector.name is sphericity.TestName.LR_SN:
                for y in self.y_list:
                    if plan.applies(y) and y >= 1:
                        raise ConfigError("LR-SN is undefined for y = %g >= 1; restrict it with lr-sn@y" % y)

    @classmethod
    def from_params(cls, params, name="custom"):
        """Builds a config from the dict read_params() returns."""
        try:
            model = datagen.ModelKind.parse(params.get("MODEL", "iid"))
        except DomainError as e:
            raise ConfigError(str(e))
        for required in ("TESTS", "P_LIST", "Y_LIST"):
            if required not in params:
                raise ConfigError("design %s lacks %s" % (name, required))

        return cls(model=model,
                   sigma=params.get("SIGMA", "identity"),
                   tests=tuple(TestPlan.parse(text) for text in params["TESTS"]),
                   p_list=tuple(params["P_LIST"]),
                   y_list=tuple(float(y) for y in params["Y_LIST"]),
                   replications=params.get("REPLICATIONS", DEFAULT_REPLICATIONS),
                   alpha=params.get("ALPHA", sphericity.DEFAULT_ALPHA),
                   master_seed=params.get("MASTER_SEED", config.DEFAULT_SEED),
                   name=params.get("DESIGN_NAME", name),
                   layout=params.get("LAYOUT", "custom"))


@dataclasses.dataclass(frozen=True)
class CellResult:
    p: int
    n: int
    y: float
    test: str
    rejections: int
    replications: int

    @property
    def rejection_rate(self):
        return self.rejections / self.replications

    @property
    def monte_carlo_se(self):
        rate = self.rejection_rate
        return math.sqrt(rate * (1.0 - rate) / self.replications)

    def to_dict(self):
        return {"p": self.p, "n": self.n, "y": self.y, "test": self.test,
                "rejections": self.rejections, "replications": self.replications,
                "rejection_rate": self.rejection_rate, "monte_carlo_se": self.monte_carlo_se}


@dataclasses.dataclass(frozen=True)
class ExperimentReport:
    name: str
    layout: str
    model: str
    sigma: str
    master_seed: int
    alpha: float
    cells: Tuple[CellResult, ...]
    wall_time: float = 0.0

    def cell(self, p, y, test):
        for cell in self.cells:
            if cell.p == p and cell.y == y and cell.test == test:
                return cell
        return None


def sample_size(p, y):
    """n = round(p / y)."""
    return int(round(p / y))


def _replicate_chunk(task):
    """Runs some replications of one cell; returns the reject flags of each."""
    model_kind, sigma, p, y, master_seed, tests, alpha, indices = task
    kind = datagen.ModelKind(model_kind)
    sigma_spec = datagen.SigmaSpec.parse(sigma, p)
    selectors = [sphericity.TestSelector.parse(text) for text in tests]
    n = sample_size(p, y)

    outcomes = []
    for replication in indices:
        seed = datagen.derive_seed(master_seed, p, y, kind.value, replication)
        obs = datagen.gen_panel(datagen.GenModel(kind, sigma_spec, p, n, seed))
        summary = spectra.snc_eigenvalues(obs)
        outcomes.append(tuple(sphericity.run_on_summary(selector, summary, alpha).reject
                              for selector in selectors))
    return outcomes


def _chunks(replications, threads):
    size = math.ceil(replications / threads)
    return [range(start, min(start + size, replications)) for start in range(0, replications, size)]


def run_experiment(cfg, threads=1):
    """Runs every cell of the design and counts rejections.

    threads = 1 runs in this process; otherwise the replications of each
    cell are split into one static chunk per worker of a process pool.
    """
    cfg.validate()
    if threads < 1:
        raise ConfigError("thread count must be at least 1, got %d" % threads)

    started = time.perf_counter()
    pool = None
    if threads > 1:
        logger.info("starting a pool of %d worker processes", threads)
        pool = multiprocessing.Pool(processes=threads)

    cells = []
    try:
        for p in cfg.p_list:
            for y in cfg.y_list:
                plans = [plan for plan in cfg.tests if plan.applies(y)]
                if not plans:
                    logger.info("no test runs at p = %d, y = %g; skipping the cell", p, y)
                    continue
                tests = tuple(str(plan.selector) for plan in plans)
                tasks = [(cfg.model.value, cfg.sigma, p, y, cfg.master_seed, tests, cfg.alpha, tuple(chunk))
                         for chunk in _chunks(cfg.replications, threads)]

                if pool is None:
                    results = [_replicate_chunk(task) for task in tasks]
                else:
                    results = pool.map(_replicate_chunk, tasks)

                counts = [0] * len(tests)
                for chunk in results:
                    for outcome in chunk:
                        for i, reject in enumerate(outcome):
                            counts[i] += reject

                for test, count in zip(tests, counts):
                    cells.append(CellResult(p, sample_size(p, y), y, test, count, cfg.replications))
                logger.info("cell p = %d, y = %g done: %s", p, y,
                            ", ".join("%s %d/%d" % (test, count, cfg.replications)
                                      for test, count in zip(tests, counts)))
    finally:
        if pool is not None:
            pool.close()
            pool.join()

    return ExperimentReport(name=cfg.name, layout=cfg.layout, model=cfg.model.value, sigma=cfg.sigma,
                            master_seed=cfg.master_seed, alpha=cfg.alpha, cells=tuple(cells),
                            wall_time=time.perf_counter() - started)


def run_design(configs, threads=1):
    """Runs several configs and merges their cells into one report."""
    if not configs:
        raise ConfigError("design holds no experiments")
    reports = [run_experiment(cfg, threads) for cfg in configs]
    first = reports[0]
    return dataclasses.replace(first,
                               cells=tuple(cell for report in reports for cell in report.cells),
                               wall_time=sum(report.wall_time for report in reports))


def _builtin_text(name):
    return resources.files("sncov").joinpath("designs", name + ".txt").read_text()


def _split_blocks(text):
    """Splits a design into the blocks that start with a [heading] line."""
    blocks = [[]]
    for line in text.splitlines():
        if line.strip().startswith("[") and line.strip().endswith("]"):
            blocks.append([])
        else:
            blocks[-1].append(line)
    return [block for block in blocks if any(line.strip() and not line.strip().startswith("#")
                                             for line in block)]


def load_design(name_or_path, replications=None, master_seed=None):
    """Returns the configs of a built-in design or of a design file.

    Built-in names are table3 to table6 and iid. A path ending in .json is
    read as JSON, any other path as a params file; params files may hold
    several [heading] blocks. replications and master_seed override the
    values in the design.
    """
    if name_or_path in BUILTIN_DESIGNS:
        name = name_or_path
        blocks = [config.parse_params(block, source=name) for block in _split_blocks(_builtin_text(name))]
    elif os.path.exists(name_or_path):
        name = os.path.splitext(os.path.basename(name_or_path))[0]
        if name_or_path.endswith(".json"):
            blocks = [config.read_design_file(name_or_path)]
        else:
            with open(name_or_path) as f:
                blocks = [config.parse_params(block, source=name_or_path) for block in _split_blocks(f.read())]
    else:
        raise ConfigError("no built-in design or file named %r (built-ins: %s)"
                          % (name_or_path, ", ".join(BUILTIN_DESIGNS)))

    if not blocks:
        raise ConfigError("design %s is empty" % name_or_path)

    configs = []
    for params in blocks:
        cfg = ExperimentConfig.from_params(params, name)
        changes = {}
        if replications is not None:
            changes["replications"] = replications
        if master_seed is not None:
            changes["master_seed"] = master_seed
        cfg = dataclasses.replace(cfg, **changes)
        cfg.validate()
        configs.append(cfg)

    return configs


def _column_label(y, test):
    return "y=%g %s" % (y, test.upper())


def render_table(report, layout=None):
    """Rejection rates in percent, one row per p and one column per (y, test)."""
    if not report.cells:
        raise IncompleteReportError("report %s has no cells" % report.name)

    layout = layout or report.layout
    if layout == "paper":
        rows, columns = PAPER_ROWS, PAPER_COLUMNS
    elif layout == "custom":
        rows = tuple(sorted({cell.p for cell in report.cells}))
        columns = []
        for cell in sorted(report.cells, key=lambda cell: cell.y):
            if (cell.y, cell.test) not in columns:
                columns.append((cell.y, cell.test))
    else:
        raise ConfigError("unknown layout %r" % layout)

    labels = [_column_label(y, test) for y, test in columns]
    widths = [max(len(label), 6) for label in labels]
    lines = ["%s: %s, %s, alpha = %g" % (report.name, report.model, report.sigma, report.alpha),
             "%5s  %s" % ("p", "  ".join(label.rjust(width) for label, width in zip(labels, widths)))]

    for p in rows:
        values = []
        for (y, test), width in zip(columns, widths):
            cell = report.cell(p, y, test)
            if cell is None:
                raise IncompleteReportError("report %s has no cell for p = %d, %s"
                                            % (report.name, p, _column_label(y, test)))
            values.append(("%.1f" % (100.0 * cell.rejection_rate)).rjust(width))
        lines.append("%5d  %s" % (p, "  ".join(values)))

    return "\n".join(lines) + "\n"


def report_to_json(report, timings=False):
    """Serializes a report. wall_time is written only when timings is set."""
    document = {"name": report.name, "layout": report.layout, "model": report.model,
                "sigma": report.sigma, "master_seed": report.master_seed, "alpha": report.alpha,
                "cells": [cell.to_dict() for cell in report.cells]}
    if timings:
        document["wall_time"] = report.wall_time
    return json.dumps(document, indent=2) + "\n"


def report_from_json(text):
    """Inverse of report_to_json; derived fields are recomputed."""
    try:
        document = json.loads(text)
        cells = tuple(CellResult(p=cell["p"], n=cell["n"], y=cell["y"], test=cell["test"],
                                 rejections=cell["rejections"], replications=cell["replications"])
                      for cell in document["cells"])
        return ExperimentReport(name=document["name"], layout=document["layout"], model=document["model"],
                                sigma=document["sigma"], master_seed=document["master_seed"],
                                alpha=document["alpha"], cells=cells,
                                wall_time=document.get("wall_time", 0.0))
    except (KeyError, TypeError, json.JSONDecodeError) as e:
        raise ConfigError("not a Monte Carlo report: %s" % e)
