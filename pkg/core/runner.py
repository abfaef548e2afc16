"""Command orchestration for the RankSpike CLI: one handler per subcommand."""
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

import config
from arith.characters import enumerate_fundamental_discriminants, prime_discriminants
from core.bias import bias_report, explicit_formula_sweep, geometric_checkpoints
from core.errors import RankSpikeError, ValidationError
from core.lfunc import (curve_spec, find_family_zeros, find_zeros, hardy_Z, lowest_zero_summary,
                        quadratic_spec)
from core.report_exporter import ReportExporter, package_versions
from core.run_history import RunHistory
from core.zero_stats import (bin_averages, chi_square_against_kernel, discrepancy, one_level_density,
                             pair_correlation, sign_runs_test)
from core.zeta import ZeroList, export_zero_list, hardy_Z_zeta, read_zero_table, zeta_zeros
from curves.ap_table import APCache, ap_table
from curves.catalogue import read_curve_list, resolve_curve
from curves.weierstrass import WeierstrassCurve
from predict.kernels import kernel_gue_pc
from predict.local_factors import rank_ratio_prediction
from predict.prediction import (PredictionCurve, density_curve, kernel_curve, one_line_curves,
                                paircorr_curve, rank_ratio_curve)

logger = logging.getLogger(__name__)

PREDICTION_KINDS = ('rank-ratio', 'density', 'paircorr', 'kernel', 'one-line')


def parse_range(text: str, parts: int, cast: Callable = float) -> Tuple:
    """'a:b' or 'a:b:step' into a tuple of `parts` numbers."""
    pieces = text.split(':')
    if len(pieces) != parts:
        raise ValidationError(f"range {text!r} needs {parts} ':'-separated fields")
    try:
        return tuple(cast(p) for p in pieces)
    except ValueError as e:
        raise ValidationError(f"range {text!r}: {e}") from e


def require_extended(cfg: "JobConfig", what: str, value: int, limit: int) -> None:
    if value > limit and not cfg.extended:
        raise ValidationError(f"{what} {value} exceeds {limit}; pass --extended for hours-scale runs")


@dataclass
class JobConfig:
    """Everything one CLI run needs."""

    command: str
    curve: Optional[str] = None
    curve_file: Optional[Path] = None
    zeta: bool = False
    disc: Optional[int] = None
    disc_range: Optional[Tuple[int, int]] = None
    zeros_file: Optional[Path] = None
    X: Optional[int] = None
    T: Optional[float] = None
    count: Optional[int] = None
    t_range: Optional[Tuple[float, float, float]] = None
    bin_width: Optional[float] = None
    lo: Optional[float] = None
    hi: Optional[float] = None
    mode: str = 'raw'
    kind: str = 'rank-ratio'
    kernel: str = 'gue'
    rank: Optional[int] = None
    uncorrected: bool = False
    lower_terms: bool = True
    sign: str = 'positive'
    prime_window: bool = False
    output: Optional[Path] = None
    pdf: bool = False
    cache_dir: Optional[Path] = field(default_factory=lambda: config.CACHE_DIR)
    parallelism: int = config.DEFAULT_PARALLELISM
    extended: bool = False
    accelerate: bool = True

    def validate(self) -> None:
        """
        Raises:
            ValidationError: unknown command, non-positive parameter, missing
                input for the command, or an unwritable output path
        """
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}; known: {', '.join(COMMANDS)}")
        for name in ('X', 'T', 'count', 'bin_width', 'parallelism'):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValidationError(f"{name} must be positive, got {value}")
        if self.t_range is not None:
            a, b, step = self.t_range
            if not (step > 0 and b > a):
                raise ValidationError(f"t range {a}:{b}:{step} needs a < b and step > 0")
        if self.disc_range is not None and not self.disc_range[0] < self.disc_range[1]:
            raise ValidationError(f"discriminant range {self.disc_range} is empty")
        if self.lo is not None and self.hi is not None and not self.lo < self.hi:
            raise ValidationError(f"bin range [{self.lo}, {self.hi}) is empty")
        self.check_scale()
        if self.kind not in PREDICTION_KINDS:
            raise ValidationError(f"unknown prediction kind {self.kind!r}")
        if self.output is not None:
            parent = Path(self.output).resolve().parent
            while not parent.exists():
                parent = parent.parent
            if not os.access(parent, os.W_OK):
                raise ValidationError(f"output path {self.output} is not writable")
        for name in REQUIRED.get(self.command, ()):
            if isinstance(name, tuple):
                if all(getattr(self, n) in (None, False) for n in name):
                    raise ValidationError(f"{self.command} needs one of --{' / --'.join(name)}")
            elif getattr(self, name) is None:
                raise ValidationError(f"{self.command} needs --{name}")

    def check_scale(self) -> None:
        """
        Raises:
            ValidationError: X or the expected zero count is past the
                hours-scale threshold and `extended` is not set
        """
        if self.X is not None:
            require_extended(self, "X", self.X, config.EXTENDED_MAX_X)
        if self.count is not None and self.zeros_file is None:
            require_extended(self, "zero count", self.count, config.EXTENDED_MAX_ZEROS)
        zeta_source = self.zeta or self.command == 'paircorr'
        if zeta_source and self.zeros_file is None and self.T is not None and self.T > 2 * math.pi:
            expected = self.T / (2 * math.pi) * math.log(self.T / (2 * math.pi * math.e))
            require_extended(self, "expected zero count", int(expected), config.EXTENDED_MAX_ZEROS)

    def echo(self) -> Dict:
        """Config fields for artifact headers, without the output path."""
        data = {k: v for k, v in asdict(self).items() if v is not None and k != 'output'}
        return {k: (str(v) if isinstance(v, Path) else v) for k, v in data.items()}


@dataclass
class RunResult:
    exit_status: int
    error_code: Optional[str] = None
    message: str = ""
    artifacts: List[str] = field(default_factory=list)


class _Run:
    """Output naming and bookkeeping for one run."""

    def __init__(self, cfg: JobConfig):
        self.cfg = cfg
        self.written: List[str] = []

    def path(self, suffix: str) -> str:
        if self.cfg.output is None:
            return ReportExporter.default_name(self.cfg.command, suffix)
        name = str(self.cfg.output)
        return name if os.path.splitext(name)[1] else f"{name}.{suffix}"

    def metadata(self, **extra) -> Dict:
        data = {"command": self.cfg.command, "config": self.cfg.echo(), "versions": package_versions()}
        data.update(extra)
        return data

    def csv(self, rows, header, **extra) -> str:
        path = self.path('csv')
        self.written.append(path)
        return ReportExporter.export_csv(rows, header, path, self.metadata(**extra))

    def json(self, data: Dict) -> str:
        path = self.path('json')
        self.written.append(path)
        return ReportExporter.export_json(data, path)

    def pdf(self, title: str, summary: Dict, sections: Optional[Dict] = None) -> Optional[str]:
        if not self.cfg.pdf:
            return None
        path = os.path.splitext(self.path('pdf'))[0] + '.pdf'
        self.written.append(path)
        return ReportExporter.export_pdf(title, summary, path, sections)

    def cleanup(self) -> None:
        for path in self.written:
            for candidate in (Path(path), Path(path + ".json")):
                try:
                    if candidate.exists():
                        candidate.unlink()
                        logger.info(f"Removed partial artifact {candidate}")
                except OSError as e:
                    logger.error(f"Could not remove partial artifact {candidate}: {e}")


def _curve(cfg: JobConfig) -> WeierstrassCurve:
    return resolve_curve(cfg.curve)


def _cache_state(curve: WeierstrassCurve, cfg: JobConfig) -> str:
    if cfg.cache_dir is None:
        return "disabled"
    return "hit" if APCache.path_for(curve, Path(cfg.cache_dir)).exists() else "miss"


def _t_grid(cfg: JobConfig) -> np.ndarray:
    if cfg.t_range is None:
        raise ValidationError(f"{cfg.command} needs --t a:b:step")
    a, b, step = cfg.t_range
    n = int(math.floor((b - a) / step + 1e-9))
    return a + step * np.arange(n + 1)


def _progress(cfg: JobConfig) -> Optional[bool]:
    return True if cfg.extended else None


def _rank(curve: WeierstrassCurve, cfg: JobConfig) -> int:
    rank = cfg.rank if cfg.rank is not None else curve.rank
    if rank is None:
        raise ValidationError(f"{curve.name}: rank unknown; pass --rank")
    return rank


def _family(cfg: JobConfig, zeros: bool = False) -> List[int]:
    lo, hi = cfg.disc_range
    ds = enumerate_fundamental_discriminants(lo, hi, sign=cfg.sign)
    if not ds:
        raise ValidationError(f"no fundamental discriminants in ({lo}, {hi}) with sign {cfg.sign}")
    if zeros:
        require_extended(cfg, "family size", len(ds), config.EXTENDED_MAX_FAMILY)
    return ds


# Subcommands

def _aptable(run: _Run) -> None:
    cfg = run.cfg
    if cfg.curve_file is not None:
        curves = read_curve_list(cfg.curve_file)
        tables = [ap_table(c, cfg.X, cache_dir=cfg.cache_dir, accelerate=cfg.accelerate,
                           parallelism=cfg.parallelism, show_progress=_progress(cfg)) for c in curves]
        primes = tables[0].primes.tolist() if tables else []
        rows = [[c.name] + t.values.tolist() for c, t in zip(curves, tables)]
        run.csv(rows, ['curve'] + [f"a_{p}" for p in primes], curves=len(curves))
        return
    curve = _curve(cfg)
    cache = _cache_state(curve, cfg)
    table = ap_table(curve, cfg.X, cache_dir=cfg.cache_dir, accelerate=cfg.accelerate,
                     parallelism=cfg.parallelism, show_progress=_progress(cfg))
    rows = zip(table.primes.tolist(), table.values.tolist(), table.bad.astype(int).tolist())
    run.csv(rows, ['p', 'a_p', 'bad'], curve=curve.name, cache=cache)


def _bias(run: _Run) -> None:
    cfg = run.cfg
    curve = _curve(cfg)
    cache = _cache_state(curve, cfg)
    report = bias_report(curve, cfg.X, cache_dir=cfg.cache_dir, parallelism=cfg.parallelism,
                         accelerate=cfg.accelerate, show_progress=_progress(cfg))
    data = report.to_dict()
    data["cache"] = cache
    if cfg.zeros_file is not None:
        zeros = read_zero_table(cfg.zeros_file, label=curve.name)
        table = ap_table(curve, cfg.X, cache_dir=cfg.cache_dir, accelerate=cfg.accelerate,
                         parallelism=cfg.parallelism)
        residuals = explicit_formula_sweep(table, geometric_checkpoints(cfg.X, 2.0).tolist(), zeros,
                                           _rank(curve, cfg))
        data["explicit_formula"] = [asdict(r) for r in residuals]
    run.json(data)
    run.pdf(f"Bias report: {curve.name}", {
        "Curve": curve.name,
        "Rank": report.rank,
        "X": report.X,
        "Bias mean": report.bias_mean,
        "S_E(X)": report.S_at_X,
        "Sym. square ratio": report.symmetric_square["ratio_to_minus_sqrt_x"],
    }, {"Checkpoints": [f"x = {x:.6g}: S_E = {s:.6g}, bias = {b:.4f}"
                        for x, s, b in report.S_samples[-10:]]})


def _zplot(run: _Run) -> None:
    cfg = run.cfg
    ts = _t_grid(cfg)
    header = ['t', 'Z']
    ratio_rank = 0
    if cfg.zeta:
        label, z = "zeta", hardy_Z_zeta
    elif cfg.disc is not None:
        spec = quadratic_spec(cfg.disc)
        label, z = spec.label, (lambda t: hardy_Z(spec, t))
    else:
        curve = _curve(cfg)
        spec = curve_spec(curve, cache_dir=cfg.cache_dir)
        label, z = spec.label, (lambda t: hardy_Z(spec, t))
        ratio_rank = curve.rank or 0
        if ratio_rank > 0:
            header.append('Z_over_prediction')
    rows = []
    for t in ts.tolist():
        value = z(t)
        row = [t, value]
        if ratio_rank > 0:
            predicted = rank_ratio_prediction(curve, ratio_rank, t, corrected=not cfg.uncorrected)
            row.append(value / predicted if predicted > 0 else float('nan'))
        rows.append(row)
    logger.info(f"Sampled Z for {label} at {len(rows)} points")
    run.csv(rows, header, function=label)


def _export_zero_list(run: _Run, zeros: ZeroList) -> None:
    path = run.path('txt')
    run.written.append(path)
    export_zero_list(zeros, Path(path), {"command": "zeros"})
    run.pdf(f"Zeros of {zeros.label}", {
        "Function": zeros.label,
        "Zeros": len(zeros),
        "Height bound": zeros.height_bound,
        "Certified complete": zeros.complete,
    }, {"Lowest ordinates": [f"{g:.10f}" for g in zeros.ordinates[:10].tolist()]})


def _zeros(run: _Run) -> None:
    cfg = run.cfg
    if cfg.zeta:
        _export_zero_list(run, zeta_zeros(T=cfg.T, count=cfg.count, parallelism=cfg.parallelism))
        return
    if cfg.T is None:
        raise ValidationError("zeros of an L-function need --T")
    if cfg.disc_range is not None:
        family = find_family_zeros(_family(cfg, zeros=True), cfg.T, parallelism=cfg.parallelism)
        rows = [(d, g) for d, zl in family.items() for g in zl.ordinates.tolist()]
        run.csv(rows, ['d', 'gamma'], summary=lowest_zero_summary(family))
        return
    spec = quadratic_spec(cfg.disc) if cfg.disc is not None else curve_spec(
        _curve(cfg), cache_dir=cfg.cache_dir)
    _export_zero_list(run, find_zeros(spec, cfg.T, parallelism=cfg.parallelism))


def _comparison_rows(hist, columns: Dict[str, np.ndarray]) -> List[list]:
    return [[a, b, v] + [float(c[i]) for c in columns.values()]
            for i, (a, b, v) in enumerate(hist.rows())]


def _density(run: _Run) -> None:
    cfg = run.cfg
    ds = _family(cfg, zeros=True)
    bw = cfg.bin_width or config.DENSITY_BIN_WIDTH
    lo = 0.0 if cfg.lo is None else cfg.lo
    hi = 20.0 if cfg.hi is None else cfg.hi
    reach = max(abs(lo), abs(hi))
    if cfg.mode == 'rescaled':
        height = reach / (math.log(min(abs(d) for d in ds)) / (2 * math.pi))
    else:
        height = reach
    family = find_family_zeros(ds, height + 1.0, parallelism=cfg.parallelism)
    hist = one_level_density(family, bw, lo, hi, cfg.mode)
    xs = np.linspace(lo, hi, 2 * len(hist) + 1)
    if cfg.mode == 'rescaled':
        full = kernel_curve('symplectic', xs)
        main = PredictionCurve(xs, np.ones_like(xs), "leading term")
    else:
        full = density_curve(xs, discriminants=ds, lower_terms=True)
        main = density_curve(xs, discriminants=ds, lower_terms=False)
    d_full, d_main = discrepancy(hist, full), discrepancy(hist, main)
    runs = sign_runs_test(d_full.per_bin)
    logger.info(f"Density L2: full {d_full.l2:.4g}, leading term {d_main.l2:.4g}")
    run.csv(_comparison_rows(hist, {"prediction": bin_averages(hist, full),
                                    "prediction_leading": bin_averages(hist, main)}),
            ['bin_left', 'bin_right', 'histogram', 'prediction', 'prediction_leading'],
            family_size=len(ds), l2_full=d_full.l2, l2_leading=d_main.l2,
            runs_p_value=runs.p_value, lowest_zeros=lowest_zero_summary(family))


def _paircorr_zeros(cfg: JobConfig) -> ZeroList:
    if cfg.zeros_file is not None:
        zeros = read_zero_table(cfg.zeros_file)
        return zeros.first(cfg.count) if cfg.count is not None and cfg.count < len(zeros) else zeros
    if cfg.T is None and cfg.count is None:
        raise ValidationError("paircorr needs --zeros, --T or --count")
    return zeta_zeros(T=cfg.T, count=cfg.count, parallelism=cfg.parallelism)


def _paircorr(run: _Run) -> None:
    cfg = run.cfg
    zeros = _paircorr_zeros(cfg)
    bw = cfg.bin_width or config.PAIRCORR_BIN_WIDTH
    lo = (0.0 if cfg.mode == 'montgomery' else -3.0) if cfg.lo is None else cfg.lo
    hi = 3.0 if cfg.hi is None else cfg.hi
    hist = pair_correlation(zeros, bw, lo, hi, cfg.mode)
    extra = {"zeros": len(zeros), "T": zeros.height_bound}
    if cfg.mode == 'montgomery':
        xs = np.linspace(lo, hi, 4 * len(hist) + 1)
        full = kernel_curve('gue', xs)
        main = PredictionCurve(xs, np.ones_like(xs), "uncorrelated")
        if lo <= 0.5 and hi >= 3.0:
            chi = chi_square_against_kernel(hist, kernel_gue_pc, 0.5, 3.0)
            extra.update(chi_square=chi.statistic, chi_square_p_value=chi.p_value)
    else:
        edges = hist.edges
        T = zeros.height_bound
        full = paircorr_curve(T, edges, lower_terms=cfg.lower_terms)
        main = paircorr_curve(T, edges, lower_terms=False)
        full = PredictionCurve(full.abscissae, full.values / bw, full.label, full.metadata)
        main = PredictionCurve(main.abscissae, main.values / bw, main.label, main.metadata)
    d_full, d_main = discrepancy(hist, full), discrepancy(hist, main)
    logger.info(f"Pair correlation L2: full {d_full.l2:.4g}, main term {d_main.l2:.4g}")
    extra.update(l2_full=d_full.l2, l2_main=d_main.l2)
    run.csv(_comparison_rows(hist, {"prediction": bin_averages(hist, full),
                                    "prediction_main": bin_averages(hist, main)}),
            ['bin_left', 'bin_right', 'histogram', 'prediction', 'prediction_main'], **extra)


def _predict(run: _Run) -> None:
    cfg = run.cfg
    if cfg.kind == 'one-line':
        curves = one_line_curves(_t_grid(cfg))
        names = list(curves)
        ts = curves[names[0]].abscissae.tolist()
        rows = [[t] + [float(curves[n].values[i]) for n in names] for i, t in enumerate(ts)]
        run.csv(rows, ['t'] + names)
        return
    if cfg.kind == 'rank-ratio':
        curve = _curve(cfg)
        pred = rank_ratio_curve(curve, _rank(curve, cfg), _t_grid(cfg), corrected=not cfg.uncorrected)
    elif cfg.kind == 'density':
        ts = _t_grid(cfg)
        if cfg.disc_range is not None:
            pred = density_curve(ts, discriminants=_family(cfg), lower_terms=cfg.lower_terms)
        elif cfg.disc is not None:
            pred = density_curve(ts, d=cfg.disc, lower_terms=cfg.lower_terms)
        else:
            raise ValidationError("density prediction needs --disc or --disc-range")
    elif cfg.kind == 'paircorr':
        if cfg.T is None:
            raise ValidationError("pair-correlation prediction needs --T")
        bw = cfg.bin_width or config.PAIRCORR_BIN_WIDTH
        lo = -3.0 if cfg.lo is None else cfg.lo
        hi = 3.0 if cfg.hi is None else cfg.hi
        edges = lo + bw * np.arange(int(round((hi - lo) / bw)) + 1)
        pred = paircorr_curve(cfg.T, edges, lower_terms=cfg.lower_terms)
    else:
        pred = kernel_curve(cfg.kernel, _t_grid(cfg))
    run.csv(pred.rows(), ['x', 'value', 'label'], label=pred.label)


def _discriminants(run: _Run) -> None:
    cfg = run.cfg
    lo, hi = cfg.disc_range
    if cfg.prime_window:
        count = len(prime_discriminants(lo, hi))
        kind = "prime |d|"
    else:
        count = len(enumerate_fundamental_discriminants(lo, hi, sign=cfg.sign))
        kind = f"fundamental ({cfg.sign})"
    logger.info(f"{count} {kind} discriminants in ({lo}, {hi})")
    run.json({"range": [lo, hi], "kind": kind, "count": count})


def _history(run: _Run) -> None:
    from rich.console import Console
    from rich.table import Table

    stats = RunHistory.get_stats(run.cfg.cache_dir)
    table = Table(title="RankSpike run history")
    table.add_column("Field")
    table.add_column("Value")
    for key in ("total_runs", "failed_runs", "last_run"):
        table.add_row(key, str(stats[key]))
    for name, n in sorted(stats["by_command"].items()):
        table.add_row(f"runs: {name}", str(n))
    Console().print(table)
    if run.cfg.output is not None:
        run.json(stats)


COMMANDS: Dict[str, Callable[[_Run], None]] = {
    'aptable': _aptable,
    'bias': _bias,
    'zplot': _zplot,
    'zeros': _zeros,
    'density': _density,
    'paircorr': _paircorr,
    'predict': _predict,
    'discriminants': _discriminants,
    'history': _history,
}

REQUIRED = {
    'aptable': ('X', ('curve', 'curve_file')),
    'bias': ('curve', 'X'),
    'zplot': ('t_range', ('zeta', 'disc', 'curve')),
    'zeros': (('zeta', 'disc', 'curve', 'disc_range'),),
    'density': ('disc_range',),
    'discriminants': ('disc_range',),
}


def run(cfg: JobConfig) -> RunResult:
    """
    Run one subcommand.

    Library errors become a RunResult carrying their exit status and code;
    files written before the failure are removed.

    Returns:
        RunResult with the artifacts written
    """
    job = _Run(cfg)
    try:
        cfg.validate()
        logger.info(f"Running {cfg.command}")
        COMMANDS[cfg.command](job)
        result = RunResult(0, None, "ok", list(job.written))
        logger.info(f"{cfg.command} complete: {len(job.written)} artifacts")
    except RankSpikeError as e:
        logger.error(f"{cfg.command} failed [{e.code}]: {e.message}")
        job.cleanup()
        result = RunResult(e.exit_status, e.code, e.message, [])
    except OSError as e:
        logger.error(f"{cfg.command} failed writing output: {e}")
        job.cleanup()
        result = RunResult(1, "io", str(e), [])
    if cfg.command != 'history' and cfg.cache_dir is not None:
        RunHistory.save_run(cfg.command, result.exit_status, result.artifacts, result.error_code,
                            cfg.cache_dir)
    return result
