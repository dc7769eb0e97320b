"""Resumable parameter sweeps over (delta, d, tau_sig) grids.

Output is a CSV file whose first line is ``# {json}`` carrying the sweep
spec and grid fingerprint, followed by a header row and one row per grid
point sorted by (delta, d, tau_sig). Failed points keep NaN metrics and a
reason so the surfaces stay rectangular.
"""
import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .bound import DEFAULT_BOUND_N
from .errors import InvalidArgumentError, InvalidStateError, SweepConflictError, SweepParseError
from .fields import ControlParams, MemoryParams
from .optimizer import OptResult, cached_eta_opt, optimize_control, optimize_theta_only
from .protocols import adiabaticity, classify, label_for
from .shapeopt import compare_methods
from .solver import DEFAULT_NZ, DEFAULT_STEP_DIVISOR, GridSpec, solve

log = logging.getLogger(__name__)

MODES = ("full_opt", "theta_only", "fixed_2pi", "compare_shapes")
COLUMNS = (
    "delta", "d", "tau_sig", "theta", "delay", "tau_ctrl", "eta", "eta_opt",
    "eta_ratio", "adiabaticity", "c_tilde", "label", "n_evals", "converged",
    "grid_fingerprint", "status", "reason",
)
WORKERS_ENV = "LAMBDAMEM_WORKERS"
DESK_D = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0)
DESK_TAU = (0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5)


def default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _strictly_increasing(name, values, positive):
    if not values:
        raise InvalidArgumentError(f"{name} must be non-empty")
    for a, b in zip(values, values[1:]):
        if not b > a:
            raise InvalidArgumentError(f"{name} must be strictly increasing")
    if positive and values[0] <= 0:
        raise InvalidArgumentError(f"{name} must be positive")
    if not all(math.isfinite(v) for v in values):
        raise InvalidArgumentError(f"{name} must be finite")


@dataclass(frozen=True)
class SweepSpec:
    d_values: tuple
    tau_values: tuple
    delta_values: tuple = (0.0,)
    mode: str = "full_opt"
    n_z: int = DEFAULT_NZ
    step_divisor: float = DEFAULT_STEP_DIVISOR
    bound_n: int = DEFAULT_BOUND_N
    output: str = None
    workers: int = field(default_factory=default_workers)

    def __post_init__(self):
        for name in ("d_values", "tau_values", "delta_values"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        _strictly_increasing("d_values", self.d_values, True)
        _strictly_increasing("tau_values", self.tau_values, True)
        _strictly_increasing("delta_values", self.delta_values, False)
        if self.mode not in MODES:
            raise InvalidArgumentError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.workers < 1:
            raise InvalidArgumentError("workers must be >= 1")

    @property
    def grids(self):
        return GridSpec(self.n_z, self.step_divisor)

    @property
    def n_points(self):
        return len(self.d_values) * len(self.tau_values) * len(self.delta_values)

    def points(self):
        return [(dl, d, t) for dl in self.delta_values for d in self.d_values for t in self.tau_values]

    def identity(self):
        """Fields that determine the results (not where or how fast)."""
        out = asdict(self)
        out.pop("output")
        out.pop("workers")
        for k in ("d_values", "tau_values", "delta_values"):
            out[k] = list(out[k])
        return out

    @classmethod
    def from_dict(cls, data, **overrides):
        data = {**data, **overrides}
        return cls(**data)

    @classmethod
    def desk_grid(cls, **kw):
        return cls(d_values=DESK_D, tau_values=DESK_TAU, **kw)


@dataclass(frozen=True)
class SweepRecord:
    delta: float
    d: float
    tau_sig: float
    theta: float
    delay: float
    tau_ctrl: float
    eta: float
    eta_opt: float
    eta_ratio: float
    adiabaticity: float
    c_tilde: float
    label: str
    n_evals: int
    converged: bool
    grid_fingerprint: str
    status: str = "ok"
    reason: str = ""

    @property
    def key(self):
        return (self.delta, self.d, self.tau_sig)

    def row(self):
        out = []
        for name in COLUMNS:
            v = getattr(self, name)
            if isinstance(v, bool):
                out.append("true" if v else "false")
            elif isinstance(v, float):
                out.append(repr(float(v)))
            else:
                out.append(str(v))
        return out

    @classmethod
    def from_row(cls, row, line):
        if len(row) != len(COLUMNS):
            raise SweepParseError(line, f"expected {len(COLUMNS)} columns, got {len(row)}")
        vals = dict(zip(COLUMNS, row))
        try:
            rec = cls(
                delta=float(vals["delta"]), d=float(vals["d"]), tau_sig=float(vals["tau_sig"]),
                theta=float(vals["theta"]), delay=float(vals["delay"]),
                tau_ctrl=float(vals["tau_ctrl"]), eta=float(vals["eta"]),
                eta_opt=float(vals["eta_opt"]), eta_ratio=float(vals["eta_ratio"]),
                adiabaticity=float(vals["adiabaticity"]), c_tilde=float(vals["c_tilde"]),
                label=vals["label"], n_evals=int(vals["n_evals"]),
                converged={"true": True, "false": False}[vals["converged"]],
                grid_fingerprint=vals["grid_fingerprint"], status=vals["status"],
                reason=vals["reason"],
            )
        except (ValueError, KeyError) as exc:
            raise SweepParseError(line, f"malformed value ({exc})") from None
        rec.validate(line)
        return rec

    def validate(self, line=None):
        if self.status not in ("ok", "failed"):
            raise SweepParseError(line, f"unknown status {self.status!r}")
        if self.status == "ok":
            if abs(self.eta_ratio - self.eta / self.eta_opt) > 1e-12:
                raise SweepParseError(line, "eta_ratio does not equal eta / eta_opt")


def _failed(delta, d, tau, fingerprint, reason):
    nan = math.nan
    return SweepRecord(
        delta=delta, d=d, tau_sig=tau, theta=nan, delay=nan, tau_ctrl=nan, eta=nan,
        eta_opt=nan, eta_ratio=nan, adiabaticity=d * tau, c_tilde=nan, label="",
        n_evals=0, converged=False, grid_fingerprint=fingerprint, status="failed",
        reason=reason,
    )


def evaluate_point(spec, delta, d, tau):
    """Compute one sweep record; exceptions become failed rows."""
    grids = spec.grids
    fp = grids.fingerprint
    try:
        m = MemoryParams(d, tau, delta)
        reason = ""
        res = None
        if spec.mode == "fixed_2pi":
            g = ControlParams(2 * math.pi, 0.0, tau)
            res = solve(m, g, grids)
            eta, n_evals, converged = res.eta, 1, True
        elif spec.mode == "compare_shapes":
            cmp = compare_methods(d, [tau], grids, bound_n=spec.bound_n, delta=delta)[0]
            # the shaped efficiency fills eta; the Gaussian optimum rides in reason
            reason = f"gaussian_eta={cmp.gaussian_eta!r};shape_control={cmp.shape_label}"
            g, eta = cmp.shape_g, cmp.shape_eta
            n_evals, converged = cmp.n_evals, cmp.converged
        else:
            if spec.mode == "theta_only":
                opt = optimize_theta_only(m, grids, bound_n=spec.bound_n)
            else:
                opt = optimize_control(m, grids, bound_n=spec.bound_n)
            g, eta, n_evals, converged = opt.best_g, opt.eta, opt.n_evals, opt.converged
        eta_opt = cached_eta_opt(d, spec.bound_n)
        try:
            opt = OptResult(g, eta, eta_opt, n_evals, converged, "")
            diag = classify(m, opt, res, grids)
            c_tilde, label = diag.normalized_character, diag.label
        except (InvalidStateError, InvalidArgumentError) as exc:
            # empty spin wave: band label only
            log.debug("character ratio unavailable at %s: %s", m, exc)
            c_tilde = math.nan
            label = label_for(adiabaticity(m), c_tilde)
        return SweepRecord(
            delta=delta, d=d, tau_sig=tau, theta=float(g.theta), delay=float(g.delay),
            tau_ctrl=float(g.tau_ctrl), eta=float(eta), eta_opt=float(eta_opt),
            eta_ratio=float(eta) / float(eta_opt), adiabaticity=d * tau,
            c_tilde=float(c_tilde), label=label, n_evals=int(n_evals),
            converged=bool(converged), grid_fingerprint=fp, reason=reason,
        )
    except Exception as exc:
        log.warning("sweep point (delta=%g, d=%g, tau=%g) failed: %s", delta, d, tau, exc)
        return _failed(delta, d, tau, fp, f"{type(exc).__name__}: {exc}")


def _header(spec):
    meta = {"spec": spec.identity(), "grid_fingerprint": spec.grids.fingerprint}
    return "# " + json.dumps(meta, sort_keys=True) + "\n"


def format_records(spec, records):
    buf = io.StringIO()
    buf.write(_header(spec))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for rec in sorted(records, key=lambda r: r.key):
        w.writerow(rec.row())
    return buf.getvalue()


def read_sweep(path):
    """Parse a sweep file into (spec identity dict, fingerprint, records)."""
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("# "):
        raise SweepParseError(1, "missing JSON header line")
    try:
        meta = json.loads(lines[0][2:])
        ident, fp = meta["spec"], meta["grid_fingerprint"]
    except (ValueError, KeyError) as exc:
        raise SweepParseError(1, f"bad JSON header ({exc})") from None
    if len(lines) < 2 or tuple(next(csv.reader([lines[1]]))) != COLUMNS:
        raise SweepParseError(2, "missing or wrong column header")
    records = {}
    for lineno, row in enumerate(csv.reader(lines[2:]), start=3):
        if not row:
            continue
        rec = SweepRecord.from_row(row, lineno)
        if rec.key in records:
            raise SweepParseError(lineno, f"duplicate point {rec.key}")
        records[rec.key] = rec
    return ident, fp, list(records.values())


def resume(path, spec=None):
    """Spec stored in ``path`` and the set of completed (delta, d, tau) keys.

    Raises SweepConflictError when ``spec`` disagrees with the file.
    """
    ident, fp, records = read_sweep(path)
    stored = SweepSpec.from_dict(ident, output=str(path))
    if spec is not None and (spec.identity() != stored.identity() or fp != spec.grids.fingerprint):
        raise SweepConflictError(f"{path} was written by a different sweep spec")
    return stored, {r.key for r in records}


def run_sweep(spec, progress=None):
    """Evaluate every grid point, skipping those already in the output file.

    Returns records sorted by (delta, d, tau_sig). With ``spec.output`` set
    the file is appended to as points finish and rewritten sorted at the end.
    """
    log.info("sweep %s: %d points (%s)", spec.mode, spec.n_points, spec.grids.fingerprint)
    done = {}
    out = spec.output
    if out is not None:
        if os.path.exists(out) and os.path.getsize(out) > 0:
            resume(out, spec)
            done = {r.key: r for r in read_sweep(out)[2]}
        else:
            with open(out, "w", newline="") as fh:
                fh.write(format_records(spec, []))
    todo = [p for p in spec.points() if p not in done]
    log.info("%d points already complete, %d to compute", len(done), len(todo))

    def finish(rec):
        done[rec.key] = rec
        if out is not None:
            with open(out, "a", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerow(rec.row())
        if progress is not None:
            progress(rec)

    if spec.workers == 1 or len(todo) <= 1:
        for p in todo:
            finish(evaluate_point(spec, *p))
    else:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            futures = [pool.submit(evaluate_point, spec, *p) for p in todo]
            for fut in futures:
                finish(fut.result())
    records = sorted(done.values(), key=lambda r: r.key)
    if out is not None:
        tmp = out + ".tmp"
        with open(tmp, "w", newline="") as fh:
            fh.write(format_records(spec, records))
        os.replace(tmp, out)
    return records
