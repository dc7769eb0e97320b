import math

import pytest

from lambdamem.errors import InvalidArgumentError, SweepConflictError, SweepParseError
from lambdamem.sweep import COLUMNS, SweepSpec, read_sweep, resume, run_sweep


def small_spec(tmp_path=None, name="s.csv", **kw):
    base = dict(d_values=(2.0, 10.0), tau_values=(0.25, 0.5, 1.0), delta_values=(0.0, 1.0),
                mode="fixed_2pi", bound_n=400, workers=1)
    base.update(kw)
    if tmp_path is not None:
        base["output"] = str(tmp_path / name)
    return SweepSpec(**base)


def test_cardinality_and_order(tmp_path):
    spec = small_spec(tmp_path)
    recs = run_sweep(spec)
    assert len(recs) == spec.n_points == 12
    keys = [r.key for r in recs]
    assert keys == sorted(keys)
    lines = open(spec.output).read().splitlines()
    assert lines[0].startswith("# {") and "nz48-div20" in lines[0]
    assert tuple(lines[1].split(",")) == COLUMNS
    assert len(lines) == 14
    for r in recs:
        assert r.status == "ok" and 0 <= r.eta <= 1
        assert r.eta_ratio == r.eta / r.eta_opt
        assert r.adiabaticity == r.d * r.tau_sig


def test_deterministic_bytes(tmp_path):
    run_sweep(small_spec(tmp_path, "a.csv"))
    run_sweep(small_spec(tmp_path, "b.csv"))
    a = (tmp_path / "a.csv").read_bytes()
    b = (tmp_path / "b.csv").read_bytes()
    assert a.split(b"\n", 1)[1] == b.split(b"\n", 1)[1]


def test_parallel_matches_serial(tmp_path):
    serial = run_sweep(small_spec(tmp_path, "a.csv"))
    parallel = run_sweep(small_spec(tmp_path, "b.csv", workers=2))
    assert serial == parallel
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_resume_skips_done_points(tmp_path):
    spec = small_spec(tmp_path)
    full = run_sweep(spec)
    text = open(spec.output).read().splitlines()
    with open(spec.output, "w") as fh:
        fh.write("\n".join(text[:7]) + "\n")
    stored, done = resume(spec.output, spec)
    assert len(done) == 5 and stored.identity() == spec.identity()
    seen = []
    again = run_sweep(spec, progress=seen.append)
    assert len(seen) == 7
    assert again == full


def test_conflicting_spec(tmp_path):
    spec = small_spec(tmp_path)
    run_sweep(spec)
    with pytest.raises(SweepConflictError):
        run_sweep(small_spec(tmp_path, n_z=32))
    with pytest.raises(SweepConflictError):
        run_sweep(small_spec(tmp_path, mode="theta_only"))


def test_parse_error_names_line(tmp_path):
    spec = small_spec(tmp_path)
    run_sweep(spec)
    lines = open(spec.output).read().splitlines()
    lines[4] = lines[4].replace(",ok,", ",maybe,")
    with open(spec.output, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    with pytest.raises(SweepParseError) as exc:
        read_sweep(spec.output)
    assert exc.value.line == 5
    lines[4] = "1,2,3"
    with open(spec.output, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    with pytest.raises(SweepParseError, match="line 5"):
        resume(spec.output)


def test_unwritable_output_fails_fast(tmp_path):
    calls = []
    spec = small_spec(None, output=str(tmp_path / "missing" / "x.csv"))
    with pytest.raises(OSError):
        run_sweep(spec, progress=calls.append)
    assert calls == []


def test_invalid_specs():
    with pytest.raises(InvalidArgumentError):
        small_spec(d_values=(5.0, 2.0))
    with pytest.raises(InvalidArgumentError):
        small_spec(tau_values=(0.0, 1.0))
    with pytest.raises(InvalidArgumentError):
        small_spec(mode="nope")
    with pytest.raises(InvalidArgumentError):
        small_spec(d_values=())


def test_failed_point_becomes_row(monkeypatch):
    import lambdamem.sweep as sw

    def boom(*a, **k):
        raise FloatingPointError("blew up")

    monkeypatch.setattr(sw, "solve", boom)
    (rec,) = run_sweep(small_spec(d_values=(2.0,), tau_values=(0.5,), delta_values=(0.0,)))
    assert rec.status == "failed" and "blew up" in rec.reason and math.isnan(rec.eta)


def test_optimizing_modes_small():
    spec = small_spec(d_values=(10.0,), tau_values=(0.5,), delta_values=(0.0,), mode="theta_only")
    (rec,) = run_sweep(spec)
    fixed = run_sweep(small_spec(d_values=(10.0,), tau_values=(0.5,), delta_values=(0.0,)))[0]
    assert rec.eta >= fixed.eta
    assert rec.label in ("ats", "eit")
