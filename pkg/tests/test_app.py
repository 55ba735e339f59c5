import math
import os

import numpy as np
import pytest
from scipy.optimize import brentq

from kernelfv import problems
from kernelfv.app import cli
from kernelfv.app.config import ConfigError, load_config, parse_config
from kernelfv.app.convergence import (ConvergenceTable, GridMismatchError, eoc, l1_error,
                                      run_convergence_suite)
from kernelfv.app.exact_riemann import (VacuumError, cell_averaged_solution, exact_riemann,
                                        star_state)
from kernelfv.app.output import (CSV_HEADER, read_csv, snapshot, snapshot_name, write_snapshot)
from kernelfv.app.runner import run, scheme_options
from kernelfv.euler_state import prim_to_cons
from kernelfv.solver import Field, Grid2D, advance_to

G = 1.4
SOD_L = (1.0, 0.0, 0.0, 1.0)
SOD_R = (0.125, 0.0, 0.0, 0.1)


# -- configuration -------------------------------------------------------------------

def test_config_defaults():
    cfg = parse_config("[problem]\nname = isentropic_vortex\n[scheme]\n")
    assert cfg.scheme.radius == 2 and cfg.scheme.ell_over_delta == 5.0
    assert cfg.scheme.epsilon == 1e-40 and cfg.scheme.kxrcf_m == 1.5 and cfg.scheme.kappa == 0.4
    assert cfg.time.cfl == 1.0 and cfg.time.atol == 1e-4 and cfg.time.rtol == 1e-4


def test_config_values_and_comments():
    text = """
    # a comment
    [problem]
    name = sod        ; trailing comment
    t_final = 0.1
    [grid]
    nx = 100
    [scheme]
    radius = 3
    kxrcf = off
    time.cfl = 0.8
    """
    cfg = parse_config(text)
    assert cfg.problem.name == "sod" and cfg.problem.t_final == 0.1
    assert cfg.grid.nx == 100 and cfg.grid.ny is None
    assert cfg.scheme.radius == 3 and cfg.scheme.kxrcf is False
    assert cfg.time.cfl == 0.8


def test_config_interior_limiting():
    assert parse_config("[problem]\nname = sod\n").scheme.interior_limiting is None
    cfg = parse_config("[problem]\nname = sod\n[scheme]\ninterior_limiting = on\n")
    assert cfg.scheme.interior_limiting is True
    assert scheme_options(cfg).interior_limiting is True


def test_config_jet_default_solver():
    assert parse_config("[problem]\nname = astro_jet_high\n").riemann_solver() == "hll"
    assert parse_config("[problem]\nname = sod\n").riemann_solver() == "hllc"


def test_config_override_warns(caplog):
    cfg = parse_config("[problem]\nname = astro_jet_high\n[scheme]\nriemann = hllc\n")
    assert cfg.riemann_solver() == "hllc"
    assert any("hll" in r.getMessage() for r in caplog.records)


@pytest.mark.parametrize("text,line,fragment", [
    ("[problem]\nname = sod\n[scheme]\nradius = 4\n", 4, "unsupported radius"),
    ("[problem]\nname = sod\n[scheme]\ncolour = red\n", 4, "unknown key"),
    ("[problem]\nname = sod\n[grid]\nnx = ten\n", 4, "expected int"),
    ("[scheme]\nradius = 2\n", None, "missing problem"),
    ("[problem]\nname = sod\n[mesh]\n", 3, "unknown section"),
    ("[problem]\nname = nope\n", 2, "unknown problem"),
    ("[problem]\nname = sod\n[time]\ncfl = -1\n", 4, "positive"),
    ("[problem]\nname = sod\njust text\n", 3, "key = value"),
    ("[problem]\nname = sod\n[grid]\nnx = 50\nny = 5\n", 5, "non-square"),
    ("[problem]\nname = sod\n[scheme]\nradius = 3\n[grid]\nnx = 50\n", None, "radius"),
])
def test_config_errors(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert fragment in str(info.value)
    if line is not None:
        assert f"line {line}" in str(info.value)


def test_load_config(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[problem]\nname = sod\n", encoding="utf-8")
    assert load_config(p).problem.name == "sod"


# -- output ---------------------------------------------------------------------------

def _const_field(nx, ny, prim=(1.0, 0.25, -0.5, 0.7)):
    g = Grid2D(nx, ny, 0.5, 0.5, ghost=2)
    fld = Field.zeros(g)
    fld.interior[...] = prim_to_cons(np.array(prim), G)
    return fld


def test_csv_constant_2x2(tmp_path):
    fld = _const_field(2, 2)
    path, = write_snapshot(fld, tmp_path, 7, G)
    assert os.path.basename(path) == "snap_000007.csv"
    lines = open(path, encoding="utf-8").read().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 5
    assert len({ln.split(",", 2)[2] for ln in lines[1:]}) == 1
    # row-major by y then x
    data, flags = read_csv(path)
    assert data[:, 0].tolist() == [0.25, 0.75, 0.25, 0.75]
    assert data[:, 1].tolist() == [0.25, 0.25, 0.75, 0.75]
    assert set(flags.tolist()) <= {0, 1}


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    g = Grid2D(5, 3, 0.1, 0.1, ghost=2)
    fld = Field.zeros(g)
    V = np.stack([rng.uniform(0.5, 2, (3, 5)), rng.normal(size=(3, 5)),
                  rng.normal(size=(3, 5)), rng.uniform(0.5, 2, (3, 5))], -1)
    fld.interior[...] = prim_to_cons(V, G)
    flags = rng.integers(0, 2, (3, 5))
    path, = write_snapshot(fld, tmp_path, 0, G, flags=flags)
    data, fl = read_csv(path)
    snap = snapshot(fld, G, flags)
    expect = np.array([[float(f"{v:.9g}") for v in row] for row in snap.prim.reshape(-1, 4)])
    assert np.array_equal(data[:, 2:], expect)
    assert np.array_equal(fl, flags.ravel())
    # writing the re-read values again gives identical text
    path2, = write_snapshot(fld, tmp_path, 1, G, flags=flags)
    assert open(path, encoding="utf-8").read() == open(path2, encoding="utf-8").read()


def test_vtk_layout(tmp_path):
    fld = _const_field(3, 2)
    paths = write_snapshot(fld, tmp_path, 12, G, fmt="both")
    assert [os.path.basename(p) for p in paths] == ["snap_000012.csv", "snap_000012.vtk"]
    text = open(paths[1], encoding="utf-8").read().splitlines()
    assert text[0].startswith("# vtk DataFile")
    assert "DATASET STRUCTURED_POINTS" in text
    assert "DIMENSIONS 3 2 1" in text
    for name in ("rho", "u", "v", "p", "flag"):
        assert any(ln.startswith(f"SCALARS {name} ") for ln in text)
    i = text.index("SCALARS rho double 1")
    assert [float(v) for v in text[i + 2:i + 8]] == [1.0] * 6


def test_snapshot_name():
    assert snapshot_name(3) == "snap_000003.csv"
    assert snapshot_name(123456, "vtk") == "snap_123456.vtk"


def test_read_csv_bad_header(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(p)


# -- exact Riemann solver ------------------------------------------------------------------

def _pressure_function(p, V, gamma):
    rho, _, pk = V
    c = math.sqrt(gamma * pk / rho)
    if p > pk:
        A = 2 / ((gamma + 1) * rho)
        B = (gamma - 1) / (gamma + 1) * pk
        return (p - pk) * math.sqrt(A / (p + B))
    return 2 * c / (gamma - 1) * ((p / pk) ** ((gamma - 1) / (2 * gamma)) - 1)


def test_sod_star_pressure():
    L = (1.0, 0.0, 1.0)
    R = (0.125, 0.0, 0.1)
    # independent bracketing root of f_L + f_R + du = 0
    p_ref = brentq(lambda p: _pressure_function(p, L, G) + _pressure_function(p, R, G),
                   1e-6, 1.0, xtol=1e-15)
    star = star_state(L, R, G)
    assert star.p == pytest.approx(p_ref, rel=1e-11)
    assert star.p == pytest.approx(0.30313, abs=1e-5)
    assert star.u == pytest.approx(0.92745, abs=1e-5)


def test_exact_uniform_state():
    V = (1.3, 0.4, 0.0, 0.9)
    out = exact_riemann(V, V, G, np.linspace(-3, 3, 13))
    assert np.allclose(out, [1.3, 0.4, 0.9], rtol=1e-12)


def test_exact_contact_speed():
    star = star_state((1.0, 0.0, 1.0), (0.125, 0.0, 0.1), G)
    eps = 1e-6
    left = exact_riemann(SOD_L, SOD_R, G, star.u - eps)
    right = exact_riemann(SOD_L, SOD_R, G, star.u + eps)
    assert left[2] == pytest.approx(right[2], rel=1e-10)
    assert left[1] == pytest.approx(right[1], rel=1e-10)
    assert left[0] > right[0] + 0.1  # density jumps across the contact


def test_exact_far_field():
    out = exact_riemann(SOD_L, SOD_R, G, np.array([-5.0, 5.0]))
    assert out[0].tolist() == [1.0, 0.0, 1.0]
    assert out[1].tolist() == [0.125, 0.0, 0.1]


def test_exact_vacuum():
    with pytest.raises(VacuumError):
        star_state((1.0, -20.0, 1.0), (1.0, 20.0, 1.0), G)


def test_cell_averaged_solution_mass():
    edges = np.linspace(0, 1, 101)
    avg = cell_averaged_solution(SOD_L, SOD_R, G, edges, 0.5, 0.2)
    # mass is conserved while the waves stay inside [0, 1]
    assert avg[:, 0].sum() * 0.01 == pytest.approx(0.5 * 1.0 + 0.5 * 0.125, rel=1e-3)


# -- errors and convergence ---------------------------------------------------------------

def test_eoc_examples():
    assert eoc(1.45e-3, 2.27e-4) == pytest.approx(2.68, abs=5e-3)
    assert eoc(7.50e-5, 1.46e-6) == pytest.approx(5.68, abs=5e-3)
    with pytest.raises(ValueError):
        eoc(0.0, 1.0)


def test_l1_identical_and_mismatch():
    a = _const_field(4, 4)
    assert l1_error(a, a.copy()) == 0.0
    b = _const_field(4, 4)
    b.interior[0, 0, 0] += 2.0
    assert l1_error(a, b) == pytest.approx(2.0 * 0.25)
    assert l1_error(a, b, normalize=True) == pytest.approx(0.5 / 4.0)
    with pytest.raises(GridMismatchError):
        l1_error(a, _const_field(4, 2))
    with pytest.raises(GridMismatchError):
        l1_error(a, np.zeros((3, 4, 4)))


def test_l1_callable_reference():
    a = _const_field(4, 4, (1.0, 0.0, 0.0, 1.0))
    assert l1_error(a, lambda x, y: np.broadcast_to([1.0, 0, 0, 1.0], np.shape(x) + (4,))) \
        == pytest.approx(0.0, abs=1e-15)


def test_convergence_single_level(tmp_path):
    pb = problems.isentropic_vortex().with_params(t_final=0.2)
    table = run_convergence_suite(pb, 2, [16], out_dir=str(tmp_path))
    assert table.eocs == [None] and table.errors[0] > 0
    csv_text = (tmp_path / "convergence_isentropic_vortex_R2.csv").read_text()
    assert csv_text.splitlines()[0] == "n,l1_error,eoc,steps,seconds"
    assert csv_text.splitlines()[1].split(",")[2] == ""
    assert (tmp_path / "convergence_isentropic_vortex_R2.txt").exists()


def test_convergence_table_text():
    t = ConvergenceTable("demo", 2)
    t.add(32, 1.45e-3)
    t.add(64, 2.27e-4)
    assert t.eocs[1] == pytest.approx(2.68, abs=5e-3)
    assert "64x64" in t.to_text()


def test_convergence_rejects_problem_without_solution():
    with pytest.raises(ValueError):
        run_convergence_suite("sod", 2, [16])


def _sod_error(n):
    # four rows of square cells; y is periodic so the strip height is immaterial
    pb = problems.sod().with_params(ylim=(0.0, 4.0 / n))
    sch, fld = pb.setup(n, 4)
    fld, _ = advance_to(sch, fld, pb.t_final, pb.controls())
    edges = np.linspace(0.0, 1.0, n + 1)
    ref = cell_averaged_solution(SOD_L, SOD_R, G, edges, 0.5, pb.t_final)
    return float(np.mean(np.abs(fld.interior[..., 0] - ref[None, :, 0])))


def test_sod_error_decreases_with_refinement():
    errs = [_sod_error(n) for n in (100, 200, 400)]
    assert errs[0] > errs[1] > errs[2]


# -- runner and CLI -----------------------------------------------------------------------

SOD_CFG = """
[problem]
name = sod
t_final = 0.05
[grid]
nx = 50
[output]
every = 5
"""


def test_runner_writes_snapshots(tmp_path):
    cfg = parse_config(SOD_CFG)
    res = run(cfg, out_dir=str(tmp_path))
    names = sorted(os.path.basename(f) for f in res.files)
    assert names[0] == "snap_000000.csv"
    assert names[-1] == snapshot_name(res.stats.steps)
    assert res.field.t == 0.05


def test_determinism(tmp_path):
    cfg = parse_config(SOD_CFG)
    a = run(cfg, out_dir=str(tmp_path / "a"))
    b = run(cfg, out_dir=str(tmp_path / "b"))
    for fa, fb in zip(a.files, b.files):
        assert open(fa, "rb").read() == open(fb, "rb").read()


def test_cli_run(tmp_path, capsys):
    p = tmp_path / "sod.ini"
    p.write_text(SOD_CFG)
    assert cli.main(["run", str(p), "--out", str(tmp_path / "o"), "--until", "0.01"]) == 0
    assert "steps=" in capsys.readouterr().out


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[problem]\nname = sod\n[scheme]\nradius = 4\n")
    assert cli.main(["run", str(bad)]) == cli.EXIT_CONFIG
    assert cli.main(["run", str(tmp_path / "missing.ini")]) == cli.EXIT_IO
    assert cli.main(["convergence", "nope"]) == cli.EXIT_CONFIG


def test_cli_runtime_abort(tmp_path):
    p = tmp_path / "tiny.ini"
    p.write_text(SOD_CFG + "[time]\ndt_max = 1e-14\n")
    assert cli.main(["run", str(p), "--out", str(tmp_path / "o")]) == cli.EXIT_RUNTIME


def test_cli_list_and_dump(capsys, tmp_path):
    assert cli.main(["list-problems"]) == 0
    out = capsys.readouterr().out.split()
    assert "isentropic_vortex" in out and "astro_jet_high" in out
    assert cli.main(["dump-recon", "--radius", "2"]) == 0
    assert len(capsys.readouterr().out) > 100
    target = tmp_path / "vec.txt"
    assert cli.main(["dump-recon", "--radius", "3", "--out", str(target)]) == 0
    assert target.exists()
