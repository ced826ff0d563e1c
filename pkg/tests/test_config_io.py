import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lvhopf import RunConfig, Trajectory, parse_config, serialize_config
from lvhopf.config import KernelSpec, ScanConfig, with_overrides
from lvhopf.csvio import SCAN_HEADER, fmt, read_table, read_trajectory, write_scan, write_trajectory
from lvhopf.errors import ConfigError
from lvhopf.model import ModelParams
from lvhopf.simulate import SimConfig

configs = st.builds(
    RunConfig,
    model=st.builds(ModelParams, st.floats(3.5, 8.0), st.floats(0.0, 0.05)),
    kernel=st.builds(KernelSpec, st.sampled_from(["dirac", "erlang", "uniform"]), st.floats(0.0, 10.0), st.integers(1, 8)),
    sim=st.builds(
        SimConfig,
        t_end=st.floats(1.0, 1e4),
        dt=st.floats(1e-5, 0.1),
        method=st.sampled_from(["chain", "convolution"]),
        history=st.sampled_from(["constant", "perturbed"]),
        rho=st.floats(0.0, 0.5),
        output_stride=st.integers(1, 100),
    ),
    scan=st.builds(ScanConfig, st.just(0.0), st.floats(0.1, 10.0), st.integers(2, 500)),
    output=st.from_regex(r"[a-z][a-z0-9_/]{0,12}", fullmatch=True),
    seed=st.integers(0, 2**31),
)


@given(configs)
def test_round_trip(cfg):
    text = serialize_config(cfg)
    assert parse_config(text) == cfg
    assert serialize_config(parse_config(text)) == text


def test_partial_config_uses_defaults():
    cfg = parse_config("# comment\nmodel.a = 5  # trailing\n\nkernel.family = erlang\nkernel.shape = 3\nseed = 7\n")
    assert cfg.model == ModelParams(5.0, 0.01)
    assert cfg.kernel == KernelSpec("erlang", 1.0, 3)
    assert cfg.seed == 7 and cfg.sim == SimConfig()


@pytest.mark.parametrize(
    "text",
    [
        "model.b = 1",
        "nonsense",
        "model.a = four",
        "kernel.family = gamma",
        "kernel.shape = 1.5",
        "sim.dt = -1",
        "scan.n_points = 1",
        "model.H = -0.1",
    ],
)
def test_bad_config(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_overrides_shadow_file():
    cfg = parse_config("model.a = 5\nkernel.expectation = 2\n")
    out = with_overrides(cfg, H=0.002, kernel="erlang", shape=2, output="x")
    assert out.model == ModelParams(5.0, 0.002)
    assert out.kernel == KernelSpec("erlang", 2.0, 2)
    assert out.output == "x"
    with pytest.raises(ConfigError):
        with_overrides(cfg, E=-1.0)


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=8, max_size=40))
def test_trajectory_round_trip_bit_exact(tmp_path_factory, values):
    n = len(values) // 4
    arr = np.array(values[: 4 * n]).reshape(n, 4)
    traj = Trajectory(arr[:, 0], arr[:, 1:])
    path = tmp_path_factory.mktemp("csv") / "trajectory.csv"
    write_trajectory(path, traj, comments=["model.a = 4"])
    back = read_trajectory(path)
    assert np.array_equal(back.times, traj.times) and np.array_equal(back.states, traj.states)


def test_trajectory_stride_and_header(tmp_path):
    t = np.arange(11) * 0.1
    traj = Trajectory(t, np.ones((11, 3)))
    path = tmp_path / "trajectory.csv"
    write_trajectory(path, traj, comments=["a", "b"], stride=5)
    lines = path.read_text().splitlines()
    assert lines[:3] == ["# a", "# b", "t,x1,x2,x3"]
    assert len(lines) == 3 + 3


def test_scan_failed_rows(tmp_path):
    path = tmp_path / "scan.csv"
    write_scan(path, [(0.0, -0.1, 0.4, True, ""), (0.5, None, None, None, "ConvergenceFailure")])
    header, rows = read_table(path)
    assert header == SCAN_HEADER
    assert rows[1] == ["0.5", "", "", "", "ConvergenceFailure"]


def test_fmt():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(True) == "true" and fmt(np.bool_(False)) == "false"
    assert fmt(None) == "" and fmt(3) == "3" and fmt(0.0) == "0"
