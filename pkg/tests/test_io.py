import numpy as np
import pytest
from hypothesis import given, strategies as st

from streamdecomp import container
from streamdecomp.bench import Cell, PhaseDiagram
from streamdecomp.config import PROFILES, dump_config, load_config
from streamdecomp.errors import ContainerError, InvalidInputError
from streamdecomp.report import (
    SWEEP_COLUMNS, gnuplot_matrix, parse_sweep_csv, sweep_csv, text_grid,
)


def _sample(rng):
    return {"A": rng.standard_normal((7, 5)), "B": rng.standard_normal(600)}, {"seed": 3, "n": 7}


def test_container_roundtrip(rng):
    arrays, params = _sample(rng)
    out, p = container.decode(container.encode(arrays, params))
    assert p == params
    for k in arrays:
        assert np.array_equal(out[k], arrays[k])


@given(st.integers(0, 3), st.integers(0, 4))
def test_container_roundtrip_shapes(a, b):
    arrays = {"M": np.arange(a * b, dtype=float).reshape(a, b)}
    out, _ = container.decode(container.encode(arrays, {}))
    assert out["M"].shape == (a, b)


def test_container_encoding_deterministic(rng):
    arrays, params = _sample(rng)
    assert container.encode(arrays, params) == container.encode(arrays, dict(reversed(params.items())))


def test_container_payload_corruption_names_offset(rng):
    arrays, params = _sample(rng)
    buf = bytearray(container.encode(arrays, params))
    hlen = int.from_bytes(buf[8:12], "little")
    start = 16 + hlen
    buf[start + 5000] ^= 0xFF
    with pytest.raises(ContainerError, match=f"block 1.*offset {start + 4096}"):
        container.decode(bytes(buf))


@pytest.mark.parametrize("mutate, pattern", [
    (lambda b: b"XXXXXXXX" + b[8:], "magic.*offset 0"),
    (lambda b: b[:20], "truncated"),
    (lambda b: b[:14] + bytes([b[14] ^ 1]) + b[15:], "header checksum.*offset 12"),
    (lambda b: b[:-3] + b"XYZ", "end marker"),
    (lambda b: b + b"\x00", "trailing"),
])
def test_container_structural_errors(rng, mutate, pattern):
    buf = container.encode(*_sample(rng))
    with pytest.raises(ContainerError, match=pattern):
        container.decode(mutate(buf))


def _diagram():
    cells = [Cell(8, 32, 1.0, 1.0, 4), Cell(8, 51, 1.0, 1.0, 4),
             Cell(16, 32, 0.25, 0.5, 4), Cell(16, 51, 0.75, 1.0, 4)]
    return PhaseDiagram([8, 16], [32, 51], cells)


def test_sweep_csv_header_and_roundtrip():
    text = sweep_csv(_diagram())
    assert text.splitlines()[0] == "s0,m,prob_sparse,prob_lowrank,trials"
    assert parse_sweep_csv(text) == _diagram().cells


def test_parse_missing_column():
    with pytest.raises(InvalidInputError, match="missing column 'prob_lowrank'"):
        parse_sweep_csv("s0,m,prob_sparse,trials\n8,32,1.0,4\n")


def test_parse_reports_line_number():
    text = sweep_csv(_diagram()).splitlines()
    text[3] = "16,32,abc,0.5,4"
    with pytest.raises(InvalidInputError, match="line 4"):
        parse_sweep_csv("\n".join(text) + "\n")
    with pytest.raises(InvalidInputError, match="line 2"):
        parse_sweep_csv(",".join(SWEEP_COLUMNS) + "\n8,32,1.5,1.0,4\n")


def test_text_grid_layout():
    grid = text_grid(_diagram().cells, "prob_sparse").splitlines()
    assert grid[0].split() == ["s0\\m", "32", "51"]
    assert grid[2].split() == ["16", "0.25", "0.75"]
    assert len({len(line) for line in grid}) == 1


def test_gnuplot_matrix():
    lines = gnuplot_matrix(_diagram().cells, "prob_lowrank").splitlines()
    assert lines[0] == "2 32 51"
    assert lines[2] == "16 0.500000 1.000000"


def test_config_defaults_and_overrides():
    cfg = load_config(profile="desk", seed=9, output_dir="o")
    assert cfg.data.n == PROFILES["desk"]["n"] and cfg.data.master_seed == 9
    assert cfg.solver.d == cfg.data.d and cfg.output_dir == "o"
    assert load_config(profile="paper").data.m == [50 * k for k in range(1, 11)]


def test_config_dump_reload(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("version: 1\ndata: {n: 64, d: 20, s0: [4, 6], m: [30]}\nsolver: {C: 3}\n")
    cfg = load_config(str(path))
    assert (cfg.data.n, cfg.solver.C, cfg.solver.d) == (64, 3, 20)
    path.write_text(dump_config(cfg))
    assert load_config(str(path)) == cfg


@pytest.mark.parametrize("text, pattern", [
    ("version: 1\nbogus: 1\n", "unknown key"),
    ("version: 1\ndata: {nn: 3}\n", "unknown key"),
    ("version: 1\nsolver: {d: 3}\n", "unknown key"),
    ("version: 2\n", "version"),
    ("version: 1\ndata: {s0: [3]}\n", "even"),
    ("version: 1\ndata: {n: 10, m: [20]}\n", "exceed"),
    ("version: 1\nsolver: {C: 0}\n", "C"),
    ("[1, 2", "YAML"),
])
def test_config_rejects(tmp_path, text, pattern):
    path = tmp_path / "c.yaml"
    path.write_text(text)
    with pytest.raises(InvalidInputError, match=pattern):
        load_config(str(path))
