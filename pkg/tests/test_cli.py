"""Command-line behavior: flags, formats, exit codes, determinism."""

import io
import json
import subprocess
import sys

import pytest

from sbitmap.cli import main


@pytest.fixture(scope="module")
def flow_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("streams") / "flows.txt"
    with open(path, "wb") as fh:
        for i in range(100000):
            fh.write(b"flow-%06d\n" % i)
    return str(path)


@pytest.fixture()
def small_file(tmp_path):
    path = tmp_path / "items.txt"
    with open(path, "wb") as fh:
        for i in range(3000):
            fh.write(b"item-%05d\n" % i)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_dimension_solves_bit_budget(capsys):
    code, out, err = run(
        capsys, "dimension", "--memory-bits", "8000", "--max-cardinality", "1000000"
    )
    assert code == 0 and err == ""
    fields = dict(line.split(" = ") for line in out.strip().splitlines())
    assert float(fields["C"]) == pytest.approx(2026.44, abs=0.5)
    assert float(fields["epsilon"]) == pytest.approx(0.022, abs=5e-4)
    assert int(fields["m"]) == 8000


def test_dimension_solves_target_error(capsys):
    code, out, _ = run(
        capsys, "dimension", "--epsilon", "0.01", "--max-cardinality", "1e6"
    )
    assert code == 0
    fields = dict(line.split(" = ") for line in out.strip().splitlines())
    assert int(fields["m"]) == 31520


def test_dimension_json(capsys):
    code, out, _ = run(
        capsys, "dimension", "--json", "--memory-bits", "4000",
        "--max-cardinality", "2^20",
    )
    assert code == 0
    info = json.loads(out)
    assert info["m"] == 4000 and info["b_max"] == 3542
    assert info["C"] == pytest.approx(915.66, abs=0.05)


def test_dimension_infeasible_exits_one(capsys):
    code, _, err = run(
        capsys, "dimension", "--memory-bits", "8", "--max-cardinality", "1e9"
    )
    assert code == 1
    assert "20" in err  # minimal feasible bit count is part of the message


def test_dimension_needs_exactly_one_sizing_flag(capsys):
    code, _, _ = run(
        capsys, "dimension", "--memory-bits", "4000", "--epsilon", "0.03",
        "--max-cardinality", "1e6",
    )
    assert code == 1
    code, _, _ = run(capsys, "dimension", "--max-cardinality", "1e6")
    assert code == 1


def test_bad_count_token_exits_one(capsys):
    code, _, _ = run(
        capsys, "dimension", "--memory-bits", "half", "--max-cardinality", "1e6"
    )
    assert code == 1


def test_unknown_subcommand_exits_one(capsys):
    assert run(capsys, "frobnicate")[0] == 1


def test_rates_csv(capsys):
    code, out, _ = run(
        capsys, "rates", "--memory-bits", "64", "--max-cardinality", "500"
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "k,p,q,t"
    assert len(lines) == 65
    k, p, q, t = lines[1].split(",")
    assert k == "1"
    assert float(p) == float(q)  # q_1 = (1 - 0/m) p_1
    assert float(t) == pytest.approx(1 / float(q), rel=1e-10)


def test_dimension_dump_rates(capsys):
    code, out, _ = run(
        capsys, "dimension", "--memory-bits", "64", "--max-cardinality", "500",
        "--dump-rates",
    )
    assert code == 0
    assert "k,p,q,t" in out


def test_count_flat_golden(capsys, flow_file):
    # Pinned at bring-up: 10^5 distinct lines through an 8000-bit
    # sketch at seed 0. The estimate must stay within 3 epsilon of
    # truth (epsilon = 2.2%) and must never drift between releases.
    code, out, err = run(
        capsys, "count", flow_file, "--memory-bits", "8000",
        "--max-cardinality", "1e6", "--seed", "0",
    )
    assert code == 0 and err == ""
    lines = out.strip().splitlines()
    assert lines[0] == "n_hat,fill,saturated"
    n_hat, fill, saturated = lines[1].split(",")
    assert float(n_hat) == pytest.approx(97737.6937, abs=0.01)
    assert int(fill) == 4640
    assert saturated == "false"
    assert abs(float(n_hat) - 10**5) < 3 * 0.0222 * 10**5


def test_count_is_deterministic(capsys, small_file):
    args = ("count", small_file, "--memory-bits", "4000",
            "--max-cardinality", "2^20", "--seed", "9")
    first = run(capsys, *args)
    second = run(capsys, *args)
    assert first == second


def test_count_duplicated_input_gives_identical_output(capsys, small_file, tmp_path):
    doubled = tmp_path / "doubled.txt"
    raw = open(small_file, "rb").read()
    with open(doubled, "wb") as fh:
        fh.write(raw)
        fh.write(raw)
    base = run(capsys, "count", small_file, "--memory-bits", "4000",
               "--max-cardinality", "2^20", "--seed", "3")
    dup = run(capsys, "count", str(doubled), "--memory-bits", "4000",
              "--max-cardinality", "2^20", "--seed", "3")
    assert base == dup


def test_count_empty_input(capsys, tmp_path):
    empty = tmp_path / "empty.txt"
    empty.touch()
    code, out, _ = run(capsys, "count", str(empty), "--memory-bits", "4000",
                       "--max-cardinality", "2^20")
    assert code == 0
    assert out.strip().splitlines()[1] == "0,0,false"


def test_count_reads_stdin(capsys, monkeypatch):
    monkeypatch.setattr(
        sys, "stdin",
        type("S", (), {"buffer": io.BytesIO(b"a\nb\nc\n")})(),
    )
    code, out, _ = run(capsys, "count", "-", "--memory-bits", "4000",
                       "--max-cardinality", "2^20", "--seed", "0")
    assert code == 0
    assert int(out.strip().splitlines()[1].split(",")[1]) <= 3


def test_count_json(capsys, small_file):
    code, out, _ = run(capsys, "count", small_file, "--json",
                       "--memory-bits", "4000", "--max-cardinality", "2^20",
                       "--seed", "3")
    assert code == 0
    info = json.loads(out)
    assert set(info) == {"n_hat", "fill", "saturated"}
    assert info["n_hat"] == pytest.approx(3000, rel=0.15)


def test_count_env_seed_matches_flag(capsys, small_file, monkeypatch):
    flag = run(capsys, "count", small_file, "--memory-bits", "4000",
               "--max-cardinality", "2^20", "--seed", "17")
    monkeypatch.setenv("SBITMAP_SEED", "17")
    env = run(capsys, "count", small_file, "--memory-bits", "4000",
              "--max-cardinality", "2^20")
    assert flag == env
    monkeypatch.setenv("SBITMAP_SEED", "18")
    other = run(capsys, "count", small_file, "--memory-bits", "4000",
                "--max-cardinality", "2^20")
    assert other != env


def test_keyed_count_partitions_independently(capsys, tmp_path):
    # Interleaved keys must estimate exactly as standalone sketches fed
    # only their own items.
    keyed = tmp_path / "keyed.txt"
    only_a = tmp_path / "a.txt"
    with open(keyed, "wb") as kf, open(only_a, "wb") as af:
        for i in range(2000):
            kf.write(b"a\tpacket-%05d\n" % i)
            af.write(b"packet-%05d\n" % i)
            if i % 2 == 0:
                kf.write(b"b\tpacket-%05d\n" % i)
    code, out, err = run(capsys, "count", str(keyed), "--keyed",
                         "--memory-bits", "4000", "--max-cardinality", "2^20",
                         "--seed", "5")
    assert code == 0 and err == ""
    lines = out.strip().splitlines()
    assert lines[0] == "key,n_hat,fill,saturated"
    rows = dict(line.split(",", 1) for line in lines[1:])
    assert list(rows) == ["a", "b"]

    code, flat_out, _ = run(capsys, "count", str(only_a),
                            "--memory-bits", "4000", "--max-cardinality", "2^20",
                            "--seed", "5")
    assert rows["a"] == flat_out.strip().splitlines()[1]


def test_keyed_count_reports_malformed_lines(capsys, tmp_path):
    path = tmp_path / "mixed.txt"
    with open(path, "wb") as fh:
        fh.write(b"a\tgood\n")
        fh.write(b"no tab here\n")
        fh.write(b"also bad\n")
        fh.write(b"a\tanother\n")
    code, out, err = run(capsys, "count", str(path), "--keyed",
                         "--memory-bits", "4000", "--max-cardinality", "2^20")
    assert code == 0
    assert "2 malformed" in err
    assert out.startswith("key,n_hat,fill,saturated")


def test_keyed_count_key_cap_is_fatal(capsys, tmp_path):
    path = tmp_path / "many.txt"
    with open(path, "wb") as fh:
        for i in range(5):
            fh.write(b"key-%d\titem\n" % i)
    code, _, err = run(capsys, "count", str(path), "--keyed", "--max-keys", "3",
                       "--memory-bits", "4000", "--max-cardinality", "2^20")
    assert code == 2
    assert "3" in err


def test_keyed_count_json(capsys, tmp_path):
    path = tmp_path / "k.txt"
    with open(path, "wb") as fh:
        fh.write(b"x\ti1\nx\ti2\ny\ti1\n")
    code, out, _ = run(capsys, "count", str(path), "--keyed", "--json",
                       "--memory-bits", "4000", "--max-cardinality", "2^20")
    assert code == 0
    rows = json.loads(out)
    assert [row["key"] for row in rows] == ["x", "y"]
    assert all(set(row) == {"key", "n_hat", "fill", "saturated"} for row in rows)


def test_missing_input_file_exits_two(capsys):
    code, _, err = run(capsys, "count", "/no/such/file", "--memory-bits", "4000",
                       "--max-cardinality", "2^20")
    assert code == 2
    assert err != ""


def test_simulate_smoke(capsys):
    args = ("simulate", "--memory-bits", "1000", "--max-cardinality", "2^16",
            "--n-grid", "64,256", "--replicates", "20", "--seed", "1")
    code, out, _ = run(capsys, *args)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,replicates,mean,l1,rrmse,q99,theory"
    assert len(lines) == 3
    again = run(capsys, *args)
    assert again[1] == out


def test_simulate_writes_file(tmp_path, capsys):
    out_path = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "simulate", "--memory-bits", "1000",
                     "--max-cardinality", "2^16", "--n-grid", "64",
                     "--replicates", "20", "--out", str(out_path))
    assert code == 0
    assert out_path.read_text().startswith("n,replicates,")


def test_compare_memory_table(capsys):
    code, out, _ = run(capsys, "compare", "--table", "memory",
                       "--epsilons", "0.03", "--Ns", "1e4..1e6")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "epsilon,N,sbitmap_bits,hll_bits,ratio"
    assert lines[1].startswith("0.03,10000,2193,4807,")
    assert lines[3].startswith("0.03,1000000,4724,6009,")


def test_compare_memory_table_needs_axes(capsys):
    assert run(capsys, "compare", "--table", "memory")[0] == 1


def test_compare_sweep_smoke(capsys):
    code, out, _ = run(capsys, "compare", "--sketches", "sbitmap,hyperloglog",
                       "--memory-bits", "1000", "--max-cardinality", "2^16",
                       "--n-grid", "256", "--replicates", "20", "--seed", "2")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("sketch,")
    assert lines[1].startswith("sbitmap,256,20,")
    assert lines[2].startswith("hyperloglog,256,20,")


def test_compare_sweep_needs_memory(capsys):
    assert run(capsys, "compare", "--sketches", "sbitmap")[0] == 1


def test_console_script_entry_point():
    result = subprocess.run(
        ["sbitmap", "dimension", "--memory-bits", "4000",
         "--max-cardinality", "2^20"],
        capture_output=True, text=True, timeout=120,
    )
    assert result.returncode == 0
    assert "epsilon" in result.stdout
