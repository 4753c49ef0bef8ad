import csv
import io

import pytest

from triplehelix.cli import run
from triplehelix.synth import SCI2000_ALL_CELLS, CorpusSpec, gen_corpus

CELL_HEADER = "name,u_only,i_only,g_only,ui,ug,ig,uig\n"
ALL_CELLS_LINE = "all,412733,15412,113617,16270,108919,4359,5201\n"


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture(scope="module")
def sci_corpus(tmp_path_factory):
    spec = CorpusSpec(20_000, coupling="explicit_cube", cube_weights=SCI2000_ALL_CELLS,
                      countries={"USA": 5, "JAPAN": 2, "FRANCE": 2, "NETHERLANDS": 1},
                      p_international=0.1, n_without_address=300, exact=True, seed=11)
    path = tmp_path_factory.mktemp("corpus") / "sci.txt"
    path.write_text(gen_corpus(spec))
    return path


def test_report_three_slices_in_table_order(sci_corpus):
    code, text = call("report", "--input", str(sci_corpus), "--slice", "all", "--slice", "USA",
                      "--slice", "JAPAN")
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "slice,number,pct_identified,t_uig_mbits,ui,ug,ig,uig,univ,industry,govern"
    got = rows(text)
    assert [r["slice"] for r in got] == ["JAPAN", "USA", "all"]
    everything = got[2]
    assert float(everything["t_uig_mbits"]) == pytest.approx(-77.0, abs=2.0)
    assert float(everything["pct_identified"]) == 100.0
    for r in got:
        assert len(r["t_uig_mbits"].split(".")[1]) == 1


def test_report_unknown_slice(sci_corpus, capsys):
    code, _ = call("report", "--input", str(sci_corpus), "--slice", "ATLANTIS")
    assert code != 0
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and "ATLANTIS" in err[0]


def test_transmission_on_cell_file(tmp_path):
    path = tmp_path / "cells.csv"
    path.write_text(CELL_HEADER + ALL_CELLS_LINE)
    code, text = call("transmission", "--input", str(path))
    assert code == 0
    (row,) = rows(text)
    assert row["t_uig_mbits"] == "-77.0"
    assert row["n"] == "676511"
    assert len(row["h_u"].split(".")[1]) == 6


def test_transmission_on_cube_file(tmp_path):
    path = tmp_path / "xor.csv"
    path.write_text("u,i,g,count\n0,0,0,25\n0,1,1,25\n1,0,1,25\n1,1,0,25\n")
    code, text = call("transmission", "--input", str(path))
    assert code == 0
    assert rows(text)[0]["t_uig_mbits"] == "-1000.0"


def test_transmission_malformed(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("u,i,g,count\n0,0,2,25\n")
    code, _ = call("transmission", "--input", str(path))
    assert code == 1
    err = capsys.readouterr().err
    assert "bad.csv:2" in err


def test_classify_and_countries(sci_corpus):
    code, text = call("classify", "--input", str(sci_corpus))
    assert code == 0
    got = rows(text)
    assert [r["label"] for r in got] == ["University", "Industry", "Government", "Unidentified", "Total"]
    assert sum(float(r["percent"]) for r in got[:4]) == pytest.approx(100.0, abs=0.2)
    code, text = call("countries", "--input", str(sci_corpus), "--counting", "fractional")
    assert code == 0
    frac = {r["country"]: float(r["count"]) for r in rows(text)}
    assert sum(frac.values()) == pytest.approx(20_000, abs=1e-3)


def test_webtrend_two_rows(tmp_path):
    path = tmp_path / "hits.csv"
    path.write_text("year,u,i,g,ui,ug,ig,uig\n1999,500,200,300,80,90,40,10\n2000,600,220,350,70,80,30,5\n")
    code, text = call("webtrend", "--input", str(path))
    assert code == 0
    traj_text, trend_text = text.split("\n\n")
    assert len(rows(traj_text)) == 2
    (trend,) = rows(trend_text)
    assert float(trend["r2"]) == 1.0
    outdir = tmp_path / "out"
    assert call("webtrend", "--input", str(path), "--out", str(outdir))[0] == 0
    assert sorted(p.name for p in outdir.iterdir()) == ["trajectory.csv", "trend.csv"]


def test_webtrend_inconsistent_counts(tmp_path, capsys):
    path = tmp_path / "hits.csv"
    path.write_text("year,u,i,g,ui,ug,ig,uig\n1999,10,10,10,5,5,5,9\n2000,10,10,10,1,1,1,0\n")
    assert call("webtrend", "--input", str(path))[0] == 1
    assert "1999" in capsys.readouterr().err


def test_systemness(tmp_path):
    path = tmp_path / "series.csv"
    path.write_text("year,UI,UG,IG\n1998,100,200,300\n1999,200,300,400\n2000,400,450,500\n")
    code, text = call("systemness", "--input", str(path), "--subset", "UI,UG,IG", "--subset", "UI,UG")
    assert code == 0
    got = rows(text)
    assert [r["subset"] for r in got] == ["UI,UG,IG", "UI,UG"]
    for r in got:
        assert float(r["systemness_mbits"]) == pytest.approx(
            float(r["info_trend_mbits"]) - float(r["info_markov_mbits"]), abs=0.011)
        assert r["verdict"] in ("corroborated", "rejected")


def test_synth_outputs_are_idempotent(tmp_path):
    cfg = tmp_path / "spec.cfg"
    cfg.write_text("kind=corpus\nn_documents=200\nyears=1999-2000\ncountries=USA:1,JAPAN:1\np_international=0.2\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert call("synth", "--input", str(cfg), "--seed", "3", "--out", str(a))[0] == 0
    assert call("synth", "--input", str(cfg), "--seed", "3", "--out", str(b))[0] == 0
    for name in ("corpus.txt", "truth_cube.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    code, first = call("report", "--input", str(a / "corpus.txt"))
    assert code == 0 and call("report", "--input", str(a / "corpus.txt"))[1] == first

    series_cfg = tmp_path / "series.cfg"
    series_cfg.write_text("kind=series\nregime=linear_T_decline\nyears=1993-2000\n")
    assert call("synth", "--input", str(series_cfg), "--out", str(tmp_path / "s"))[0] == 0
    assert (tmp_path / "s" / "hits.csv").exists() and (tmp_path / "s" / "truth_trajectory.csv").exists()


def test_missing_input_file(capsys):
    code, _ = call("classify", "--input", "/nonexistent/records.txt")
    assert code == 1
    assert "/nonexistent/records.txt" in capsys.readouterr().err


def test_config_precedence_and_env_rules(tmp_path, monkeypatch):
    corpus = tmp_path / "c.txt"
    corpus.write_text("UT A\nPY 2000\nC1 MAX PLANCK GESELL, MUNICH, GERMANY\nER\n")
    rules = tmp_path / "rules.csv"
    rules.write_text("tier_index,label,identifier\n1,Government,MAX\n")
    code, text = call("classify", "--input", str(corpus))
    assert rows(text)[3]["count"] == "1"  # unidentified with the default rules
    monkeypatch.setenv("HELIX_RULES", str(rules))
    code, text = call("classify", "--input", str(corpus))
    assert rows(text)[2]["count"] == "1"

    series = tmp_path / "series.csv"
    series.write_text("year,A,B\n1997,10,50\n1998,20,40\n1999,30,30\n")
    cfg = tmp_path / "run.cfg"
    cfg.write_text("trend-model=linear\nwindow=3\n")
    _, from_cfg = call("systemness", "--input", str(series), "--config", str(cfg))
    _, explicit = call("systemness", "--input", str(series), "--trend-model", "linear", "--window", "3")
    _, overridden = call("systemness", "--input", str(series), "--config", str(cfg), "--trend-model", "loglinear")
    _, default = call("systemness", "--input", str(series))
    assert from_cfg == explicit
    assert overridden != from_cfg
    assert default != from_cfg


def test_out_file_for_table_commands(tmp_path):
    cells = tmp_path / "cells.csv"
    cells.write_text(CELL_HEADER + ALL_CELLS_LINE)
    out = tmp_path / "t.csv"
    code, text = call("transmission", "--input", str(cells), "--out", str(out))
    assert code == 0 and text == ""
    assert rows(out.read_text())[0]["t_uig_mbits"] == "-77.0"
