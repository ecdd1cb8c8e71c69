import pytest

from treeweave.cli import main
from treeweave.graph import Graph, complete_graph, cycle_graph, gen_gnp, write_edge_list
from treeweave.pipeline import revealed_host
from treeweave.trees import gen_random_tree, write_tree


def test_embed_success_and_verify(tmp_path, capsys):
    out = tmp_path / "emb.txt"
    assert main(["embed", "--n", "128", "--p", "0.4", "--tree", "path", "--seed", "3", "--out", str(out)]) == 0
    assert "outcome: success" in capsys.readouterr().out
    T = gen_random_tree(128, 3, "path", 3)
    write_tree(T, tmp_path / "t.txt")
    write_edge_list(revealed_host(128, 0.4, 3), tmp_path / "g.txt")
    rc = main(["verify", "--graph", str(tmp_path / "g.txt"), "--tree", str(tmp_path / "t.txt"),
               "--embedding", str(out)])
    assert rc == 0 and capsys.readouterr().out.strip() == "valid"


def test_embed_failure_exit_one(capsys):
    assert main(["embed", "--n", "64", "--p", "0", "--tree", "uniform-attachment"]) == 1
    assert "phase: embed" in capsys.readouterr().out


def test_embed_tree_file_and_params(tmp_path):
    T = gen_random_tree(60, 3, "caterpillar", 1)
    write_tree(T, tmp_path / "t.txt")
    (tmp_path / "p.txt").write_text("embed_retries=8\n")
    rc = main(["embed", "--n", "60", "--p", "0.6", "--tree", str(tmp_path / "t.txt"), "--params",
               str(tmp_path / "p.txt")])
    assert rc == 0


def test_usage_errors():
    with pytest.raises(SystemExit) as e:
        main(["embed", "--n", "10"])
    assert e.value.code == 2
    assert main(["embed", "--n", "10", "--p", "0.5", "--tree", "no-such-family"]) == 2
    assert main(["certify", "--graph", "/nonexistent/file", "--d", "1"]) == 2


def test_verify_reports_bad_embedding(tmp_path, capsys):
    T = gen_random_tree(4, 3, "path", 0)
    write_tree(T, tmp_path / "t.txt")
    write_edge_list(Graph(4, T.edges()), tmp_path / "g.txt")
    (tmp_path / "e.txt").write_text("0 1\n1 0\n2 2\n3 3\n")
    rc = main(["verify", "--graph", str(tmp_path / "g.txt"), "--tree", str(tmp_path / "t.txt"),
               "--embedding", str(tmp_path / "e.txt")])
    assert rc == 1 and "non-edge" in capsys.readouterr().out


def test_certify(tmp_path, capsys):
    write_edge_list(complete_graph(8), tmp_path / "k8.txt")
    assert main(["certify", "--graph", str(tmp_path / "k8.txt"), "--d", "1", "--mode", "exhaustive"]) == 0
    assert "holds: true" in capsys.readouterr().out
    write_edge_list(Graph(8), tmp_path / "e8.txt")
    assert main(["certify", "--graph", str(tmp_path / "e8.txt"), "--d", "1", "--mode", "exhaustive"]) == 1


def test_cover(tmp_path, capsys):
    write_edge_list(cycle_graph(6), tmp_path / "c6.txt")
    (tmp_path / "pairs.txt").write_text("0 2\n3 5\n")
    assert main(["cover", "--graph", str(tmp_path / "c6.txt"), "--pairs", str(tmp_path / "pairs.txt"),
                 "--len", "3"]) == 0
    assert capsys.readouterr().out.splitlines() == ["0 1 2", "3 4 5"]
    (tmp_path / "bad.txt").write_text("0 3\n1 4\n")
    assert main(["cover", "--graph", str(tmp_path / "c6.txt"), "--pairs", str(tmp_path / "bad.txt"),
                 "--len", "3"]) == 1


def test_cover_directed(tmp_path, capsys):
    (tmp_path / "d.txt").write_text("6 6\n0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n")
    (tmp_path / "pairs.txt").write_text("0 2\n3 5\n")
    rc = main(["cover", "--graph", str(tmp_path / "d.txt"), "--pairs", str(tmp_path / "pairs.txt"),
               "--len", "3", "--directed"])
    assert rc == 0 and capsys.readouterr().out.splitlines() == ["0 1 2", "3 4 5"]


def test_scan(tmp_path):
    (tmp_path / "cfg.txt").write_text("family=path\nn=40\np=1.0\ntrials=2\nseed=1\n")
    out = tmp_path / "scan.csv"
    assert main(["scan", "--config", str(tmp_path / "cfg.txt"), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("n,p,family") and lines[1].split(",")[5] == "2"


def test_gnp_file_round_trip_through_certify(tmp_path):
    write_edge_list(gen_gnp(60, 0.5, 1), tmp_path / "g.txt")
    assert main(["certify", "--graph", str(tmp_path / "g.txt"), "--d", "2", "--budget", "50"]) == 0
