use std::path::Path;
use std::process::{Command, Output};

use palette_sparse::cover::{cover_from_lists, random_cover};
use palette_sparse::graph::{gen_locally_sparse, named};
use palette_sparse::io;
use palette_sparse::rng::{stream, Purpose};
use palette_sparse::{verify_coloring, Instance, ListAssignment};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_palette-sparse")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_writes_an_audited_graph() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    let out = cli(&["gen", "--n", "50", "--delta", "8", "--k", "2", "--seed", "1", "--out", p(&g)]);
    assert!(out.status.success());
    let graph = io::load(&g, io::read_graph).unwrap();
    let r = palette_sparse::graph::local_sparsity(&graph);
    assert!(r.k_star <= 2 && r.max_degree <= 8);
}

#[test]
fn verify_cover_reports_both_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let graph = named::path(2);
    let g = dir.path().join("g.txt");
    io::save(&g, &io::write_graph(&graph)).unwrap();
    let good = dir.path().join("good.txt");
    io::save(&good, "2 4\n2 0 1\n2 2 3\n0 1 2 0 2 1 3\n").unwrap();
    let bad = dir.path().join("bad.txt");
    io::save(&bad, "2 4\n2 0 1\n2 2 3\n0 1 2 0 2 0 3\n").unwrap();
    assert_eq!(cli(&["verify-cover", "--graph", p(&g), "--cover", p(&good)]).status.code(), Some(0));
    assert_eq!(cli(&["verify-cover", "--graph", p(&g), "--cover", p(&bad)]).status.code(), Some(2));
}

#[test]
fn solve_writes_a_verifiable_coloring() {
    let dir = tempfile::tempdir().unwrap();
    let graph = gen_locally_sparse(80, 6, 2, 3).unwrap();
    let g = dir.path().join("g.txt");
    io::save(&g, &io::write_graph(&graph)).unwrap();
    let cov = random_cover(&graph, 7, 1.0, &mut stream(1, Purpose::RandomCover));
    let c = dir.path().join("c.txt");
    io::save(&c, &io::write_cover(&cov)).unwrap();
    let col = dir.path().join("phi.txt");
    let out = cli(&["solve", "--graph", p(&g), "--cover", p(&c), "--seed", "2", "--out", p(&col)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let phi = io::load(&col, io::read_coloring).unwrap();
    assert!(verify_coloring(&graph, &Instance::Cover(cov), &phi).passed());
}

#[test]
fn unsolvable_instance_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("k3.txt");
    io::save(&g, &io::write_graph(&named::complete(3))).unwrap();
    assert_eq!(cli(&["solve", "--graph", p(&g), "--q", "2"]).status.code(), Some(2));
}

#[test]
fn sparsify_dump_has_a_line_per_vertex() {
    let dir = tempfile::tempdir().unwrap();
    let graph = gen_locally_sparse(60, 8, 1, 5).unwrap();
    let g = dir.path().join("g.txt");
    io::save(&g, &io::write_graph(&graph)).unwrap();
    let out = cli(&["sparsify", "--graph", p(&g), "--q", "20", "--s", "5", "--seed", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 60);
    for line in text.lines() {
        let (_, rest) = line.split_once(" : ").unwrap();
        let n_colors = rest.split_whitespace().filter(|t| *t != "|").count();
        assert_eq!(n_colors, 5);
    }
}

#[test]
fn sparsify_with_list_cover_file() {
    let dir = tempfile::tempdir().unwrap();
    let graph = gen_locally_sparse(40, 5, 1, 7).unwrap();
    let l = ListAssignment::uniform(40, 12);
    let g = dir.path().join("g.txt");
    io::save(&g, &io::write_graph(&graph)).unwrap();
    let c = dir.path().join("c.txt");
    io::save(&c, &io::write_cover(&cover_from_lists(&graph, &l))).unwrap();
    let out = cli(&["sparsify", "--graph", p(&g), "--cover", p(&c), "--s", "4", "--q", "12"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn stream_writes_a_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let graph = gen_locally_sparse(100, 8, 2, 1).unwrap();
    let g = dir.path().join("g.txt");
    io::save(&g, &io::write_graph(&graph)).unwrap();
    let ledger = dir.path().join("ledger.csv");
    let out = cli(&[
        "stream", "--graph", p(&g), "--q", "30", "--s", "6", "--seed", "1", "--permute-seed", "4", "--ledger", p(&ledger),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&ledger).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "100");
    assert_eq!(row[6], "600");
}

#[test]
fn queries_scan_counts_n_plus_2m() {
    let dir = tempfile::tempdir().unwrap();
    let graph = gen_locally_sparse(120, 7, 2, 2).unwrap();
    let g = dir.path().join("g.txt");
    io::save(&g, &io::write_graph(&graph)).unwrap();
    let out = cli(&["queries", "--graph", p(&g), "--q", "40", "--s", "6", "--strategy", "scan"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[8].parse::<usize>().unwrap(), 120 + 2 * graph.m());
}

#[test]
fn sweep_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let good = dir.path().join("good.json");
    io::save(
        &good,
        &format!(
            r#"{{"schema":"palette-sparse/1","instance":{{"generate":{{"n":40,"delta":5,"k":1,"seed":1}}}},
               "params":{{"q":12,"s":12}},"seeds":[1,2,3],"output":{{"csv":"{}"}}}}"#,
            p(&csv)
        ),
    )
    .unwrap();
    assert_eq!(cli(&["sweep", "--config", p(&good)]).status.code(), Some(0));
    let first = std::fs::read(&csv).unwrap();
    assert_eq!(cli(&["sweep", "--config", p(&good)]).status.code(), Some(0));
    assert_eq!(std::fs::read(&csv).unwrap(), first);

    let unsupported = dir.path().join("query-cover.json");
    io::save(
        &unsupported,
        r#"{"schema":"palette-sparse/1","instance":{"generate":{"n":40,"delta":5,"k":1,"seed":1}},
           "pipeline":"cover","model":"query","params":{"q":12,"s":4},"seeds":[1,2]}"#,
    )
    .unwrap();
    assert_eq!(cli(&["sweep", "--config", p(&unsupported)]).status.code(), Some(2));

    let broken = dir.path().join("broken.json");
    io::save(&broken, r#"{"schema":"palette-sparse/0","seeds":[]}"#).unwrap();
    assert_eq!(cli(&["sweep", "--config", p(&broken)]).status.code(), Some(3));
}

#[test]
fn success_table_with_s_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    io::save(
        &cfg,
        r#"{"schema":"palette-sparse/1","instance":{"generate":{"n":40,"delta":5,"k":1,"seed":1}},
           "params":{"q":10,"s":3},"seeds":[1,2,3,4]}"#,
    )
    .unwrap();
    let out = cli(&["sweep", "--config", p(&cfg), "--s-values", "2,5,10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
    assert!(text.lines().last().unwrap().starts_with("10,4,4,"));
}
