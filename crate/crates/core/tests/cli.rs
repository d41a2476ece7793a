use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use locc_qec::bipartite::BipartiteState;
use locc_qec::cli::{self, ProblemFile, Report, WitnessData};
use locc_qec::linalg::{self, c, ComplexMatrix, ComplexVector, Tolerance, C64};
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_locc-qec"));
    cmd.env_remove(cli::TOL_ABS_ENV).env_remove(cli::TOL_REL_ENV);
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn report(out: &Output) -> Report {
    Report::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

fn write(dir: &TempDir, name: &str, p: &ProblemFile) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, p.to_json()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn qutrit_problem() -> ProblemFile {
    let w = C64::from_polar(1.0, std::f64::consts::TAU / 3.0);
    let r3 = 1.0 / 3f64.sqrt();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut phi = vec![ComplexVector::zeros(9), ComplexVector::zeros(9), ComplexVector::zeros(9)];
    for k in 0..3 {
        phi[0][4 * k] = c(r3, 0.0);
        phi[1][4 * k] = w.powu(k as u32) * r3;
    }
    phi[2][3] = c(h, 0.0);
    phi[2][1] = c(-h, 0.0);
    let ops: Vec<ComplexMatrix> = phi
        .iter()
        .map(|v| BipartiteState::from_vector(v, 3, 3, Tolerance::default()).unwrap().to_operator().clone())
        .collect();
    ProblemFile::state_set(&ops)
}

#[test]
fn bell_pair_is_distinguishable_with_computational_basis() {
    let out = run(&["analyze", fixture("bell_pair.json").to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r.status, "distinguishable");
    let Some(WitnessData::Protocol { alice_basis, .. }) = &r.witness else { panic!("no protocol") };
    // Up to phase and order, Alice measures |0⟩, |1⟩.
    let mut hits = [false; 2];
    for v in alice_basis {
        let mags: Vec<f64> = v.iter().map(|[re, im]| re.hypot(*im)).collect();
        let j = if mags[0] > 0.5 { 0 } else { 1 };
        assert!((mags[j] - 1.0).abs() < 1e-10 && mags[1 - j] < 1e-10, "{mags:?}");
        hits[j] = true;
    }
    assert!(hits[0] && hits[1]);
}

#[test]
fn full_bell_basis_is_not_distinguishable() {
    let out = run(&["analyze", fixture("bell_basis.json").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert_eq!(report(&out).witness, Some(WitnessData::Structure { blocks: vec![(2, 1)] }));
}

#[test]
fn malformed_matrix_is_named() {
    let out = run(&["analyze", fixture("malformed.json").to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("parse error") && err.contains("`Broken`"), "{err}");
}

#[test]
fn kl_check_bell_code() {
    let out = run(&["kl-check", fixture("bell_code.json").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r.status, "correctable");
    assert!(r.residuals["kl_residual"] <= 1e-10);
    let Some(WitnessData::KnillLaflamme { lambda }) = &r.witness else { panic!("no λ") };
    for (i, row) in lambda.iter().enumerate() {
        for (j, [re, im]) in row.iter().enumerate() {
            let want = if i == j { 0.5 } else { 0.0 };
            assert!((re - want).abs() <= 1e-10 && im.abs() <= 1e-10);
        }
    }
}

fn alice_noise(perturb: f64) -> Vec<ComplexMatrix> {
    let p0 = linalg::outer(&linalg::basis_vector(2, 0), &linalg::basis_vector(2, 0));
    let p1 = linalg::outer(&linalg::basis_vector(2, 1), &linalg::basis_vector(2, 1));
    let mut bob = ComplexMatrix::identity(2, 2);
    bob[(1, 1)] = c(1.0 - perturb, 0.0);
    vec![linalg::tensor(&p0, &ComplexMatrix::identity(2, 2)), linalg::tensor(&p1, &bob)]
}

#[test]
fn kl_check_product_code_fails_with_residual() {
    let dir = TempDir::new().unwrap();
    let code_vecs = [linalg::basis_vector(4, 0), linalg::basis_vector(4, 2)];
    let path = write(&dir, "product.json", &ProblemFile::code_space(&code_vecs, &alice_noise(0.0)));
    let out = run(&["kl-check", &path]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r.status, "not_correctable");
    assert!(r.residuals["kl_residual"] > 0.5);
}

#[test]
fn tolerance_flag_flips_boundary_fixture() {
    let dir = TempDir::new().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let phi1 = ComplexVector::from_vec(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
    let phi2 = ComplexVector::from_vec(vec![c(0.0, 0.0), c(h, 0.0), c(h, 0.0), c(0.0, 0.0)]);
    let path = write(&dir, "boundary.json", &ProblemFile::code_space(&[phi1, phi2], &alice_noise(1e-7)));
    let strict = run(&["kl-check", &path]);
    assert_eq!(code(&strict), 1);
    let residual = report(&strict).residuals["kl_residual"];
    assert!(residual > 1e-8 && residual < 1e-6, "{residual}");
    let loose = run(&["kl-check", "--tol-abs", "1e-6", &path]);
    assert_eq!(code(&loose), 0);
    assert_eq!(report(&loose).tolerance.absolute, 1e-6);

    // The environment variable supplies the default when the flag is absent.
    let env = bin().env(cli::TOL_ABS_ENV, "1e-6").args(["kl-check", &path]).output().unwrap();
    assert_eq!(code(&env), 0);
}

#[test]
fn stabilizer_three_two_is_not_distinguishable() {
    let out = run(&["stabilizer", "--n", "3", "--k", "2"]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r.witness, Some(WitnessData::Structure { blocks: vec![(4, 2)] }));
    let from_file = run(&["stabilizer", fixture("stabilizer_3_2.json").to_str().unwrap()]);
    assert_eq!(from_file.stdout, out.stdout);
}

#[test]
fn stabilizer_reports_verify_without_problem_file() {
    let dir = TempDir::new().unwrap();
    for (n, k, expected) in [(2, 1, 0), (3, 2, 1)] {
        let path = dir.path().join(format!("s{n}{k}.json"));
        let out = run(&["stabilizer", "--n", &n.to_string(), "--k", &k.to_string(), "--out", path.to_str().unwrap()]);
        assert_eq!(code(&out), expected);
        assert!(out.stdout.is_empty());
        let v = run(&["verify", path.to_str().unwrap()]);
        assert_eq!(code(&v), 0, "{}", String::from_utf8_lossy(&v.stdout));
    }
}

#[test]
fn teleport_verify_generalized_bell() {
    let dir = TempDir::new().unwrap();
    for d in [2, 3] {
        let path = write(&dir, &format!("tele{d}.json"), &cli::teleportation_problem(d));
        let out = run(&["teleport-verify", &path]);
        assert_eq!(code(&out), 0);
        let r = report(&out);
        assert!(r.residuals["recovery_deviation"] <= 1e-10);
        assert_eq!(r.params["code_dim"], d * d);
    }
}

#[test]
fn verify_accepts_genuine_and_rejects_tampered_witnesses() {
    let dir = TempDir::new().unwrap();
    let problem = fixture("bell_pair.json");
    let report_path = dir.path().join("r.json");
    let out = run(&["analyze", problem.to_str().unwrap(), "--out", report_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let ok = run(&["verify", report_path.to_str().unwrap(), problem.to_str().unwrap()]);
    assert_eq!(code(&ok), 0);

    let mut r = Report::load(&report_path).unwrap();
    if let Some(WitnessData::Protocol { bob_vectors, .. }) = &mut r.witness {
        bob_vectors[0].swap(0, 1);
    }
    let tampered = dir.path().join("t.json");
    std::fs::write(&tampered, r.to_json()).unwrap();
    let bad = run(&["verify", tampered.to_str().unwrap(), problem.to_str().unwrap()]);
    assert_ne!(code(&bad), 0);
    assert_eq!(report(&bad).status, "rejected");

    // A structure claim swapped onto a distinguishable set is also rejected.
    let mut r = Report::load(&report_path).unwrap();
    r.status = "not_distinguishable".into();
    r.exit_code = 1;
    r.witness = Some(WitnessData::Structure { blocks: vec![(2, 1)] });
    std::fs::write(&tampered, r.to_json()).unwrap();
    assert_ne!(code(&run(&["verify", tampered.to_str().unwrap(), problem.to_str().unwrap()])), 0);
}

#[test]
fn find_basis_on_qutrit_example() {
    let dir = TempDir::new().unwrap();
    let problem = write(&dir, "qutrit.json", &qutrit_problem());
    let report_path = dir.path().join("r.json");
    let out = run(&["find-basis", &problem, "--out", report_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = Report::load(&report_path).unwrap();
    assert!(r.residuals["protocol_deviation"] <= 1e-9);
    let ok = run(&["verify", report_path.to_str().unwrap(), &problem]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));

    // Replacing a new state with one outside the span must be caught.
    let mut r = r;
    if let Some(WitnessData::Protocol { states: Some(states), .. }) = &mut r.witness {
        let mut e = vec![vec![[0.0, 0.0]; 3]; 3];
        e[0][0] = [3f64.sqrt(), 0.0];
        states[0] = e;
    }
    std::fs::write(&report_path, r.to_json()).unwrap();
    assert_ne!(code(&run(&["verify", report_path.to_str().unwrap(), &problem])), 0);
}

#[test]
fn schmidt_rank_three_complement() {
    let dir = TempDir::new().unwrap();
    let mut p = ProblemFile::state_set(&[ComplexMatrix::identity(3, 3)]);
    p.complement_of = p.states.pop();
    let path = write(&dir, "complement.json", &p);
    let out = run(&["analyze", &path]);
    assert_eq!(code(&out), 1);
    assert_eq!(report(&out).witness, Some(WitnessData::SchmidtRank { rank: 3 }));
}

#[test]
fn output_is_deterministic_and_text_mode_works() {
    let args = ["stabilizer", "--n", "2", "--k", "1", "--seed", "17"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(report(&first).seed, 17);

    let problem = fixture("bell_pair.json");
    let a = run(&["analyze", problem.to_str().unwrap()]);
    let b = run(&["analyze", problem.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);

    let text = run(&["analyze", "--text", problem.to_str().unwrap()]);
    let s = String::from_utf8(text.stdout).unwrap();
    assert!(s.contains("status: distinguishable (exit 0)"), "{s}");
}

#[test]
fn usage_errors_exit_with_input_code() {
    assert_eq!(code(&run(&["stabilizer", "--n", "3"])), 3);
    assert_eq!(code(&run(&["stabilizer", "--n", "2", "--k", "3"])), 3);
    assert_eq!(code(&run(&["analyze", "/nonexistent/problem.json"])), 3);
    assert_eq!(code(&run(&["no-such-command"])), 3);
    assert_eq!(code(&run(&["kl-check", fixture("bell_pair.json").to_str().unwrap()])), 3);
}
