use std::path::PathBuf;
use std::process::{Command, Output};

fn ptflat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptflat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = ptflat(args);
    assert!(
        out.status.success(),
        "{args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows of a CSV document as float columns; text cells become NaN.
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/lattices").join(name);
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn lieb_bands_match_closed_form() {
    for rho in ["0", "1.5"] {
        let out = ptflat(&["bands", "--lattice", "lieb", "--rho", rho, "--compare-analytic"]);
        assert!(out.status.success());
        let stderr = String::from_utf8(out.stderr).unwrap();
        let reported: f64 = stderr
            .lines()
            .find_map(|l| l.strip_prefix("max-dev "))
            .expect("max-dev line")
            .parse()
            .unwrap();
        assert!(reported <= 1e-10, "rho {rho}: {reported}");

        let table = rows(&String::from_utf8(out.stdout).unwrap());
        assert_eq!(table.len(), 256 * 5);
        let column_max = table.iter().map(|r| r[6]).fold(0.0, f64::max);
        assert_eq!(column_max, reported);
        // The numerical bands are the closed forms themselves, recomputed here.
        let rho: f64 = rho.parse().unwrap();
        for r in &table {
            let e = 2.0 * (1.0 + r[0].cos());
            let root = |q: f64| if q >= 0.0 { (q.sqrt(), 0.0) } else { (0.0, (-q).sqrt()) };
            let expected = [(0.0, 0.0), root(e - rho * rho), root(e + 2.0 - rho * rho)];
            let hit = expected
                .iter()
                .flat_map(|(re, im)| [(*re, *im), (-re, -im)])
                .any(|(re, im)| (r[2] - re).hypot(r[3] - im) <= 1e-9);
            assert!(hit, "({}, {}) at k {}", r[2], r[3], r[0]);
        }
    }
}

#[test]
fn analytic_comparison_is_unsupported_off_its_domain() {
    for args in [
        ["bands", "--lattice", "kagome", "--rho", "0.5", "--compare-analytic"],
        ["bands", "--lattice", "stub", "--rho", "0.5", "--compare-analytic"],
    ] {
        assert_eq!(ptflat(&args).status.code(), Some(3), "{args:?}");
    }
    let path = scratch("custom-lieb.lat");
    std::fs::write(&path, golden("lieb.lat").replace("lattice lieb", "lattice custom")).unwrap();
    let out = ptflat(&["bands", "--lattice", path.to_str().unwrap(), "--compare-analytic"]);
    assert_eq!(out.status.code(), Some(3));
    // Without the comparison the custom file is an ordinary input.
    ok(&["bands", "--lattice", path.to_str().unwrap(), "--kpoints", "8"]);
}

#[test]
fn lieb_scan_ends_at_one_fifth() {
    let csv = ok(&[
        "scan", "--lattice", "lieb", "--rho-min", "0", "--rho-max", "3", "--rho-step", "0.5",
        "--cells", "100", "--boundary", "periodic",
    ]);
    let table = rows(&csv);
    assert_eq!(table.len(), 7);
    assert_eq!(table[0][1], 1.0);
    assert!((table[6][1] - 0.2).abs() <= 0.01, "{}", table[6][1]);
    // rho = 2 puts an exceptional point on the k grid, which smears part of
    // the flat band beyond the tolerance, so that row is left out.
    for r in table.iter().filter(|r| r[0] != 2.0) {
        assert!(r[3] >= 100.0, "flat multiplicity {} at rho {}", r[3], r[0]);
    }
}

#[test]
fn lieb_default_ribbon_tail_is_near_one_fifth() {
    // Default cells and boundary; only the end of the default rho grid.
    let table = rows(&ok(&["scan", "--lattice", "lieb", "--rho-min", "2.95", "--rho-max", "3"]));
    let last = table.last().unwrap();
    assert!((last[0] - 3.0).abs() < 1e-12);
    assert!((last[1] - 0.2).abs() <= 0.05, "{}", last[1]);
}

#[test]
fn kagome_scan_loses_the_flat_band() {
    let csv = ok(&[
        "scan", "--lattice", "kagome", "--rho-min", "0", "--rho-max", "0.4", "--rho-step", "0.1",
        "--cells", "20", "--tol-flat", "1e-6",
    ]);
    let table = rows(&csv);
    assert!(table[0][3] >= 19.0, "{}", table[0][3]);
    assert!(table[1..].iter().all(|r| r[3] < 4.0));
}

#[test]
fn stub_scan_starts_stable_and_loses_stability() {
    // Only the leading part of the expected shape holds: the split stub keeps
    // a pair of real interface eigenvalues, so the fraction never reaches 0.
    let csv = ok(&["scan", "--lattice", "stub", "--rho-min", "0", "--rho-max", "2", "--rho-step", "0.5", "--cells", "20"]);
    let table = rows(&csv);
    assert_eq!(table[0][1], 1.0);
    assert!(table[0][3] >= 20.0);
    assert!(table[1..].iter().all(|r| r[1] < 1.0 && r[3] < 4.0));
}

#[test]
fn power_is_conserved_without_gain() {
    for args in [
        ["--lattice", "lieb", "--initial", "cls"],
        ["--lattice", "stub", "--initial", "single-site"],
    ] {
        let mut full = vec!["evolve", "--rho", "0", "--cells", "20", "--z-max", "20"];
        full.extend(args);
        let table = rows(&ok(&full));
        assert_eq!(table.len(), 201);
        let p0 = table[0][1];
        for r in &table {
            assert!((r[1] / p0 - 1.0).abs() <= 1e-8, "{args:?} at z {}", r[0]);
        }
    }
}

#[test]
fn broken_phase_power_grows_at_the_spectral_rate() {
    let spectrum = rows(&ok(&["spectrum", "--lattice", "lieb", "--rho", "3", "--cells", "20"]));
    let gamma = spectrum.iter().map(|r| -r[2]).fold(f64::NEG_INFINITY, f64::max);
    assert!(gamma > 1.0);

    let csv = ok(&[
        "evolve", "--lattice", "lieb", "--rho", "3", "--cells", "20", "--z-max", "30", "--stride", "100",
        "--seed", "42", "--blowup-factor", "1e250",
    ]);
    assert!(!csv.contains("# broken-phase blowup"), "run should stay below the blowup threshold");
    let table = rows(&csv);
    let tail = &table[table.len() / 2..];
    let (a, b) = (&tail[0], &tail[tail.len() - 1]);
    let slope = (b[1].ln() - a[1].ln()) / (b[0] - a[0]);
    let rel = (slope - 2.0 * gamma).abs() / (2.0 * gamma);
    assert!(rel <= 0.02, "slope {slope} vs {}", 2.0 * gamma);
}

#[test]
fn blowup_is_reported_and_output_kept() {
    let csv = ok(&["evolve", "--lattice", "lieb", "--rho", "3", "--cells", "10", "--z-max", "300", "--stride", "1000"]);
    assert!(csv.contains("# broken-phase blowup at z="));
    let json = ok(&[
        "evolve", "--lattice", "lieb", "--rho", "3", "--cells", "10", "--z-max", "300", "--stride", "1000",
        "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(v["blowup_at"].as_f64().unwrap() < 300.0);
    let quiet = ok(&["evolve", "--rho", "0", "--cells", "5", "--z-max", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&quiet).unwrap();
    assert!(v["blowup_at"].is_null());
}

#[test]
fn validate_passes_for_lieb_deep_in_the_broken_phase() {
    let out = ptflat(&["validate", "--lattice", "lieb", "--rho", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("lieb: flat-band persistence,PASS"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn validate_fails_on_broken_parity() {
    // (corrupted parity line, check expected to fail, text in its message)
    let cases = [
        // parses, since b:p and t:q flip the sign of the multiplier, but it is
        // not a symmetry of the bonds
        ("parity b:p t:q", "PT symmetry", "violations"),
        // q carries +1 like b, so the parser itself rejects it
        ("parity b:q p:t", "lattice file", "parity"),
    ];
    for (i, (line, check, text)) in cases.iter().enumerate() {
        let path = scratch(&format!("bad-parity-{i}.lat"));
        std::fs::write(&path, golden("lieb.lat").replace("parity b:t p:q", line)).unwrap();
        let out = ptflat(&["validate", "--lattice", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1), "{line}");
        let stdout = String::from_utf8(out.stdout).unwrap();
        let failed: Vec<&str> = stdout.lines().filter(|l| l.contains(",FAIL,")).collect();
        assert_eq!(failed.len(), 1, "{line}: {failed:?}");
        assert!(failed[0].contains(check) && failed[0].contains(text), "{line}: {}", failed[0]);
        let stderr = String::from_utf8(out.stderr).unwrap();
        assert!(stderr.contains(&format!("failed: {}: {check}", path.display())), "{stderr}");
    }
}

#[test]
fn runs_are_byte_deterministic() {
    for args in [
        vec!["scan", "--lattice", "stub", "--rho-max", "1", "--rho-step", "0.25", "--cells", "10"],
        vec!["evolve", "--lattice", "kagome", "--rho", "0.5", "--cells", "10", "--z-max", "5", "--seed", "9"],
        vec!["spectrum", "--lattice", "kagome", "--rho", "1", "--cells", "15", "--format", "json"],
    ] {
        assert_eq!(ok(&args), ok(&args), "{args:?}");
    }
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let base = ["spectrum", "--lattice", "stub", "--rho", "0.7", "--cells", "8"];
    let csv = ok(&base);
    let mut json_args = base.to_vec();
    json_args.extend(["--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&ok(&json_args)).unwrap();

    assert_eq!(v["config"]["command"], "spectrum");
    assert_eq!(v["config"]["rho"], 0.7);
    let header = csv.lines().next().unwrap();
    let names: Vec<&str> = v["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert!(header.starts_with(&format!("# {} | ", names.join(","))));

    let from_json: Vec<Vec<f64>> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect())
        .collect();
    assert_eq!(rows(&csv), from_json);
}

#[test]
fn file_output_matches_stdout() {
    let args = ["bands", "--lattice", "kagome", "--kpoints", "16"];
    let path = scratch("kagome-bands.csv");
    let mut to_file = args.to_vec();
    to_file.extend(["--out", path.to_str().unwrap()]);
    assert_eq!(ok(&to_file), "");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), ok(&args));
    let mut dash = args.to_vec();
    dash.extend(["--out", "-"]);
    assert_eq!(ok(&dash), ok(&args));
}

#[test]
fn invalid_configuration_exits_2() {
    for args in [
        vec!["spectrum", "--rho", "-1"],
        vec!["spectrum", "--cells", "0"],
        vec!["spectrum", "--lattice", "/nonexistent/cell.lat"],
        vec!["scan", "--rho-step", "0"],
        vec!["scan", "--rho-min", "2", "--rho-max", "1"],
        vec!["evolve", "--dz", "0"],
        vec!["evolve", "--blowup-factor", "0.5"],
        vec!["bands", "--kpoints", "1"],
        vec!["spectrum", "--no-such-flag"],
        vec!["bands", "--out", "/nonexistent/dir/out.csv"],
    ] {
        let out = ptflat(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn parse_errors_carry_a_location() {
    let path = scratch("typo.lat");
    std::fs::write(&path, golden("kagome.lat").replacen("bond", "bnod", 1)).unwrap();
    let out = ptflat(&["spectrum", "--lattice", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let expected_line = golden("kagome.lat").lines().position(|l| l.starts_with("bond")).unwrap() + 1;
    assert!(stderr.contains(&format!("typo.lat:{expected_line}:1:")), "{stderr}");
}
