use ptflat_core::dynamics::{propagate_matrix, DynamicsError};
use ptflat_core::lattice::ProfileKind;
use ptflat_core::spectra::SpectraError;
use ptflat_core::{
    analytic_bands, band_structure, build_ribbon, cls_state, eigenpairs, pair_multisets,
    participation_ratio, scan_rho, GainLossProfile, LatticeKind, PropagateOptions, ScanOptions,
    StateVector,
};
use serde_json::Value;

use crate::args::{BandsArgs, EvolveArgs, Initial, ScanArgs, SpectrumArgs};
use crate::config::{boundary, check_cells, check_rho, load_lattice, require, RunConfig};
use crate::output::{fmt_float, float_value, Cell, Table};
use crate::CliError;

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::UnsupportedAnalytic { .. } => CliError::Unsupported(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ptflat_core::LatticeError> for CliError {
    fn from(e: ptflat_core::LatticeError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ptflat_core::EigenError> for CliError {
    fn from(e: ptflat_core::EigenError) -> Self {
        CliError::Compute(e.to_string())
    }
}

pub fn bands(args: &BandsArgs) -> Result<(Table, RunConfig), CliError> {
    check_rho(args.rho)?;
    require(args.kpoints >= 2, || format!("--kpoints must be at least 2, got {}", args.kpoints))?;
    let lattice = load_lattice(&args.lattice)?;
    let cfg = RunConfig::new("bands")
        .set("lattice", lattice.source.as_str())
        .set_f64("rho", args.rho)
        .set("kpoints", args.kpoints)
        .set("compare_analytic", args.compare_analytic);

    let kind = match (args.compare_analytic, lattice.kind) {
        (false, k) => k,
        (true, Some(k)) => {
            // fail with the library's own message before any work
            analytic_bands(k, args.rho, 0.0)?;
            Some(k)
        }
        (true, None) => {
            return Err(CliError::Unsupported(format!(
                "no closed-form bands for the custom lattice `{}`",
                args.lattice
            )))
        }
    };
    let profile = if lattice.profile.kind() == ProfileKind::LongitudinalSplit {
        // the split profile has no Bloch form, but at rho = 0 it does nothing
        require(args.rho == 0.0, || {
            "the longitudinal-split profile has no Bloch form for rho > 0; use `spectrum` or `scan`".into()
        })?;
        GainLossProfile::neutral()
    } else {
        lattice.profile.clone()
    };

    let numeric = band_structure(&lattice.cell, &profile, args.rho, args.kpoints)?;
    let mut columns = vec!["k", "band_index", "re_lambda", "im_lambda"];
    if args.compare_analytic {
        columns.extend(["re_analytic", "im_analytic", "deviation"]);
    }
    let mut table = Table::new(&columns);
    let mut max_dev: f64 = 0.0;
    for (k, values) in numeric.k_grid.iter().zip(&numeric.bands) {
        let analytic = match (args.compare_analytic, kind) {
            (true, Some(kind)) => Some(analytic_bands(kind, args.rho, *k)?),
            _ => None,
        };
        let pairing = analytic.as_ref().map(|a| pair_multisets(values, a).expect("same band count"));
        for (i, z) in values.iter().enumerate() {
            let mut row: Vec<Cell> = vec![(*k).into(), i.into(), z.re.into(), z.im.into()];
            if let (Some(a), Some(p)) = (&analytic, &pairing) {
                let w = a[p[i]];
                let d = (z - w).norm();
                max_dev = max_dev.max(d);
                row.extend([w.re.into(), w.im.into(), d.into()]);
            }
            table.push(row);
        }
    }
    if args.compare_analytic {
        eprintln!("max-dev {}", fmt_float(max_dev));
        table.extra.insert("max_deviation".into(), float_value(max_dev));
    }
    Ok((table, cfg))
}

pub fn spectrum(args: &SpectrumArgs) -> Result<(Table, RunConfig), CliError> {
    check_rho(args.rho)?;
    check_cells(args.cells)?;
    let lattice = load_lattice(&args.lattice)?;
    let b = boundary(args.boundary);
    let cfg = RunConfig::new("spectrum")
        .set("lattice", lattice.source.as_str())
        .set_f64("rho", args.rho)
        .set("cells", args.cells)
        .set("boundary", b.to_string());
    let h = build_ribbon(&lattice.cell, &lattice.profile, args.rho, args.cells, b)?;
    let es = eigenpairs(h.matrix())?;
    let mut table = Table::new(&["index", "re_lambda", "im_lambda", "pr"]);
    for (i, (z, v)) in es.values().iter().zip(es.vectors().expect("eigenpairs")).enumerate() {
        let pr = participation_ratio(v)?;
        table.push(vec![i.into(), z.re.into(), z.im.into(), pr.into()]);
    }
    if let Some(r) = es.max_relative_residual() {
        table.extra.insert("max_relative_residual".into(), float_value(r));
    }
    Ok((table, cfg))
}

/// `min, min + step, ...` up to `max` (inclusive within rounding).
pub fn rho_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    require(min.is_finite() && min >= 0.0, || format!("--rho-min must be non-negative, got {min}"))?;
    require(max.is_finite() && max >= min, || format!("--rho-max must be at least --rho-min, got {max}"))?;
    require(step.is_finite() && step > 0.0, || format!("--rho-step must be positive, got {step}"))?;
    let count = ((max - min) / step + 1e-9).floor();
    require(count < 1e6, || "rho grid has more than a million points".into())?;
    Ok((0..=count as usize).map(|i| min + step * i as f64).collect())
}

pub fn scan(args: &ScanArgs) -> Result<(Table, RunConfig), CliError> {
    check_cells(args.cells)?;
    let grid = rho_grid(args.rho_min, args.rho_max, args.rho_step)?;
    require(args.tol_stable > 0.0 && args.tol_flat > 0.0, || "tolerances must be positive".into())?;
    let lattice = load_lattice(&args.lattice)?;
    let b = boundary(args.boundary);
    let flat_value = args
        .flat_value
        .unwrap_or_else(|| lattice.kind.map_or(0.0, LatticeKind::flat_band_value));
    let options = ScanOptions {
        tol_stable: args.tol_stable,
        tol_flat: args.tol_flat,
        flat_value,
    };
    let cfg = RunConfig::new("scan")
        .set("lattice", lattice.source.as_str())
        .set_f64("rho_min", args.rho_min)
        .set_f64("rho_max", args.rho_max)
        .set_f64("rho_step", args.rho_step)
        .set("cells", args.cells)
        .set("boundary", b.to_string())
        .set_f64("tol_stable", args.tol_stable)
        .set_f64("tol_flat", args.tol_flat)
        .set_f64("flat_value", flat_value);
    let result = scan_rho(&lattice.cell, &lattice.profile, args.cells, b, &grid, &options)?;
    let mut table = Table::new(&["rho", "stable_fraction", "avg_pr_stable", "flat_multiplicity"]);
    for row in &result.rows {
        table.push(vec![
            row.rho.into(),
            row.stable_fraction.into(),
            row.avg_pr_stable.into(),
            row.flat_multiplicity.into(),
        ]);
    }
    Ok((table, cfg))
}

pub fn evolve(args: &EvolveArgs) -> Result<(Table, RunConfig), CliError> {
    check_rho(args.rho)?;
    check_cells(args.cells)?;
    require(args.dz.is_finite() && args.dz > 0.0, || format!("--dz must be positive, got {}", args.dz))?;
    require(args.z_max.is_finite() && args.z_max >= args.dz, || {
        format!("--z-max must be at least --dz, got {}", args.z_max)
    })?;
    require(args.stride >= 1, || "--stride must be at least 1".into())?;
    require(args.blowup_factor > 1.0 && args.blowup_factor.is_finite(), || {
        format!("--blowup-factor must be finite and above 1, got {}", args.blowup_factor)
    })?;
    let lattice = load_lattice(&args.lattice)?;
    let b = boundary(args.boundary);
    let h = build_ribbon(&lattice.cell, &lattice.profile, args.rho, args.cells, b)?;

    let mut cfg = RunConfig::new("evolve")
        .set("lattice", lattice.source.as_str())
        .set_f64("rho", args.rho)
        .set("cells", args.cells)
        .set("boundary", b.to_string())
        .set_f64("z_max", args.z_max)
        .set_f64("dz", args.dz)
        .set("stride", args.stride)
        .set_f64("blowup_factor", args.blowup_factor);
    let c0 = match args.initial {
        Initial::Random => {
            cfg = cfg.set("initial", "random").set("seed", args.seed);
            StateVector::random(h.dim(), args.seed)
        }
        Initial::SingleSite => {
            let site = args.site.unwrap_or(h.dim() / 2);
            cfg = cfg.set("initial", "single-site").set("site", site);
            StateVector::single_site(h.dim(), site)?
        }
        Initial::Cls => {
            let kind = lattice.kind.ok_or_else(|| {
                CliError::Config("compact localized states exist only for the built-in lieb and stub".into())
            })?;
            let cell = args.cell.unwrap_or(args.cells / 2);
            cfg = cfg.set("initial", "cls").set("cell", cell);
            cls_state(kind, cell, &h)?
        }
    };
    let options = PropagateOptions {
        sample_stride: args.stride,
        blowup_factor: args.blowup_factor,
        ..PropagateOptions::default()
    };
    let traj = propagate_matrix(h.matrix(), &c0, args.z_max, args.dz, &options)?;
    let mut table = Table::new(&["z", "power", "pr"]);
    for s in &traj.samples {
        table.push(vec![s.z.into(), s.power.into(), s.pr.into()]);
    }
    match traj.blowup_at {
        Some(z) => {
            table.notes.push(format!("broken-phase blowup at z={}", fmt_float(z)));
            table.extra.insert("blowup_at".into(), float_value(z));
        }
        None => {
            table.extra.insert("blowup_at".into(), Value::Null);
        }
    }
    Ok((table, cfg))
}
