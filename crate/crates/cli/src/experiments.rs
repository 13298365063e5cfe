//! The five experiments: dichotomy, box recovery, sphere recovery, the
//! Funk-Hecke verification, and the mollifier axiom diagnostics. Each run
//! produces rows for the shared CSV schema, optionally an SVG chart, and a
//! built-in pass/fail verdict used by `--assert`.

use std::time::Instant;

use mcd_kernel::basis::{Basis, BoxBasis, BoxBasisKind, SphericalHarmonicBasis};
use mcd_kernel::density::{self, DensityFn};
use mcd_kernel::domain::{Ambient, SupportDescriptor};
use mcd_kernel::mcd::{
    classify_support, dichotomy_bound, ClassifyPolicy, KernelContext, SupportLabel,
};
use mcd_kernel::mollifier::{
    funk_hecke_lambda, MollifierFamily, MollifierSpec, Region, Resolution,
};
use mcd_kernel::num::{fit_line, SplitMix64};
use mcd_kernel::quadrature::{
    box_rule, default_box_points, default_sphere_resolution, sphere_rule, Measure,
};
use mcd_kernel::McdError;

use crate::config::{
    BasisConfig, DensityConfig, DomainConfig, ExperimentConfig, ExperimentKind,
    MollifierFamilyConfig,
};
use crate::report::CsvRow;
use crate::svg::{Chart, Series};
use crate::CliError;

pub struct RunOutput {
    pub rows: Vec<CsvRow>,
    pub chart: Option<Chart>,
    pub summary: Vec<String>,
    pub assert_ok: bool,
    pub assert_detail: String,
    /// Moment matrices kept for `--dump-moments`, one per degree.
    pub moment_dumps: Vec<(usize, mcd_kernel::MomentMatrix)>,
    /// A numerical failure that aborted the run early; rows produced so
    /// far are still written.
    pub failure: Option<CliError>,
}

impl RunOutput {
    fn new() -> Self {
        Self {
            rows: Vec::new(),
            chart: None,
            summary: Vec::new(),
            assert_ok: true,
            assert_detail: String::new(),
            moment_dumps: Vec::new(),
            failure: None,
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::Dichotomy => run_dichotomy(cfg),
        ExperimentKind::RecoverBox => run_recover_box(cfg),
        ExperimentKind::RecoverSphere => run_recover_sphere(cfg),
        ExperimentKind::FunkHeckeCheck => run_funk_hecke_check(cfg),
        ExperimentKind::AxiomsCheck => run_axioms_check(cfg),
    }
}

fn numerical(e: McdError) -> CliError {
    match e {
        McdError::InvalidArgument(_) | McdError::DimensionMismatch { .. } | McdError::Unsupported(_) => {
            CliError::Config(e.to_string())
        }
        other => CliError::Numerical(other.to_string()),
    }
}

fn box_domain(cfg: &ExperimentConfig) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    match &cfg.domain {
        DomainConfig::Box { lo, hi } => Ok((lo.clone(), hi.clone())),
        DomainConfig::Sphere2 => Err(CliError::Config(format!(
            "experiment '{}' needs a box domain",
            cfg.experiment.name()
        ))),
    }
}

fn density_fn(cfg: &ExperimentConfig) -> Result<Option<DensityFn>, CliError> {
    match &cfg.density {
        DensityConfig::Uniform => Ok(Some(density::uniform())),
        DensityConfig::VmfMixture { kappa, means } => {
            let means = means.clone().unwrap_or_else(|| {
                vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
            });
            Ok(Some(density::vmf_mixture(*kappa, means).map_err(numerical)?))
        }
        DensityConfig::CustomPolynomial { coeffs } => {
            Ok(Some(density::polynomial_1d(coeffs.clone()).map_err(numerical)?))
        }
        DensityConfig::Smooth1d => Ok(Some(density::smooth_1d())),
        DensityConfig::Empirical { .. } => Ok(None),
    }
}

fn load_empirical(path: &std::path::Path, dim: usize, domain: Ambient) -> Result<Measure, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read samples {}: {e}", path.display())))?;
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>().map_err(|e| {
                    CliError::Config(format!("bad sample at line {}: {e}", lineno + 1))
                })
            })
            .collect::<Result<_, _>>()?;
        if coords.len() != dim {
            return Err(CliError::Config(format!(
                "sample at line {} has {} coordinates, expected {dim}",
                lineno + 1,
                coords.len()
            )));
        }
        samples.extend(coords);
    }
    Measure::empirical(dim, samples, domain).map_err(numerical)
}

fn box_measure(
    cfg: &ExperimentConfig,
    lo: &[f64],
    hi: &[f64],
    degree: usize,
) -> Result<Measure, CliError> {
    let points = cfg
        .quadrature
        .points_per_axis
        .unwrap_or_else(|| default_box_points(degree));
    let rule = box_rule(lo, hi, points).map_err(numerical)?;
    match &cfg.density {
        DensityConfig::Empirical { path } => load_empirical(
            path,
            lo.len(),
            Ambient::boxed(lo.to_vec(), hi.to_vec()).map_err(numerical)?,
        ),
        _ => {
            let f = density_fn(cfg)?.expect("non-empirical density");
            Measure::with_density(rule, f).map_err(numerical)
        }
    }
}

fn sphere_measure(cfg: &ExperimentConfig, degree: usize, k: usize) -> Result<Measure, CliError> {
    let (dt, dp) = default_sphere_resolution(degree, k);
    let n_theta = cfg.quadrature.n_theta.unwrap_or(dt);
    let n_phi = cfg.quadrature.n_phi.unwrap_or(dp);
    let rule = sphere_rule(n_theta, n_phi).map_err(numerical)?;
    match &cfg.density {
        DensityConfig::Empirical { path } => load_empirical(path, 3, Ambient::Sphere2),
        _ => {
            let f = density_fn(cfg)?.expect("non-empirical density");
            Measure::with_density(rule, f).map_err(numerical)
        }
    }
}

fn box_basis(cfg: &ExperimentConfig, lo: &[f64], hi: &[f64], degree: usize) -> Result<Basis, CliError> {
    let kind = match cfg.basis {
        BasisConfig::Legendre => BoxBasisKind::Legendre,
        BasisConfig::ScaledMonomial => BoxBasisKind::ScaledMonomial,
    };
    Ok(Basis::Box(
        BoxBasis::new(lo, hi, degree, kind).map_err(numerical)?,
    ))
}

fn euclidean_family(cfg: &ExperimentConfig) -> Result<MollifierFamily, CliError> {
    match cfg.mollifier {
        MollifierFamilyConfig::LasserreBox => Ok(MollifierFamily::LasserreBox),
        MollifierFamilyConfig::SmoothBump => Ok(MollifierFamily::SmoothBump),
        MollifierFamilyConfig::Zonal => Err(CliError::Config(
            "zonal mollifiers require the sphere domain".into(),
        )),
    }
}

// ---------------------------------------------------------------------
// dichotomy
// ---------------------------------------------------------------------

fn run_dichotomy(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let (lo, hi) = box_domain(cfg)?;
    let family = euclidean_family(cfg)?;
    let epsilon = match cfg.coupling {
        crate::config::CouplingConfig::Fixed { value } => value,
        _ => {
            return Err(CliError::Config(
                "dichotomy uses a fixed mollifier resolution (coupling kind 'fixed')".into(),
            ))
        }
    };
    let points = cfg
        .grid
        .points
        .clone()
        .ok_or_else(|| CliError::Config("dichotomy needs grid.points".into()))?;
    for p in &points {
        if p.len() != lo.len() {
            return Err(CliError::Config(format!(
                "grid point {p:?} does not match the domain dimension {}",
                lo.len()
            )));
        }
    }
    let d_max = *cfg.degrees.last().unwrap();

    let t0 = Instant::now();
    let measure = box_measure(cfg, &lo, &hi, d_max)?;
    let basis = box_basis(cfg, &lo, &hi, d_max)?;
    let min_density = (0..measure.rule.len())
        .map(|i| measure.density_at_node(i))
        .fold(f64::INFINITY, f64::min);
    let volume = measure.rule.volume;
    let ctx = KernelContext::build(
        measure,
        basis,
        Region::SupportLocator,
        family,
        Resolution::Epsilon(epsilon),
    )
    .map_err(numerical)?;
    let build_seconds = t0.elapsed().as_secs_f64();

    let descriptor = SupportDescriptor::Box {
        lo: lo.clone(),
        hi: hi.clone(),
    };
    let ambient = Ambient::boxed(lo.clone(), hi.clone()).map_err(numerical)?;

    let mut out = RunOutput::new();
    let mut chart_series: Vec<Series> = Vec::new();
    let mut bound_violations = 0usize;
    let mut interior_excess: f64 = 0.0;
    let cond = ctx.moments.pivot_ratio();

    for (pi, z) in points.iter().enumerate() {
        let id = format!("p{pi:02}");
        let delta = descriptor.distance(z);
        let exterior = delta > 0.0;
        let spec = match family {
            MollifierFamily::LasserreBox => {
                MollifierSpec::lasserre_box(z.clone(), epsilon, ambient.clone())
            }
            MollifierFamily::SmoothBump => {
                MollifierSpec::smooth_bump(z.clone(), epsilon, ambient.clone())
            }
            MollifierFamily::ZonalAlgebraic => unreachable!(),
        }
        .map_err(numerical)?;
        let bound_applicable = exterior && epsilon < delta / 2.0;
        if exterior && !bound_applicable {
            out.summary.push(format!(
                "point {id} at {z:?}: bound inapplicable (eps {epsilon} >= delta/2 = {})",
                delta / 2.0
            ));
        }

        let mut value_points = Vec::new();
        let mut bound_points = Vec::new();
        for (di, &d) in cfg.degrees.iter().enumerate() {
            let t1 = Instant::now();
            let v = ctx.diag_at_degree(z, d).map_err(numerical)?;
            let seconds = t1.elapsed().as_secs_f64() + if di == 0 && pi == 0 { build_seconds } else { 0.0 };
            out.rows.push(CsvRow {
                experiment: cfg.experiment.name().into(),
                d: Some(d),
                resolution: Some(epsilon),
                point_id: id.clone(),
                value: Some(v),
                cond_est: Some(cond),
                seconds: Some(seconds),
                ..CsvRow::default()
            });
            value_points.push((d as f64, v));
            if bound_applicable {
                let b = dichotomy_bound(z, &descriptor, d, &spec, ctx.measure.total_mass)
                    .map_err(numerical)?;
                out.rows.push(CsvRow {
                    experiment: cfg.experiment.name().into(),
                    d: Some(d),
                    resolution: Some(epsilon),
                    point_id: format!("{id}:bound"),
                    value: Some(b.value),
                    ..CsvRow::default()
                });
                bound_points.push((d as f64, b.value));
                if d % 2 == 0 && v < b.value {
                    bound_violations += 1;
                    out.summary
                        .push(format!("BOUND VIOLATION at {id}, d={d}: {v:.6e} < {:.6e}", b.value));
                }
            }
        }
        // interior uniform bound: SMCD <= (1/min f) ||phi||^2 with f the
        // density against plain Lebesgue
        if !exterior && descriptor.boundary_clearance(z) > epsilon {
            let cap = volume / min_density * spec.norm_sq().map_err(numerical)?;
            for &(_, v) in &value_points {
                interior_excess = interior_excess.max(v / cap - 1.0);
            }
        }
        chart_series.push(Series {
            label: format!("{id} z={z:?}"),
            points: value_points,
            dashed: false,
        });
        if !bound_points.is_empty() {
            chart_series.push(Series {
                label: format!("{id} bound"),
                points: bound_points,
                dashed: true,
            });
        }
    }

    // two-degree classifier over the configured degree range
    if cfg.degrees.len() >= 2 {
        let (d1, d2) = (cfg.degrees[0], *cfg.degrees.last().unwrap());
        let v1: Vec<f64> = points
            .iter()
            .map(|z| ctx.diag_at_degree(z, d1))
            .collect::<Result<_, _>>()
            .map_err(numerical)?;
        let v2: Vec<f64> = points
            .iter()
            .map(|z| ctx.diag_at_degree(z, d2))
            .collect::<Result<_, _>>()
            .map_err(numerical)?;
        let labels = classify_support(
            &points,
            &v1,
            &v2,
            (d1, d2),
            &descriptor,
            epsilon,
            &ClassifyPolicy::default(),
        );
        for (pi, (z, label)) in points.iter().zip(&labels).enumerate() {
            out.summary.push(format!(
                "point p{pi:02} at {z:?}: classified {}",
                match label {
                    SupportLabel::Inside => "inside",
                    SupportLabel::Outside => "outside",
                    SupportLabel::Ambiguous => "ambiguous (epsilon-ball straddles the boundary)",
                }
            ));
        }
    } else {
        out.summary
            .push("single degree: classifier disabled, values reported".into());
    }

    out.chart = Some(Chart {
        title: format!("SMCD diagonal vs degree (eps = {epsilon})"),
        x_label: "degree d".into(),
        y_label: "SMCD(z, z)".into(),
        log_x: false,
        log_y: true,
        series: chart_series,
    });
    out.assert_ok = bound_violations == 0 && interior_excess <= 1e-6;
    out.assert_detail = format!(
        "bound violations: {bound_violations}; interior excess over M C_eps: {interior_excess:.3e}"
    );
    if cfg.dump_moments {
        out.moment_dumps.push((d_max, ctx.moments.clone()));
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// recover-box
// ---------------------------------------------------------------------

fn run_recover_box(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let (lo, hi) = box_domain(cfg)?;
    if lo.len() > 2 {
        return Err(CliError::Config(
            "box recovery supports 1D and 2D domains".into(),
        ));
    }
    let family = euclidean_family(cfg)?;
    let truth = density_fn(cfg)?;

    let k_lo = cfg
        .grid
        .k_lo
        .clone()
        .ok_or_else(|| CliError::Config("recover-box needs grid.k_lo".into()))?;
    let k_hi = cfg
        .grid
        .k_hi
        .clone()
        .ok_or_else(|| CliError::Config("recover-box needs grid.k_hi".into()))?;
    if k_lo.len() != lo.len() || k_hi.len() != lo.len() {
        return Err(CliError::Config("K does not match the domain dimension".into()));
    }
    let max_eps = (0..cfg.degrees.len())
        .map(|i| cfg.resolution_for(i))
        .fold(0.0f64, f64::max);
    for axis in 0..lo.len() {
        if k_lo[axis] >= k_hi[axis] {
            return Err(CliError::Config("K is degenerate".into()));
        }
        if k_lo[axis] - lo[axis] < max_eps || hi[axis] - k_hi[axis] < max_eps {
            return Err(CliError::Config(format!(
                "K touches the boundary of X within the largest mollifier radius \
                 {max_eps:.4}; shrink K or the resolutions (K must be a compact \
                 subset of the interior)"
            )));
        }
    }

    // evaluation grid over K
    let per_axis = cfg.grid.k_points_per_axis.max(2);
    let mut grid: Vec<Vec<f64>> = Vec::new();
    if lo.len() == 1 {
        for i in 0..per_axis {
            let t = i as f64 / (per_axis - 1) as f64;
            grid.push(vec![k_lo[0] + t * (k_hi[0] - k_lo[0])]);
        }
    } else {
        for i in 0..per_axis {
            for j in 0..per_axis {
                let s = i as f64 / (per_axis - 1) as f64;
                let t = j as f64 / (per_axis - 1) as f64;
                grid.push(vec![
                    k_lo[0] + s * (k_hi[0] - k_lo[0]),
                    k_lo[1] + t * (k_hi[1] - k_lo[1]),
                ]);
            }
        }
    }
    let k_volume: f64 = k_lo.iter().zip(&k_hi).map(|(a, b)| b - a).product();

    let mut rng = SplitMix64::new(cfg.seed);
    let report_ids: Vec<usize> = (0..cfg.grid.report_points.min(grid.len()))
        .map(|_| (rng.next_u64() as usize) % grid.len())
        .collect();

    let mut out = RunOutput::new();
    let mut errors: Vec<(usize, f64)> = Vec::new();
    for (di, &d) in cfg.degrees.iter().enumerate() {
        let eps = cfg.resolution_for(di);
        let t0 = Instant::now();
        let measure = box_measure(cfg, &lo, &hi, d)?;
        let basis = box_basis(cfg, &lo, &hi, d)?;
        let ctx = match KernelContext::build(
            measure,
            basis,
            Region::DensityEstimator,
            family,
            Resolution::Epsilon(eps),
        ) {
            Ok(c) => c,
            Err(e) => {
                out.failure = Some(numerical(e));
                out.summary
                    .push(format!("aborted at degree {d}; largest safe degree: {}",
                        cfg.degrees.get(di.wrapping_sub(1)).copied().map(|x| x.to_string()).unwrap_or_else(|| "none".into())));
                break;
            }
        };
        let cond = ctx.moments.pivot_ratio();

        let mut sum_sq = 0.0;
        let mut sup: f64 = 0.0;
        let mut degenerate = 0usize;
        let mut point_rows: Vec<(usize, CsvRow)> = Vec::new();
        for (gi, x) in grid.iter().enumerate() {
            let est = ctx.estimate_with_errors(x).map_err(numerical)?;
            let f_true = truth.as_ref().map(|f| f(x));
            match (est.f_hat, f_true) {
                (Some(fh), Some(ft)) => {
                    let diff = fh - ft;
                    sum_sq += diff * diff;
                    sup = sup.max(diff.abs());
                }
                (None, _) => degenerate += 1,
                _ => {}
            }
            if report_ids.contains(&gi) {
                point_rows.push((
                    gi,
                    CsvRow {
                        experiment: cfg.experiment.name().into(),
                        d: Some(d),
                        resolution: Some(eps),
                        point_id: format!("g{gi:03}"),
                        value: est.f_hat.or(Some(est.g_hat)),
                        err_total: est.err_total,
                        err_proj: est.err_proj,
                        err_approx: est.err_approx,
                        cond_est: Some(cond),
                        seconds: None,
                    },
                ));
            }
        }
        let seconds = t0.elapsed().as_secs_f64();
        let l2 = (sum_sq / grid.len() as f64 * k_volume).sqrt();
        if truth.is_some() {
            errors.push((d, l2));
        }
        if degenerate > 0 {
            out.summary
                .push(format!("degree {d}: {degenerate} degenerate estimates (g_hat <= 0)"));
        }
        out.rows.push(CsvRow {
            experiment: cfg.experiment.name().into(),
            d: Some(d),
            resolution: Some(eps),
            point_id: "L2(K)".into(),
            value: truth.as_ref().map(|_| l2),
            err_total: truth.as_ref().map(|_| l2),
            cond_est: Some(cond),
            seconds: Some(seconds),
            ..CsvRow::default()
        });
        out.rows.push(CsvRow {
            experiment: cfg.experiment.name().into(),
            d: Some(d),
            resolution: Some(eps),
            point_id: "sup(K)".into(),
            value: truth.as_ref().map(|_| sup),
            cond_est: Some(cond),
            ..CsvRow::default()
        });
        point_rows.sort_by_key(|(gi, _)| *gi);
        out.rows.extend(point_rows.into_iter().map(|(_, r)| r));
        if cfg.dump_moments {
            out.moment_dumps.push((d, ctx.moments.clone()));
        }
    }

    finish_rate_experiment(cfg, &mut out, &errors, -0.9, f64::NEG_INFINITY);
    Ok(out)
}

// ---------------------------------------------------------------------
// recover-sphere
// ---------------------------------------------------------------------

fn run_recover_sphere(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    if !matches!(cfg.domain, DomainConfig::Sphere2) {
        return Err(CliError::Config("recover-sphere needs the sphere domain".into()));
    }
    if cfg.mollifier != MollifierFamilyConfig::Zonal {
        return Err(CliError::Config(
            "recover-sphere uses the zonal mollifier family".into(),
        ));
    }
    let truth = density_fn(cfg)?;
    let err_rule = sphere_rule(24, 49).map_err(numerical)?;
    let mut rng = SplitMix64::new(cfg.seed);
    let report_ids: Vec<usize> = (0..cfg.grid.report_points.min(err_rule.len()))
        .map(|_| (rng.next_u64() as usize) % err_rule.len())
        .collect();

    let mut out = RunOutput::new();
    let mut errors: Vec<(usize, f64)> = Vec::new();
    for (di, &d) in cfg.degrees.iter().enumerate() {
        let k = cfg.resolution_for(di).round().max(1.0) as usize;
        let t0 = Instant::now();
        let measure = sphere_measure(cfg, d, k)?;
        let basis = Basis::Harmonic(SphericalHarmonicBasis::new(d));
        let ctx = match KernelContext::build(
            measure,
            basis,
            Region::DensityEstimator,
            MollifierFamily::ZonalAlgebraic,
            Resolution::ZonalDegree(k),
        ) {
            Ok(c) => c,
            Err(McdError::ConditionOverflow { ratio, limit }) => {
                let safe = cfg.degrees.get(di.wrapping_sub(1)).copied();
                out.failure = Some(CliError::Numerical(format!(
                    "condition overflow at degree {d} (pivot ratio {ratio:.3e} > {limit:.1e}); \
                     largest safe degree: {}",
                    safe.map(|x| x.to_string()).unwrap_or_else(|| "none".into())
                )));
                break;
            }
            Err(e) => return Err(numerical(e)),
        };
        let cond = ctx.moments.pivot_ratio();

        let mut acc = 0.0;
        let mut point_rows: Vec<(usize, CsvRow)> = Vec::new();
        for i in 0..err_rule.len() {
            let x = err_rule.node(i);
            let est = ctx.estimate_with_errors(x).map_err(numerical)?;
            if let (Some(fh), Some(f)) = (est.f_hat, truth.as_ref().map(|f| f(x))) {
                let diff = fh - f;
                acc += err_rule.weight(i) * diff * diff;
            }
            if report_ids.contains(&i) {
                point_rows.push((
                    i,
                    CsvRow {
                        experiment: cfg.experiment.name().into(),
                        d: Some(d),
                        resolution: Some(k as f64),
                        point_id: format!("g{i:04}"),
                        value: est.f_hat.or(Some(est.g_hat)),
                        err_total: est.err_total,
                        err_proj: est.err_proj,
                        err_approx: est.err_approx,
                        cond_est: Some(cond),
                        ..CsvRow::default()
                    },
                ));
            }
        }
        let seconds = t0.elapsed().as_secs_f64();
        let l2 = acc.sqrt();
        if truth.is_some() {
            errors.push((d, l2));
        }
        out.rows.push(CsvRow {
            experiment: cfg.experiment.name().into(),
            d: Some(d),
            resolution: Some(k as f64),
            point_id: "L2".into(),
            value: truth.as_ref().map(|_| l2),
            err_total: truth.as_ref().map(|_| l2),
            cond_est: Some(cond),
            seconds: Some(seconds),
            ..CsvRow::default()
        });
        point_rows.sort_by_key(|(i, _)| *i);
        out.rows.extend(point_rows.into_iter().map(|(_, r)| r));
        out.summary.push(format!(
            "d={d} k={k}: L2 error {l2:.6e}, effective eps_k = {:.4}, cond {cond:.2e}, {seconds:.2}s",
            mcd_kernel::ratio_one_minus_t(k, 3).map_err(numerical)?
        ));
        if cfg.dump_moments {
            out.moment_dumps.push((d, ctx.moments.clone()));
        }
    }

    finish_rate_experiment(cfg, &mut out, &errors, -1.0, -2.0);
    Ok(out)
}

/// Shared tail of the two rate experiments: slope fit, chart, verdict.
fn finish_rate_experiment(
    cfg: &ExperimentConfig,
    out: &mut RunOutput,
    errors: &[(usize, f64)],
    slope_max: f64,
    slope_min: f64,
) {
    let decreasing = errors.windows(2).all(|w| w[1].1 < w[0].1);
    let slope = if errors.len() >= 2 {
        let xs: Vec<f64> = errors.iter().map(|&(d, _)| (d as f64).ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|&(_, e)| e.ln()).collect();
        let (slope, _, resid) = fit_line(&xs, &ys);
        out.summary
            .push(format!("fitted log-log slope {slope:.4} (fit residual {resid:.3e})"));
        Some(slope)
    } else {
        None
    };
    out.chart = Some(Chart {
        title: format!("{}: L2 error vs degree", cfg.experiment.name()),
        x_label: "degree d".into(),
        y_label: "L2 error of recovered density".into(),
        log_x: true,
        log_y: true,
        series: vec![Series {
            label: "L2 error".into(),
            points: errors.iter().map(|&(d, e)| (d as f64, e)).collect(),
            dashed: false,
        }],
    });
    match slope {
        Some(s) if errors.len() == cfg.degrees.len() => {
            out.assert_ok = decreasing && s <= slope_max && s >= slope_min;
            out.assert_detail = format!(
                "errors strictly decreasing: {decreasing}; slope {s:.4} (window [{slope_min}, {slope_max}])"
            );
        }
        _ => {
            out.assert_ok = false;
            out.assert_detail =
                "no complete error sequence (missing ground truth or aborted run)".into();
        }
    }
}

// ---------------------------------------------------------------------
// funk-hecke-check
// ---------------------------------------------------------------------

fn run_funk_hecke_check(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let rule = sphere_rule(24, 49).map_err(numerical)?;
    let basis = SphericalHarmonicBasis::new(8);
    let nb = basis.entries.len();
    let mut node_harmonics = vec![0.0; rule.len() * nb];
    for i in 0..rule.len() {
        basis.eval_all_into(rule.node(i), &mut node_harmonics[i * nb..(i + 1) * nb]);
    }
    let mut rng = SplitMix64::new(cfg.seed);
    let xs: Vec<[f64; 3]> = (0..10).map(|_| rng.unit_sphere()).collect();

    let k_max = cfg.degrees.last().copied().unwrap_or(8).min(12);
    let mut out = RunOutput::new();
    let mut overall: f64 = 0.0;
    let t0 = Instant::now();
    for k in 1..=k_max {
        let gk = move |t: f64| ((t + 1.0) / 2.0).powi(k as i32);
        let mut per_ell = [0.0f64; 9];
        for x in &xs {
            let mut x_harmonics = vec![0.0; nb];
            basis.eval_all_into(x, &mut x_harmonics);
            let mut lhs = vec![0.0; nb];
            for i in 0..rule.len() {
                let y = rule.node(i);
                let dot = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
                let wf = rule.weight(i) * gk(dot);
                for (acc, h) in lhs.iter_mut().zip(&node_harmonics[i * nb..(i + 1) * nb]) {
                    *acc += wf * h;
                }
            }
            for (ell, slot) in per_ell.iter_mut().enumerate() {
                let lambda = funk_hecke_lambda(ell, gk, 3).map_err(numerical)?;
                for m in -(ell as i32)..=(ell as i32) {
                    let j = ((ell * ell) as i32 + ell as i32 + m) as usize;
                    *slot = slot.max((lhs[j] - lambda * x_harmonics[j]).abs());
                }
            }
        }
        for (ell, dev) in per_ell.iter().enumerate() {
            overall = overall.max(*dev);
            out.rows.push(CsvRow {
                experiment: cfg.experiment.name().into(),
                d: Some(ell),
                resolution: Some(k as f64),
                point_id: format!("k{k}:l{ell}"),
                value: Some(*dev),
                ..CsvRow::default()
            });
        }
    }
    let seconds = t0.elapsed().as_secs_f64();
    out.summary.push(format!(
        "max |surface quadrature - coefficient| = {overall:.3e} over k <= {k_max}, l <= 8, 10 points ({seconds:.2}s)"
    ));
    out.assert_ok = overall < 1e-8;
    out.assert_detail = format!("max deviation {overall:.3e} (threshold 1e-8)");
    Ok(out)
}

// ---------------------------------------------------------------------
// axioms-check
// ---------------------------------------------------------------------

fn run_axioms_check(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let amb = Ambient::boxed(vec![-1.0], vec![1.0]).map_err(numerical)?;
    let mut out = RunOutput::new();
    let mut rng = SplitMix64::new(cfg.seed);
    let mut ok = true;
    let mut worst_mass: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;

    let polys: Vec<TestPoly> = vec![
        Box::new(|_: &[f64]| 1.0),
        Box::new(|y: &[f64]| y[0]),
        Box::new(|y: &[f64]| y[0] * y[0]),
        Box::new(|y: &[f64]| 1.0 + 0.5 * y[0] - 0.25 * y[0] * y[0]),
        Box::new(|y: &[f64]| y[0] * y[0] * y[0]),
    ];

    for (family, name) in [
        (MollifierFamily::LasserreBox, "lasserre-box"),
        (MollifierFamily::SmoothBump, "smooth-bump"),
    ] {
        let make = |z: Vec<f64>, eps: f64| -> Result<MollifierSpec, CliError> {
            match family {
                MollifierFamily::LasserreBox => {
                    MollifierSpec::lasserre_box(z, eps, amb.clone()).map_err(numerical)
                }
                MollifierFamily::SmoothBump => {
                    MollifierSpec::smooth_bump(z, eps, amb.clone()).map_err(numerical)
                }
                MollifierFamily::ZonalAlgebraic => unreachable!(),
            }
        };
        let resolutions = [0.4, 0.2, 0.1, 0.05];
        let mut fractions = Vec::new();
        for &eps in &resolutions {
            let spec = make(vec![0.1], eps)?;
            let mass_dev = (spec.mass_quadrature().map_err(numerical)? - 1.0).abs();
            worst_mass = worst_mass.max(mass_dev);
            let reference = make(vec![0.0], eps)?.norm_sq().map_err(numerical)?;
            let mut norm_dev: f64 = 0.0;
            for _ in 0..20 {
                let z = rng.uniform(-(1.0 - eps) * 0.95, (1.0 - eps) * 0.95);
                let quad = make(vec![z], eps)?.norm_sq_quadrature().map_err(numerical)?;
                norm_dev = norm_dev.max((quad - reference).abs() / reference);
            }
            worst_norm = worst_norm.max(norm_dev);
            let frac = spec.off_ball_energy_fraction(0.3).map_err(numerical)?;
            fractions.push(frac);
            for (label, v) in [
                ("mass_dev", mass_dev),
                ("norm_dev", norm_dev),
                ("offball_frac", frac),
            ] {
                out.rows.push(CsvRow {
                    experiment: cfg.experiment.name().into(),
                    resolution: Some(eps),
                    point_id: format!("{name}:{label}"),
                    value: Some(v),
                    ..CsvRow::default()
                });
            }
            for (i, p) in polys.iter().enumerate() {
                let spec = make(vec![0.1], eps)?;
                let err = (spec
                    .ell_apply(Region::SupportLocator, p)
                    .map_err(numerical)?
                    - p(&[0.1]))
                .abs();
                out.rows.push(CsvRow {
                    experiment: cfg.experiment.name().into(),
                    resolution: Some(eps),
                    point_id: format!("{name}:repro_p{i}"),
                    value: Some(err),
                    ..CsvRow::default()
                });
            }
        }
        let monotone = fractions.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        ok &= monotone;
        out.summary.push(format!(
            "{name}: off-ball fractions along eps {resolutions:?} = {fractions:?} (monotone: {monotone})"
        ));
    }

    // zonal family
    {
        let schedule = [4usize, 16, 64];
        let mut fractions = Vec::new();
        for &k in &schedule {
            let spec = MollifierSpec::zonal(rng.unit_sphere(), k).map_err(numerical)?;
            let mass_dev = (spec.mass_quadrature().map_err(numerical)? - 1.0).abs();
            worst_mass = worst_mass.max(mass_dev);
            let analytic = spec.norm_sq().map_err(numerical)?;
            let norm_dev =
                (spec.norm_sq_quadrature().map_err(numerical)? - analytic).abs() / analytic;
            worst_norm = worst_norm.max(norm_dev);
            let frac = MollifierSpec::zonal([0.0, 0.0, 1.0], k)
                .map_err(numerical)?
                .off_ball_energy_fraction(0.3)
                .map_err(numerical)?;
            fractions.push(frac);
            for (label, v) in [
                ("mass_dev", mass_dev),
                ("norm_dev", norm_dev),
                ("offball_frac", frac),
            ] {
                out.rows.push(CsvRow {
                    experiment: cfg.experiment.name().into(),
                    resolution: Some(k as f64),
                    point_id: format!("zonal:{label}"),
                    value: Some(v),
                    ..CsvRow::default()
                });
            }
            let spec = MollifierSpec::zonal([0.0, 0.0, 1.0], k).map_err(numerical)?;
            let err = (spec
                .ell_apply(Region::SupportLocator, |y: &[f64]| y[2])
                .map_err(numerical)?
                - 1.0)
                .abs();
            out.rows.push(CsvRow {
                experiment: cfg.experiment.name().into(),
                resolution: Some(k as f64),
                point_id: "zonal:repro_y3".into(),
                value: Some(err),
                ..CsvRow::default()
            });
        }
        let monotone = fractions.windows(2).all(|w| w[1] < w[0]);
        ok &= monotone;
        out.summary.push(format!(
            "zonal: off-ball fractions along k {schedule:?} = {fractions:?} (monotone: {monotone})"
        ));
    }

    ok &= worst_mass < 1e-8 && worst_norm < 1e-8;
    out.assert_ok = ok;
    out.assert_detail = format!(
        "unit-mass dev {worst_mass:.3e}, norm-constancy dev {worst_norm:.3e} (thresholds 1e-8)"
    );
    Ok(out)
}

type TestPoly = Box<dyn Fn(&[f64]) -> f64>;
