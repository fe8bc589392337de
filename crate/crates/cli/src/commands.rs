//! One function per subcommand. Each returns a [`Report`]; nothing here
//! touches the file system except through [`Ctx`].

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use zeroset::battery;
use zeroset::calibration::{deltas_from_measurements, measure_corpus, Calibration};
use zeroset::catalog;
use zeroset::cloud::{sample_zero_set, PointCloud};
use zeroset::detect::{detect_degree, DetectInput, DetectOptions, StrataLabel};
use zeroset::dimension::{mdim_estimate, MdimFit};
use zeroset::frequency::{frequency_profile, zeta_hat};
use zeroset::poly::VANISHING_TOL;
use zeroset::strata::{openness_violations, regular_density_gap, stratify, StratifyOptions};
use zeroset::supnorm::SupOptions;
use zeroset::symmetry::{invariant_subspace, symmetry_defect, SymmetryOptions};
use zeroset::theta::{theta_bilateral, theta_bilateral_scales, theta_upper_taylor, ThetaOptions};
use zeroset::topology::{components, corkscrew_estimate, sign_bipartite_check, CorkscrewOptions, GridBox, GridOptions};
use zeroset::tube::{singular_points, tube_volume, TubeMode, TubeOptions};
use zeroset::MultiPoly;

use crate::args::{BatteryKind, Command, Global, SetArg, ThetaMethod, TubeKind};
use crate::error::{CliError, CliResult};
use crate::io::{parse_list, parse_point, Inputs};
use crate::plot::{sign_raster, LineChart, PlotFile, Series};

/// Tabular part of a report, written as CSV.
#[derive(Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Output(e.to_string());
        w.write_record(&self.header).map_err(err)?;
        for r in &self.rows {
            w.write_record(r).map_err(err)?;
        }
        w.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }
}

#[derive(Default)]
pub struct Report {
    pub body: Value,
    pub table: Option<Table>,
    pub plots: Vec<PlotFile>,
    pub summary: Vec<String>,
    /// Extra output files (name, contents).
    pub files: Vec<(String, Vec<u8>)>,
    /// Set when a classification stayed unresolved.
    pub unresolved: Option<String>,
}

pub struct Ctx<'a> {
    pub global: &'a Global,
    pub inputs: Inputs,
    pub resolutions: BTreeMap<String, Vec<f64>>,
    pub calibration: Calibration,
}

impl Ctx<'_> {
    fn note(&mut self, key: &str, values: &[f64]) {
        self.resolutions.insert(key.to_string(), values.to_vec());
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.global.seed)
    }

    fn plot_chart(&self, report: &mut Report, chart: LineChart, stem: &str) {
        if let Some(f) = self.global.plot {
            report.plots.push(chart.render(f, stem));
        }
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt_num<T: ToString>(v: Option<T>) -> String {
    v.map(|t| t.to_string()).unwrap_or_default()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn fmt_point(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
    format!("({})", parts.join(", "))
}

enum SetInput {
    Poly(MultiPoly),
    Cloud(PointCloud, usize),
}

impl SetInput {
    fn n(&self) -> usize {
        match self {
            SetInput::Poly(p) => p.n(),
            SetInput::Cloud(c, _) => c.n,
        }
    }
}

fn load_set(ctx: &mut Ctx<'_>, set: &SetArg, need_degree: bool) -> CliResult<SetInput> {
    match (&set.poly, &set.cloud) {
        (Some(p), None) => Ok(SetInput::Poly(ctx.inputs.poly(p)?)),
        (None, Some(c)) => {
            let cloud = ctx.inputs.cloud(c)?;
            let d = match set.degree {
                Some(d) => d,
                None if need_degree => return Err(CliError::Input("--cloud needs --degree".into())),
                None => 0,
            };
            Ok(SetInput::Cloud(cloud, d))
        }
        _ => Err(CliError::Input("give exactly one of --poly or --cloud".into())),
    }
}

pub fn dispatch(cmd: &Command, ctx: &mut Ctx<'_>) -> CliResult<Report> {
    match cmd {
        Command::Theta {
            set,
            point,
            radii,
            k,
            method,
            h_rel,
        } => theta(ctx, set, point, radii, *k, *method, *h_rel),
        Command::Zeta { poly, point, radii, k } => zeta(ctx, &poly.poly, point, radii, *k),
        Command::Frequency { poly, center, radii } => frequency(ctx, &poly.poly, center, radii),
        Command::Detect {
            set,
            point,
            scales,
            k_max,
            h_rel,
        } => detect(ctx, set, point, scales, *k_max, *h_rel),
        Command::Stratify {
            poly,
            center,
            radius,
            h,
            cross_check,
            mdim_scales,
        } => strat(
            ctx,
            &poly.poly,
            center,
            *radius,
            *h,
            *cross_check,
            mdim_scales.as_deref(),
        ),
        Command::Mdim {
            set,
            center,
            radius,
            h,
            scales,
        } => mdim(ctx, set, center, *radius, *h, scales),
        Command::Tube {
            poly,
            radii,
            mode,
            samples,
            region,
        } => tube(ctx, &poly.poly, radii, *mode, *samples, *region),
        Command::Components {
            poly,
            bx,
            pitch,
            kappa,
            min_component,
            max_vertices,
            bipartite,
            corkscrew_radii,
        } => comps(
            ctx,
            &poly.poly,
            bx,
            *pitch,
            GridOptions {
                kappa: *kappa,
                min_component: *min_component,
                max_vertices: *max_vertices,
            },
            *bipartite,
            corkscrew_radii.as_deref(),
        ),
        Command::Symmetry {
            poly,
            point,
            radius,
            k,
            sweep_deg,
            frames,
        } => symmetry(ctx, &poly.poly, point, *radius, *k, *sweep_deg, *frames),
        Command::Calibrate {
            quick,
            ratio_seeds,
            ratio_cases,
            ..
        } => calibrate(ctx, *quick, *ratio_seeds, *ratio_cases),
        Command::Battery { kind, count, degree } => run_battery(ctx, *kind, *count, *degree),
        Command::Replay { .. } => unreachable!("replay is handled by the runner"),
    }
}

fn theta(
    ctx: &mut Ctx<'_>,
    set: &SetArg,
    point: &str,
    radii: &str,
    k: usize,
    method: Option<ThetaMethod>,
    h_rel: Option<f64>,
) -> CliResult<Report> {
    let input = load_set(ctx, set, false)?;
    let x = parse_point("point", point, input.n())?;
    let radii = parse_list("radii", radii)?;
    ctx.note("radii", &radii);
    let mut opts = ThetaOptions {
        seed: ctx.global.seed,
        h_rel,
        ..ThetaOptions::default()
    };
    let h = opts.h(input.n());
    ctx.note("h_rel", &[h]);
    let mut table = Table::new(&["r", "theta", "method", "sentinel"]);
    let mut rep = Report::default();
    match (&input, method) {
        (SetInput::Poly(p), None | Some(ThetaMethod::Taylor)) => {
            let mut out = Vec::new();
            for &r in &radii {
                let t = theta_upper_taylor(p, &x, r, k, h)?;
                table.push(vec![num(r), num(t.theta), "taylor".into(), t.sentinel.to_string()]);
                rep.summary.push(format!(
                    "r={r} theta_ub={:.6}{}",
                    t.theta,
                    if t.sentinel { " (low-order part vanishes)" } else { "" }
                ));
                out.push(t);
            }
            rep.body = json!({ "k": k, "x": x, "method": "taylor", "values": to_value(&out) });
        }
        (SetInput::Poly(p), Some(ThetaMethod::Bilateral)) => {
            let mut out = Vec::new();
            for &r in &radii {
                let cloud = sample_zero_set(p, &x, (1.0 + opts.margin) * r, h * r)?;
                let seed = theta_upper_taylor(p, &x, r, k, h).ok().and_then(|t| t.approximant);
                opts.h_rel = Some(h);
                let t = theta_bilateral(&cloud, &x, r, k, &opts, seed.as_ref())?;
                table.push(vec![num(r), num(t.theta[0]), "bilateral".into(), "false".into()]);
                rep.summary.push(format!("r={r} theta={:.6}", t.theta[0]));
                out.push(t);
            }
            rep.body = json!({ "k": k, "x": x, "method": "bilateral", "values": to_value(&out) });
        }
        (SetInput::Cloud(c, _), m) => {
            if m == Some(ThetaMethod::Taylor) {
                return Err(CliError::Input("the taylor bound needs --poly".into()));
            }
            let t = theta_bilateral_scales(c, &x, &radii, k, &opts, None)?;
            for (r, v) in t.scales.iter().zip(&t.theta) {
                table.push(vec![num(*r), num(*v), "bilateral".into(), "false".into()]);
                rep.summary.push(format!("r={r} theta={v:.6}"));
            }
            rep.body = json!({ "k": k, "x": x, "method": "bilateral", "values": [to_value(&t)] });
        }
    }
    rep.table = Some(table);
    Ok(rep)
}

fn zeta(ctx: &mut Ctx<'_>, poly: &str, point: &str, radii: &str, k: usize) -> CliResult<Report> {
    let p = ctx.inputs.poly(poly)?;
    let x = parse_point("point", point, p.n())?;
    let radii = parse_list("radii", radii)?;
    ctx.note("radii", &radii);
    let sup = SupOptions {
        seed: ctx.global.seed,
        ..SupOptions::default()
    };
    let mut rep = Report::default();
    let mut table = Table::new(&["r", "zeta"]);
    let mut vals = Vec::new();
    for &r in &radii {
        let z = zeta_hat(&p, &x, r, k, &sup)?;
        let shown = if z.is_infinite() {
            "inf".to_string()
        } else {
            num(z.value)
        };
        rep.summary.push(format!("r={r} zeta_{k}={shown}"));
        table.push(vec![num(r), shown]);
        vals.push(z);
    }
    rep.body = json!({ "k": k, "x": x, "radii": radii, "values": to_value(&vals) });
    rep.table = Some(table);
    Ok(rep)
}

fn frequency(ctx: &mut Ctx<'_>, poly: &str, center: &str, radii: &str) -> CliResult<Report> {
    let p = ctx.inputs.poly(poly)?;
    let x0 = parse_point("center", center, p.n())?;
    let radii = parse_list("radii", radii)?;
    ctx.note("radii", &radii);
    let prof = frequency_profile(&p, &x0, &radii)?;
    let mut rep = Report::default();
    let mut table = Table::new(&["r", "H", "D", "N"]);
    for i in 0..radii.len() {
        table.push(vec![
            num(prof.radii[i]),
            num(prof.h_vals[i]),
            num(prof.d_vals[i]),
            num(prof.n_vals[i]),
        ]);
        rep.summary.push(format!("r={} N={:.9}", prof.radii[i], prof.n_vals[i]));
    }
    let chart = LineChart {
        title: format!("frequency at {}", fmt_point(&x0)),
        log_x: true,
        log_y: false,
        series: vec![Series {
            label: "N(r)".into(),
            x: prof.radii.clone(),
            y: prof.n_vals.clone(),
        }],
    };
    ctx.plot_chart(&mut rep, chart, "frequency");
    rep.body = to_value(&prof);
    rep.table = Some(table);
    Ok(rep)
}

fn label_summary(l: &StrataLabel) -> String {
    match (&l.k, &l.certificate) {
        (Some(k), Some(c)) => format!(
            "point {}: k={k} certificate {:?} r={} theta={:.6} < delta={:.6}{}{}",
            fmt_point(&l.point),
            c.criterion,
            c.r,
            c.value,
            c.threshold,
            if l.near_threshold { " (near threshold)" } else { "" },
            match &l.decay {
                Some(d) if !d.passed => " decay-check FAILED",
                _ => "",
            }
        ),
        _ => format!("point {}: unresolved", fmt_point(&l.point)),
    }
}

fn detect(
    ctx: &mut Ctx<'_>,
    set: &SetArg,
    points: &[String],
    scales: &str,
    k_max: Option<usize>,
    h_rel: Option<f64>,
) -> CliResult<Report> {
    let input = load_set(ctx, set, true)?;
    let n = input.n();
    let scales = parse_list("scales", scales)?;
    ctx.note("scales", &scales);
    let opts = DetectOptions {
        h_rel,
        theta: ThetaOptions {
            seed: ctx.global.seed,
            ..ThetaOptions::default()
        },
        ..DetectOptions::default()
    };
    let d = match &input {
        SetInput::Poly(p) => p.degree() as usize,
        SetInput::Cloud(_, d) => *d,
    };
    let k_max = k_max.unwrap_or(d);
    let xs = points
        .iter()
        .map(|s| parse_point("point", s, n))
        .collect::<CliResult<Vec<_>>>()?;
    let mut labels = Vec::new();
    let calib = &ctx.calibration;
    for x in &xs {
        let di = match &input {
            SetInput::Poly(p) => DetectInput::Poly(p),
            SetInput::Cloud(c, d) => DetectInput::Cloud { cloud: c, degree: *d },
        };
        labels.push(detect_degree(di, x, &scales, k_max, calib, &opts)?);
    }
    let mut rep = Report::default();
    let mut table = Table::new(&[
        "point",
        "k",
        "r",
        "theta",
        "delta",
        "near_threshold",
        "extrapolated",
        "decay_passed",
    ]);
    for l in &labels {
        rep.summary.push(label_summary(l));
        let c = l.certificate.as_ref();
        table.push(vec![
            fmt_point(&l.point),
            opt_num(l.k),
            opt_num(c.map(|c| c.r)),
            opt_num(c.map(|c| c.value)),
            opt_num(c.map(|c| c.threshold)),
            l.near_threshold.to_string(),
            l.extrapolated.to_string(),
            opt_num(l.decay.as_ref().map(|d| d.passed)),
        ]);
    }
    let unresolved = labels.iter().filter(|l| !l.is_resolved()).count();
    if unresolved > 0 {
        rep.unresolved = Some(format!(
            "{unresolved} of {} points unresolved for k <= {k_max}",
            labels.len()
        ));
    }
    rep.body = json!({ "scales": scales, "k_max": k_max, "labels": to_value(&labels) });
    rep.table = Some(table);
    Ok(rep)
}

fn fit_series(label: &str, fit: &MdimFit) -> Series {
    Series {
        label: format!("{label} slope {:.3}", fit.slope),
        x: fit.scales.iter().map(|s| 1.0 / s).collect(),
        y: fit.counts.iter().map(|&c| c as f64).collect(),
    }
}

fn strat(
    ctx: &mut Ctx<'_>,
    poly: &str,
    center: &str,
    radius: f64,
    h: f64,
    cross_check: usize,
    mdim_scales: Option<&str>,
) -> CliResult<Report> {
    let p = ctx.inputs.poly(poly)?;
    let c = parse_point("center", center, p.n())?;
    ctx.note("h", &[h]);
    let opts = StratifyOptions {
        cross_check,
        calibration: Some(&ctx.calibration),
        detect: DetectOptions {
            theta: ThetaOptions {
                seed: ctx.global.seed,
                ..ThetaOptions::default()
            },
            ..DetectOptions::default()
        },
        ..StratifyOptions::default()
    };
    let s = stratify(&p, &c, radius, h, &opts)?;
    let counts = s.counts();
    let open = openness_violations(&s);
    let gap = regular_density_gap(&s);
    let mut rep = Report::default();
    let mut header: Vec<String> = (1..=p.n()).map(|i| format!("x{i}")).collect();
    header.extend(["k", "k_exact", "k_detected", "agrees"].map(String::from));
    let mut table = Table {
        header,
        rows: Vec::new(),
    };
    for sp in &s.points {
        let mut row: Vec<String> = sp.point.iter().map(|v| num(*v)).collect();
        row.push(sp.k.to_string());
        row.push(opt_num(sp.k_exact));
        row.push(opt_num(sp.detected.as_ref().and_then(|l| l.k)));
        row.push(opt_num(sp.agrees));
        table.push(row);
    }
    rep.summary.push(format!(
        "points={} counts by k (1..)={:?}",
        s.points.len(),
        &counts[1.min(counts.len())..]
    ));
    rep.summary.push(format!(
        "openness violations={} max A_k to A_1 gap={}",
        open.len(),
        opt_num(gap)
    ));
    let checked: Vec<bool> = s.points.iter().filter_map(|sp| sp.agrees).collect();
    if !checked.is_empty() {
        rep.summary.push(format!(
            "detector cross-check: {} of {} agree",
            checked.iter().filter(|&&a| a).count(),
            checked.len()
        ));
    }
    let mut fits = BTreeMap::new();
    if let Some(sc) = mdim_scales {
        let scales = parse_list("mdim-scales", sc)?;
        ctx.note("mdim_scales", &scales);
        let mut series = Vec::new();
        let all = mdim_estimate(&s.all_points(), &scales).ok();
        if let Some(f) = &all {
            rep.summary.push(format!("mdim(all)={:.4}", f.slope));
            series.push(fit_series("all", f));
        }
        fits.insert("all".to_string(), to_value(&all));
        for k in 2..counts.len() {
            if counts[k] == 0 {
                continue;
            }
            let f = mdim_estimate(&s.stratum(k), &scales).ok();
            if let Some(f) = &f {
                rep.summary.push(format!("mdim(A_{k})={:.4}", f.slope));
                series.push(fit_series(&format!("A_{k}"), f));
            }
            fits.insert(format!("A_{k}"), to_value(&f));
        }
        let chart = LineChart {
            title: "covering numbers".into(),
            log_x: true,
            log_y: true,
            series,
        };
        ctx.plot_chart(&mut rep, chart, "mdim");
    }
    rep.body = json!({
        "n": s.n,
        "degree": s.degree,
        "h": s.h,
        "counts": counts,
        "openness_violations": open,
        "density_gap": gap,
        "mdim": fits,
    });
    rep.table = Some(table);
    Ok(rep)
}

fn mdim(ctx: &mut Ctx<'_>, set: &SetArg, center: &str, radius: f64, h: f64, scales: &str) -> CliResult<Report> {
    let input = load_set(ctx, set, false)?;
    let scales = parse_list("scales", scales)?;
    ctx.note("scales", &scales);
    let cloud = match input {
        SetInput::Poly(p) => {
            let c = parse_point("center", center, p.n())?;
            ctx.note("h", &[h]);
            sample_zero_set(&p, &c, radius, h)?
        }
        SetInput::Cloud(c, _) => c,
    };
    let fit = mdim_estimate(&cloud, &scales)?;
    let mut rep = Report::default();
    let mut table = Table::new(&["scale", "covering_number"]);
    for (s, c) in fit.scales.iter().zip(&fit.counts) {
        table.push(vec![num(*s), c.to_string()]);
    }
    rep.summary.push(format!(
        "points={} slope={:.4} residual={:.4} dropped={}",
        cloud.len(),
        fit.slope,
        fit.residual,
        fit.dropped
    ));
    let chart = LineChart {
        title: "covering numbers".into(),
        log_x: true,
        log_y: true,
        series: vec![fit_series("N(s)", &fit)],
    };
    ctx.plot_chart(&mut rep, chart, "mdim");
    rep.body = json!({ "points": cloud.len(), "fit": to_value(&fit) });
    rep.table = Some(table);
    Ok(rep)
}

fn tube(ctx: &mut Ctx<'_>, poly: &str, radii: &str, mode: TubeKind, samples: usize, region: f64) -> CliResult<Report> {
    let p = ctx.inputs.poly(poly)?;
    let radii = parse_list("radii", radii)?;
    ctx.note("radii", &radii);
    let opts = TubeOptions {
        samples,
        seed: ctx.global.seed,
        region_radius: region,
        h: None,
        band_g0: ctx.calibration.band_g0,
        band_f0: ctx.calibration.band_f0,
    };
    let mode = match mode {
        TubeKind::ZeroSet => TubeMode::ZeroSet,
        TubeKind::SingularSet => TubeMode::SingularSet,
    };
    let t = tube_volume(&p, &radii, mode, &opts)?;
    ctx.note("h", &[t.h]);
    let mut rep = Report::default();
    let mut table = Table::new(&["r", "volume", "std_error", "hits"]);
    for s in &t.samples {
        table.push(vec![num(s.r), num(s.volume), num(s.std_error), s.hits.to_string()]);
    }
    rep.summary.push(format!(
        "set points={} slope={} fit residual={}",
        t.set_points,
        t.slope.map(|s| format!("{s:.4}")).unwrap_or_else(|| "n/a".into()),
        opt_num(t.fit_residual)
    ));
    let chart = LineChart {
        title: "tube volume".into(),
        log_x: true,
        log_y: true,
        series: vec![Series {
            label: "vol".into(),
            x: t.samples.iter().map(|s| s.r).collect(),
            y: t.samples.iter().map(|s| s.volume).collect(),
        }],
    };
    ctx.plot_chart(&mut rep, chart, "tube");
    rep.body = to_value(&t);
    rep.table = Some(table);
    Ok(rep)
}

fn parse_box(text: &str, n: usize) -> CliResult<GridBox> {
    let v = parse_list("box", text)?;
    let bx = if v.len() == 2 {
        GridBox::cube(n, v[0], v[1])
    } else if v.len() == 2 * n {
        GridBox {
            lo: v.iter().step_by(2).copied().collect(),
            hi: v.iter().skip(1).step_by(2).copied().collect(),
        }
    } else {
        return Err(CliError::Input(format!(
            "--box: expected 2 or {} values, got {}",
            2 * n,
            v.len()
        )));
    };
    if bx.lo.iter().zip(&bx.hi).any(|(l, h)| l >= h) {
        return Err(CliError::Input("--box: every lo must be below its hi".into()));
    }
    Ok(bx)
}

fn comps(
    ctx: &mut Ctx<'_>,
    poly: &str,
    bx: &str,
    pitch: f64,
    opts: GridOptions,
    bipartite: bool,
    corkscrew: Option<&str>,
) -> CliResult<Report> {
    let p = ctx.inputs.poly(poly)?;
    let bx = parse_box(bx, p.n())?;
    if !(pitch > 0.0) {
        return Err(CliError::Input("--pitch must be positive".into()));
    }
    ctx.note("pitch", &[pitch]);
    let c = components(&p, &bx, pitch, &opts)?;
    let mut rep = Report::default();
    rep.summary.push(format!(
        "pos={} neg={} fragments={} direct_crossings={}",
        c.pos_count, c.neg_count, c.fragments, c.direct_crossings
    ));
    let mut table = Table::new(&["sign", "component", "vertices"]);
    for (i, s) in c.pos_sizes.iter().enumerate() {
        table.push(vec!["+".into(), i.to_string(), s.to_string()]);
    }
    for (i, s) in c.neg_sizes.iter().enumerate() {
        table.push(vec!["-".into(), i.to_string(), s.to_string()]);
    }
    let mut body = json!({
        "pos": c.pos_count,
        "neg": c.neg_count,
        "pos_sizes": c.pos_sizes,
        "neg_sizes": c.neg_sizes,
        "fragments": c.fragments,
        "direct_crossings": c.direct_crossings,
        "dims": c.field.dims,
        "pitch": c.field.pitch,
        "box": to_value(&bx),
    });
    if let Some(fmt) = ctx.global.plot {
        let f = &c.field;
        let (w, h) = (f.dims[0], if f.n > 1 { f.dims[1] } else { 1 });
        // Slice through the middle of the remaining axes.
        let mut base = 0usize;
        let mut stride = w * h;
        for a in 2..f.n {
            base += (f.dims[a] / 2) * stride;
            stride *= f.dims[a];
        }
        let mut signs = vec![0i8; w * h];
        for row in 0..h {
            for col in 0..w {
                signs[row * w + col] = f.signs[base + (h - 1 - row) * w + col];
            }
        }
        rep.plots.push(sign_raster(&signs, w, h, fmt, "signs"));
    }
    if bipartite {
        let b = sign_bipartite_check(&p, &bx, pitch, &opts)?;
        rep.summary.push(format!(
            "bipartite={} edges={} same_sign_edges={} crossings={}",
            b.bipartite,
            b.edges.len(),
            b.same_sign_edges,
            b.crossings_checked
        ));
        body["bipartite"] = to_value(&b);
    }
    if let Some(radii) = corkscrew {
        let radii = parse_list("corkscrew-radii", radii)?;
        ctx.note("corkscrew_radii", &radii);
        let ck = corkscrew_estimate(&p, &bx, pitch, &radii, &CorkscrewOptions::default())?;
        rep.summary.push(format!("corkscrew M+={} M-={}", ck.m_pos, ck.m_neg));
        body["corkscrew"] = to_value(&ck);
    }
    rep.body = body;
    rep.table = Some(table);
    Ok(rep)
}

fn symmetry(
    ctx: &mut Ctx<'_>,
    poly: &str,
    point: &str,
    radius: f64,
    k: usize,
    sweep_deg: Option<f64>,
    frames: usize,
) -> CliResult<Report> {
    let p = ctx.inputs.poly(poly)?;
    let x = parse_point("point", point, p.n())?;
    ctx.note("radius", &[radius]);
    let opts = SymmetryOptions {
        frames,
        sweep_deg,
        seed: ctx.global.seed,
        ..SymmetryOptions::default()
    };
    let d = symmetry_defect(&p, &x, radius, k, &opts)?;
    let v = invariant_subspace(&p);
    let mut rep = Report::default();
    rep.summary.push(format!(
        "k={k} defect={:.6e} ({}) invariant dim={}",
        d.defect,
        if d.exact { "exact" } else { "upper bound" },
        v.len()
    ));
    let mut table = Table::new(&["k", "defect", "exact", "invariant_dim"]);
    table.push(vec![
        k.to_string(),
        num(d.defect),
        d.exact.to_string(),
        v.len().to_string(),
    ]);
    rep.body = json!({ "defect": to_value(&d), "invariant_subspace": v });
    rep.table = Some(table);
    Ok(rep)
}

/// Empirical ratio statistics of one seed's battery.
fn ratio_stats(cases: &[battery::RatioCase]) -> (f64, f64) {
    let mut r: Vec<f64> = cases.iter().map(|c| c.ratio).collect();
    r.sort_by(f64::total_cmp);
    let q95 = r[((r.len() - 1) as f64 * 0.95).round() as usize];
    (r[r.len() - 1], q95)
}

/// Fraction of the `x3`-axis in `B(0, 0.9)` within `h` of a band point of `x1 x2`.
fn axis_coverage(g0: f64, f0: f64, h: f64) -> CliResult<f64> {
    let p = catalog::cross(3);
    let pts = singular_points(&p, 1.0, h, g0, f0)?;
    let steps = (1.8 / h).round() as usize;
    let mut hit = 0;
    for i in 0..=steps {
        let t = -0.9 + 1.8 * i as f64 / steps as f64;
        if pts
            .chunks(3)
            .any(|q| (q[0] * q[0] + q[1] * q[1] + (q[2] - t) * (q[2] - t)).sqrt() <= h)
        {
            hit += 1;
        }
    }
    Ok(hit as f64 / (steps + 1) as f64)
}

fn calibrate(ctx: &mut Ctx<'_>, quick: bool, ratio_seeds: u64, ratio_cases: usize) -> CliResult<Report> {
    let mut c = Calibration::empty();
    let opts = ThetaOptions {
        seed: ctx.global.seed,
        ..ThetaOptions::default()
    };
    let configs: &[(usize, usize)] = if quick {
        &[(2, 3), (3, 3)]
    } else {
        &[(2, 6), (3, 4), (4, 3)]
    };
    let mut rep = Report::default();
    for &(n, d) in configs {
        let ms = measure_corpus(n, d, d - 1, &opts, |m| {
            eprintln!(
                "  n={} {} (deg {}) k={}: theta={:.4}",
                m.n, m.name, m.degree, m.k, m.theta
            );
        })?;
        c.measurements.extend(ms);
    }
    c.deltas = deltas_from_measurements(&c.measurements);
    rep.summary.push(format!(
        "{} thresholds from {} measurements",
        c.deltas.len(),
        c.measurements.len()
    ));

    let (seeds, cases) = if quick {
        (ratio_seeds.min(2), ratio_cases.min(40))
    } else {
        (ratio_seeds, ratio_cases)
    };
    let per_seed: Vec<(f64, f64)> = (0..seeds)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.global.seed.wrapping_add(1000 + i));
            battery::ratio_battery(cases, 4, &mut rng).map(|cs| ratio_stats(&cs))
        })
        .collect::<zeroset::Result<_>>()?;
    let mean = |f: fn(&(f64, f64)) -> f64| per_seed.iter().map(f).sum::<f64>() / per_seed.len().max(1) as f64;
    let c_max = mean(|s| s.0);
    let c_q95 = mean(|s| s.1);
    c.constants.insert("theta_zeta_ratio".into(), c_max);
    c.constants.insert("theta_zeta_ratio_q95".into(), c_q95);
    rep.summary.push(format!(
        "theta/zeta^(1/k): max {c_max:.4} q95 {c_q95:.4} over {seeds} seeds of {cases}"
    ));

    let sweep = if quick { 10.0 } else { 2.0 };
    let sym = SymmetryOptions {
        sweep_deg: Some(sweep),
        seed: ctx.global.seed,
        ..SymmetryOptions::default()
    };
    let mut eta = f64::INFINITY;
    for r in [0.5, 1.0] {
        eta = eta.min(symmetry_defect(&catalog::szulkin(), &[0.0; 3], r, 1, &sym)?.defect);
    }
    c.constants.insert("szulkin_symmetry_defect".into(), eta);
    rep.summary.push(format!("szulkin 1-symmetry defect {eta:.6}"));

    let h = 0.05;
    let (mut g0, mut f0) = (c.band_g0, c.band_f0);
    let mut cover = axis_coverage(g0, f0, h)?;
    while cover < 1.0 && g0 < 64.0 {
        g0 *= 2.0;
        f0 *= 2.0;
        cover = axis_coverage(g0, f0, h)?;
    }
    c.band_g0 = g0;
    c.band_f0 = f0;
    c.constants.insert("band_axis_coverage".into(), cover);
    rep.summary.push(format!(
        "singular band g0={g0} f0={f0} covers {:.1}% of the x1x2 axis",
        100.0 * cover
    ));

    c.version = c.content_version();
    rep.summary.push(format!("calibration version {}", c.version));
    rep.body = json!({ "version": c.version, "deltas": to_value(&c.deltas), "constants": c.constants });
    let mut table = Table::new(&["n", "d", "k", "delta", "theta_min", "witness"]);
    for e in &c.deltas {
        table.push(vec![
            e.n.to_string(),
            e.d.to_string(),
            e.k.to_string(),
            num(e.delta),
            num(e.theta_min),
            e.witness.clone(),
        ]);
    }
    rep.table = Some(table);
    rep.files.push(("calibration.json".into(), c.to_json().into_bytes()));
    Ok(rep)
}

fn run_battery(ctx: &mut Ctx<'_>, kind: BatteryKind, count: usize, degree: Option<u32>) -> CliResult<Report> {
    let mut rng = ctx.rng();
    let mut rep = Report::default();
    match kind {
        BatteryKind::Frequency => {
            let d = degree.unwrap_or(5);
            let cases = battery::frequency_battery(count, d, &mut rng)?;
            let mut table = Table::new(&["case", "n", "d", "r", "N"]);
            let (mut worst, mut mono) = (f64::NEG_INFINITY, 0.0f64);
            for (i, c) in cases.iter().enumerate() {
                for (r, v) in c.radii.iter().zip(&c.values) {
                    table.push(vec![
                        i.to_string(),
                        c.poly.n().to_string(),
                        c.d.to_string(),
                        num(*r),
                        num(*v),
                    ]);
                    worst = worst.max(v - c.d as f64);
                }
                for w in c.values.windows(2) {
                    mono = mono.max(w[0] - w[1]);
                }
            }
            rep.summary.push(format!(
                "cases={} max N-d={worst:.3e} max decrease={mono:.3e}",
                cases.len()
            ));
            rep.body = json!({ "max_excess": worst, "max_decrease": mono, "cases": to_value(&cases) });
            rep.table = Some(table);
        }
        BatteryKind::Doubling => {
            let cases = battery::doubling_battery(count, degree.unwrap_or(5), &mut rng)?;
            let mut table = Table::new(&["case", "r", "R", "lhs", "rhs", "rhs_halved"]);
            let mut viol = 0;
            let mut halved = 0;
            for (i, c) in cases.iter().enumerate() {
                let ch = &c.check;
                if ch.lhs > ch.rhs + 1e-9 * ch.rhs.abs().max(1.0) {
                    viol += 1;
                }
                if ch.lhs > ch.rhs_halved {
                    halved += 1;
                }
                table.push(vec![
                    i.to_string(),
                    num(c.r),
                    num(c.big_r),
                    num(ch.lhs),
                    num(ch.rhs),
                    num(ch.rhs_halved),
                ]);
            }
            rep.summary.push(format!(
                "cases={} violations={viol} above halved bound={halved}",
                cases.len()
            ));
            rep.body = json!({ "violations": viol, "above_halved": halved, "cases": to_value(&cases) });
            rep.table = Some(table);
        }
        BatteryKind::Ratio => {
            let cases = battery::ratio_battery(count, degree.unwrap_or(4), &mut rng)?;
            let (m, q) = ratio_stats(&cases);
            let mut table = Table::new(&["case", "n", "d", "k", "r", "zeta", "theta", "ratio"]);
            for (i, c) in cases.iter().enumerate() {
                table.push(vec![
                    i.to_string(),
                    c.n.to_string(),
                    c.d.to_string(),
                    c.k.to_string(),
                    num(c.r),
                    num(c.zeta),
                    num(c.theta),
                    num(c.ratio),
                ]);
            }
            let shipped = ctx.calibration.constant("theta_zeta_ratio");
            rep.summary.push(format!(
                "cases={} max ratio={m:.4} q95={q:.4} calibrated={}",
                cases.len(),
                opt_num(shipped)
            ));
            rep.body = json!({ "max": m, "q95": q, "calibrated": shipped, "cases": to_value(&cases) });
            rep.table = Some(table);
        }
        BatteryKind::Detection => {
            let per_case = count.div_ceil(10).max(1);
            let cases = battery::detection_battery(per_case, &mut rng)?;
            let opts = DetectOptions {
                theta: ThetaOptions {
                    seed: ctx.global.seed,
                    ..ThetaOptions::default()
                },
                ..DetectOptions::default()
            };
            let calib = &ctx.calibration;
            let jobs: Vec<(&battery::DetectionCase, &Vec<f64>)> = cases
                .iter()
                .flat_map(|c| c.points.iter().map(move |x| (c, x)))
                .collect();
            let labels = jobs
                .par_iter()
                .map(|(c, x)| {
                    let d = c.poly.degree() as usize;
                    detect_degree(
                        DetectInput::Poly(&c.poly),
                        x,
                        &zeroset::detect::DEFAULT_SCALES,
                        d,
                        calib,
                        &opts,
                    )
                })
                .collect::<zeroset::Result<Vec<_>>>()?;
            let mut table = Table::new(&["case", "point", "truth", "k", "near_threshold", "decay_passed"]);
            let (mut agree, mut wrong, mut confident_wrong, mut unresolved) = (0, 0, 0, 0);
            for ((c, x), l) in jobs.iter().zip(&labels) {
                let truth = c.poly.vanishing_order(x, VANISHING_TOL).ok();
                match (l.k, truth) {
                    (Some(k), Some(t)) if k == t => agree += 1,
                    (Some(_), _) => {
                        wrong += 1;
                        if !l.near_threshold {
                            confident_wrong += 1;
                        }
                    }
                    (None, _) => unresolved += 1,
                }
                table.push(vec![
                    c.name.clone(),
                    fmt_point(x),
                    opt_num(truth),
                    opt_num(l.k),
                    l.near_threshold.to_string(),
                    opt_num(l.decay.as_ref().map(|d| d.passed)),
                ]);
            }
            rep.summary.push(format!(
                "points={} agree={agree} wrong={wrong} confidently_wrong={confident_wrong} unresolved={unresolved}",
                labels.len()
            ));
            rep.body = json!({
                "agree": agree,
                "wrong": wrong,
                "confidently_wrong": confident_wrong,
                "unresolved": unresolved,
                "labels": to_value(&labels),
            });
            rep.table = Some(table);
        }
        BatteryKind::Separation => {
            let cases = battery::separation_battery(count, degree.unwrap_or(4), 0.01, &mut rng)?;
            ctx.note("h", &[0.01]);
            let min = cases.iter().map(|c| c.distance).fold(f64::INFINITY, f64::min);
            let mut table = Table::new(&["j", "k", "angle_j", "angle_k", "distance"]);
            for c in &cases {
                table.push(vec![
                    c.j.to_string(),
                    c.k.to_string(),
                    num(c.angle_j),
                    num(c.angle_k),
                    num(c.distance),
                ]);
            }
            rep.summary.push(format!("pairs={} min distance={min:.4}", cases.len()));
            rep.body = json!({ "min": min, "cases": to_value(&cases) });
            rep.table = Some(table);
        }
        BatteryKind::Tube => {
            let polys = battery::tube_family(count, degree.unwrap_or(3), &mut rng)?;
            let radii = [0.01, 0.02, 0.04, 0.08];
            ctx.note("radii", &radii);
            let opts = TubeOptions {
                seed: ctx.global.seed,
                ..TubeOptions::default()
            };
            let mut table = Table::new(&["case", "n", "degree", "slope"]);
            let mut slopes = Vec::new();
            for (i, p) in polys.iter().enumerate() {
                let t = tube_volume(p, &radii, TubeMode::ZeroSet, &opts)?;
                table.push(vec![
                    i.to_string(),
                    p.n().to_string(),
                    p.degree().to_string(),
                    opt_num(t.slope),
                ]);
                slopes.push(t.slope);
            }
            let finite: Vec<f64> = slopes.iter().flatten().copied().collect();
            let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            rep.summary
                .push(format!("cases={} slopes in [{lo:.4}, {hi:.4}]", polys.len()));
            rep.body = json!({ "slopes": slopes, "polys": to_value(&polys) });
            rep.table = Some(table);
        }
    }
    Ok(rep)
}
