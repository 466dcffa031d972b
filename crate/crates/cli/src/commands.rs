use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use warptrap::evolve::{
    le1_growth, quasimode_data, run_confinement, run_evolution, DomainPolicy, EvolutionOptions, Propagator, RatioTrend,
};
use warptrap::geometry::{WarpGeometry, WarpParams};
use warptrap::multiplier::{
    bifurcation, coefficient_scan, frequency_packet, hardy_check, hardy_corpus, ibp_corpus, verify_ibp,
    BifurcationOptions, IbpOptions, MultiplierPair, G_TIMES_A_BOUND, HARDY_CONSTANT, SUITE_RANGE, SUITE_SAMPLES,
};
use warptrap::quasimode::{
    bracket_check, build_quasimode, default_cutoff, fit_exponential_rate, Abscissa, DecayFit, DecayQuantity, Quasimode,
};
use warptrap::spectral::Grid;

use crate::artifacts::{gnuplot_script, Artifacts, Check, Panel};
use crate::config::ExperimentConfig;
use crate::Command;

/// Relative energy drift tolerated by the exact propagator.
const ENERGY_DRIFT_TOLERANCE: f64 = 1e-9;
/// Admissible Richardson orders of the identity gap.
const IBP_ORDER_RANGE: (f64, f64) = (1.8, 2.2);
/// Frozen regression thresholds for E_R(T)/E_R(0) on the two sides of the bifurcation.
const ESCAPE_BOUND: f64 = 0.1;
const CONFINED_BOUND: f64 = 0.9;
/// Minimum ratio between the x0 < 0 and x0 > 0 local-energy ratios.
const CONTRAST_BOUND: f64 = 10.0;

pub fn run(cmd: Command, cfg: &ExperimentConfig) -> anyhow::Result<Artifacts> {
    match cmd {
        Command::Quasimode => quasimode(cfg),
        Command::Confinement => confinement(cfg),
        Command::Le1Growth => le1(cfg),
        Command::Bifurcation => bifurcation_cmd(cfg),
        Command::MultiplierAudit => audit(cfg),
    }
}

fn geometry(m: u32, x0: f64) -> anyhow::Result<WarpGeometry> {
    Ok(WarpGeometry::new(WarpParams::new(m, x0)?))
}

fn grids(cfg: &ExperimentConfig) -> anyhow::Result<(Grid, Grid)> {
    let gi = Grid::new(cfg.x0(), 0.0, cfg.n_interval)?;
    let ge = Grid::new(cfg.x0(), cfg.x_max, cfg.n_extended())?;
    Ok((gi, ge))
}

/// Quasimodes for every configured l, built in parallel and returned in l order.
fn quasimodes(cfg: &ExperimentConfig, geom: &WarpGeometry) -> anyhow::Result<Vec<Quasimode>> {
    let cutoff = default_cutoff(cfg.x0())?;
    let (gi, ge) = grids(cfg)?;
    let mut ls = cfg.l_list.clone();
    ls.sort_unstable();
    ls.dedup();
    Ok(ls
        .par_iter()
        .map(|&l| build_quasimode(geom, l, &cutoff, &gi, &ge))
        .collect::<warptrap::Result<Vec<_>>>()?)
}

fn leakage(cfg: &ExperimentConfig) -> DomainPolicy {
    DomainPolicy::LeakageCertified {
        margin: cfg.leakage_margin,
        tolerance: cfg.leakage_tolerance,
    }
}

fn fit_json(fit: &DecayFit) -> Value {
    json!({
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "samples": fit.samples.len(),
        "excluded": fit.excluded.len(),
    })
}

#[derive(Serialize)]
struct QuasimodeRow {
    l: usize,
    sigma: f64,
    tau_sq: f64,
    bracket_lo: f64,
    bracket_hi: f64,
    residual_h0: f64,
    residual_h1: f64,
    residual_h2: f64,
    agmon_ratio: f64,
    monotone: bool,
    in_bracket: bool,
    below_square_well: bool,
}

fn quasimode(cfg: &ExperimentConfig) -> anyhow::Result<Artifacts> {
    let geom = geometry(cfg.m, cfg.x0())?;
    let qms = quasimodes(cfg, &geom)?;
    let (gi, _) = grids(cfg)?;
    let brackets = qms
        .par_iter()
        .map(|q| bracket_check(&geom, q.l(), &gi))
        .collect::<warptrap::Result<Vec<_>>>()?;
    let mut out = Artifacts::default();
    let rows: Vec<QuasimodeRow> = qms
        .iter()
        .zip(&brackets)
        .map(|(q, b)| QuasimodeRow {
            l: q.l(),
            sigma: q.sigma(),
            tau_sq: q.tau_sq,
            bracket_lo: b.v_at_x0,
            bracket_hi: b.v_at_half,
            residual_h0: q.residual_hk[0],
            residual_h1: q.residual_hk[1],
            residual_h2: q.residual_hk[2],
            agmon_ratio: q.agmon_ratio,
            monotone: b.monotone,
            in_bracket: b.in_bracket,
            below_square_well: b.below_square_well,
        })
        .collect();

    let outside: Vec<usize> = brackets
        .iter()
        .filter(|b| b.monotone && !b.passed())
        .map(|b| b.l)
        .collect();
    let skipped = brackets.iter().filter(|b| b.below_threshold()).count();
    out.checks.push(Check::new(
        "bracket",
        outside.is_empty(),
        format!("τ² outside [V(x0), V(x0/2)] or above the square-well bound at l = {outside:?}; {skipped} l below the monotonicity threshold"),
    ));

    let mut fits = serde_json::Map::new();
    if qms.len() >= 5 {
        let quantities = [
            ("residual_h0", DecayQuantity::Residual(0)),
            ("residual_h1", DecayQuantity::Residual(1)),
            ("residual_h2", DecayQuantity::Residual(2)),
            ("agmon_ratio", DecayQuantity::Agmon),
        ];
        for (name, q) in quantities {
            match fit_exponential_rate(&qms, q, Abscissa::Sigma) {
                Ok(fit) => {
                    out.checks.push(Check::new(
                        &format!("{name} decay"),
                        true,
                        format!("slope {:.4}, r² {:.5}", fit.slope, fit.r_squared),
                    ));
                    fits.insert(name.into(), fit_json(&fit));
                }
                Err(e) => {
                    out.checks
                        .push(Check::new(&format!("{name} decay"), false, e.to_string()));
                    fits.insert(name.into(), Value::Null);
                }
            }
        }
    }

    out.csv("quasimode.csv", Command::Quasimode, cfg, &rows)?;
    out.text(
        "quasimode.gp",
        gnuplot_script(
            "quasimode",
            &[
                Panel {
                    title: format!("quasimode residuals, m = {}, x0 = {}", cfg.m, cfg.x0()),
                    xlabel: "sigma",
                    ylabel: "residual",
                    logscale_y: true,
                    plot: "'quasimode.csv' using 'sigma':'residual_h0' with linespoints, \
                           '' using 'sigma':'residual_h1' with linespoints, \
                           '' using 'sigma':'residual_h2' with linespoints"
                        .into(),
                },
                Panel {
                    title: "mass outside the cutoff plateau".into(),
                    xlabel: "sigma",
                    ylabel: "agmon ratio",
                    logscale_y: true,
                    plot: "'quasimode.csv' using 'sigma':'agmon_ratio' with linespoints".into(),
                },
            ],
        ),
    );
    let results = json!({
        "l": rows.iter().map(|r| r.l).collect::<Vec<_>>(),
        "fits": if qms.len() >= 5 { Value::Object(fits) } else { Value::Null },
        "note": if qms.len() >= 5 { Value::Null } else { json!("fewer than 5 degrees: decay fits skipped") },
        "bracket_outside": outside,
    });
    out.summary(Command::Quasimode, cfg, results)?;
    Ok(out)
}

#[derive(Serialize)]
struct SeriesRow {
    t: f64,
    #[serde(rename = "E")]
    energy: f64,
    #[serde(rename = "E_R")]
    local_energy: f64,
    #[serde(rename = "ratio_E_R")]
    local_ratio: f64,
    #[serde(rename = "LE1_running")]
    le1_running: Option<f64>,
    duhamel_gap: Option<f64>,
}

fn evolution_options(cfg: &ExperimentConfig) -> EvolutionOptions {
    let mut opts = EvolutionOptions::new(cfg.t_max(), cfg.r());
    opts.checkpoints = cfg.checkpoints.clone();
    opts.domain = leakage(cfg);
    opts
}

fn confinement(cfg: &ExperimentConfig) -> anyhow::Result<Artifacts> {
    let geom = geometry(cfg.m, cfg.x0())?;
    let qms = quasimodes(cfg, &geom)?;
    let (_, ge) = grids(cfg)?;
    let prop = Propagator::new(geom, ge)?;
    let opts = evolution_options(cfg);
    let reports = qms
        .par_iter()
        .map(|q| run_confinement(&prop, q, &opts))
        .collect::<warptrap::Result<Vec<_>>>()?;

    let mut out = Artifacts::default();
    let mut per_l = Vec::new();
    let mut plots = Vec::new();
    for rep in &reports {
        let ev = &rep.evolution;
        let ratio = ev.local_ratio();
        let rows = ev.times.iter().enumerate().map(|(i, &t)| SeriesRow {
            t,
            energy: ev.energy[i],
            local_energy: ev.local_energy[i],
            local_ratio: ratio[i],
            le1_running: ev.le1_running[i],
            duhamel_gap: ev.duhamel_gap[i],
        });
        let name = format!("confinement_l{}.csv", rep.l);
        out.csv(&name, Command::Confinement, cfg, rows)?;
        plots.push(format!(
            "'{name}' using 't':'ratio_E_R' with lines title 'l = {}'",
            rep.l
        ));
        out.checks.push(Check::new(
            &format!("l={} duhamel gap", rep.l),
            rep.gap_bound_holds,
            format!("gap(t) ≤ t‖F‖ with ‖F‖ = {:.4e}", rep.forcing_norm),
        ));
        out.checks.push(Check::new(
            &format!("l={} energy conservation", rep.l),
            ev.energy_drift <= ENERGY_DRIFT_TOLERANCE,
            format!("max |E(t) - E(0)|/E(0) = {:.2e}", ev.energy_drift),
        ));
        per_l.push(json!({
            "l": rep.l,
            "tau": rep.tau,
            "forcing_norm": rep.forcing_norm,
            "certified_time": rep.certified_time,
            "t_confinement": rep.evolution.t_confinement,
            "local_ratio_min": ev.local_ratio_min,
            "lower_bound_holds": rep.lower_bound_holds,
            "gap_bound_holds": rep.gap_bound_holds,
            "energy_drift": ev.energy_drift,
            "leakage": ev.leakage,
            "scan_samples": ev.scan_samples,
            "le1": ev.le1_checkpoints,
        }));
    }
    out.text(
        "confinement.gp",
        gnuplot_script(
            "confinement",
            &[Panel {
                title: format!("E_R(t)/E_R(0), R = {}", cfg.r()),
                xlabel: "t",
                ylabel: "E_R ratio",
                logscale_y: false,
                plot: plots.join(", "),
            }],
        ),
    );
    out.summary(Command::Confinement, cfg, json!({ "modes": per_l }))?;
    Ok(out)
}

#[derive(Serialize)]
struct Le1Row {
    l: usize,
    tau: f64,
    dbk: f64,
    dbk_resolution_limited: bool,
    #[serde(rename = "T")]
    horizon: f64,
    le1: f64,
    ratio: f64,
}

fn trend_name(t: RatioTrend) -> &'static str {
    match t {
        RatioTrend::Increasing => "increasing",
        RatioTrend::Decreasing => "decreasing",
        RatioTrend::Mixed => "mixed",
    }
}

fn le1(cfg: &ExperimentConfig) -> anyhow::Result<Artifacts> {
    let geom = geometry(cfg.m, cfg.x0())?;
    let qms = quasimodes(cfg, &geom)?;
    let (_, ge) = grids(cfg)?;
    let prop = Propagator::new(geom, ge)?;
    let growth = le1_growth(&prop, &qms, cfg.k, cfg.threshold, &evolution_options(cfg))?;
    let rows: Vec<Le1Row> = growth
        .rows
        .iter()
        .flat_map(|r| {
            r.samples.iter().map(move |&(t, le1, ratio)| Le1Row {
                l: r.l,
                tau: r.tau,
                dbk: r.dbk,
                dbk_resolution_limited: r.dbk_resolution_limited,
                horizon: t,
                le1,
                ratio,
            })
        })
        .collect();
    let mut out = Artifacts::default();
    out.csv("le1_growth.csv", Command::Le1Growth, cfg, &rows)?;
    let plots: Vec<String> = growth
        .rows
        .iter()
        .map(|r| {
            format!(
                "'le1_growth.csv' using 'T':(column('l') == {l} ? column('ratio') : 1/0) with linespoints title 'l = {l}'",
                l = r.l
            )
        })
        .collect();
    out.text(
        "le1_growth.gp",
        gnuplot_script(
            "le1_growth",
            &[Panel {
                title: format!("LE1[0,T] / D(B^{}) norm", cfg.k),
                xlabel: "T",
                ylabel: "ratio",
                logscale_y: false,
                plot: plots.join(", "),
            }],
        ),
    );
    let results = json!({
        "threshold": growth.threshold,
        "k": growth.k,
        "j_star_l": growth.j_star.map(|j| growth.rows[j].l),
        "t_star": growth.t_star,
        "budget_exhausted": growth.budget_exhausted,
        "trend": trend_name(growth.trend),
        "t_confinement": growth.rows.iter().map(|r| json!({ "l": r.l, "t": r.t_confinement })).collect::<Vec<_>>(),
    });
    out.summary(Command::Le1Growth, cfg, results)?;
    Ok(out)
}

fn bifurcation_cmd(cfg: &ExperimentConfig) -> anyhow::Result<Artifacts> {
    let t = cfg.t_max();
    let r = cfg.r();
    let x_max_plus = cfg.x_max_plus.expect("resolved config");
    let packet = BifurcationOptions::default();
    let omega = cfg.omegas[0];

    // Local energy on the x0 > 0 side: causal run, the outer wall is never reached by R.
    let geom_plus = geometry(cfg.m, cfg.x0_plus)?;
    let n_plus = ((x_max_plus - cfg.x0_plus) / cfg.h_plus).round() as usize - 1;
    let grid_plus = Grid::new(cfg.x0_plus, x_max_plus, n_plus)?;
    let center = cfg.x0_plus + (packet.center - packet.positive_x0);
    let data_plus = frequency_packet(&grid_plus, packet.positive_l, center, packet.radius, omega)?;
    let mut opts_plus = EvolutionOptions::new(t, r);
    opts_plus.checkpoints = vec![t];
    let prop_plus = Propagator::new(geom_plus, grid_plus)?;
    let ev_plus = run_evolution(&prop_plus, &data_plus, &opts_plus, None)?;

    // Same R and T on the x0 < 0 side, quasimode data.
    let geom_minus = geometry(cfg.m, cfg.x0())?;
    let qms = quasimodes(cfg, &geom_minus)?;
    let (_, ge) = grids(cfg)?;
    let prop_minus = Propagator::new(geom_minus, ge)?;
    let mut opts_minus = EvolutionOptions::new(t, r);
    opts_minus.checkpoints = vec![t];
    opts_minus.domain = leakage(cfg);
    let ev_minus = qms
        .par_iter()
        .map(|q| run_evolution(&prop_minus, &quasimode_data(q)?, &opts_minus, None))
        .collect::<warptrap::Result<Vec<_>>>()?;

    // LE¹ ratio table.
    let table = bifurcation(&BifurcationOptions {
        m: cfg.m,
        positive_x0: cfg.x0_plus,
        center,
        omegas: cfg.omegas.clone(),
        negative_x0: cfg.x0(),
        negative_ls: qms.iter().map(|q| q.l()).collect(),
        negative_h: cfg.h(),
        negative_x_max: cfg.x_max,
        negative_t: t,
        positive_x_max: packet.positive_x_max + (center - packet.center),
        ..packet
    })?;

    let mut out = Artifacts::default();
    let mut header = vec!["t".to_string(), format!("E_R_ratio_x0_{}", cfg.x0_plus)];
    header.extend(qms.iter().map(|q| format!("E_R_ratio_x0_{}_l{}", cfg.x0(), q.l())));
    let plus_ratio = ev_plus.local_ratio();
    let minus_ratio: Vec<Vec<f64>> = ev_minus.iter().map(|e| e.local_ratio()).collect();
    anyhow::ensure!(
        ev_minus.iter().all(|e| e.times == ev_plus.times),
        "report times differ between the two sides"
    );
    let rows: Vec<Vec<String>> = ev_plus
        .times
        .iter()
        .enumerate()
        .map(|(i, t)| {
            std::iter::once(t.to_string())
                .chain(std::iter::once(plus_ratio[i].to_string()))
                .chain(minus_ratio.iter().map(|m| m[i].to_string()))
                .collect()
        })
        .collect();
    out.table(
        "bifurcation_local_energy.csv",
        Command::Bifurcation,
        cfg,
        &header,
        &rows,
    )?;

    #[derive(Serialize)]
    struct RatioRow {
        x0: f64,
        family: &'static str,
        parameter: f64,
        #[serde(rename = "T")]
        horizon: f64,
        ratio: f64,
    }
    let ratio_rows = table
        .positive
        .iter()
        .map(|p| RatioRow {
            x0: cfg.x0_plus,
            family: "packet_omega",
            parameter: p.omega,
            horizon: table.positive_t,
            ratio: p.ratio,
        })
        .chain(table.negative.iter().map(|n| RatioRow {
            x0: cfg.x0(),
            family: "quasimode_l",
            parameter: n.l as f64,
            horizon: t,
            ratio: n.ratio,
        }));
    out.csv("bifurcation_ratios.csv", Command::Bifurcation, cfg, ratio_rows)?;

    let plus_end = *plus_ratio.last().unwrap_or(&f64::NAN);
    let minus_min: Vec<f64> = minus_ratio
        .iter()
        .map(|m| m.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    out.checks.push(Check::new(
        "x0 > 0 escapes",
        plus_end < ESCAPE_BOUND,
        format!("E_R(T)/E_R(0) = {plus_end:.3e} at T = {t}, ω = {omega}"),
    ));
    out.checks.push(Check::new(
        "x0 < 0 confines",
        minus_min.iter().all(|&v| v > CONFINED_BOUND),
        format!("min_t E_R(t)/E_R(0) per l = {minus_min:.4?}"),
    ));
    out.checks.push(Check::new(
        "LE ratio contrast",
        table.contrast >= CONTRAST_BOUND,
        format!(
            "x0 > 0 max {:.3} (spread {:.3}, T = {}), x0 < 0 min {:.1} (T = {t}): {:.1}×",
            table.positive_max, table.positive_spread, table.positive_t, table.negative_min, table.contrast
        ),
    ));

    let mut panels = vec![Panel {
        title: format!("E_R(t)/E_R(0), R = {r}"),
        xlabel: "t",
        ylabel: "E_R ratio",
        logscale_y: false,
        plot: (2..=header.len())
            .map(|c| format!("'bifurcation_local_energy.csv' using 1:{c} with lines"))
            .collect::<Vec<_>>()
            .join(", "),
    }];
    panels.push(Panel {
        title: "(LE1 + sup E)/E(0)".into(),
        xlabel: "omega (x0 > 0) or l (x0 < 0)",
        ylabel: "ratio",
        logscale_y: true,
        plot: "'bifurcation_ratios.csv' using 'parameter':'ratio' with points".into(),
    });
    out.text("bifurcation.gp", gnuplot_script("bifurcation", &panels));

    let results = json!({
        "local_energy": {
            "x0_plus": { "x0": cfg.x0_plus, "omega": omega, "ratio_at_T": plus_end, "energy_drift": ev_plus.energy_drift },
            "x0_minus": qms.iter().zip(&minus_min).zip(&ev_minus).map(|((q, m), e)| json!({
                "l": q.l(), "min_ratio": m, "ratio_at_T": e.local_ratio().last(), "leakage": e.leakage,
            })).collect::<Vec<_>>(),
        },
        "le_ratio": {
            "positive_t": table.positive_t,
            "positive_max": table.positive_max,
            "positive_spread": table.positive_spread,
            "negative_t": t,
            "negative_min": table.negative_min,
            "negative_max": table.negative_max,
            "contrast": table.contrast,
        },
        "verdict": if out.passed() { "decay for x0 > 0, confinement for x0 < 0" } else { "split not reproduced" },
    });
    out.summary(Command::Bifurcation, cfg, results)?;
    Ok(out)
}

#[derive(Serialize)]
struct AuditRow {
    check: String,
    parameters: String,
    lhs: f64,
    rhs: f64,
    gap: f64,
    order: Option<f64>,
    pass: bool,
}

fn audit(cfg: &ExperimentConfig) -> anyhow::Result<Artifacts> {
    let geom = geometry(cfg.m, cfg.x0())?;
    let delta = cfg.delta.expect("resolved config");
    let cases = ibp_corpus(&geom, delta)?;
    let reports = cases
        .par_iter()
        .map(|c| verify_ibp(&geom, &c.pair, &c.solution, c.t_final, c.x_max, &IbpOptions::default()))
        .collect::<warptrap::Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut order_ok = true;
    let mut boundary_ok = true;
    for r in &reports {
        let pass = (IBP_ORDER_RANGE.0..=IBP_ORDER_RANGE.1).contains(&r.order);
        let boundary = r.levels.iter().all(|lv| lv.boundary_term >= 0.0);
        order_ok &= pass;
        boundary_ok &= boundary;
        rows.push(AuditRow {
            check: "ibp".into(),
            parameters: format!("{} l={} T={} x_max={}", r.label, r.l, r.t_final, r.x_max),
            lhs: r.lhs,
            rhs: r.rhs,
            gap: r.gap,
            order: Some(r.order),
            pass: pass && boundary,
        });
    }

    let corpus = hardy_corpus(cfg.seed, cfg.hardy_samples)?;
    let hardy = corpus
        .par_iter()
        .map(|s| hardy_check(&s.geom, &s.grid, &s.u))
        .collect::<warptrap::Result<Vec<_>>>()?;
    let mut hardy_max = 0.0f64;
    for (i, (s, h)) in corpus.iter().zip(&hardy).enumerate() {
        hardy_max = hardy_max.max(h.ratio);
        rows.push(AuditRow {
            check: "hardy".into(),
            parameters: format!("sample={i} m={} x0={}", s.geom.m(), s.geom.x0()),
            lhs: h.lhs,
            rhs: HARDY_CONSTANT * h.rhs,
            gap: HARDY_CONSTANT * h.rhs - h.lhs,
            order: None,
            pass: h.within_bound,
        });
    }

    // The coefficients do not involve x0; a wall at 1e-4 keeps the sample range inside the domain.
    let scan_geom = geometry(cfg.m, 1e-4)?;
    let scan = coefficient_scan(
        &scan_geom,
        &MultiplierPair::delta_family(scan_geom, delta)?,
        SUITE_RANGE,
        SUITE_SAMPLES,
    )?;
    let names = ["c_dx", "c_angular", "c_dt", "c_u"];
    for (j, name) in names.iter().enumerate() {
        rows.push(AuditRow {
            check: format!("coefficient {name}"),
            parameters: format!("m={} delta={delta} x in [{}, {}]", cfg.m, SUITE_RANGE.0, SUITE_RANGE.1),
            lhs: scan.min_margin.as_array()[j],
            rhs: 0.0,
            gap: scan.closed_form_defect.as_array()[j],
            order: None,
            pass: scan.min_margin.as_array()[j] > 0.0,
        });
    }

    let mut out = Artifacts::default();
    out.checks.push(Check::new(
        "ibp order",
        order_ok && reports.len() >= 5,
        format!(
            "{} manufactured solutions, orders {:?}",
            reports.len(),
            reports
                .iter()
                .map(|r| (r.order * 1e4).round() / 1e4)
                .collect::<Vec<_>>()
        ),
    ));
    out.checks
        .push(Check::new("boundary term", boundary_ok, "nonnegative at every level"));
    out.checks.push(Check::new(
        "hardy",
        hardy.iter().all(|h| h.within_bound),
        format!(
            "max ratio {hardy_max:.6} against C_H = {HARDY_CONSTANT:.6} over {} samples",
            hardy.len()
        ),
    ));
    out.checks.push(Check::new(
        "coefficient positivity",
        scan.margins_positive() && scan.f_in_unit_interval() && scan.max_g_times_a <= G_TIMES_A_BOUND,
        format!(
            "min margins {:?}, f ∈ [{:.3e}, {:.6}], sup g·a = {:.15}",
            scan.min_margin.as_array(),
            scan.f_min,
            scan.f_max,
            scan.max_g_times_a
        ),
    ));
    out.csv("multiplier_audit.csv", Command::MultiplierAudit, cfg, &rows)?;
    let results = json!({
        "delta": delta,
        "admissible_delta": scan.admissible_delta,
        "ibp": reports.iter().map(|r| json!({
            "label": r.label, "order": r.order, "orders": r.orders, "gap": r.gap, "boundary_term": r.boundary_term,
        })).collect::<Vec<_>>(),
        "hardy_max": hardy_max,
        "hardy_constant": HARDY_CONSTANT,
        "min_margins": scan.min_margin.as_array(),
        "closed_form_defect": scan.closed_form_defect.as_array(),
    });
    out.summary(Command::MultiplierAudit, cfg, results)?;
    Ok(out)
}
