use dlplab_core::algcurve::{branch_points, continue_branch, reciprocity_trials, schwarz_values, trapping_check, trapping_check_q, TrappingReport};
use dlplab_core::curve::{point_location, sample_curve, SampledCurve};
use dlplab_core::matching::{dichotomy_check, melnikov_pair, power_family, verify_matching, DichotomyCase, GRAM_TOL};
use dlplab_core::potential::{assemble_pi, boundary_gap, distance_to_nodes, double_layer_eval, spectrum, DirichletSolver};
use dlplab_core::sphere::sphere_identity_check;
use dlplab_core::{DensityGrid, Location, MatchingPair};
use num_complex::Complex64;
use serde_json::json;

use crate::config::{resolve_q, CommandConfig, RunConfig};
use crate::report::{Check, Outcome};
use crate::CliError;

type C = Complex64;

/// Node count of the polygon used for trapping checks on algebraic curves.
const TRAP_NODES: usize = 1024;

/// Probe grid side for `gauss-check`.
const GAUSS_GRID: usize = 9;

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.into());
    wr.write_record(header).map_err(io)?;
    for r in rows {
        wr.write_record(&r).map_err(io)?;
    }
    wr.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

fn with_csv(f: impl FnOnce(&mut Vec<u8>) -> dlplab_core::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = cfg.nodes();
    match &cfg.command {
        CommandConfig::Spectrum {
            curve,
            tol,
            tol_fixed,
            expect_fixed_min,
        } => {
            let sc = sample_curve(curve, n)?;
            let rep = spectrum(&assemble_pi(&sc), *tol_fixed)?;
            let mut checks = vec![Check::below("eigenvalue_near_two_error", (rep.eigenvalue_near_two - 2.0).norm(), *tol)];
            if let Some(m) = expect_fixed_min {
                checks.push(Check::flag("near_fixed_count", rep.near_fixed_count as f64, rep.near_fixed_count >= *m));
            }
            let result = json!({
                "curve_id": rep.curve_id,
                "N": rep.n,
                "tol_fixed": rep.tol_fixed,
                "near_fixed_count": rep.near_fixed_count,
                "eigenvalue_near_two": rep.eigenvalue_near_two,
                "closest_to_one": rep.eigenvalues.iter().take(16).collect::<Vec<_>>(),
                "smallest_singular_values": rep.smallest_singular_values,
            });
            let csv = with_csv(|b| rep.write_csv(b))?;
            Ok(Outcome {
                checks,
                result,
                artifacts: vec![("spectrum.csv".into(), csv)],
            })
        }
        CommandConfig::Dirichlet { curve, data, probes, tol } => {
            let sc = sample_curve(curve, n)?;
            let solver = DirichletSolver::new(&assemble_pi(&sc))?;
            let f = DensityGrid::from_fn(&sc, |z, _| C::new(data.eval(z).re, 0.0));
            let mu = solver.solve(&f)?;
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for p in probes {
                if point_location(&sc, *p, boundary_gap(&sc))? != Location::Interior {
                    return Err(CliError::Config(format!("probe {p} is not inside the curve")));
                }
                let u = double_layer_eval(&sc, &mu, *p)?.re;
                let exact = data.eval(*p).re;
                worst = worst.max((u - exact).abs());
                rows.push(vec![p.re.to_string(), p.im.to_string(), u.to_string(), exact.to_string(), (u - exact).abs().to_string()]);
            }
            let table = csv_bytes(&["re", "im", "computed", "exact", "error"], rows)?;
            let density = with_csv(|b| mu.write_csv(b))?;
            Ok(Outcome {
                checks: vec![Check::below("max_probe_error", worst, *tol)],
                result: json!({
                    "curve_id": sc.id,
                    "N": n,
                    "condition_estimate": solver.condition,
                    "probes": probes.len(),
                    "max_probe_error": worst,
                }),
                artifacts: vec![("probes.csv".into(), table), ("density.csv".into(), density)],
            })
        }
        CommandConfig::MatchVerify {
            pair,
            tol,
            fixed_tol,
            dichotomy_tol,
        } => match_outcome(pair, n, *tol, *fixed_tol, *dichotomy_tol),
        CommandConfig::MatchMelnikov {
            r,
            c,
            tol,
            fixed_tol,
            dichotomy_tol,
        } => {
            let pair = melnikov_pair(r, *c)?;
            match_outcome(&pair, n, *tol, *fixed_tol, *dichotomy_tol)
        }
        CommandConfig::MatchPowers { r, c, n_max, tol } => {
            let pair = melnikov_pair(r, *c)?;
            let fam = power_family(&pair, *n_max, n)?;
            let mut checks: Vec<Check> = fam
                .rows
                .iter()
                .map(|row| Check::below(format!("residual_k{}", row.k), row.boundary_residual.max(row.fixed_point_residual), *tol))
                .collect();
            checks.push(Check::flag("gram_min_singular", fam.gram_min_singular, fam.gram_min_singular > GRAM_TOL));
            let csv = with_csv(|b| fam.write_csv(b))?;
            Ok(Outcome {
                checks,
                result: json!({ "pair": pair, "family": fam }),
                artifacts: vec![("family.csv".into(), csv)],
            })
        }
        CommandConfig::BranchPoints { p, q, eps, tol } => {
            let q = resolve_q(p, q)?;
            let mut bps = branch_points(&q)?;
            if let Some(e) = eps {
                bps = bps.with_eps(*e);
            }
            let worst = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
            let checks = vec![
                Check::below("branch_residual", worst(&bps.branch_residuals), *tol),
                Check::below("exceptional_residual", worst(&bps.exceptional_residuals), *tol),
            ];
            let csv = with_csv(|b| bps.write_csv(b))?;
            Ok(Outcome {
                checks,
                result: serde_json::to_value(&bps).map_err(|e| CliError::Io(e.into()))?,
                artifacts: vec![("branch_points.csv".into(), csv)],
            })
        }
        CommandConfig::Reflect {
            p,
            q,
            path,
            w_start,
            expect,
            eps,
            tol,
        } => {
            let q = resolve_q(p, q)?;
            let mut bps = branch_points(&q)?;
            if let Some(e) = eps {
                bps = bps.with_eps(*e);
            }
            let pts = path.waypoints();
            if pts.len() < 2 {
                return Err(CliError::Config("path needs at least two points".into()));
            }
            // snap the starting guess onto the nearest root of Q(z0, ·)
            let roots = schwarz_values(&q, pts[0])?.finite();
            let start = roots
                .iter()
                .copied()
                .min_by(|a, b| (a - w_start).norm().total_cmp(&(b - w_start).norm()))
                .ok_or_else(|| CliError::Config(format!("no finite Schwarz value at {}", pts[0])))?;
            let mut w = start;
            let mut trace = vec![(pts[0], w)];
            for seg in pts.windows(2) {
                w = continue_branch(&q, seg, w, &bps)?;
                trace.push((seg[1], w));
            }
            let end = *pts.last().expect("nonempty");
            let mut checks = vec![Check::below("end_residual", q.relative_residual(end, w), *tol)];
            if let Some(e) = expect {
                checks.push(Check::below("end_error", (w - e).norm(), *tol));
            }
            let rows = trace.iter().enumerate().map(|(i, (z, s))| {
                vec![i.to_string(), z.re.to_string(), z.im.to_string(), s.re.to_string(), s.im.to_string(), s.re.to_string(), (-s.im).to_string()]
            });
            let csv = csv_bytes(&["index", "re_z", "im_z", "re_s", "im_s", "re_r", "im_r"], rows)?;
            Ok(Outcome {
                checks,
                result: json!({
                    "start": pts[0],
                    "end": end,
                    "schwarz_start": start,
                    "schwarz_end": w,
                    "reflection_end": w.conj(),
                    "waypoints": pts.len(),
                    "eps": bps.eps,
                }),
                artifacts: vec![("reflect.csv".into(), csv)],
            })
        }
        CommandConfig::TrapCheck {
            map,
            p,
            q,
            curve,
            side,
            samples,
        } => {
            let seed = cfg.seed();
            let rep = match (map, curve) {
                (Some(m), None) if p.is_none() && q.is_none() => trapping_check(m, *samples, seed)?,
                (None, Some(c)) => {
                    let q = resolve_q(p, q)?;
                    let side = side.ok_or_else(|| CliError::Config("`side` is required with an algebraic curve".into()))?;
                    let sc = sample_curve(c, TRAP_NODES)?;
                    trapping_check_q(&q, &sc, side, *samples, seed)?
                }
                _ => return Err(CliError::Config("give either `map`, or `p`/`q` with `curve` and `side`".into())),
            };
            trap_outcome(rep)
        }
        CommandConfig::Reciprocity {
            p,
            q,
            pairs,
            tol,
            half_width,
        } => {
            let q = resolve_q(p, q)?;
            let rep = reciprocity_trials(&q, *pairs, cfg.seed(), *tol, *half_width)?;
            let rows = rep.failures.iter().map(|f| {
                vec![f.z1.re.to_string(), f.z1.im.to_string(), f.z2.re.to_string(), f.z2.im.to_string(), f.forward.to_string(), f.backward.to_string()]
            });
            let csv = csv_bytes(&["re_z1", "im_z1", "re_z2", "im_z2", "forward", "backward"], rows)?;
            Ok(Outcome {
                checks: vec![Check::none("failures", rep.failures.len())],
                result: serde_json::to_value(&rep).map_err(|e| CliError::Io(e.into()))?,
                artifacts: vec![("reciprocity_failures.csv".into(), csv)],
            })
        }
        CommandConfig::SphereCheck {
            dims,
            trials,
            spread_tol,
            ratio_tol,
            identity_tol,
        } => {
            let mut checks = Vec::new();
            let mut reports = Vec::new();
            for &d in dims {
                let r = sphere_identity_check(d, *trials, cfg.seed())?;
                checks.push(Check::below(format!("spread_n{d}"), r.spread, *spread_tol));
                checks.push(Check::below(format!("ratio_error_n{d}"), (r.ratio.abs() - r.expected_magnitude).abs(), *ratio_tol));
                checks.push(Check::below(format!("identity_n{d}"), r.identity_residual, *identity_tol));
                reports.push(r);
            }
            let rows = reports.iter().map(|r| {
                vec![r.n.to_string(), r.ratio.to_string(), r.spread.to_string(), r.identity_residual.to_string()]
            });
            let csv = csv_bytes(&["n", "ratio", "spread", "identity_residual"], rows)?;
            Ok(Outcome {
                checks,
                result: json!({ "reports": reports }),
                artifacts: vec![("sphere.csv".into(), csv)],
            })
        }
        CommandConfig::GaussCheck { curve, tol } => gauss_outcome(&sample_curve(curve, n)?, *tol),
    }
}

fn match_outcome(pair: &MatchingPair, n: usize, tol: f64, fixed_tol: f64, dichotomy_tol: f64) -> Result<Outcome, CliError> {
    let rep = verify_matching(pair, n)?;
    let dich = dichotomy_check(pair, n, dichotomy_tol)?;
    let checks = vec![
        Check::below("boundary_residual", rep.boundary_residual, tol),
        Check::below("fixed_residual_f", rep.fixed_residual_f, fixed_tol),
        Check::below("fixed_residual_g", rep.fixed_residual_g, fixed_tol),
        Check::flag("dichotomy_h_conj_norm", dich.h_conj_norm, dich.case != DichotomyCase::Neither),
    ];
    let csv = csv_bytes(
        &["n", "boundary_residual", "fixed_residual_f", "fixed_residual_g", "h_conj_norm"],
        [vec![
            rep.n.to_string(),
            rep.boundary_residual.to_string(),
            rep.fixed_residual_f.to_string(),
            rep.fixed_residual_g.to_string(),
            dich.h_conj_norm.to_string(),
        ]],
    )?;
    Ok(Outcome {
        checks,
        result: json!({ "pair": pair, "report": rep, "dichotomy": dich }),
        artifacts: vec![("match.csv".into(), csv)],
    })
}

fn trap_outcome(rep: TrappingReport) -> Result<Outcome, CliError> {
    let rows = rep
        .failures
        .iter()
        .map(|f| vec![f.kind.clone(), f.point.re.to_string(), f.point.im.to_string(), f.detail.clone()]);
    let csv = csv_bytes(&["kind", "re", "im", "detail"], rows)?;
    Ok(Outcome {
        checks: vec![
            Check::none("sample_failures", rep.samples - rep.sample_pass),
            Check::none("boundary_failures", rep.boundary_samples - rep.boundary_pass),
        ],
        result: serde_json::to_value(&rep).map_err(|e| CliError::Io(e.into()))?,
        artifacts: vec![("trap_failures.csv".into(), csv)],
    })
}

/// Probes on a grid over the curve's bounding box, at least `δ` from the nodes.
fn gauss_probes(sc: &SampledCurve) -> Result<Vec<(C, Location)>, CliError> {
    let (mut lo, mut hi) = (sc.z[0], sc.z[0]);
    for z in &sc.z {
        lo = C::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = C::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    let pad = 0.25 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let delta = boundary_gap(sc);
    let mut out = Vec::new();
    for i in 0..GAUSS_GRID {
        for j in 0..GAUSS_GRID {
            let s = |k: usize| (k as f64 + 0.5) / GAUSS_GRID as f64;
            let z = C::new(lo.re + s(i) * (hi.re - lo.re), lo.im + s(j) * (hi.im - lo.im));
            if distance_to_nodes(sc, z) <= delta {
                continue;
            }
            let loc = point_location(sc, z, delta)?;
            if loc != Location::Boundary {
                out.push((z, loc));
            }
        }
    }
    Ok(out)
}

fn gauss_outcome(sc: &SampledCurve, tol: f64) -> Result<Outcome, CliError> {
    let one = DensityGrid::constant(sc.len(), C::new(1.0, 0.0));
    let pi_one = assemble_pi(sc).apply(&one)?;
    let pi_err = pi_one.values.iter().map(|v| (v - 2.0).norm()).fold(0.0, f64::max);
    let mut worst_in: f64 = 0.0;
    let mut worst_out: f64 = 0.0;
    let (mut n_in, mut n_out) = (0, 0);
    let mut rows = Vec::new();
    for (z, loc) in gauss_probes(sc)? {
        let v = double_layer_eval(sc, &one, z)?;
        let target = if loc == Location::Interior { 2.0 } else { 0.0 };
        let err = (v - target).norm();
        if loc == Location::Interior {
            worst_in = worst_in.max(err);
            n_in += 1;
        } else {
            worst_out = worst_out.max(err);
            n_out += 1;
        }
        let name = if loc == Location::Interior { "interior" } else { "exterior" };
        rows.push(vec![z.re.to_string(), z.im.to_string(), name.to_string(), v.re.to_string(), err.to_string()]);
    }
    let csv = csv_bytes(&["re", "im", "location", "value", "error"], rows)?;
    Ok(Outcome {
        checks: vec![
            Check::below("pi_one_error", pi_err, tol),
            Check::below("interior_error", worst_in, tol),
            Check::below("exterior_error", worst_out, tol),
            Check::flag("interior_probes", n_in as f64, n_in > 0),
        ],
        result: json!({
            "curve_id": sc.id,
            "N": sc.len(),
            "pi_one_error": pi_err,
            "interior_probes": n_in,
            "exterior_probes": n_out,
            "interior_error": worst_in,
            "exterior_error": worst_out,
        }),
        artifacts: vec![("gauss_probes.csv".into(), csv)],
    })
}
