use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value as Json};

use reeb_spectra::body::ConvexBody;
use reeb_spectra::bott::{self, CrossModel, Model};
use reeb_spectra::certify::{self, Coverage, Discreteness, PinchingOutcome, SufficientOutcome};
use reeb_spectra::clarke::{self, ClarkeConfig};
use reeb_spectra::cz::{analyze, CzConfig, TOL_KER};
use reeb_spectra::ellipsoid::{Ellipsoid, TOL_MERGE};
use reeb_spectra::rational::{parse_value, Value};
use reeb_spectra::reeb::{self, OrbitSearchConfig};
use reeb_spectra::symplectic::{block_compose, rotation_path, SampledPath, SymplecticPath};

use crate::output::{meta, Failure, Report, Series};
use crate::BodyArgs;

fn values(items: &[String]) -> Result<Vec<Value>, Failure> {
    items.iter().map(|s| Ok(parse_value(s.trim())?)).collect()
}

fn ellipsoid(items: &[String]) -> Result<Ellipsoid, Failure> {
    Ok(Ellipsoid::from_values(&values(items)?)?)
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        return Ok(std::io::read_to_string(std::io::stdin())?);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_body(args: &BodyArgs) -> Result<(ConvexBody, Option<Ellipsoid>), Failure> {
    let (body, e) = match (&args.ellipsoid, &args.body) {
        (Some(a), _) => {
            let e = ellipsoid(a)?;
            (ConvexBody::from_ellipsoid(&e), Some(e))
        }
        (None, Some(path)) => {
            let body = ConvexBody::from_json(&read_text(path)?)?;
            let e = body.as_ellipsoid().cloned();
            (body, e)
        }
        (None, None) => return Err(Failure::Input("give --ellipsoid or --body".into())),
    };
    let body = match args.alpha {
        Some(a) => body.homogenize(a)?,
        None => body,
    };
    Ok((body, e))
}

fn json_value(j: &Json) -> Result<Value, Failure> {
    match j {
        Json::String(s) => Ok(parse_value(s)?),
        Json::Number(n) if n.is_i64() => Ok(parse_value(&n.to_string())?),
        Json::Number(n) => Ok(Value::Float(n.as_f64().unwrap_or(f64::NAN))),
        other => Err(Failure::Input(format!("expected a number, got {other}"))),
    }
}

fn tol_json(exact: bool) -> Json {
    if exact {
        json!({ "equality": "exact" })
    } else {
        json!({ "merge": TOL_MERGE, "equality": certify::TOL_EQ })
    }
}

pub fn spectrum(a: &[String], max: &str) -> Result<Report, Failure> {
    let e = ellipsoid(a)?;
    let max = parse_value(max)?;
    let spec = e.action_spectrum(&max)?;
    let rows = spec
        .entries
        .iter()
        .map(|x| {
            vec![
                x.tau.to_string(),
                x.tau.to_f64().to_string(),
                x.multiplicity.to_string(),
                x.morse_index.to_string(),
                x.nullity.to_string(),
                x.cz_index.to_string(),
            ]
        })
        .collect();
    let series = vec![Series {
        name: "multiplicity".into(),
        x: "tau",
        y: "multiplicity",
        points: spec.entries.iter().map(|x| (x.tau.to_f64(), x.multiplicity as f64)).collect(),
    }];
    Ok(Report {
        command: "spectrum",
        json: json!({
            "meta": meta("spectrum", spec.exact, tol_json(spec.exact)),
            "ellipsoid": e.a_values(),
            "max": max,
            "spectrum": spec,
        }),
        header: vec!["tau", "tau_f64", "multiplicity", "morse_index", "nullity", "cz_index"],
        rows,
        series,
    })
}

pub fn invariants(a: &[String], count: usize) -> Result<Report, Failure> {
    let e = ellipsoid(a)?;
    let c = e.spectral_invariants(count)?;
    Ok(Report {
        command: "invariants",
        json: json!({
            "meta": meta("invariants", e.is_exact(), tol_json(e.is_exact())),
            "ellipsoid": e.a_values(),
            "invariants": c,
        }),
        header: vec!["i", "c_i", "c_i_f64"],
        rows: c
            .iter()
            .enumerate()
            .map(|(i, v)| vec![i.to_string(), v.to_string(), v.to_f64().to_string()])
            .collect(),
        series: vec![Series {
            name: "invariants".into(),
            x: "i",
            y: "c_i",
            points: c.iter().enumerate().map(|(i, v)| (i as f64, v.to_f64())).collect(),
        }],
    })
}

#[derive(Deserialize)]
struct SpectrumDoc {
    ellipsoid: Vec<Json>,
    spectrum: SpectrumBody,
}

#[derive(Deserialize)]
struct SpectrumBody {
    entries: Vec<EntryDoc>,
}

#[derive(Deserialize)]
struct EntryDoc {
    tau: Json,
    multiplicity: usize,
}

pub fn classify(a: Option<&[String]>, spectrum_file: Option<&Path>, count: usize) -> Result<Report, Failure> {
    let (e, c, source) = match (a, spectrum_file) {
        (Some(a), _) => {
            let e = ellipsoid(a)?;
            let c = e.spectral_invariants(count)?;
            (e, c, "direct")
        }
        (None, Some(path)) => {
            let doc: SpectrumDoc = serde_json::from_str(&read_text(path)?)
                .map_err(|err| Failure::Input(format!("{}: {err}", path.display())))?;
            let params = doc.ellipsoid.iter().map(json_value).collect::<Result<Vec<_>, _>>()?;
            let e = Ellipsoid::from_values(&params)?;
            let mut c = Vec::new();
            for entry in &doc.spectrum.entries {
                let tau = json_value(&entry.tau)?;
                c.extend(std::iter::repeat_n(tau, entry.multiplicity));
            }
            (e, c, "spectrum-file")
        }
        (None, None) => return Err(Failure::Input("give --ellipsoid or --spectrum".into())),
    };
    let n = e.n();
    if c.len() < n {
        return Err(Failure::Input(format!("need at least {n} invariants, got {}", c.len())));
    }
    let classification = e.classify();
    let scan = certify::besse_by_invariants(&c, n)?;
    let interleaving: Vec<Json> = scan
        .hits
        .iter()
        .filter_map(|h| e.verify_interleaving(&h.tau).ok())
        .map(|r| json!(r))
        .collect();
    let discrete = Discreteness {
        source: "ellipsoid spectrum (lattice of multiples)".into(),
    };
    let sufficient = certify::besse_sufficient_eh(&c, n, Some(&discrete))?;
    let sufficient_verdict = match &sufficient {
        SufficientOutcome::Besse { .. } => "besse",
        SufficientOutcome::Inconclusive { .. } => "inconclusive",
        SufficientOutcome::Refused { .. } => "refused",
    };
    let verdict = json!(classification.verdict);
    let rows = if scan.hits.is_empty() {
        vec![vec![
            verdict.as_str().unwrap_or_default().to_string(),
            String::new(),
            String::new(),
            String::new(),
        ]]
    } else {
        scan.hits
            .iter()
            .map(|h| {
                vec![
                    verdict.as_str().unwrap_or_default().to_string(),
                    h.i.to_string(),
                    h.tau.to_string(),
                    h.mu.to_string(),
                ]
            })
            .collect()
    };
    let series = vec![
        Series {
            name: "invariants".into(),
            x: "i",
            y: "c_i",
            points: c.iter().enumerate().map(|(i, v)| (i as f64, v.to_f64())).collect(),
        },
        Series {
            name: "hits".into(),
            x: "i",
            y: "tau",
            points: scan.hits.iter().map(|h| (h.i as f64, h.tau.to_f64())).collect(),
        },
    ];
    Ok(Report {
        command: "classify",
        json: json!({
            "meta": meta("classify", scan.exact, tol_json(scan.exact)),
            "source": source,
            "ellipsoid": e.a_values(),
            "verdict": classification.verdict,
            "classification": classification,
            "count": c.len(),
            "scan": scan,
            "interleaving": interleaving,
            "sufficient": { "verdict": sufficient_verdict, "detail": sufficient },
        }),
        header: vec!["verdict", "i", "tau", "mu"],
        rows,
        series,
    })
}

pub fn pinch(args: &BodyArgs, delta_sq: &str, periods: Option<&[String]>, coverage: Option<f64>) -> Result<Report, Failure> {
    let (body, e) = load_body(args)?;
    let d = parse_value(delta_sq)?;
    let outcome = match (e, periods) {
        (Some(e), None) => certify::ellipsoid_pinching(&e, &d)?,
        (_, periods) => {
            let spec = values(periods.unwrap_or_default())?;
            let cov = coverage.map(|up_to| Coverage {
                up_to,
                source: "caller attestation".into(),
            });
            certify::zoll_by_pinching(&body, &spec, &d, cov.as_ref())?
        }
    };
    let (verdict, detail) = match &outcome {
        PinchingOutcome::Certified { .. } => ("certified", String::new()),
        PinchingOutcome::Refused { reason, .. } => ("refused", reason.clone()),
        PinchingOutcome::NotApplicable { ratio_sq, .. } => ("not-applicable", format!("R^2/r^2 = {ratio_sq}")),
    };
    let radii = body.pinching_radii();
    let spectrum_points: Vec<(f64, f64)> = outcome.certificate().inputs["spectrum"]
        .as_array()
        .map(|a| {
            a.iter()
                .enumerate()
                .filter_map(|(i, v)| json_value(v).ok().map(|v| (i as f64, v.to_f64())))
                .collect()
        })
        .unwrap_or_default();
    Ok(Report {
        command: "pinch",
        json: json!({
            "meta": meta("pinch", d.is_exact() && body.is_ellipsoid(), json!({
                "equality": certify::TOL_EQ,
                "chain": certify::TOL_CHAIN,
            })),
            "verdict": verdict,
            "radii": radii,
            "outcome": outcome,
        }),
        header: vec!["verdict", "r", "R", "detail"],
        rows: vec![vec![verdict.into(), radii.r.to_string(), radii.big_r.to_string(), detail]],
        series: vec![Series {
            name: "spectrum".into(),
            x: "k",
            y: "tau",
            points: spectrum_points,
        }],
    })
}

pub fn systole(args: &BodyArgs, cfg: &ClarkeConfig) -> Result<Report, Failure> {
    let (body, _) = load_body(args)?;
    let r = clarke::minimize(&body, cfg)?;
    let rows = r
        .starts
        .iter()
        .map(|s| {
            vec![
                s.label.clone(),
                s.psi.to_string(),
                s.action.map(|a| a.to_string()).unwrap_or_default(),
                s.grad_norm.to_string(),
                s.iterations.to_string(),
                s.converged.to_string(),
            ]
        })
        .collect();
    let mut series: Vec<Series> = (0..body.n())
        .map(|h| Series {
            name: format!("orbit_plane{}", h + 1),
            x: "x",
            y: "y",
            points: r.orbit.points.iter().map(|p| (p[2 * h], p[2 * h + 1])).collect(),
        })
        .collect();
    series.push(Series {
        name: "starts".into(),
        x: "start",
        y: "action",
        points: r
            .starts
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.action.map(|a| (i as f64, a)))
            .collect(),
    });
    Ok(Report {
        command: "systole",
        json: json!({
            "meta": meta("systole", false, json!({
                "gradient": cfg.tol_grad,
                "doubling_relative_change": 1e-6,
                "top_mode_energy": clarke::TOP_MODE_ENERGY,
            })),
            "body": body.spec(),
            "config": cfg,
            "result": r,
        }),
        header: vec!["start", "psi", "action", "grad_norm", "iterations", "converged"],
        rows,
        series,
    })
}

pub fn orbits(args: &BodyArgs, cfg: &OrbitSearchConfig, besse_tau: Option<f64>, besse_samples: usize) -> Result<Report, Failure> {
    let (body, _) = load_body(args)?;
    let mut search = reeb::find_closed_orbits(&body, cfg)?;
    reeb::index_orbits(&body, &mut search, body.alpha());
    let exports: Vec<_> = search.orbits.iter().map(|o| o.export()).collect();
    let besse = match besse_tau {
        Some(t) => Some(reeb::numerical_besse_test(&body, t, besse_samples)?),
        None => None,
    };
    let rows = exports
        .iter()
        .map(|o| {
            let opt = |v: Option<String>| v.unwrap_or_default();
            vec![
                o.period.to_string(),
                o.residual.to_string(),
                opt(o.cz.map(|x| x.to_string())),
                opt(o.morse.map(|x| x.to_string())),
                opt(o.nullity.map(|x| x.to_string())),
                o.initial_point.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
            ]
        })
        .collect();
    let series = vec![
        Series {
            name: "periods".into(),
            x: "k",
            y: "period",
            points: exports.iter().enumerate().map(|(i, o)| (i as f64, o.period)).collect(),
        },
        Series {
            name: "cz".into(),
            x: "period",
            y: "cz",
            points: exports
                .iter()
                .filter_map(|o| o.cz.map(|c| (o.period, c as f64)))
                .collect(),
        },
    ];
    Ok(Report {
        command: "orbits",
        json: json!({
            "meta": meta("orbits", false, json!({
                "orbit": cfg.tol_orbit,
                "dedup": reeb::TOL_DEDUP,
                "besse": reeb::TOL_BESSE,
            })),
            "body": body.spec(),
            "alpha": body.alpha(),
            "t_max": cfg.t_max,
            "orbits": exports,
            "besse_test": besse,
            "log": search.log,
        }),
        header: vec!["period", "residual", "cz", "morse", "nullity", "initial_point"],
        rows,
        series,
    })
}

#[derive(Deserialize)]
struct SamplesDoc {
    times: Vec<f64>,
    matrices: Vec<Vec<Vec<f64>>>,
}

fn rotation_closed_form(rates: &[f64], time: f64) -> i64 {
    rates
        .iter()
        .map(|r| {
            let a = r * time;
            if a.fract() == 0.0 {
                2 * a as i64 - 1
            } else {
                2 * a.floor() as i64 + 1
            }
        })
        .sum()
}

pub fn cz(rotation: Option<&[String]>, time: f64, samples: Option<&Path>) -> Result<Report, Failure> {
    let (path, closed_form): (SymplecticPath, Option<i64>) = match (rotation, samples) {
        (Some(rates), _) => {
            let rates: Vec<f64> = values(rates)?.iter().map(Value::to_f64).collect();
            let blocks = rates
                .iter()
                .map(|r| rotation_path(&[*r], time))
                .collect::<Result<Vec<_>, _>>()?;
            (block_compose(blocks)?, Some(rotation_closed_form(&rates, time)))
        }
        (None, Some(p)) => {
            let doc: SamplesDoc = serde_json::from_str(&read_text(p)?)
                .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            (SymplecticPath::Sampled(SampledPath::from_rows(doc.times, &doc.matrices)?), None)
        }
        (None, None) => return Err(Failure::Input("give --rotation or --samples".into())),
    };
    let report = analyze(&path, &CzConfig::default())?;
    Ok(Report {
        command: "cz",
        json: json!({
            "meta": meta("cz", false, json!({ "kernel": TOL_KER })),
            "path": path.kind(),
            "dim": path.dim(),
            "cz_index": report.index,
            "closed_form": closed_form,
            "report": report,
        }),
        header: vec!["cz_index", "morse_index", "nullity", "crossings"],
        rows: vec![vec![
            report.index.to_string(),
            report.morse_index.to_string(),
            report.nullity.to_string(),
            report.crossings.len().to_string(),
        ]],
        series: vec![Series {
            name: "crossings".into(),
            x: "t",
            y: "signature",
            points: report
                .crossings
                .iter()
                .map(|c| (c.time, c.signature_contribution as f64))
                .collect(),
        }],
    })
}

pub fn bott(model: &str, dim: u32, m_max: u32, ell: f64, betti: Option<&[u64]>) -> Result<Report, Failure> {
    let model = CrossModel::new(Model::parse(model)?, dim)?;
    let table = bott::table(&model, ell, m_max)?;
    let betti: Option<Vec<u64>> = match (betti, model.model) {
        (Some(b), _) => Some(b.to_vec()),
        (None, Model::Sphere) => Some(bott::sphere_quotient_betti(dim)),
        _ => None,
    };
    let ranks: Option<Vec<Json>> = match &betti {
        Some(b) => {
            let top = table.last().map_or(0, |r| r.ind);
            Some(
                (0..=top)
                    .map(|d| Ok(json!({ "degree": d, "rank": bott::cohomology_rank(&model, d, b)? })))
                    .collect::<Result<Vec<_>, Failure>>()?,
            )
        }
        None => None,
    };
    let rows = table
        .iter()
        .map(|r| {
            vec![
                r.m.to_string(),
                r.ind.to_string(),
                r.nul.to_string(),
                r.deg_alpha.to_string(),
                r.deg_beta.to_string(),
                r.value.to_string(),
            ]
        })
        .collect();
    let series = vec![
        Series {
            name: "ind".into(),
            x: "m",
            y: "ind",
            points: table.iter().map(|r| (r.m as f64, r.ind as f64)).collect(),
        },
        Series {
            name: "deg_beta".into(),
            x: "m",
            y: "deg_beta",
            points: table.iter().map(|r| (r.m as f64, r.deg_beta as f64)).collect(),
        },
        Series {
            name: "values".into(),
            x: "m",
            y: "m_ell",
            points: table.iter().map(|r| (r.m as f64, r.value)).collect(),
        },
    ];
    Ok(Report {
        command: "bott",
        json: json!({
            "meta": meta("bott", true, json!({})),
            "model": model,
            "name": model.name(),
            "warnings": model.warnings(),
            "ell": ell,
            "table": table,
            "quotient_betti": betti,
            "ranks": ranks,
        }),
        header: vec!["m", "ind", "nul", "deg_alpha", "deg_beta", "m_ell"],
        rows,
        series,
    })
}
