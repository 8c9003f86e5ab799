use num_complex::Complex64;
use quasilocal::fock::{self, BruteForceOptions, FockSpace, ORACLE_CAP};
use quasilocal::io::{matrix_from_json, Sci};
use quasilocal::linalg::{self, c, CMatrix};
use quasilocal::locality::{scan_subsystems, Predicate, ScanFamily, ScanOptions, DEFAULT_RANK_TOL};
use quasilocal::models::{
    build_pt_hamiltonian, farthest_metric, metric_from_spectrum, nearest_metric, ChainParams, MetricKind,
    ReducedMetric,
};
use quasilocal::schmidt::{
    build_eta_max, build_eta_min, operator_schmidt, schmidt_bounds_check, simultaneous_reduction, Bipartition,
    SCHMIDT_TOL,
};
use quasilocal::spectral::{self, pt_phase_scan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{FamilyKind, Format, ModelKind, Pair, PredicateKind, Preset, RunConfig};
use crate::fail::{CliError, Kind};
use crate::output::{Output, Writer};

const DEFAULT_GAMMA: [f64; 2] = [0.0, 0.5];
const DEFAULT_STEPS: usize = 81;
const DEFAULT_SCAN_CAP: usize = 20;

fn cplx(p: Pair) -> Complex64 {
    c(p.0[0], p.0[1])
}

fn sci_pair(z: Complex64) -> [Sci; 2] {
    [Sci(z.re), Sci(z.im)]
}

struct Model {
    kind: ModelKind,
    params: Option<ChainParams>,
    hamiltonian: Option<CMatrix>,
    metric: ReducedMetric,
}

fn require_n(cfg: &RunConfig) -> Result<usize, CliError> {
    cfg.n.ok_or_else(|| CliError::validation("n is required for this model"))
}

/// Chain parameters for the chain-based models.
fn chain_params(cfg: &RunConfig, kind: ModelKind) -> Result<ChainParams, CliError> {
    let n = require_n(cfg)?;
    let gamma = cplx(cfg.gamma.unwrap_or(Pair(DEFAULT_GAMMA)));
    let params = match kind {
        ModelKind::Xx | ModelKind::Farthest => {
            if cfg.m.is_some_and(|m| m != 1) || cfg.t.is_some() || cfg.hoppings.is_some() || cfg.onsite.is_some() {
                return Err(CliError::validation(
                    "the farthest-impurity chain fixes m = 1, t = 1 and zero on-site potential",
                ));
            }
            ChainParams::xx(n, gamma)
        }
        ModelKind::Nearest | ModelKind::Chain => {
            let m = cfg.m.unwrap_or(if kind == ModelKind::Nearest { n / 2 } else { 1 });
            let mut p = ChainParams::uniform(n, m, gamma, cplx(cfg.t.unwrap_or(Pair([1.0, 0.0]))));
            if let Some(h) = &cfg.hoppings {
                p.hoppings = h.iter().map(|&x| cplx(x)).collect();
            }
            if let Some(v) = &cfg.onsite {
                p.onsite = v.clone();
            }
            p.beta = cfg.beta.unwrap_or(0.0);
            p
        }
        _ => return Err(CliError::validation(format!("model {kind:?} has no Hamiltonian"))),
    };
    params.validate()?;
    Ok(params)
}

fn build_model(cfg: &RunConfig) -> Result<Model, CliError> {
    let kind = cfg.model.ok_or_else(|| CliError::validation("model is required"))?;
    let (params, hamiltonian, metric) = match kind {
        ModelKind::Xx | ModelKind::Farthest | ModelKind::Nearest | ModelKind::Chain => {
            let p = chain_params(cfg, kind)?;
            let h = build_pt_hamiltonian(&p)?.matrix;
            let metric = match kind {
                ModelKind::Nearest => nearest_metric(&p)?,
                ModelKind::Chain => ReducedMetric::new(metric_from_spectrum(&h, None)?, MetricKind::Custom)?,
                _ => farthest_metric(p.n, p.gamma)?,
            };
            (Some(p), Some(h), metric)
        }
        ModelKind::Identity => (None, None, ReducedMetric::identity(require_n(cfg)?)),
        ModelKind::Diagonal => {
            let d = cfg
                .diagonal
                .as_ref()
                .ok_or_else(|| CliError::validation("diagonal model needs `diagonal`"))?;
            (None, None, ReducedMetric::diagonal(d)?)
        }
        ModelKind::File => (None, None, ReducedMetric::new(read_matrix(cfg)?, MetricKind::Custom)?),
    };
    if let Some(n) = cfg.n {
        if n != metric.n() {
            return Err(CliError::validation(format!("n = {n} but the metric is {0}x{0}", metric.n())));
        }
    }
    Ok(Model {
        kind,
        params,
        hamiltonian,
        metric,
    })
}

fn read_matrix(cfg: &RunConfig) -> Result<CMatrix, CliError> {
    let path = cfg
        .metric_file
        .as_ref()
        .ok_or_else(|| CliError::validation("metric_file is required"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    Ok(matrix_from_json(&text)?)
}

#[derive(Serialize)]
struct ParamsOut {
    n: usize,
    m: usize,
    gamma: [Sci; 2],
    hoppings: Vec<[Sci; 2]>,
    onsite: Vec<Sci>,
    beta: Sci,
}

impl From<&ChainParams> for ParamsOut {
    fn from(p: &ChainParams) -> Self {
        Self {
            n: p.n,
            m: p.m,
            gamma: sci_pair(p.gamma),
            hoppings: p.hoppings.iter().map(|&t| sci_pair(t)).collect(),
            onsite: p.onsite.iter().map(|&v| Sci(v)).collect(),
            beta: Sci(p.beta),
        }
    }
}

pub fn model(cfg: &RunConfig) -> Result<Output, CliError> {
    let model = build_model(cfg)?;
    let mut w = Writer::new(cfg, "model");
    let (pd, min_eig) = spectral::positive_definiteness(model.metric.matrix(), 0.0)?;
    let residual = match &model.hamiltonian {
        Some(h) => Some(spectral::quasi_hermiticity_residual(model.metric.matrix(), h)?),
        None => None,
    };
    let tol = cfg.tol_residual.unwrap_or(spectral::DEFAULT_TOL);

    if let Some(p) = &model.params {
        if w.format == Format::Json {
            let body = w.stamp(ParamsOut::from(p));
            w.add("params.json", body);
        }
    }
    if let Some(h) = &model.hamiltonian {
        w.matrix("Gamma", Meta { matrix: "hamiltonian" }, h);
    }
    w.matrix("M", Meta { matrix: "metric" }, model.metric.matrix());

    #[derive(Serialize)]
    struct Meta {
        matrix: &'static str,
    }
    #[derive(Serialize)]
    struct Summary {
        model: ModelKind,
        n: usize,
        metric_kind: MetricKind,
        positive_definite: bool,
        min_eigenvalue: Sci,
        quasi_hermiticity_residual: Option<Sci>,
        files: Vec<String>,
    }
    let failure = residual
        .filter(|&r| r > tol)
        .map(|r| CliError::validation(format!("metric residual {r:e} exceeds tol_residual {tol:e}")));
    let summary = Summary {
        model: model.kind,
        n: model.metric.n(),
        metric_kind: model.metric.kind,
        positive_definite: pd,
        min_eigenvalue: Sci(min_eig),
        quasi_hermiticity_residual: residual.map(Sci),
        files: w.names(),
    };
    Ok(w.finish(summary, Vec::new(), failure))
}

fn predicate(kind: Option<PredicateKind>) -> Predicate {
    match kind.unwrap_or(PredicateKind::None) {
        PredicateKind::None => Predicate::None,
        PredicateKind::UnitDisk => Predicate::UnitDisk,
        PredicateKind::Conds => Predicate::Conds,
        PredicateKind::Parity => Predicate::Parity,
    }
}

fn bool_cell(b: Option<bool>) -> String {
    b.map_or(String::new(), |b| b.to_string())
}

fn sites_cell(sites: &[usize]) -> String {
    let s: Vec<String> = sites.iter().map(|x| x.to_string()).collect();
    s.join(" ")
}

pub fn scan(cfg: &RunConfig) -> Result<Output, CliError> {
    let model = build_model(cfg)?;
    let family = match cfg.family.unwrap_or(FamilyKind::All) {
        FamilyKind::All => ScanFamily::All,
        FamilyKind::Connected => ScanFamily::Connected,
        FamilyKind::ParitySymmetric => ScanFamily::ParitySymmetric,
    };
    let options = ScanOptions {
        family,
        predicate: predicate(cfg.predicate),
        tol: cfg.tol_rank.unwrap_or(DEFAULT_RANK_TOL),
        cap_n: cfg.cap_n.unwrap_or(DEFAULT_SCAN_CAP),
        witness_seed: None,
    };
    let report = scan_subsystems(&model.metric, &options)?;
    let mut w = Writer::new(cfg, "scan");

    #[derive(Serialize)]
    struct Header {
        n: usize,
        family: ScanFamily,
        predicate: &'static str,
    }
    match w.format {
        Format::Json => w.json_lines(
            "scan",
            Header {
                n: report.n,
                family,
                predicate: options.predicate.name(),
            },
            &report.rows,
        ),
        Format::Csv => {
            let rows = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        sites_cell(&r.mask.sites()),
                        r.k.to_string(),
                        r.local.to_string(),
                        r.extensive.to_string(),
                        bool_cell(r.predicate),
                        bool_cell(r.agree),
                    ]
                })
                .collect();
            w.csv("scan", &["mask", "K", "local", "extensive", "predicate", "agree"], rows);
        }
    }

    let agreement = report.agreement();
    let agree = agreement.map(|(a, t)| format!("{a}/{t}"));
    let listed = family != ScanFamily::All;
    #[derive(Serialize)]
    struct Summary {
        model: ModelKind,
        n: usize,
        family: ScanFamily,
        predicate: &'static str,
        subsets: usize,
        local: usize,
        extensive: usize,
        agree: Option<String>,
        disagreements: Vec<Vec<usize>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        not_extensive: Option<Vec<Vec<usize>>>,
    }
    let summary = Summary {
        model: model.kind,
        n: report.n,
        family,
        predicate: options.predicate.name(),
        subsets: report.rows.len(),
        local: report.rows.iter().filter(|r| r.local).count(),
        extensive: report.rows.iter().filter(|r| r.extensive).count(),
        agree: agree.clone(),
        disagreements: report.disagreements().iter().map(|r| r.mask.sites()).collect(),
        not_extensive: listed.then(|| {
            report.rows.iter().filter(|r| !r.extensive).map(|r| r.mask.sites()).collect()
        }),
    };
    let notes = agree.map(|a| vec![format!("agree: {a}")]).unwrap_or_default();
    Ok(w.finish(summary, notes, None))
}

pub fn verify(cfg: &RunConfig) -> Result<Output, CliError> {
    let cap = cfg.cap_n.unwrap_or(ORACLE_CAP);
    let model = build_model(cfg)?;
    let n = model.metric.n();
    if n > cap {
        return Err(CliError::new(Kind::CapExceeded, format!("n = {n} exceeds the oracle cap {cap}")));
    }
    let space = FockSpace::new(n)?;
    let eta = fock::lift_metric(&space, &model.metric)?;
    let mut oracle_opts = BruteForceOptions {
        cap_n: cap,
        ..BruteForceOptions::default()
    };
    let mut scan_opts = ScanOptions::default();
    if let Some(t) = cfg.tol_rank {
        oracle_opts.rank_tol = t;
        scan_opts.tol = t;
    }
    let oracle = fock::brute_force_scan(&space, &eta, &oracle_opts)?;
    let kernel = scan_subsystems(&model.metric, &scan_opts)?;

    let tol = cfg.tol_residual.unwrap_or(spectral::DEFAULT_TOL);
    let lift_residual = match &model.hamiltonian {
        Some(h) => {
            let big_h = fock::lift_one_body(&space, h)?;
            Some(spectral::quasi_hermiticity_residual(&eta.matrix, &big_h.matrix)?)
        }
        None => None,
    };

    #[derive(Serialize)]
    struct Row {
        mask: Vec<usize>,
        #[serde(rename = "K")]
        k: usize,
        kernel_local: bool,
        kernel_extensive: bool,
        oracle_dim_local: usize,
        oracle_local: bool,
        oracle_extensive: bool,
        gap: Sci,
        agree: bool,
    }
    let rows: Vec<Row> = oracle
        .iter()
        .zip(&kernel.rows)
        .map(|(o, k)| Row {
            mask: o.mask.sites(),
            k: k.k,
            kernel_local: k.local,
            kernel_extensive: k.extensive,
            oracle_dim_local: o.dim_local,
            oracle_local: o.local,
            oracle_extensive: o.extensive,
            gap: Sci(o.gap),
            agree: (o.local, o.extensive) == (k.local, k.extensive) && o.mask == k.mask,
        })
        .collect();
    let agreeing = rows.iter().filter(|r| r.agree).count();
    let min_gap = oracle.iter().map(|o| o.gap).fold(f64::INFINITY, f64::min);

    let mut w = Writer::new(cfg, "verify");
    #[derive(Serialize)]
    struct Header {
        n: usize,
    }
    match w.format {
        Format::Json => w.json_lines("verify", Header { n }, &rows),
        Format::Csv => {
            let cells = rows
                .iter()
                .map(|r| {
                    vec![
                        sites_cell(&r.mask),
                        r.k.to_string(),
                        r.kernel_local.to_string(),
                        r.kernel_extensive.to_string(),
                        r.oracle_dim_local.to_string(),
                        r.oracle_local.to_string(),
                        r.oracle_extensive.to_string(),
                        r.gap.to_string(),
                        r.agree.to_string(),
                    ]
                })
                .collect();
            let columns = [
                "mask",
                "K",
                "kernel_local",
                "kernel_extensive",
                "oracle_dim_local",
                "oracle_local",
                "oracle_extensive",
                "gap",
                "agree",
            ];
            w.csv("verify", &columns, cells);
        }
    }

    let mut failure = None;
    if agreeing != rows.len() {
        failure = Some(CliError::new(
            Kind::Disagreement,
            format!("{} of {} subsets disagree", rows.len() - agreeing, rows.len()),
        ));
    } else if let Some(r) = lift_residual.filter(|&r| r > tol) {
        failure = Some(CliError::new(
            Kind::Disagreement,
            format!("lifted metric residual {r:e} exceeds tol_residual {tol:e}"),
        ));
    }
    #[derive(Serialize)]
    struct Summary {
        model: ModelKind,
        n: usize,
        agree: String,
        disagreements: Vec<Vec<usize>>,
        min_rank_gap: Sci,
        lift_residual: Option<Sci>,
        passed: bool,
    }
    let agree = format!("{agreeing}/{}", rows.len());
    let summary = Summary {
        model: model.kind,
        n,
        agree: agree.clone(),
        disagreements: rows.iter().filter(|r| !r.agree).map(|r| r.mask.clone()).collect(),
        min_rank_gap: Sci(min_gap),
        lift_residual: lift_residual.map(Sci),
        passed: failure.is_none(),
    };
    Ok(w.finish(summary, vec![format!("agree: {agree} subsets")], failure))
}

fn random_pd(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let a = CMatrix::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    linalg::symmetrize(&(&a * a.adjoint() + CMatrix::identity(d, d) * c(0.1, 0.0)))
}

fn bipartition(cfg: &RunConfig, default: [usize; 2]) -> Result<Bipartition, CliError> {
    let dims = match (&cfg.dims, &cfg.qubits) {
        (Some(d), _) => [d[0], d[1]],
        (None, Some(q)) => {
            if q.iter().any(|&k| k > 12) {
                return Err(CliError::validation("at most 12 qubits per side"));
            }
            [1 << q[0], 1 << q[1]]
        }
        (None, None) => default,
    };
    Ok(Bipartition::new(dims[0], dims[1])?)
}

pub fn schmidt(cfg: &RunConfig) -> Result<Output, CliError> {
    let preset = cfg.preset.ok_or_else(|| CliError::validation("preset is required"))?;
    let seed = cfg.seed();
    let (eta, parts) = match preset {
        Preset::EtaMin => {
            if cfg.dims.is_some() || cfg.qubits.is_some() {
                return Err(CliError::validation("eta_min is fixed to two qubits"));
            }
            (build_eta_min(cfg.beta.unwrap_or(0.1))?, Bipartition::new(2, 2)?)
        }
        Preset::EtaMax => {
            let parts = bipartition(cfg, [4, 4])?;
            (build_eta_max(cfg.alpha.unwrap_or(1.0), parts.dim_a, parts.dim_b)?, parts)
        }
        Preset::Tensor => {
            let parts = bipartition(cfg, [2, 2])?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_pd(&mut rng, parts.dim_a);
            let b = random_pd(&mut rng, parts.dim_b);
            (linalg::kron(&a, &b), parts)
        }
        Preset::File => {
            if cfg.dims.is_none() && cfg.qubits.is_none() {
                return Err(CliError::validation("file preset needs dims or qubits"));
            }
            let eta = read_matrix(cfg)?;
            (eta, bipartition(cfg, [0, 0])?)
        }
    };
    let decomp = operator_schmidt(&eta, parts, SCHMIDT_TOL)?;
    let reconstruction = linalg::frobenius(&(decomp.reconstruct() - &eta)) / linalg::frobenius(&eta).max(f64::MIN_POSITIVE);
    let bounds = schmidt_bounds_check(&decomp)?;
    let tol = cfg.tol_residual.unwrap_or(1e-8);
    let reduction = if decomp.schmidt_number > 0 {
        simultaneous_reduction(decomp.significant_b(), tol, seed)?
    } else {
        None
    };
    let chi: Vec<f64> = decomp.coefficients.iter().map(|s| s * s).collect();

    let mut w = Writer::new(cfg, "schmidt");
    if w.format == Format::Csv {
        let rows = chi.iter().enumerate().map(|(i, x)| vec![(i + 1).to_string(), Sci(*x).to_string()]).collect();
        w.csv("schmidt", &["index", "chi"], rows);
    }

    #[derive(Serialize)]
    struct ReductionOut {
        block_sizes: Vec<usize>,
        attempts: usize,
        off_block: Sci,
    }
    #[derive(Serialize)]
    struct Summary {
        preset: Preset,
        dims: [usize; 2],
        chi: Vec<Sci>,
        schmidt_number: usize,
        threshold: usize,
        solutions_a: usize,
        solutions_b: usize,
        local_observables: bool,
        violation: Option<String>,
        reduction_b: Option<ReductionOut>,
        reconstruction_error: Sci,
    }
    let summary = Summary {
        preset,
        dims: [parts.dim_a, parts.dim_b],
        chi: chi.iter().map(|&x| Sci(x)).collect(),
        schmidt_number: decomp.schmidt_number,
        threshold: bounds.threshold,
        solutions_a: bounds.solutions_a,
        solutions_b: bounds.solutions_b,
        local_observables: bounds.local_observables(),
        violation: bounds.violation.clone(),
        reduction_b: reduction.map(|r| ReductionOut {
            block_sizes: r.blocks.iter().map(Vec::len).collect(),
            attempts: r.attempts,
            off_block: Sci(r.off_block),
        }),
        reconstruction_error: Sci(reconstruction),
    };
    if w.format == Format::Json {
        let body = w.stamp(&summary);
        w.add("schmidt.json", body);
    }
    let note = format!(
        "schmidt number {}, local observables A {} B {}",
        decomp.schmidt_number, bounds.solutions_a, bounds.solutions_b
    );
    Ok(w.finish(summary, vec![note], None))
}

pub fn spectrum(cfg: &RunConfig) -> Result<Output, CliError> {
    let kind = cfg.model.ok_or_else(|| CliError::validation("model is required"))?;
    let base = chain_params(cfg, kind)?;
    let [start, stop] = cfg.im_gamma.unwrap_or(Pair([0.0, 2.0])).0;
    let steps = cfg.steps.unwrap_or(DEFAULT_STEPS);
    if steps < 2 {
        return Err(CliError::validation("steps must be at least 2"));
    }
    let grid: Vec<ChainParams> = (0..steps)
        .map(|k| {
            let mut p = base.clone();
            p.gamma = c(base.gamma.re, start + (stop - start) * k as f64 / (steps - 1) as f64);
            p
        })
        .collect();
    let points = pt_phase_scan(&grid)?;

    #[derive(Serialize)]
    struct Row {
        im_gamma: Sci,
        class: spectral::PhaseClass,
        max_abs_im: Sci,
        max_abs_re: Sci,
    }
    let rows: Vec<Row> = points
        .iter()
        .map(|(p, r)| Row {
            im_gamma: Sci(p.gamma.im),
            class: r.phase_class(),
            max_abs_im: Sci(r.max_abs_im),
            max_abs_re: Sci(r.max_abs_re),
        })
        .collect();

    #[derive(Serialize)]
    struct Transition {
        from: spectral::PhaseClass,
        to: spectral::PhaseClass,
        between: [Sci; 2],
    }
    let transitions: Vec<Transition> = rows
        .windows(2)
        .filter(|w| w[0].class != w[1].class)
        .map(|w| Transition {
            from: w[0].class,
            to: w[1].class,
            between: [w[0].im_gamma, w[1].im_gamma],
        })
        .collect();

    let mut w = Writer::new(cfg, "spectrum");
    match w.format {
        Format::Csv => {
            let cells = rows
                .iter()
                .map(|r| {
                    let class = serde_json::to_value(r.class).expect("class serialization");
                    vec![
                        r.im_gamma.to_string(),
                        class.as_str().unwrap_or_default().to_string(),
                        r.max_abs_im.to_string(),
                        r.max_abs_re.to_string(),
                    ]
                })
                .collect();
            w.csv("spectrum", &["im_gamma", "class", "max_abs_im", "max_abs_re"], cells);
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                rows: &'a [Row],
            }
            let body = w.stamp(Doc { rows: &rows });
            w.add("spectrum.json", body);
        }
    }
    #[derive(Serialize)]
    struct Summary {
        model: ModelKind,
        n: usize,
        m: usize,
        re_gamma: Sci,
        points: usize,
        transitions: Vec<Transition>,
    }
    let notes = transitions
        .iter()
        .map(|t| format!("{:?} -> {:?} between Im γ = {} and {}", t.from, t.to, t.between[0], t.between[1]))
        .collect();
    let summary = Summary {
        model: kind,
        n: base.n,
        m: base.m,
        re_gamma: Sci(base.gamma.re),
        points: rows.len(),
        transitions,
    };
    Ok(w.finish(summary, notes, None))
}
