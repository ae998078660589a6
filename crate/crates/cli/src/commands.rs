use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kemeny_core::chain::{classify, spectrum, stationary};
use kemeny_core::ginverse::fundamental_matrix;
use kemeny_core::graph::{
    kirchhoff_index, kirkland_mu, longest_cycle_length, resistance_matrix, GraphSpec, KirchhoffMethod, Network,
};
use kemeny_core::kemeny::{kemeny_bounds, kemeny_report, Route};
use kemeny_core::mixing::{estimate_mixing_moments_with, mixing_variance_closed_form, MixingVariant};
use kemeny_core::passage::{mfpt_direct_with, Convention};
use kemeny_core::perturb::{
    apply_perturbation, l1_bound_check, monotonicity_checks, type1_analysis, type2_invariance, Perturbation,
    PerturbationKindTag,
};
use kemeny_core::{Execution, KemenyError, TransitionMatrix};

use crate::error::CliError;
use crate::input::{parse_chain, parse_edges, parse_perturbation, Source};
use crate::report::*;

#[derive(Debug, Parser)]
#[command(name = "kemeny", version, about = "Kemeny's constant, passage times and graph walks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structure, stationary vector, K by every route, bounds and MFPT.
    Analyze(AnalyzeArgs),
    /// Monte Carlo time to mixing beside its closed forms.
    Mix(MixArgs),
    /// Kirchhoff index, resistances and Kirkland's μ for an edge list.
    Graph(GraphArgs),
    /// Stability diagnostics for a perturbation of a chain.
    Perturb(PerturbArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Classic,
    Modified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Return,
    Hitting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    General,
    Type1,
    Type2,
    Psd,
    Damping,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub matrix: PathBuf,
    /// Relative route spread accepted at serialisation.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = ConventionArg::Classic)]
    pub convention: ConventionArg,
    /// Comma-separated subset of mfpt_rowdot, trace_z, trace_group,
    /// eigenvalue, ginverse_general, submatrix.
    #[arg(long, value_delimiter = ',')]
    pub routes: Vec<String>,
    /// Run per-column solves on one thread.
    #[arg(long)]
    pub sequential: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct MixArgs {
    pub matrix: PathBuf,
    /// 1-based start state.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub start: u64,
    #[arg(long, value_enum, default_value_t = VariantArg::Return)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    /// Draw every shard on one thread (output is identical either way).
    #[arg(long)]
    pub sequential: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    pub edges: PathBuf,
    /// Comma-separated methods: resistance, hitting_times, laplacian,
    /// regular_fundamental, or all. Default: every applicable method.
    #[arg(long, value_delimiter = ',')]
    pub kirchhoff: Vec<String>,
    /// Report Kirkland's μ (always on for directed inputs).
    #[arg(long)]
    pub mu: bool,
    /// Relative agreement demanded between Kirchhoff methods.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    pub matrix: PathBuf,
    pub perturbation: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::General)]
    pub kind: KindArg,
    #[command(flatten)]
    pub output: Output,
}

fn digest(s: &Source) -> InputDigest {
    InputDigest { name: s.name.clone(), sha256: s.sha256.clone() }
}

fn exec(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn irreducible(p: &TransitionMatrix) -> Result<kemeny_core::ChainStructure, CliError> {
    let s = classify(p);
    if !s.irreducible {
        return Err(KemenyError::NotIrreducible.into());
    }
    Ok(s)
}

fn structure_section(p: &TransitionMatrix, s: kemeny_core::ChainStructure) -> StructureSection {
    StructureSection {
        states: p.m(),
        irreducible: s.irreducible,
        period: s.period,
        reversible: s.reversible,
        regular: s.regular,
    }
}

fn kemeny_section(p: &TransitionMatrix, routes: &[Route], tol: f64) -> Result<KemenySection, CliError> {
    let r = kemeny_report(p, routes)?;
    Ok(KemenySection {
        k: r.k,
        modified_k: r.modified_k,
        routes: r
            .routes
            .iter()
            .map(|(route, value)| RouteValue { route: route.name().into(), value: *value })
            .collect(),
        relative_spread: r.relative_spread(),
        submatrix_by_state: r.submatrix_by_state,
        spread: r.spread,
        tolerance: tol,
    })
}

fn parse_routes(names: &[String]) -> Result<Vec<Route>, CliError> {
    if names.is_empty() || names.iter().any(|n| n == "all") {
        return Ok(Route::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| n.trim().parse::<Route>().map_err(|_| CliError::Usage(format!("unknown route '{n}'"))))
        .collect()
}

pub fn analyze(args: &AnalyzeArgs) -> Result<AnalysisReport, CliError> {
    let src = Source::read(&args.matrix)?;
    let routes = parse_routes(&args.routes)?;
    let p = parse_chain(&src.text)?;
    let s = irreducible(&p)?;
    let pi = stationary(&p)?;
    let spec = spectrum(&p)?;
    let mut report = AnalysisReport::new("analyze", vec![digest(&src)]);
    report.structure = Some(structure_section(&p, s));
    report.stationary = Some(pi.as_slice().to_vec());
    let kemeny = kemeny_section(&p, &routes, args.tol)?;
    let bounds = kemeny_bounds(&spec, &s);
    report.bounds = Some(BoundsSection {
        lower_general: bounds.lower_general,
        lower_reversible: bounds.lower_reversible,
        upper_reversible: bounds.upper_reversible,
        satisfied: bounds.contains(kemeny.k, 1e-9 * kemeny.k.abs().max(1.0)),
    });
    report.kemeny = Some(kemeny);
    report.spectrum = Some(SpectrumSection { lambda2: spec.lambda2, slem: spec.slem });
    let mfpt = mfpt_direct_with(&p, exec(args.sequential))?;
    let (convention, mfpt) = match args.convention {
        ConventionArg::Classic => ("classic", mfpt.with_convention(Convention::Classic)?),
        ConventionArg::Modified => ("modified", mfpt.with_convention(Convention::Modified)?),
    };
    report.mfpt = Some(MfptSection { convention: convention.into(), matrix: rows(&mfpt.entries) });
    Ok(report)
}

pub fn mix(args: &MixArgs) -> Result<AnalysisReport, CliError> {
    let src = Source::read(&args.matrix)?;
    let p = parse_chain(&src.text)?;
    let s = irreducible(&p)?;
    let start = (args.start - 1) as usize;
    if start >= p.m() {
        return Err(CliError::Usage(format!("--start {} outside 1..={}", args.start, p.m())));
    }
    let pi = stationary(&p)?;
    let variant = match args.variant {
        VariantArg::Return => MixingVariant::Return,
        VariantArg::Hitting => MixingVariant::Hitting,
    };
    let est = estimate_mixing_moments_with(&p, &pi, start, variant, args.samples, args.seed, exec(args.sequential))?;
    let moments = mixing_variance_closed_form(&p, &pi, &fundamental_matrix(&p, &pi)?)?;
    let mut report = AnalysisReport::new("mix", vec![digest(&src)]);
    report.structure = Some(structure_section(&p, s));
    report.stationary = Some(pi.as_slice().to_vec());
    let kemeny = kemeny_section(&p, &[Route::TraceZ, Route::Eigenvalue], args.tol)?;
    let (expected_mean, expected_variance) = match variant {
        MixingVariant::Return => (kemeny.k, Some(moments.v[start])),
        MixingVariant::Hitting => (kemeny.k - 1.0, None),
    };
    report.kemeny = Some(kemeny);
    report.mixing = Some(MixingSection {
        start: args.start as usize,
        variant: match variant {
            MixingVariant::Return => "return".into(),
            MixingVariant::Hitting => "hitting".into(),
        },
        samples: est.n,
        seed: est.seed,
        mean: est.mean,
        variance: est.variance,
        se_mean: est.se_mean,
        se_variance: est.se_variance,
        ci_halfwidth_95: est.ci_halfwidth_95,
        expected_mean,
        expected_variance,
    });
    Ok(report)
}

fn kirchhoff_methods(names: &[String], g: &GraphSpec) -> Result<Vec<KirchhoffMethod>, CliError> {
    if names.is_empty() {
        let mut all = vec![KirchhoffMethod::Resistance, KirchhoffMethod::HittingTimes, KirchhoffMethod::Laplacian];
        if g.regular_degree().is_some() {
            all.push(KirchhoffMethod::RegularFundamental);
        }
        return Ok(all);
    }
    if names.iter().any(|n| n == "all") {
        return Ok(KirchhoffMethod::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| n.trim().parse().map_err(|_| CliError::Usage(format!("unknown Kirchhoff method '{n}'"))))
        .collect()
}

pub fn graph(args: &GraphArgs) -> Result<AnalysisReport, CliError> {
    let src = Source::read(&args.edges)?;
    let g = parse_edges(&src.text)?;
    let mut section = GraphSection {
        vertices: g.m(),
        edges: g.edges().len(),
        directed: g.is_directed(),
        kirchhoff: Vec::new(),
        resistances: None,
        kirkland: None,
    };
    if !g.is_directed() {
        let methods = kirchhoff_methods(&args.kirchhoff, &g)?;
        for method in methods {
            section
                .kirchhoff
                .push(KirchhoffValue { method: method.name().into(), value: kirchhoff_index(&g, method)? });
        }
        if let Some(first) = section.kirchhoff.first().map(|k| k.value) {
            for k in &section.kirchhoff {
                if (k.value - first).abs() > args.tol * first.abs().max(1.0) {
                    return Err(
                        KemenyError::RouteDisagreement { what: "Kirchhoff methods", a: first, b: k.value }.into()
                    );
                }
            }
        }
        let net = Network::from_graph(&g)?;
        section.resistances = Some(rows(&resistance_matrix(&net, Execution::default())?));
    } else if !args.kirchhoff.is_empty() {
        return Err(KemenyError::NotUndirected.into());
    }
    if g.is_directed() || args.mu {
        section.kirkland = Some(KirklandSection { longest_cycle: longest_cycle_length(&g)?, mu: kirkland_mu(&g)? });
    }
    let mut report = AnalysisReport::new("graph", vec![digest(&src)]);
    let p = kemeny_core::graph::walk_from_graph(&g)?;
    let s = classify(&p);
    report.structure = Some(structure_section(&p, s));
    if s.irreducible {
        report.stationary = Some(stationary(&p)?.as_slice().to_vec());
        report.kemeny = Some(kemeny_section(&p, &[Route::TraceZ, Route::TraceGroup], 1e-7)?);
    }
    report.graph = Some(section);
    Ok(report)
}

pub fn perturb(args: &PerturbArgs) -> Result<AnalysisReport, CliError> {
    let msrc = Source::read(&args.matrix)?;
    let psrc = Source::read(&args.perturbation)?;
    let p = parse_chain(&msrc.text)?;
    irreducible(&p)?;
    let kind = match args.kind {
        KindArg::General => PerturbationKindTag::General,
        KindArg::Type1 => PerturbationKindTag::Type1,
        KindArg::Type2 => PerturbationKindTag::Type2,
        KindArg::Psd => PerturbationKindTag::PsdSubtract,
        KindArg::Damping => PerturbationKindTag::Damping,
    };
    let pert = parse_perturbation(&psrc.text, kind)?;
    if let Perturbation::General(e) | Perturbation::PsdSubtract(e) = &pert {
        if e.nrows() != p.m() {
            return Err(KemenyError::DimensionMismatch { expected: p.m(), got: e.nrows() }.into());
        }
    }
    let p_bar = apply_perturbation(&p, &pert)?;
    irreducible(&p_bar)?;
    let l1 = l1_bound_check(&p, &p_bar)?;
    let mut section = PerturbationSection {
        kind: match kind {
            PerturbationKindTag::General => "general",
            PerturbationKindTag::Type1 => "type1",
            PerturbationKindTag::Type2 => "type2",
            PerturbationKindTag::PsdSubtract => "psd",
            PerturbationKindTag::Damping => "damping",
        }
        .into(),
        l1_shift: l1.l1_shift,
        bound: l1.bound,
        holds: l1.holds,
        norm_inf: l1.norm_inf,
        norm_column: l1.norm_column,
        bound_column: l1.bound_column,
        k: l1.k,
        k_bar: l1.k_bar,
        perturbed_matrix: rows(p_bar.matrix()),
        type1: None,
        type2_invariant: None,
        monotonicity: None,
    };
    match &pert {
        Perturbation::Type1 { r, h } => {
            let t = type1_analysis(&p, *r, h)?;
            section.type1 = Some(Type1Section {
                r: t.r + 1,
                max_fixed_column_delta: t.max_fixed_column_delta,
                sign_mismatches: t.sign_mismatches,
                degenerate_pairs: t.degenerate_pairs,
                pairs_checked: t.pairs_checked,
                predictor: t.predictor,
                k_delta: t.k_delta,
                identity_residual: t.identity_residual,
            });
        }
        Perturbation::Type2 { h } => section.type2_invariant = Some(type2_invariance(&p, h)?.invariant),
        Perturbation::PsdSubtract(_) | Perturbation::Damping { .. } => {
            let m = monotonicity_checks(&p, &pert)?;
            section.monotonicity = Some(MonotonicitySection {
                k_decreased: m.k_decreased,
                max_row_sum_increase: m.max_row_sum_increase,
                row_sums_decreased: m.row_sums_decreased,
            });
        }
        Perturbation::General(_) => {}
    }
    let mut report = AnalysisReport::new("perturb", vec![digest(&msrc), digest(&psrc)]);
    report.stationary = Some(stationary(&p)?.as_slice().to_vec());
    report.perturbation = Some(section);
    Ok(report)
}

pub fn dispatch(cli: &Cli) -> Result<(AnalysisReport, Option<PathBuf>), CliError> {
    Ok(match &cli.command {
        Command::Analyze(a) => (analyze(a)?, a.output.out.clone()),
        Command::Mix(a) => (mix(a)?, a.output.out.clone()),
        Command::Graph(a) => (graph(a)?, a.output.out.clone()),
        Command::Perturb(a) => (perturb(a)?, a.output.out.clone()),
    })
}
