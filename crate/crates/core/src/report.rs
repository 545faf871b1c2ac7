//! Pipeline orchestration, invariant audits, the serializable analysis report and its
//! JSON, text and LaTeX renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ambiguity::{self, AmbiguityError, AmbiguityMatrix, Atom, ParamFraction, ParameterTable, Pushforward, Reality};
use crate::cartan::{self, CartanError, FinalStructure, FullTorsionReport, Part, ReducedStructure, SolutionMap, StructureEquations, SystemEquation, Unknown};
use crate::exactalg::GaussianRational;
use crate::frame::{self, DarbouxStructure, Frame, FrameError};
use crate::liealg::{self, GradedLieAlgebra};
use crate::model::{self, Model, ModelError, RatMatrix};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("model stage: {0}")]
    Model(#[from] ModelError),
    #[error("frame stage: {0}")]
    Frame(#[from] FrameError),
    #[error("ambiguity stage: {0}")]
    Ambiguity(#[from] AmbiguityError),
    #[error("cartan stage: {0}")]
    Cartan(#[from] CartanError),
}

impl PipelineError {
    pub fn is_out_of_scope(&self) -> bool {
        matches!(self, PipelineError::Model(ModelError::OutOfScope(_)))
    }
}

/// Every intermediate object of one analysis.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub model: Model,
    pub frame: Frame,
    pub darboux: DarbouxStructure,
    pub push: Pushforward,
    pub params: ParameterTable,
    pub g: AmbiguityMatrix,
    pub ginv: Vec<Vec<ParamFraction>>,
    pub structure: StructureEquations,
    pub system: Vec<SystemEquation>,
    /// `a1` normalized real before absorption (so `α = ᾱ`).
    pub real_alpha: bool,
    pub solution: SolutionMap,
    pub reduced: ReducedStructure,
    pub final_structure: FinalStructure,
    pub algebra: GradedLieAlgebra,
}

impl Pipeline {
    pub fn run(k: usize, a_override: Option<&[RatMatrix]>) -> Result<Self, PipelineError> {
        let model = model::build_model(k, a_override)?;
        let frame = frame::build_initial_frame(&model)?;
        let darboux = frame::darboux_structure(&frame);
        let push = ambiguity::pushforward_frame(&frame);
        let (params, g) = ambiguity::name_parameters(&frame, &push)?;
        let ginv = ambiguity::invert_ambiguity(&frame, &g);
        let structure = cartan::compute_structure_equations(&frame, &darboux, &g, &ginv)?;
        let system = cartan::extract_system_s(&frame, &darboux, &structure)?;
        let real_alpha = cartan::phase_normalizable(&darboux, &structure.diag);
        let solution = cartan::solve_system(&frame, &system, real_alpha)?;
        let reduced = cartan::reduce_structure(&structure, &solution, &params)?;
        let final_structure = cartan::prolong(&reduced);
        let algebra = liealg::from_structure(&frame, &final_structure);
        Ok(Pipeline { model, frame, darboux, push, params, g, ginv, structure, system, real_alpha, solution, reduced, final_structure, algebra })
    }

    pub fn k(&self) -> usize {
        self.model.k
    }

    pub fn name(&self, a: usize) -> String {
        self.frame.labels[a].name()
    }

    pub fn full_torsion(&self) -> Result<FullTorsionReport, CartanError> {
        cartan::full_torsion_check(&self.frame, &self.structure, &self.solution)
    }

    /// The two-step elimination of the absorption unknowns: the row-`L` equation gives
    /// `t2 = i a2/(a1 ā1)` and the row-`T` equation then gives
    /// `t1 = a3/(a1² ā1) + 2i ā2/(a1 ā1)`.
    pub fn t_expressions_hold(&self) -> bool {
        let find = |row: usize, t: usize| self.system.iter().find(|e| e.row == row && e.t == t && e.part == Part::One);
        let (Some(eq_l), Some(eq_t)) = (find(0, 1), find(2, 0)) else { return false };
        let (Some(a2), Some(a3)) = (self.params.get(2), self.params.get(3)) else { return false };
        let i = GaussianRational::i();
        let t2 = (&a2.atom(false) * &ParamFraction::a1_pow(-1, -1)).scale(&i);
        let t1 = &(&a3.atom(false) * &ParamFraction::a1_pow(-2, -1))
            + &(&a2.atom(true) * &ParamFraction::a1_pow(-1, -1)).scale(&GaussianRational::from_parts(0, 2));
        let subst = |e: &ParamFraction| {
            e.substitute(&|a| match a {
                Atom::T { label: 0, conj, .. } => Some(if *conj { t1.conj() } else { t1.clone() }),
                Atom::T { label: 1, conj, .. } => Some(if *conj { t2.conj() } else { t2.clone() }),
                _ => None,
            })
        };
        subst(&eq_l.lhs()).is_zero() && subst(&eq_t.lhs()).is_zero()
    }

    /// Re-extracting `S` on the reduced structure leaves no named parameter, and its
    /// solution sets every absorption unknown to zero.
    pub fn idempotent(&self) -> bool {
        let reduced: Vec<SystemEquation> = self
            .system
            .iter()
            .map(|e| SystemEquation { torsion: cartan::vanish_params(&e.torsion), ..e.clone() })
            .collect();
        if reduced.iter().any(|e| e.torsion.contains_atom(|a| matches!(a, Atom::P { .. }))) {
            return false;
        }
        match cartan::solve_system(&self.frame, &reduced, self.real_alpha) {
            Ok(sol) => sol.keys().all(|u| matches!(u, Unknown::T(_))) && sol.values().all(|v| v == &GaussianRational::from_int(0)),
            Err(_) => false,
        }
    }

    pub fn audits(&self, full_torsion: bool) -> Vec<AuditEntry> {
        let mut out = Vec::new();
        let mut push = |name: &str, passed: bool, detail: String| out.push(AuditEntry { name: name.into(), passed, detail });
        let f = &self.frame;
        let n = f.len();
        let prof = &self.model.profile;

        push("model.generator_weights", frame::generator_weights_ok(&self.model), String::new());
        push("frame.homogeneity", frame::homogeneity_ok(f), String::new());
        let mults: Vec<usize> = (1..=f.rho).map(|l| (0..n).filter(|&a| f.length(a) == l).count()).collect();
        let expect: Vec<usize> = (1..=f.rho).map(|l| if l == 1 { 2 } else { prof.mult(l) as usize }).collect();
        push("frame.length_multiplicities", mults == expect, format!("{mults:?}"));
        let dual = frame::duality_oracle(f, &self.darboux);
        push("frame.duality", dual.is_ok(), dual.err().map(|e| format!("{e:?}")).unwrap_or_default());
        push("frame.construction_wedges", frame::construction_wedges_ok(f, &self.darboux), String::new());

        push("ambiguity.column_weights", ambiguity::column_weights_ok(f, &self.g), String::new());
        push("ambiguity.inverse_row_weights", ambiguity::inverse_row_weights_ok(f, &self.ginv), String::new());
        push("ambiguity.g_times_inverse", ambiguity::is_identity(&ambiguity::mat_mul(&self.g.g, &self.ginv)), String::new());
        let forcing = ambiguity::first_order_forcing(&self.params);
        push("ambiguity.first_order_forcing", forcing.is_some(), forcing.map(|v| format!("{v:?}")).unwrap_or_default());
        let survivors: Vec<usize> = self.params.params.iter().filter(|p| !ambiguity::vanish_substitution(&p.expr).is_zero()).map(|p| p.index).collect();
        push("ambiguity.derivative_vanishing", survivors.is_empty(), format!("{survivors:?}"));

        let torsion_ok = self.structure.torsion.iter().all(|row| row.values().all(|v| v.is_homogeneous_of(0)));
        push("cartan.torsion_weight_zero", torsion_ok, String::new());
        let top_ok = (0..n).filter(|&r| f.length(r) == f.rho).all(|r| self.structure.delta_slots[r].is_empty());
        push("cartan.top_rows_without_delta", top_ok, String::new());
        let hom = self.system.iter().all(|e| e.lhs().is_homogeneous_of(0));
        push("cartan.system_weighted_homogeneous", hom, String::new());
        let no_delta = self.system.iter().all(|e| !self.structure.delta_slots[e.row].contains(&e.x) && !self.structure.delta_slots[e.row].contains(&e.t));
        push("cartan.delta_no_contribution", no_delta, String::new());
        let unique = self.system.iter().filter(|e| e.part == Part::One).all(|e| cartan::wedge_contributors(&self.darboux, e.x, e.t) == 1);
        push("cartan.wedge_uniqueness", unique, String::new());
        let verified = self.system.iter().all(|e| cartan::substitute_solution(&e.lhs(), &self.solution).is_zero());
        push("cartan.solution_verified", verified, String::new());
        push("cartan.t_expressions", self.t_expressions_hold(), String::new());
        push("cartan.idempotent", self.idempotent(), String::new());
        let residual_match = cartan::phase_normalizable(&self.darboux, &self.structure.diag) == self.reduced.normalizable;
        push("cartan.phase_exponents_match_residuals", residual_match, String::new());
        if full_torsion {
            match self.full_torsion() {
                Ok(r) => {
                    let hidden_ok = r.unforced.iter().all(|i| self.params.get(*i).is_some_and(|p| ambiguity::vanish_substitution(&p.expr).is_zero()));
                    push(
                        "cartan.full_torsion",
                        r.constant_at_solution && hidden_ok,
                        format!("{} equations, {} unknowns, rank {}, unforced {:?}", r.equations, r.unknowns, r.rank, r.unforced),
                    );
                }
                Err(e) => push("cartan.full_torsion", false, e.to_string()),
            }
        }

        let alg = &self.algebra;
        let jac = alg.jacobi_violation();
        push("liealg.jacobi", jac.is_none(), jac.map(|t| format!("{t:?}")).unwrap_or_default());
        push("liealg.grading_closed", alg.grading_closed(), String::new());
        push("liealg.g0_abelian", alg.g0_abelian(), String::new());
        push("liealg.negative_part_matches_frame", alg.negative_part_matches(f), String::new());
        push("liealg.generated_by_degree_minus_one", alg.generated_by_minus_one(), String::new());
        let g0 = alg.degree_indices(0).len();
        push("liealg.dimension_count", alg.dim() == 2 + self.k() + g0, format!("{} = {} + {}", alg.dim(), 2 + self.k(), g0));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub variable: String,
    pub weight: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub label: String,
    pub length: usize,
    pub word: String,
    pub self_conjugate: bool,
    pub conjugate: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormEquation {
    pub label: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub weight: u32,
    pub reality: String,
    pub expression: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbiguityEntry {
    /// Labels in display order; rows and columns of `matrix` follow it.
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemEntry {
    pub part: String,
    pub equation: String,
    pub wedge: [String; 2],
    pub torsion: String,
    pub absorption: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionEntry {
    pub unknown: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub left: String,
    pub right: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeEntry {
    pub degree: i32,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub rigid: bool,
    pub dim: usize,
    /// `"3+k"`, `"4+k"`, or `"other"`.
    pub dim_formula: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullTorsionEntry {
    pub constant_at_solution: bool,
    pub equations: usize,
    pub unknowns: usize,
    pub rank: usize,
    pub unforced: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub schema_version: u32,
    pub k: usize,
    pub rho: usize,
    pub weights: Vec<WeightEntry>,
    pub equations_real: Vec<String>,
    pub equations_complex: Vec<String>,
    pub frame: Vec<FrameEntry>,
    pub darboux: Vec<FormEquation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub k: usize,
    pub rho: usize,
    pub weights: Vec<WeightEntry>,
    pub equations_real: Vec<String>,
    pub equations_complex: Vec<String>,
    pub frame: Vec<FrameEntry>,
    pub darboux: Vec<FormEquation>,
    pub parameters: Vec<ParamEntry>,
    pub ambiguity: AmbiguityEntry,
    pub system: Vec<SystemEntry>,
    pub alpha_real_before_absorption: bool,
    pub solution: Vec<SolutionEntry>,
    pub normalizable: bool,
    pub group_dim: usize,
    pub final_equations: Vec<FormEquation>,
    pub basis: Vec<String>,
    pub brackets: Vec<BracketEntry>,
    pub grading: Vec<GradeEntry>,
    pub verdict: Verdict,
    pub full_torsion: Option<FullTorsionEntry>,
    pub audits: Vec<AuditEntry>,
}

impl AnalysisReport {
    pub fn audits_pass(&self) -> bool {
        self.audits.iter().all(|a| a.passed)
    }
}

#[derive(Clone, Debug, Default)]
pub struct AnalysisOptions {
    pub full_torsion: bool,
    pub a_override: Option<Vec<RatMatrix>>,
}

fn coeff_prefix(c: &GaussianRational) -> String {
    let s = c.to_string();
    match s.as_str() {
        "1" => String::new(),
        "-1" => "-".into(),
        _ if c.re == num_traits::Zero::zero() || c.im == num_traits::Zero::zero() => format!("{s}*"),
        _ => format!("({s})*"),
    }
}

fn wedge_sum(terms: &BTreeMap<(usize, usize), GaussianRational>, name: &dyn Fn(usize) -> String) -> String {
    let mut s = String::new();
    for ((a, b), c) in terms {
        let t = format!("{}{}^{}", coeff_prefix(c), name(*a), name(*b));
        if s.is_empty() {
            s = t;
        } else if let Some(rest) = t.strip_prefix('-') {
            let _ = write!(s, " - {rest}");
        } else {
            let _ = write!(s, " + {t}");
        }
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

fn mc_part(diag: (i32, i32), real_alpha: bool) -> String {
    let term = |c: i32, n: &str| match c {
        1 => n.to_string(),
        _ => format!("{c}*{n}"),
    };
    if real_alpha {
        term(diag.0 + diag.1, "alpha")
    } else {
        match diag {
            (p, 0) => term(p, "alpha"),
            (0, q) => term(q, "alphab"),
            (p, q) => format!("({} + {})", term(p, "alpha"), term(q, "alphab")),
        }
    }
}

fn unknown_name(u: &Unknown) -> String {
    match u {
        Unknown::Param(i) => format!("a{i}"),
        Unknown::T(l) => format!("t{}", l + 1),
    }
}

fn build_report_parts(model: &Model, frame: &Frame, darboux: &DarbouxStructure) -> BuildReport {
    let vars = &model.vars;
    let mut weights = vec![WeightEntry { variable: "z".into(), weight: 1 }];
    weights.extend((1..=vars.n_w()).map(|j| WeightEntry { variable: format!("w{j}"), weight: vars.weight(vars.w(j)) }));
    let name = |a: usize| frame.labels[a].name();
    let sname = |a: usize| format!("s{}", name(a));
    let order = frame.display_order();
    BuildReport {
        schema_version: SCHEMA_VERSION,
        k: model.k,
        rho: frame.rho,
        weights,
        equations_real: model.real_equations(),
        equations_complex: model.complex_equations(),
        frame: order
            .iter()
            .map(|&a| FrameEntry {
                label: name(a),
                length: frame.length(a),
                word: frame.word_string(a),
                self_conjugate: frame.labels[a].is_self_conjugate(),
                conjugate: name(frame.labels[a].partner),
            })
            .collect(),
        darboux: order.iter().map(|&c| FormEquation { label: format!("d{}", sname(c)), rhs: wedge_sum(&darboux.d[c], &sname) }).collect(),
    }
}

pub fn build_report(p: &Pipeline) -> BuildReport {
    build_report_parts(&p.model, &p.frame, &p.darboux)
}

/// Model, frame and Darboux table only.
pub fn run_build(k: usize, a_override: Option<&[RatMatrix]>) -> Result<BuildReport, PipelineError> {
    let model = model::build_model(k, a_override)?;
    let frame = frame::build_initial_frame(&model)?;
    let darboux = frame::darboux_structure(&frame);
    Ok(build_report_parts(&model, &frame, &darboux))
}

pub fn report_from_pipeline(p: &Pipeline, opts: &AnalysisOptions) -> AnalysisReport {
    let BuildReport { weights, frame, darboux, equations_real, equations_complex, .. } = build_report(p);
    let f = &p.frame;
    let order = f.display_order();
    let parameters = p
        .params
        .params
        .iter()
        .map(|q| ParamEntry {
            name: format!("a{}", q.index),
            weight: q.weight,
            reality: match q.reality {
                Reality::Real => "real",
                Reality::Imag => "imaginary",
                Reality::Complex => "complex",
            }
            .into(),
            expression: q.expr.render(),
        })
        .collect();
    let ambiguity = AmbiguityEntry {
        labels: order.iter().map(|&a| p.name(a)).collect(),
        matrix: order.iter().map(|&r| order.iter().map(|&c| p.g.g[r][c].render()).collect()).collect(),
    };
    let system = p
        .system
        .iter()
        .map(|e| SystemEntry {
            part: match e.part {
                Part::One => "I",
                Part::Two => "II",
            }
            .into(),
            equation: format!("d{}", p.name(e.row)),
            wedge: [p.name(e.x), p.name(e.t)],
            torsion: e.torsion.render(),
            absorption: e.absorption.render(),
        })
        .collect();
    let solution = p.solution.iter().map(|(u, v)| SolutionEntry { unknown: unknown_name(u), value: v.to_string() }).collect();
    let name = |a: usize| p.name(a);
    let mut final_equations: Vec<FormEquation> = order
        .iter()
        .map(|&r| {
            let eq = &p.final_structure.equations[r];
            let tor = wedge_sum(&eq.terms, &name);
            let mc = format!("{}^{}", mc_part(eq.diag, p.reduced.normalizable || p.real_alpha), p.name(r));
            let rhs = if tor == "0" { mc } else if let Some(rest) = tor.strip_prefix('-') { format!("{mc} - {rest}") } else { format!("{mc} + {tor}") };
            FormEquation { label: format!("d{}", p.name(r)), rhs }
        })
        .collect();
    final_equations.push(FormEquation { label: "dalpha".into(), rhs: "0".into() });
    if p.final_structure.group_dim == 2 {
        final_equations.push(FormEquation { label: "dalphab".into(), rhs: "0".into() });
    }
    let alg = &p.algebra;
    let basis = alg.basis.iter().map(|b| b.name.clone()).collect();
    let brackets = alg.table().into_iter().map(|(left, right, value)| BracketEntry { left, right, value }).collect();
    let grading = alg.graded_dims().into_iter().map(|(degree, dim)| GradeEntry { degree, dim }).collect();
    let g0 = alg.degree_indices(0).len();
    let rigid = !alg.has_positive_part() && alg.g0_abelian() && g0 <= 2;
    let dim = alg.dim();
    let dim_formula = if dim == 3 + p.k() {
        "3+k"
    } else if dim == 4 + p.k() {
        "4+k"
    } else {
        "other"
    }
    .to_string();
    let full_torsion = opts.full_torsion.then(|| p.full_torsion().ok()).flatten().map(|r| FullTorsionEntry {
        constant_at_solution: r.constant_at_solution,
        equations: r.equations,
        unknowns: r.unknowns,
        rank: r.rank,
        unforced: r.unforced.iter().map(|i| format!("a{i}")).collect(),
    });
    AnalysisReport {
        schema_version: SCHEMA_VERSION,
        k: p.k(),
        rho: f.rho,
        weights,
        equations_real,
        equations_complex,
        frame,
        darboux,
        parameters,
        ambiguity,
        system,
        alpha_real_before_absorption: p.real_alpha,
        solution,
        normalizable: p.reduced.normalizable,
        group_dim: p.reduced.group_dim,
        final_equations,
        basis,
        brackets,
        grading,
        verdict: Verdict { rigid, dim, dim_formula },
        full_torsion,
        audits: p.audits(opts.full_torsion),
    }
}

pub fn run_analysis(k: usize, opts: &AnalysisOptions) -> Result<AnalysisReport, PipelineError> {
    let p = Pipeline::run(k, opts.a_override.as_deref())?;
    Ok(report_from_pipeline(&p, opts))
}

/// Independent analyses for `k_min..=k_max`, run in parallel; errors are kept per `k`.
pub fn batch(k_min: usize, k_max: usize, opts: &AnalysisOptions) -> Vec<(usize, Result<AnalysisReport, String>)> {
    (k_min..=k_max).into_par_iter().map(|k| (k, run_analysis(k, opts).map_err(|e| e.to_string()))).collect()
}

pub fn batch_summary(results: &[(usize, Result<AnalysisReport, String>)]) -> String {
    let mut s = String::from("k\trho\tdim\tnormalizable\trigid\taudits\n");
    for (k, r) in results {
        match r {
            Ok(r) => {
                let _ = writeln!(
                    s,
                    "{k}\t{}\t{} ({})\t{}\t{}\t{}",
                    r.rho,
                    r.verdict.dim,
                    r.verdict.dim_formula,
                    r.normalizable,
                    r.verdict.rigid,
                    if r.audits_pass() { "pass" } else { "FAIL" }
                );
            }
            Err(e) => {
                let _ = writeln!(s, "{k}\terror: {e}");
            }
        }
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
    Latex,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            "latex" => Ok(Format::Latex),
            other => Err(format!("unknown format '{other}' (expected json, text or latex)")),
        }
    }
}

pub fn render(r: &AnalysisReport, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(r).expect("report serializes") + "\n",
        Format::Text => render_text(r),
        Format::Latex => render_latex(r),
    }
}

/// Square bracket table over the basis, `*` below the diagonal.
fn bracket_grid(r: &AnalysisReport) -> Vec<Vec<String>> {
    let mut map: BTreeMap<(&str, &str), &str> = BTreeMap::new();
    for b in &r.brackets {
        map.insert((&b.left, &b.right), &b.value);
    }
    r.basis
        .iter()
        .enumerate()
        .map(|(i, x)| r.basis.iter().enumerate().map(|(j, y)| if j < i { "*".into() } else { map.get(&(x.as_str(), y.as_str())).copied().unwrap_or("0").to_string() }).collect())
        .collect()
}

fn render_text(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "codimension k = {}, length rho = {}", r.k, r.rho);
    let _ = writeln!(s, "\nweights: {}", r.weights.iter().map(|w| format!("[{}]={}", w.variable, w.weight)).collect::<Vec<_>>().join(", "));
    let _ = writeln!(s, "\ndefining equations:");
    for e in &r.equations_real {
        let _ = writeln!(s, "  {e}");
    }
    let _ = writeln!(s, "\nframe:");
    for f in &r.frame {
        let _ = writeln!(s, "  {} = {}{}", f.label, f.word, if f.self_conjugate { "  (self-conjugate)" } else { "" });
    }
    let _ = writeln!(s, "\nDarboux structure:");
    for d in &r.darboux {
        let _ = writeln!(s, "  {} = {}", d.label, d.rhs);
    }
    let _ = writeln!(s, "\ngroup parameters:");
    for p in &r.parameters {
        let _ = writeln!(s, "  {} (weight {}, {}) = {}", p.name, p.weight, p.reality, p.expression);
    }
    let _ = writeln!(s, "\nambiguity matrix (rows and columns {}):", r.ambiguity.labels.join(", "));
    for row in &r.ambiguity.matrix {
        let _ = writeln!(s, "  {}", row.join(" | "));
    }
    let _ = writeln!(s, "\nabsorption system S{}:", if r.alpha_real_before_absorption { " (a1 real, alpha = alphab)" } else { "" });
    for e in &r.system {
        let _ = writeln!(s, "  [{}] {} on {}^{}: {} + ({}) = 0", e.part, e.equation, e.wedge[0], e.wedge[1], e.torsion, e.absorption);
    }
    let _ = writeln!(s, "\nsolution: {}", r.solution.iter().map(|e| format!("{} = {}", e.unknown, e.value)).collect::<Vec<_>>().join(", "));
    let _ = writeln!(s, "a1 normalizable to a real parameter: {}", r.normalizable);
    let _ = writeln!(s, "\nfinal structure equations:");
    for e in &r.final_equations {
        let _ = writeln!(s, "  {} = {}", e.label, e.rhs);
    }
    let _ = writeln!(s, "\nLie brackets:");
    let grid = bracket_grid(r);
    let width = grid.iter().flatten().chain(r.basis.iter()).map(|c| c.chars().count()).max().unwrap_or(1);
    let _ = writeln!(s, "  {:w$} | {}", "", r.basis.iter().map(|b| format!("{b:width$}")).collect::<Vec<_>>().join(" "), w = width);
    for (b, row) in r.basis.iter().zip(&grid) {
        let _ = writeln!(s, "  {:w$} | {}", b, row.iter().map(|c| format!("{c:width$}")).collect::<Vec<_>>().join(" "), w = width);
    }
    let _ = writeln!(s, "\ngrading: {}", r.grading.iter().map(|g| format!("g[{}]: {}", g.degree, g.dim)).collect::<Vec<_>>().join(", "));
    let _ = writeln!(s, "verdict: {}, dim = {} ({})", if r.verdict.rigid { "rigid" } else { "not rigid" }, r.verdict.dim, r.verdict.dim_formula);
    if let Some(ft) = &r.full_torsion {
        let _ = writeln!(
            s,
            "full torsion: constant at solution {}, {} equations, {} unknowns, rank {}, unforced {:?}",
            ft.constant_at_solution, ft.equations, ft.unknowns, ft.rank, ft.unforced
        );
    }
    let _ = writeln!(s, "\naudits:");
    for a in &r.audits {
        let _ = writeln!(s, "  {} {}{}", if a.passed { "pass" } else { "FAIL" }, a.name, if a.detail.is_empty() { String::new() } else { format!(" ({})", a.detail) });
    }
    s
}

fn latex_name(n: &str) -> String {
    match n {
        "v_alpha" => r"{\sf v}^{\alpha}".into(),
        "v_alphab" => r"{\sf v}^{\overline\alpha}".into(),
        other => format!(r"{{\sf v}}^{{{}}}", other.trim_start_matches('v')),
    }
}

fn latex_value(v: &str, names: &[String]) -> String {
    let mut out = v.replace('*', " ");
    // longest names first so prefixes are not replaced early
    let mut sorted: Vec<&String> = names.iter().collect();
    sorted.sort_by_key(|n| std::cmp::Reverse(n.len()));
    for n in sorted {
        out = out.replace(n.as_str(), &latex_name(n));
    }
    out
}

fn render_latex(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let n = r.basis.len();
    let _ = writeln!(s, "% Lie brackets for k = {}", r.k);
    let _ = writeln!(s, "\\begin{{tabular}}{{c|{}}}", "c".repeat(n));
    let header: Vec<String> = r.basis.iter().map(|b| format!("${}$", latex_name(b))).collect();
    let _ = writeln!(s, " & {} \\\\", header.join(" & "));
    let _ = writeln!(s, "\\hline");
    for (b, row) in r.basis.iter().zip(bracket_grid(r)) {
        let cells: Vec<String> = row.iter().map(|c| if c == "*" { "$*$".into() } else { format!("${}$", latex_value(c, &r.basis)) }).collect();
        let _ = writeln!(s, "${}$ & {} \\\\", latex_name(b), cells.join(" & "));
    }
    let _ = writeln!(s, "\\end{{tabular}}");
    s
}
