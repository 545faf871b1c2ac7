//! Structure equations of the lifted coframe, the absorption subsystem `S`, its exact
//! solution, reduction to constant type, and the prolonged `{e}`-structure.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::ambiguity::{self, AmbiguityMatrix, Atom, ParamFraction, ParameterTable, Reality};
use crate::exactalg::{linalg, GaussianRational};
use crate::frame::{DarbouxStructure, Frame};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CartanError {
    #[error("torsion of d{row} on ({x},{y}) has nonzero weight")]
    TorsionWeight { row: String, x: String, y: String },
    #[error("Maurer-Cartan diagonal of {0} is not p*da1/a1 + q*dab1/ab1")]
    BadDiagonal(String),
    #[error("non-linear system: equation {0} has degree {1} in the unknowns")]
    NonLinear(usize, u32),
    #[error("Noether-position violated: the system leaves a {0}-dimensional solution family")]
    NotUnique(usize),
    #[error("the absorption system is inconsistent")]
    Inconsistent,
    #[error("wedge ({0},{1}) receives its leading term from more than one Darboux row")]
    NotUniqueWedge(String, String),
    #[error("reduction precondition failed: {0}")]
    Reduction(String),
}

/// `dΓ_r = (p_r α + q_r ᾱ) ∧ Γ_r + Σ_c δ_{rc} ∧ Γ_c + Σ_{x<y} T^r_{xy} Γ_x ∧ Γ_y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureEquations {
    pub diag: Vec<(i32, i32)>,
    /// Columns `c ≠ r` with a nonzero Maurer-Cartan entry `ω(r, c)`.
    pub delta_slots: Vec<BTreeSet<usize>>,
    /// Keys `(x, y)` with `x < y` in label order.
    pub torsion: Vec<BTreeMap<(usize, usize), ParamFraction>>,
}

impl StructureEquations {
    /// Coefficient of `Γ_x ∧ Γ_y` (either order) in `dΓ_r`.
    pub fn wedge(&self, r: usize, x: usize, y: usize) -> ParamFraction {
        if x == y {
            return ParamFraction::zero();
        }
        let (a, b, neg) = if x < y { (x, y, false) } else { (y, x, true) };
        let v = self.torsion[r].get(&(a, b)).cloned().unwrap_or_default();
        if neg {
            -&v
        } else {
            v
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum DiffKey {
    A1,
    A1b,
    Atom(Atom),
}

/// Formal differential `d e = Σ (∂e/∂x) dx` over `a1`, `ā1` and the atoms.
fn differential(e: &ParamFraction) -> BTreeMap<DiffKey, ParamFraction> {
    let mut out: BTreeMap<DiffKey, ParamFraction> = BTreeMap::new();
    for (m, c) in e.terms() {
        let mut push = |key: DiffKey, mono: ambiguity::PMono, k: i64| {
            let t = ParamFraction::from_term(mono, c * &GaussianRational::from_int(k));
            let slot = out.entry(key).or_default();
            *slot = &*slot + &t;
        };
        if m.e1 != 0 {
            let mut mm = m.clone();
            mm.e1 -= 1;
            push(DiffKey::A1, mm, m.e1 as i64);
        }
        if m.e1b != 0 {
            let mut mm = m.clone();
            mm.e1b -= 1;
            push(DiffKey::A1b, mm, m.e1b as i64);
        }
        for (a, n) in &m.atoms {
            let mut mm = m.clone();
            let slot = mm.atoms.get_mut(a).unwrap();
            *slot -= 1;
            if *slot == 0 {
                mm.atoms.remove(a);
            }
            push(DiffKey::Atom(a.clone()), mm, *n as i64);
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

pub fn compute_structure_equations(
    frame: &Frame,
    ds: &DarbouxStructure,
    g: &AmbiguityMatrix,
    ginv: &[Vec<ParamFraction>],
) -> Result<StructureEquations, CartanError> {
    let n = frame.len();
    // Ω_c in the lifted coframe
    let mut omega: Vec<BTreeMap<(usize, usize), ParamFraction>> = vec![BTreeMap::new(); n];
    for c in 0..n {
        for (&(a, b), d) in &ds.d[c] {
            for x in 0..n {
                if ginv[a][x].is_zero() && ginv[b][x].is_zero() {
                    continue;
                }
                for y in (x + 1)..n {
                    let t = &(&ginv[a][x] * &ginv[b][y]) - &(&ginv[a][y] * &ginv[b][x]);
                    if t.is_zero() {
                        continue;
                    }
                    let slot = omega[c].entry((x, y)).or_default();
                    *slot = &*slot + &t.scale(d);
                }
            }
        }
        omega[c].retain(|_, v| !v.is_zero());
    }
    let mut torsion = vec![BTreeMap::new(); n];
    for r in 0..n {
        let mut acc: BTreeMap<(usize, usize), ParamFraction> = BTreeMap::new();
        for c in 0..n {
            if g.g[r][c].is_zero() {
                continue;
            }
            for (k, v) in &omega[c] {
                let slot = acc.entry(*k).or_default();
                *slot = &*slot + &(&g.g[r][c] * v);
            }
        }
        acc.retain(|_, v| !v.is_zero());
        for ((x, y), v) in &acc {
            if !v.is_homogeneous_of(0) {
                return Err(CartanError::TorsionWeight {
                    row: frame.labels[r].name(),
                    x: frame.labels[*x].name(),
                    y: frame.labels[*y].name(),
                });
            }
        }
        torsion[r] = acc;
    }
    // Maurer-Cartan matrix ω = dg · g⁻¹
    let diffs: Vec<Vec<BTreeMap<DiffKey, ParamFraction>>> = g.g.iter().map(|row| row.iter().map(differential).collect()).collect();
    let mut delta_slots = vec![BTreeSet::new(); n];
    for r in 0..n {
        for c in 0..n {
            let mut w: BTreeMap<DiffKey, ParamFraction> = BTreeMap::new();
            for b in 0..n {
                if ginv[b][c].is_zero() {
                    continue;
                }
                for (k, v) in &diffs[r][b] {
                    let slot = w.entry(k.clone()).or_default();
                    *slot = &*slot + &(v * &ginv[b][c]);
                }
            }
            w.retain(|_, v| !v.is_zero());
            if c == r {
                let (p, q) = g.diag[r];
                let mut expect = BTreeMap::new();
                if p != 0 {
                    expect.insert(DiffKey::A1, ParamFraction::a1_pow(-1, 0).scale(&GaussianRational::from_int(p as i64)));
                }
                if q != 0 {
                    expect.insert(DiffKey::A1b, ParamFraction::a1_pow(0, -1).scale(&GaussianRational::from_int(q as i64)));
                }
                if w != expect {
                    return Err(CartanError::BadDiagonal(frame.labels[r].name()));
                }
            } else if !w.is_empty() {
                delta_slots[r].insert(c);
            }
        }
    }
    Ok(StructureEquations { diag: g.diag.clone(), delta_slots, torsion })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Part {
    One,
    Two,
}

/// One absorbed wedge coefficient set to zero: `W + A = 0`, where `W` is the torsion
/// on `Γ_x ∧ Γ_t` in `dΓ_row` and `A` comes from the substitution `α ↦ α + Σ t_s Γ_s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemEquation {
    pub part: Part,
    pub row: usize,
    pub x: usize,
    pub t: usize,
    pub torsion: ParamFraction,
    pub absorption: ParamFraction,
}

impl SystemEquation {
    pub fn lhs(&self) -> ParamFraction {
        &self.torsion + &self.absorption
    }
}

pub fn t_atom(s: usize, conj: bool) -> ParamFraction {
    ParamFraction::atom(Atom::T { label: s, conj, weight: 0 })
}

/// Contribution of `(pα + qᾱ) ∧ Γ_r` to the coefficient of `Γ_x ∧ Γ_y` (that order)
/// after `α ↦ α + Σ_s t_s Γ_s`, `ᾱ ↦ ᾱ + Σ_s t̄_s Γ_{s̄}`.
pub fn absorption_term(frame: &Frame, diag: (i32, i32), r: usize, x: usize, y: usize) -> ParamFraction {
    let (p, q) = (GaussianRational::from_int(diag.0 as i64), GaussianRational::from_int(diag.1 as i64));
    let shift = |s: usize| &t_atom(s, false).scale(&p) + &t_atom(frame.labels[s].partner, true).scale(&q);
    if x == r && y != r {
        -&shift(y)
    } else if y == r && x != r {
        shift(x)
    } else {
        ParamFraction::zero()
    }
}

/// The wedge `(x, t)` picked for a δ-slot `c` of row `r`: a Darboux wedge of `dσ_c` with
/// `len(x) = len(r)` and `len(t) = 1`. Wedges that occur in no other Darboux row come
/// first; among them the construction pair of `c` with `x = r` is preferred, then any
/// `x = r`, then the construction pair, then the first in label order.
fn pick_wedge(frame: &Frame, ds: &DarbouxStructure, r: usize, c: usize) -> Option<(usize, usize)> {
    let lr = frame.length(r);
    let mut cands: Vec<(usize, usize)> = Vec::new();
    for x in 0..frame.len() {
        for t in 0..2 {
            if x != t && frame.length(x) == lr && !ds.coeff(c, x, t).is_zero() {
                cands.push((x, t));
            }
        }
    }
    let unique: Vec<(usize, usize)> = cands.iter().copied().filter(|&(x, t)| wedge_contributors(ds, x, t) == 1).collect();
    let pool = if unique.is_empty() { cands } else { unique };
    let construction = frame.labels[c].word.map(|(t, p)| (p, t)).filter(|w| pool.contains(w));
    construction
        .filter(|w| w.0 == r)
        .or_else(|| pool.iter().copied().find(|w| w.0 == r))
        .or(construction)
        .or_else(|| pool.first().copied())
}

/// Number of Darboux rows containing the wedge `σ_x ∧ σ_t`.
pub fn wedge_contributors(ds: &DarbouxStructure, x: usize, t: usize) -> usize {
    (0..ds.d.len()).filter(|&c| !ds.coeff(c, x, t).is_zero()).count()
}

pub fn extract_system_s(frame: &Frame, ds: &DarbouxStructure, eqs: &StructureEquations) -> Result<Vec<SystemEquation>, CartanError> {
    let n = frame.len();
    let rho = frame.rho;
    let mut picks: Vec<(Part, usize, usize, usize)> = Vec::new();
    for r in 0..n {
        let lr = frame.length(r);
        if lr < rho {
            for &c in &eqs.delta_slots[r] {
                if frame.length(c) != lr + 1 {
                    continue;
                }
                if let Some((x, t)) = pick_wedge(frame, ds, r, c) {
                    picks.push((Part::One, r, x, t));
                }
            }
        } else {
            picks.push((Part::Two, r, r, 0));
            picks.push((Part::Two, r, r, 1));
        }
    }
    let mut seen: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    let mut out: Vec<SystemEquation> = Vec::new();
    for (part, r, x, t) in picks {
        if !seen.insert((r, x, t)) {
            continue;
        }
        if part == Part::One && wedge_contributors(ds, x, t) != 1 {
            return Err(CartanError::NotUniqueWedge(frame.labels[x].name(), frame.labels[t].name()));
        }
        let eq = SystemEquation {
            part,
            row: r,
            x,
            t,
            torsion: eqs.wedge(r, x, t),
            absorption: absorption_term(frame, eqs.diag[r], r, x, t),
        };
        // A self-conjugate row with p ≠ q does not pair its two wedges by conjugation,
        // so only literal conjugates are dropped.
        let conj = eq.lhs().conj();
        if out.iter().any(|o| o.lhs() == conj) {
            continue;
        }
        out.push(eq);
    }
    Ok(out)
}

/// Base unknown behind an atom: named parameter or absorption variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Unknown {
    Param(usize),
    T(usize),
}

/// Real coordinates of the unknowns: `(unknown, is_imaginary_part)`.
fn real_coords(atom: &Atom) -> (Unknown, Reality, bool) {
    match atom {
        Atom::P { index, conj, reality, .. } => (Unknown::Param(*index), *reality, *conj),
        Atom::T { label, conj, .. } => (Unknown::T(*label), Reality::Complex, *conj),
        Atom::D(_) => panic!("derivative symbols do not enter the absorption system"),
    }
}

/// A linear system in the real and imaginary parts of its unknowns.
#[derive(Clone, Debug)]
pub struct RealSystem {
    pub columns: Vec<(Unknown, bool)>,
    pub rows: Vec<Vec<BigRational>>,
    pub rhs: Vec<BigRational>,
}

fn q0() -> BigRational {
    BigRational::zero()
}

/// Dehomogenizes at `a1 = value` and splits every equation into real and imaginary rows.
pub fn realify(exprs: &[ParamFraction], value: &GaussianRational) -> Result<RealSystem, CartanError> {
    let mut evaluated = Vec::new();
    let mut columns: BTreeSet<(Unknown, bool)> = BTreeSet::new();
    for (i, e) in exprs.iter().enumerate() {
        let ev = e.evaluate_a1(value);
        for atoms in ev.keys() {
            let d: u32 = atoms.values().sum();
            if d > 1 {
                return Err(CartanError::NonLinear(i, d));
            }
            for a in atoms.keys() {
                let (u, reality, _) = real_coords(a);
                match reality {
                    Reality::Real => {
                        columns.insert((u, false));
                    }
                    Reality::Imag => {
                        columns.insert((u, true));
                    }
                    Reality::Complex => {
                        columns.insert((u, false));
                        columns.insert((u, true));
                    }
                }
            }
        }
        evaluated.push(ev);
    }
    let columns: Vec<(Unknown, bool)> = columns.into_iter().collect();
    let col = |k: (Unknown, bool)| columns.iter().position(|c| *c == k).unwrap();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for ev in &evaluated {
        let mut re = vec![q0(); columns.len()];
        let mut im = vec![q0(); columns.len()];
        let mut c0 = GaussianRational::zero();
        for (atoms, c) in ev {
            let Some((a, _)) = atoms.iter().next() else {
                c0 = c.clone();
                continue;
            };
            let (u, reality, conj) = real_coords(a);
            // atom = Σ β_k u_k
            let mut betas: Vec<((Unknown, bool), GaussianRational)> = Vec::new();
            match reality {
                Reality::Real => betas.push(((u, false), GaussianRational::one())),
                Reality::Imag => betas.push(((u, true), GaussianRational::i())),
                Reality::Complex => {
                    betas.push(((u, false), GaussianRational::one()));
                    betas.push(((u, true), if conj { -GaussianRational::i() } else { GaussianRational::i() }));
                }
            }
            for (k, beta) in betas {
                let cb = c * &beta;
                let j = col(k);
                re[j] = &re[j] + &cb.re;
                im[j] = &im[j] + &cb.im;
            }
        }
        rows.push(re);
        rhs.push(-c0.re.clone());
        rows.push(im);
        rhs.push(-c0.im);
    }
    Ok(RealSystem { columns, rows, rhs })
}

/// Exact values of the unknowns.
pub type SolutionMap = BTreeMap<Unknown, GaussianRational>;

pub fn solve_real(sys: &RealSystem) -> Result<SolutionMap, CartanError> {
    let n = sys.columns.len();
    if n == 0 {
        return Ok(BTreeMap::new());
    }
    match linalg::solve(&sys.rows, &sys.rhs, n) {
        linalg::Solution::Unique(x) => {
            let mut out: SolutionMap = BTreeMap::new();
            for ((u, imag), v) in sys.columns.iter().zip(x) {
                let e = out.entry(*u).or_insert_with(GaussianRational::zero);
                if *imag {
                    e.im = v;
                } else {
                    e.re = v;
                }
            }
            Ok(out)
        }
        linalg::Solution::Family(_, dim) => Err(CartanError::NotUnique(dim)),
        linalg::Solution::Inconsistent => Err(CartanError::Inconsistent),
    }
}

/// Phase exponents `d` of the parameter-free torsion `D^c_{ab} (a1/ā1)^d`, one per
/// nonzero Darboux entry. These are the residual exponents that survive reduction.
pub fn phase_exponents(ds: &DarbouxStructure, diag: &[(i32, i32)]) -> Vec<(usize, usize, usize, i32)> {
    let mut out = Vec::new();
    for (c, row) in ds.d.iter().enumerate() {
        for &(a, b) in row.keys() {
            out.push((c, a, b, diag[c].0 - diag[a].0 - diag[b].0));
        }
    }
    out
}

/// True when the parameter-free torsion already fixes the phase of `a1`. The
/// normalization `a1 = ā1` is then performed before absorption, which makes `α` real.
pub fn phase_normalizable(ds: &DarbouxStructure, diag: &[(i32, i32)]) -> bool {
    phase_exponents(ds, diag).iter().any(|e| e.3 != 0)
}

/// Solves `S` dehomogenized at `a1 = 1` and re-solves at a second value of `a1` (of unit
/// modulus, or real when `a1` is normalized). With `real_alpha` the reality conditions
/// `t_{s̄} = t̄_s` on the absorption unknowns are appended.
pub fn solve_system(frame: &Frame, system: &[SystemEquation], real_alpha: bool) -> Result<SolutionMap, CartanError> {
    let mut exprs: Vec<ParamFraction> = system.iter().map(SystemEquation::lhs).collect();
    if real_alpha {
        let labels: BTreeSet<usize> = exprs
            .iter()
            .flat_map(|e| e.terms().flat_map(|(m, _)| m.atoms.keys().cloned().collect::<Vec<_>>()))
            .filter_map(|a| if let Atom::T { label, .. } = a { Some(label) } else { None })
            .collect();
        for s in labels {
            let sb = frame.labels[s].partner;
            exprs.push(&t_atom(sb, false) - &t_atom(s, true));
        }
    }
    let sol = solve_real(&realify(&exprs, &GaussianRational::one())?)?;
    let other = if real_alpha { GaussianRational::from_int(2) } else { GaussianRational::new(ratio(3, 5), ratio(4, 5)) };
    solve_real(&realify(&exprs, &other)?)?;
    Ok(sol)
}

fn ratio(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// Substitutes the solution into an expression (unknowns without a value stay).
pub fn substitute_solution(e: &ParamFraction, sol: &SolutionMap) -> ParamFraction {
    e.substitute(&|a| {
        let (u, reality, conj) = match a {
            Atom::D(_) => return None,
            _ => real_coords(a),
        };
        let v = sol.get(&u)?;
        let v = match reality {
            Reality::Imag => GaussianRational::new(BigRational::zero(), v.im.clone()),
            Reality::Real => GaussianRational::real(v.re.clone()),
            Reality::Complex => v.clone(),
        };
        Some(ParamFraction::constant(if conj { v.conj() } else { v }))
    })
}

/// Sets every named parameter to zero.
pub fn vanish_params(e: &ParamFraction) -> ParamFraction {
    e.substitute(&|a| matches!(a, Atom::P { .. }).then(ParamFraction::zero))
}

/// A constant-type structure equation `dΓ_r = (pα + qᾱ) ∧ Γ_r + Σ c Γ_x ∧ Γ_y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinalEquation {
    pub row: usize,
    pub diag: (i32, i32),
    pub terms: BTreeMap<(usize, usize), GaussianRational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedStructure {
    /// `(row, x, y, c, d)`: torsion `c · (a1/ā1)^d` before normalization.
    pub residuals: Vec<(usize, usize, usize, GaussianRational, i32)>,
    pub normalizable: bool,
    /// 1 when `a1` normalizes to a real parameter, 2 otherwise.
    pub group_dim: usize,
    pub equations: Vec<FinalEquation>,
}

/// Kills all parameters (after checking this is forced by the solved system and the
/// first-order lemma), reads off the residual `(a1/ā1)^d` factors, and normalizes
/// `a1` to be real when some `d ≠ 0`.
pub fn reduce_structure(eqs: &StructureEquations, sol: &SolutionMap, table: &ParameterTable) -> Result<ReducedStructure, CartanError> {
    if sol.values().any(|v| !v.is_zero()) {
        return Err(CartanError::Reduction("solution of S is not identically zero".into()));
    }
    if !table.params.is_empty() {
        let forced = ambiguity::first_order_forcing(table)
            .ok_or_else(|| CartanError::Reduction("first-order parameters do not force all first derivatives of a1 to vanish".into()))?;
        let solved: BTreeSet<usize> = sol.keys().filter_map(|u| if let Unknown::Param(i) = u { Some(*i) } else { None }).collect();
        if !forced.iter().all(|i| solved.contains(i)) {
            return Err(CartanError::Reduction("S does not pin the first-order parameters".into()));
        }
        for p in &table.params {
            if !ambiguity::vanish_substitution(&p.expr).is_zero() {
                return Err(CartanError::Reduction(format!("a{} survives the vanishing of derivatives", p.index)));
            }
        }
    }
    let mut residuals = Vec::new();
    let mut equations = Vec::new();
    for (r, row) in eqs.torsion.iter().enumerate() {
        let mut terms = BTreeMap::new();
        for (&(x, y), v) in row {
            let red = vanish_params(v);
            if red.is_zero() {
                continue;
            }
            let (c, e1, e1b) = red
                .as_a1_monomial()
                .ok_or_else(|| CartanError::Reduction(format!("torsion {} is not of constant type", red.render())))?;
            if e1 + e1b != 0 {
                return Err(CartanError::Reduction("residual torsion has nonzero weight".into()));
            }
            residuals.push((r, x, y, c.clone(), e1));
            terms.insert((x, y), c);
        }
        equations.push(FinalEquation { row: r, diag: eqs.diag[r], terms });
    }
    let normalizable = residuals.iter().any(|r| r.4 != 0);
    Ok(ReducedStructure { residuals, normalizable, group_dim: if normalizable { 1 } else { 2 }, equations })
}

/// The prolonged `{e}`-structure: the `2+k` lifted forms plus `α` (and `ᾱ`), with
/// `dα = 0` appended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinalStructure {
    pub n_frame: usize,
    pub group_dim: usize,
    pub equations: Vec<FinalEquation>,
}

impl FinalStructure {
    pub fn total_forms(&self) -> usize {
        self.n_frame + self.group_dim
    }
}

pub fn prolong(r: &ReducedStructure) -> FinalStructure {
    FinalStructure { n_frame: r.equations.len(), group_dim: r.group_dim, equations: r.equations.clone() }
}

/// Cross-check of the subsystem against all essential torsion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullTorsionReport {
    /// Every torsion not absorbable by a δ-slot is of constant type at the solution.
    pub constant_at_solution: bool,
    /// Number of linearized equations, unknown real coordinates, and rank.
    pub equations: usize,
    pub unknowns: usize,
    pub rank: usize,
    /// The linearized full system forces every parameter coordinate to zero.
    pub forces_all_params: bool,
    /// Parameters left free by the linearized full system.
    pub unforced: Vec<usize>,
}

/// Linear part (degree exactly one in the named parameters) of an expression.
fn linear_part(e: &ParamFraction) -> ParamFraction {
    let mut out = ParamFraction::zero();
    for (m, c) in e.terms() {
        let deg: u32 = m.atoms.iter().filter(|(a, _)| matches!(a, Atom::P { .. })).map(|(_, n)| *n).sum();
        if deg == 1 {
            out = &out + &ParamFraction::from_term(m.clone(), c.clone());
        }
    }
    out
}

pub fn full_torsion_check(frame: &Frame, eqs: &StructureEquations, sol: &SolutionMap) -> Result<FullTorsionReport, CartanError> {
    let n = frame.len();
    let mut constant_at_solution = true;
    let mut exprs = Vec::new();
    for r in 0..n {
        for x in 0..n {
            for y in (x + 1)..n {
                if eqs.delta_slots[r].contains(&x) || eqs.delta_slots[r].contains(&y) {
                    continue;
                }
                let tor = eqs.wedge(r, x, y);
                let at = vanish_params(&substitute_solution(&tor, sol));
                if !at.is_zero() && at.as_a1_monomial().is_none() {
                    constant_at_solution = false;
                }
                let lin = &linear_part(&tor) + &absorption_term(frame, eqs.diag[r], r, x, y);
                if !lin.is_zero() {
                    exprs.push(lin);
                }
            }
        }
    }
    let sys = realify(&exprs, &GaussianRational::one())?;
    let rank = linalg::rank(&sys.rows);
    let mut unforced = BTreeSet::new();
    for (j, (u, _)) in sys.columns.iter().enumerate() {
        let Unknown::Param(index) = u else {
            continue;
        };
        let mut ext = sys.rows.clone();
        let mut unit = vec![q0(); sys.columns.len()];
        unit[j] = BigRational::one();
        ext.push(unit);
        if linalg::rank(&ext) != rank {
            unforced.insert(*index);
        }
    }
    Ok(FullTorsionReport {
        constant_at_solution,
        equations: exprs.len(),
        unknowns: sys.columns.len(),
        rank,
        forces_all_params: unforced.is_empty(),
        unforced: unforced.into_iter().collect(),
    })
}
