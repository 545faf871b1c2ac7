//! Construction of the model `M_k`: the quotient bases `N_j`, weights, the real
//! defining polynomials `Φ_j` and the complex graph functions `Θ_j`.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::exactalg::{linalg, GaussianRational, Monomial, VariableTable, WPoly};
use crate::freelie::FreeLieProfile;

pub type RatMatrix = Vec<Vec<BigRational>>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("codimension {0} is out of scope: the analysis needs length at least 3 (k >= 2)")]
    OutOfScope(usize),
    #[error("invalid A-matrix override: {0}")]
    BadOverride(String),
    #[error("A-matrix for weight {0} does not have full row rank")]
    RankDeficient(usize),
    #[error("quotient basis for weight {weight} has {found} elements, expected {expected}")]
    QuotientSize { weight: usize, found: usize, expected: usize },
    #[error("graph solution for w{0} leaves a nonzero residual")]
    GraphResidual(usize),
}

#[derive(Clone, Debug)]
pub struct Model {
    pub k: usize,
    pub profile: FreeLieProfile,
    pub vars: Arc<VariableTable>,
    /// Weight of `w_j` at index `j-1`.
    pub weights: Vec<u32>,
    /// `n_bases[j-2]` is the basis `N_j`, j = 2..=ρ.
    pub n_bases: Vec<Vec<WPoly>>,
    /// `a[j-2]` is `A_j`.
    pub a: Vec<RatMatrix>,
    /// `Im w_j = Φ_j`.
    pub phi: Vec<WPoly>,
    /// `w_j = Θ_j(z, z̄, w̄)` on the model.
    pub theta: Vec<WPoly>,
}

impl Model {
    pub fn rho(&self) -> usize {
        self.profile.rho
    }

    /// Complex defining equations `w_j - w̄_j = 2i Φ_j`, rendered.
    pub fn complex_equations(&self) -> Vec<String> {
        self.phi
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let rhs = p.scale(&GaussianRational::from_parts(0, 2));
                format!("w{0} - wb{0} = {1}", j + 1, rhs.render())
            })
            .collect()
    }

    pub fn real_equations(&self) -> Vec<String> {
        self.phi.iter().enumerate().map(|(j, p)| format!("Im w{} = {}", j + 1, p.render())).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum ColKind {
    Re,
    Im,
    SelfConj,
}

#[derive(Clone, Debug)]
struct Column {
    mono: Monomial,
    kind: ColKind,
    u_weight: u32,
    imbalance: u16,
}

impl Column {
    fn poly(&self, table: &Arc<VariableTable>) -> WPoly {
        let m = WPoly::from_term(table, self.mono.clone(), GaussianRational::one());
        match self.kind {
            ColKind::SelfConj => m,
            ColKind::Re => &m + &m.conj(),
            ColKind::Im => (&m - &m.conj()).scale(&GaussianRational::i()),
        }
    }
}

fn monomials_of_weight(table: &Arc<VariableTable>, vars: &[usize], weight: u32) -> Vec<Monomial> {
    fn rec(
        table: &VariableTable,
        vars: &[usize],
        idx: usize,
        left: u32,
        cur: &mut Vec<u16>,
        out: &mut Vec<Monomial>,
    ) {
        if left == 0 {
            out.push(Monomial::from_exps(table, cur.clone()));
            return;
        }
        if idx == vars.len() {
            return;
        }
        let v = vars[idx];
        let w = table.weight(v);
        let mut e = 0;
        while e * w <= left {
            cur[v] = e as u16;
            rec(table, vars, idx + 1, left - e * w, cur, out);
            e += 1;
        }
        cur[v] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0u16; table.len()];
    rec(table, vars, 0, weight, &mut cur, &mut out);
    out
}

fn real_columns(table: &Arc<VariableTable>, j: u32) -> Vec<Column> {
    let mut vars = vec![table.z(), table.zbar()];
    vars.extend((1..=table.n_w()).map(|i| table.u(i)));
    let mut cols = Vec::new();
    for m in monomials_of_weight(table, &vars, j) {
        let (dz, dzb) = (m.exp(table.z()), m.exp(table.zbar()));
        let u_weight = m.weight() - dz as u32 - dzb as u32;
        let imbalance = dz.abs_diff(dzb);
        if dz > dzb {
            cols.push(Column { mono: m.clone(), kind: ColKind::Re, u_weight, imbalance });
            cols.push(Column { mono: m, kind: ColKind::Im, u_weight, imbalance });
        } else if dz == dzb {
            cols.push(Column { mono: m, kind: ColKind::SelfConj, u_weight, imbalance });
        }
    }
    cols
}

/// Coordinates of a real-valued polynomial against the real basis columns.
fn real_coords(p: &WPoly, cols: &[Column]) -> Vec<BigRational> {
    cols.iter()
        .map(|c| {
            let a = p.coeff(&c.mono);
            match c.kind {
                ColKind::Re | ColKind::SelfConj => a.re,
                ColKind::Im => a.im,
            }
        })
        .collect()
}

/// Real parts of restricted weight-`j` holomorphic monomials in `z, w_•` (two per monomial).
fn pluriharmonic_rows(table: &Arc<VariableTable>, phis: &[WPoly], j: u32) -> Vec<WPoly> {
    let mut hvars = vec![table.z()];
    hvars.extend((1..=table.n_w()).map(|i| table.w(i)));
    let mut bind = HashMap::new();
    for (i, phi) in phis.iter().enumerate() {
        let u = WPoly::var(table, table.u(i + 1));
        bind.insert(table.w(i + 1), &u + &phi.scale(&GaussianRational::i()));
    }
    let mut rows = Vec::new();
    for m in monomials_of_weight(table, &hvars, j) {
        let h = WPoly::from_term(table, m, GaussianRational::one());
        let hr = h.substitute(&bind, table).expect("bindings cover the table");
        rows.push(&hr + &hr.conj());
        rows.push((&hr - &hr.conj()).scale(&GaussianRational::i()));
    }
    rows
}

/// Canonical basis of real weight-`j` polynomials in `z, z̄, u_•` modulo restrictions of
/// pluriharmonic polynomials to the partial model `Im w_i = Φ_i` (weights below `j`).
///
/// Pivots of the pluriharmonic span are taken preferentially on `u`-heavy and unbalanced
/// monomials, so the complement consists of the most balanced pure `z, z̄` monomials.
pub fn enumerate_nj(j: u32, table: &Arc<VariableTable>, phis: &[WPoly]) -> Vec<WPoly> {
    let mut cols = real_columns(table, j);
    cols.sort_by(|a, b| {
        b.u_weight
            .cmp(&a.u_weight)
            .then(b.imbalance.cmp(&a.imbalance))
            .then(b.mono.cmp(&a.mono))
            .then(a.kind.cmp(&b.kind))
    });
    let rows = pluriharmonic_rows(table, phis, j);
    let mut mat: Vec<Vec<BigRational>> = rows.iter().map(|r| real_coords(r, &cols)).collect();
    let pivots = linalg::rref(&mut mat);
    let mut free: Vec<&Column> =
        cols.iter().enumerate().filter(|(i, _)| !pivots.contains(i)).map(|(_, c)| c).collect();
    free.sort_by(|a, b| {
        a.u_weight
            .cmp(&b.u_weight)
            .then(b.imbalance.cmp(&a.imbalance))
            .then(b.mono.cmp(&a.mono))
            .then(a.kind.cmp(&b.kind))
    });
    free.into_iter().map(|c| c.poly(table)).collect()
}

/// True when the real polynomial `p` lies in the restricted pluriharmonic span.
pub fn is_restricted_pluriharmonic(p: &WPoly, table: &Arc<VariableTable>, phis: &[WPoly], j: u32) -> bool {
    let cols = real_columns(table, j);
    let rows = pluriharmonic_rows(table, phis, j);
    let mut mat: Vec<Vec<BigRational>> = rows.iter().map(|r| real_coords(r, &cols)).collect();
    let base = linalg::rank(&mat);
    mat.push(real_coords(p, &cols));
    linalg::rank(&mat) == base
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn identity_rows(rows: usize, cols: usize) -> RatMatrix {
    (0..rows).map(|r| (0..cols).map(|c| if r == c { q(1) } else { q(0) }).collect()).collect()
}

/// Default `A_j`: identity (first rows at the top weight), with the sign pattern that
/// reproduces the printed presentation of `M_6`.
pub fn default_a(k: usize, j: usize, rows: usize, cols: usize) -> RatMatrix {
    let mut a = identity_rows(rows, cols);
    if k == 6 && (j == 3 || j == 4) {
        a[1][1] = q(-1);
    }
    a
}

/// Parses `[[["1","0"],["0","-1/2"]], …]`: one matrix per weight level 2..=ρ,
/// entries as JSON integers or rational strings.
pub fn parse_a_matrices(json: &str) -> Result<Vec<RatMatrix>, ModelError> {
    let v: serde_json::Value = serde_json::from_str(json).map_err(|e| ModelError::BadOverride(e.to_string()))?;
    let bad = |what: &str| ModelError::BadOverride(what.to_string());
    let mats = v.as_array().ok_or_else(|| bad("top level must be an array of matrices"))?;
    mats.iter()
        .map(|m| {
            m.as_array()
                .ok_or_else(|| bad("matrix must be an array of rows"))?
                .iter()
                .map(|row| {
                    row.as_array()
                        .ok_or_else(|| bad("row must be an array"))?
                        .iter()
                        .map(|e| match e {
                            serde_json::Value::Number(n) => n
                                .as_i64()
                                .map(q)
                                .ok_or_else(|| bad("numeric entries must be integers; use strings for rationals")),
                            serde_json::Value::String(s) => {
                                s.trim().parse::<BigRational>().map_err(|_| bad(&format!("bad rational {s:?}")))
                            }
                            _ => Err(bad("entries must be integers or strings")),
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect()
}

pub fn build_model(k: usize, a_override: Option<&[RatMatrix]>) -> Result<Model, ModelError> {
    if k < 2 {
        return Err(ModelError::OutOfScope(k));
    }
    let profile = FreeLieProfile::for_codim(k);
    let rho = profile.rho;
    if let Some(ov) = a_override {
        if ov.len() != rho - 1 {
            return Err(ModelError::BadOverride(format!(
                "expected {} matrices (weights 2..={rho}), got {}",
                rho - 1,
                ov.len()
            )));
        }
    }
    let mut weights: Vec<u32> = Vec::new();
    let mut phis: Vec<WPoly> = Vec::new();
    let mut n_bases = Vec::new();
    let mut a_list = Vec::new();
    for j in 2..=rho {
        let table = Arc::new(VariableTable::new(&weights));
        let local: Vec<WPoly> = phis.iter().map(|p| p.embed(&table)).collect();
        let basis = enumerate_nj(j as u32, &table, &local);
        let expected = profile.m[j - 1] as usize;
        if basis.len() != expected {
            return Err(ModelError::QuotientSize { weight: j, found: basis.len(), expected });
        }
        let rows = profile.mult(j) as usize;
        let a = match a_override {
            Some(ov) => ov[j - 2].clone(),
            None => default_a(k, j, rows, basis.len()),
        };
        if a.len() != rows || a.iter().any(|r| r.len() != basis.len()) {
            return Err(ModelError::BadOverride(format!(
                "A_{j} must be {rows}x{}, got {}x{}",
                basis.len(),
                a.len(),
                a.first().map(|r| r.len()).unwrap_or(0)
            )));
        }
        if linalg::rank(&a) != rows {
            return Err(ModelError::RankDeficient(j));
        }
        for row in &a {
            let mut phi = WPoly::zero(&table);
            for (c, b) in row.iter().zip(&basis) {
                if !c.is_zero() {
                    phi = &phi + &b.scale(&GaussianRational::real(c.clone()));
                }
            }
            weights.push(j as u32);
            phis.push(phi);
        }
        n_bases.push(basis);
        a_list.push(a);
    }
    let vars = Arc::new(VariableTable::new(&weights));
    let phis: Vec<WPoly> = phis.iter().map(|p| p.embed(&vars)).collect();
    let n_bases: Vec<Vec<WPoly>> =
        n_bases.into_iter().map(|b| b.into_iter().map(|p| p.embed(&vars)).collect()).collect();
    let theta = solve_graph(&vars, &phis)?;
    Ok(Model { k, profile, vars, weights, n_bases, a: a_list, phi: phis, theta })
}

/// `Θ_j = w̄_j + 2i Φ_j(z, z̄, u_i ↦ (Θ_i + w̄_i)/2)`, in increasing weight order,
/// with the residual check against `w = u + iΦ`, `w̄ = u − iΦ`.
pub fn solve_graph(vars: &Arc<VariableTable>, phis: &[WPoly]) -> Result<Vec<WPoly>, ModelError> {
    let half = GaussianRational::from_ratio(1, 2);
    let two_i = GaussianRational::from_parts(0, 2);
    let mut theta: Vec<WPoly> = Vec::new();
    for (j0, phi) in phis.iter().enumerate() {
        let mut bind = HashMap::new();
        for (i0, th) in theta.iter().enumerate() {
            if phi.depends_on(vars.u(i0 + 1)) {
                let wb = WPoly::var(vars, vars.wbar(i0 + 1));
                bind.insert(vars.u(i0 + 1), (th + &wb).scale(&half));
            }
        }
        let sub = phi.substitute(&bind, vars).expect("same table");
        let th = &WPoly::var(vars, vars.wbar(j0 + 1)) + &sub.scale(&two_i);
        theta.push(th);
    }
    let mut back = HashMap::new();
    for (i0, phi) in phis.iter().enumerate() {
        let u = WPoly::var(vars, vars.u(i0 + 1));
        back.insert(vars.wbar(i0 + 1), &u - &phi.scale(&GaussianRational::i()));
    }
    for (j0, th) in theta.iter().enumerate() {
        let lhs = th.substitute(&back, vars).expect("same table");
        let rhs = &WPoly::var(vars, vars.u(j0 + 1)) + &phis[j0].scale(&GaussianRational::i());
        if lhs != rhs {
            return Err(ModelError::GraphResidual(j0 + 1));
        }
    }
    Ok(theta)
}

/// `(k_2, …, k_ρ)`: number of defining equations of each weight.
pub fn hormander_data(m: &Model) -> Vec<u64> {
    (2..=m.rho()).map(|j| m.weights.iter().filter(|&&w| w as usize == j).count() as u64).collect()
}

/// True when every entry of the matrix is a nonnegative power-free ±1/0 identity pattern;
/// used by reports to flag overridden models.
pub fn is_signed_identity(a: &RatMatrix) -> bool {
    a.iter().enumerate().all(|(r, row)| {
        row.iter().enumerate().all(|(c, x)| if r == c { x.abs().is_one() } else { x.is_zero() })
    })
}
