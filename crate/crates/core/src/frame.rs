//! The initial frame of the model: iterated brackets of the CR generator `L` and its
//! conjugate, their constant bracket table, and the dual coframe's structure.
//!
//! Fields live intrinsically on the model in the chart `(z, z̄, u_1, …, u_k)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::exactalg::{linalg, GaussianRational, VariableTable, WPoly, WeightClass};
use crate::model::Model;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    #[error("model is not totally nondegenerate: length {length} yields {found} independent fields, expected {expected}")]
    NotTotallyNondegenerate { length: usize, found: usize, expected: usize },
    #[error("bracket [{0}, {1}] does not re-expand in the frame with constant coefficients")]
    NotClosed(String, String),
    #[error("field {0} is not weighted homogeneous of its length")]
    NotHomogeneous(String),
}

/// A vector field `Σ X^i ∂/∂x_i` over the intrinsic chart `(z, z̄, u_1, …, u_k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    pub coeffs: Vec<WPoly>,
}

/// A field in ambient coordinates, keyed by variable index in the model's table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbientField {
    pub coeffs: BTreeMap<usize, WPoly>,
}

/// Intrinsic coordinate chart: variable indices of `z, z̄, u_1, …, u_k`.
#[derive(Clone, Debug)]
pub struct Chart {
    pub vars: Arc<VariableTable>,
    pub coords: Vec<usize>,
}

impl Chart {
    pub fn new(vars: &Arc<VariableTable>) -> Self {
        let mut coords = vec![vars.z(), vars.zbar()];
        coords.extend((1..=vars.n_w()).map(|j| vars.u(j)));
        Chart { vars: vars.clone(), coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn weight(&self, i: usize) -> u32 {
        self.vars.weight(self.coords[i])
    }

    pub fn zero_field(&self) -> VectorField {
        VectorField { coeffs: vec![WPoly::zero(&self.vars); self.dim()] }
    }

    /// `X(f)`.
    pub fn apply(&self, x: &VectorField, f: &WPoly) -> WPoly {
        let mut out = WPoly::zero(&self.vars);
        for (c, &v) in x.coeffs.iter().zip(&self.coords) {
            if c.is_zero() || !f.depends_on(v) {
                continue;
            }
            out = &out + &(c * &f.derivative(v));
        }
        out
    }

    pub fn bracket(&self, x: &VectorField, y: &VectorField) -> VectorField {
        let coeffs = (0..self.dim())
            .map(|i| &self.apply(x, &y.coeffs[i]) - &self.apply(y, &x.coeffs[i]))
            .collect();
        VectorField { coeffs }
    }

    /// Conjugate field: swaps the `∂z`, `∂z̄` slots and conjugates every coefficient.
    pub fn conj(&self, x: &VectorField) -> VectorField {
        let mut coeffs: Vec<WPoly> = x.coeffs.iter().map(WPoly::conj).collect();
        coeffs.swap(0, 1);
        VectorField { coeffs }
    }

    /// Chart slots whose coefficient is a constant for a weight −ℓ field.
    pub fn leading_slots(&self, length: usize) -> Vec<usize> {
        if length == 1 {
            return vec![0, 1];
        }
        (2..self.dim()).filter(|&i| self.weight(i) as usize == length).collect()
    }

    /// True when every coefficient of `∂x_i` is homogeneous of weight `[x_i] − ℓ`
    /// (and zero where that weight is negative).
    pub fn is_homogeneous(&self, x: &VectorField, length: usize) -> bool {
        x.coeffs.iter().enumerate().all(|(i, c)| {
            let w = self.weight(i) as i64 - length as i64;
            if w < 0 {
                c.is_zero()
            } else {
                c.is_homogeneous_of(w as u32)
            }
        })
    }
}

impl VectorField {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(WPoly::is_zero)
    }

    pub fn scale(&self, c: &GaussianRational) -> VectorField {
        VectorField { coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect() }
    }

    pub fn add(&self, o: &VectorField) -> VectorField {
        VectorField { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &VectorField) -> VectorField {
        VectorField { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect() }
    }
}

/// The ambient CR generator `∂/∂z + Σ_j (∂Θ_j/∂z) ∂/∂w_j`, in coordinates `(z, z̄, w̄)`.
pub fn generator_field(m: &Model) -> AmbientField {
    let v = &m.vars;
    let mut coeffs = BTreeMap::new();
    coeffs.insert(v.z(), WPoly::one(v));
    for (j, th) in m.theta.iter().enumerate() {
        let c = th.derivative(v.z());
        if !c.is_zero() {
            coeffs.insert(v.w(j + 1), c);
        }
    }
    AmbientField { coeffs }
}

/// Projects an ambient tangent field onto the chart `(z, z̄, u)`: `∂/∂w_j` contributes
/// `½ ∂/∂u_j`, `∂/∂w̄_j` contributes `½ ∂/∂u_j`, and coefficients are restricted to the
/// model through `w̄_j = u_j − iΦ_j`, `w_j = u_j + iΦ_j`.
pub fn intrinsicize(x: &AmbientField, m: &Model) -> VectorField {
    let v = &m.vars;
    let chart = Chart::new(v);
    let mut bind = HashMap::new();
    for (j, phi) in m.phi.iter().enumerate() {
        let u = WPoly::var(v, v.u(j + 1));
        let iphi = phi.scale(&GaussianRational::i());
        bind.insert(v.w(j + 1), &u + &iphi);
        bind.insert(v.wbar(j + 1), &u - &iphi);
    }
    let restrict = |p: &WPoly| p.substitute(&bind, v).expect("same table");
    let half = GaussianRational::from_ratio(1, 2);
    let mut out = chart.zero_field();
    for (&var, c) in &x.coeffs {
        let c = restrict(c);
        if var == v.z() {
            out.coeffs[0] = &out.coeffs[0] + &c;
        } else if var == v.zbar() {
            out.coeffs[1] = &out.coeffs[1] + &c;
        } else {
            let j = v.var(var).index;
            out.coeffs[1 + j] = &out.coeffs[1 + j] + &c.scale(&half);
        }
    }
    out
}

/// Intrinsic CR generator `L` on the model.
pub fn cr_generator(m: &Model) -> VectorField {
    intrinsicize(&generator_field(m), m)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameLabel {
    /// 0-based position in label order.
    pub index: usize,
    pub length: usize,
    /// `(t, p)`: the field is `μ·[L_t, L_p]` with `t ∈ {0, 1}`; `None` for `L`, `L̄`.
    pub word: Option<(usize, usize)>,
    pub mu: GaussianRational,
    /// Index of the conjugate field (itself when self-conjugate).
    pub partner: usize,
}

impl FrameLabel {
    pub fn is_self_conjugate(&self) -> bool {
        self.partner == self.index
    }

    /// `L_{ℓ,i}` with 1-based `i` running over all labels.
    pub fn name(&self) -> String {
        format!("L_{{{},{}}}", self.length, self.index + 1)
    }
}

/// Bracket table `[L_a, L_b] = Σ_c C^c_{ab} L_c`, stored as `c ↦ C`.
pub type BracketTable = Vec<Vec<BTreeMap<usize, GaussianRational>>>;

#[derive(Clone, Debug)]
pub struct Frame {
    pub chart: Chart,
    pub labels: Vec<FrameLabel>,
    pub fields: Vec<VectorField>,
    pub brackets: BracketTable,
    pub rho: usize,
}

impl Frame {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn length(&self, a: usize) -> usize {
        self.labels[a].length
    }

    /// Lengths descending; within a length, self-conjugate fields first, then the rest
    /// in label order.
    pub fn display_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&a| (std::cmp::Reverse(self.labels[a].length), !self.labels[a].is_self_conjugate(), a));
        order
    }

    /// Human word for a label, e.g. `i[L_{1,1},L_{1,2}]`.
    pub fn word_string(&self, a: usize) -> String {
        let l = &self.labels[a];
        match l.word {
            None => {
                if a == 0 {
                    "L".into()
                } else {
                    "conj(L)".into()
                }
            }
            Some((t, p)) => {
                let inner = format!("[{},{}]", self.labels[t].name(), self.labels[p].name());
                if l.mu.is_one() {
                    inner
                } else if l.mu == -GaussianRational::one() {
                    format!("-{inner}")
                } else if l.mu == GaussianRational::i() {
                    format!("i{inner}")
                } else {
                    format!("({}){inner}", l.mu)
                }
            }
        }
    }

    pub fn bracket_constant(&self, a: usize, b: usize, c: usize) -> GaussianRational {
        self.brackets[a][b].get(&c).cloned().unwrap_or_else(GaussianRational::zero)
    }
}

/// Constant coefficients on the leading slots; `None` if any of them is not constant.
fn leading_vector(x: &VectorField, slots: &[usize]) -> Option<Vec<GaussianRational>> {
    slots
        .iter()
        .map(|&s| if x.coeffs[s].is_zero() { Some(GaussianRational::zero()) } else { x.coeffs[s].as_constant() })
        .collect()
}

/// `conj(B) = λB` for a constant `λ`, if such a constant exists.
fn conj_ratio(chart: &Chart, b: &VectorField) -> Option<GaussianRational> {
    let cb = chart.conj(b);
    let i = b.coeffs.iter().position(|c| !c.is_zero())?;
    let (m, c) = b.coeffs[i].leading()?;
    let lam = &cb.coeffs[i].coeff(m) / c;
    if cb == b.scale(&lam) {
        Some(lam)
    } else {
        None
    }
}

/// Expresses `x` (homogeneous of weight −`length`) in the frame fields of that length.
fn express(chart: &Chart, fields: &[VectorField], labels: &[FrameLabel], x: &VectorField, length: usize, rho: usize) -> Option<BTreeMap<usize, GaussianRational>> {
    if length > rho {
        return if x.is_zero() { Some(BTreeMap::new()) } else { None };
    }
    let slots = chart.leading_slots(length);
    let members: Vec<usize> = labels.iter().filter(|l| l.length == length).map(|l| l.index).collect();
    let target = leading_vector(x, &slots)?;
    let basis: Vec<Vec<GaussianRational>> = members.iter().map(|&c| leading_vector(&fields[c], &slots).expect("frame fields have constant leading block")).collect();
    let coeffs = if basis.is_empty() {
        if target.iter().all(Zero::is_zero) {
            vec![]
        } else {
            return None;
        }
    } else {
        linalg::express_in(&basis, &target)?
    };
    let mut residual = x.clone();
    let mut out = BTreeMap::new();
    for (&c, a) in members.iter().zip(coeffs) {
        if !a.is_zero() {
            residual = residual.sub(&fields[c].scale(&a));
            out.insert(c, a);
        }
    }
    if residual.is_zero() {
        Some(out)
    } else {
        None
    }
}

/// Greedy construction: for each length ℓ = 2..=ρ, candidates `[L_t, L_p]` with `t`
/// running over `L`, `L̄` and `p` over the length ℓ−1 labels in order. A candidate is
/// kept when it raises the rank of the length-ℓ leading block. A kept field whose
/// conjugate is a constant multiple of itself is rephased to be conjugation-invariant;
/// otherwise its conjugate is added right after it.
pub fn build_initial_frame(m: &Model) -> Result<Frame, FrameError> {
    let chart = Chart::new(&m.vars);
    let rho = m.rho();
    let l = cr_generator(m);
    let lb = chart.conj(&l);
    let one = GaussianRational::one();
    let mut labels = vec![
        FrameLabel { index: 0, length: 1, word: None, mu: one.clone(), partner: 1 },
        FrameLabel { index: 1, length: 1, word: None, mu: one.clone(), partner: 0 },
    ];
    let mut fields = vec![l, lb];
    for length in 2..=rho {
        let expected = if length < rho { m.profile.m[length - 1] as usize } else { *m.profile.mults.last().unwrap() as usize };
        let slots = chart.leading_slots(length);
        let parents: Vec<usize> = labels.iter().filter(|x| x.length == length - 1).map(|x| x.index).collect();
        let mut block: Vec<Vec<GaussianRational>> = Vec::new();
        let mut count = 0;
        'search: for t in 0..2 {
            for &p in &parents {
                if count == expected {
                    break 'search;
                }
                let b = chart.bracket(&fields[t], &fields[p]);
                if b.is_zero() {
                    continue;
                }
                if !chart.is_homogeneous(&b, length) {
                    return Err(FrameError::NotHomogeneous(format!("[{},{}]", labels[t].name(), labels[p].name())));
                }
                let Some(lead) = leading_vector(&b, &slots) else { continue };
                let mut trial = block.clone();
                trial.push(lead.clone());
                if linalg::rank(&trial) == block.len() {
                    continue;
                }
                block = trial;
                let idx = labels.len();
                match conj_ratio(&chart, &b) {
                    Some(lam) => {
                        let mu = if lam.is_one() {
                            one.clone()
                        } else if lam == -one.clone() {
                            GaussianRational::i()
                        } else {
                            &one + &lam
                        };
                        fields.push(b.scale(&mu));
                        labels.push(FrameLabel { index: idx, length, word: Some((t, p)), mu, partner: idx });
                        count += 1;
                    }
                    None => {
                        fields.push(b.clone());
                        labels.push(FrameLabel { index: idx, length, word: Some((t, p)), mu: one.clone(), partner: idx });
                        count += 1;
                        if count < expected {
                            let cb = chart.conj(&b);
                            let clead = leading_vector(&cb, &slots).expect("conjugate keeps the constant block");
                            let mut trial = block.clone();
                            trial.push(clead);
                            if linalg::rank(&trial) > block.len() {
                                block = trial;
                                let cdx = labels.len();
                                labels[idx].partner = cdx;
                                fields.push(cb);
                                labels.push(FrameLabel {
                                    index: cdx,
                                    length,
                                    word: Some((1 - t, labels[p].partner)),
                                    mu: one.clone(),
                                    partner: idx,
                                });
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
        if count != expected {
            return Err(FrameError::NotTotallyNondegenerate { length, found: count, expected });
        }
    }
    let n = labels.len();
    let mut brackets: BracketTable = vec![vec![BTreeMap::new(); n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let x = chart.bracket(&fields[a], &fields[b]);
            let length = labels[a].length + labels[b].length;
            let c = express(&chart, &fields, &labels, &x, length, rho)
                .ok_or_else(|| FrameError::NotClosed(labels[a].name(), labels[b].name()))?;
            let neg: BTreeMap<usize, GaussianRational> = c.iter().map(|(k, v)| (*k, -v)).collect();
            brackets[a][b] = c;
            brackets[b][a] = neg;
        }
    }
    Ok(Frame { chart, labels, fields, brackets, rho })
}

/// Conjugation matrix: `conj(L_a) = Σ_b κ_{ab} L_b`.
pub fn conjugation_matrix(f: &Frame) -> Option<Vec<BTreeMap<usize, GaussianRational>>> {
    (0..f.len())
        .map(|a| {
            let cx = f.chart.conj(&f.fields[a]);
            express(&f.chart, &f.fields, &f.labels, &cx, f.length(a), f.rho)
        })
        .collect()
}

/// `dσ_c = Σ_{a<b} D^c_{ab} σ_a ∧ σ_b`, with `D^c_{ab} = −C^c_{ab}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DarbouxStructure {
    pub d: Vec<BTreeMap<(usize, usize), GaussianRational>>,
    /// Per label of length ≥ 2: the unique wedge `(x, t)` with `len(x) = ℓ−1`, `len(t) = 1`.
    pub predecessor: Vec<Option<(usize, usize)>>,
}

impl DarbouxStructure {
    /// Coefficient of `σ_a ∧ σ_b` (any order) in `dσ_c`.
    pub fn coeff(&self, c: usize, a: usize, b: usize) -> GaussianRational {
        if a == b {
            return GaussianRational::zero();
        }
        let (x, y, s) = if a < b { (a, b, false) } else { (b, a, true) };
        let v = self.d[c].get(&(x, y)).cloned().unwrap_or_else(GaussianRational::zero);
        if s {
            -v
        } else {
            v
        }
    }
}

pub fn darboux_structure(f: &Frame) -> DarbouxStructure {
    let n = f.len();
    let mut d = vec![BTreeMap::new(); n];
    for a in 0..n {
        for b in (a + 1)..n {
            for (&c, v) in &f.brackets[a][b] {
                d[c].insert((a, b), -v);
            }
        }
    }
    let ds = DarbouxStructure { d, predecessor: vec![None; n] };
    let predecessor = (0..n)
        .map(|c| {
            if f.length(c) < 2 {
                return None;
            }
            let cands: Vec<(usize, usize)> = (0..n)
                .filter(|&x| f.length(x) + 1 == f.length(c))
                .flat_map(|x| [0, 1].into_iter().map(move |t| (x, t)))
                .filter(|&(x, t)| x != t && !ds.coeff(c, x, t).is_zero())
                .collect();
            match (f.labels[c].word, cands.as_slice()) {
                (_, [one]) => Some(*one),
                (Some((t, p)), _) => Some((p, t)),
                _ => None,
            }
        })
        .collect();
    DarbouxStructure { predecessor, ..ds }
}

/// Brute-force duality check: invert the frame matrix, differentiate the explicit
/// coframe, and compare `dσ_b(L_a, L_c)` with the Darboux constants. Returns the
/// first mismatching `(b, a, c)`, if any.
pub fn duality_oracle(f: &Frame, ds: &DarbouxStructure) -> Result<(), (usize, usize, usize)> {
    let n = f.len();
    let m: Vec<Vec<WPoly>> = f.fields.iter().map(|x| x.coeffs.clone()).collect();
    let inv = linalg::invert_constant_pivot(&m).expect("graded frame has constant pivots");
    // coframe row b: σ_b = Σ_i inv[i][b] dx_i
    let coords = &f.chart.coords;
    for b in 0..n {
        let cof: Vec<&WPoly> = (0..n).map(|i| &inv[i][b]).collect();
        let mut dcof = vec![vec![WPoly::zero(&f.chart.vars); n]; n];
        for i in 0..n {
            for j in 0..n {
                dcof[i][j] = &cof[j].derivative(coords[i]) - &cof[i].derivative(coords[j]);
            }
        }
        for a in 0..n {
            for c in 0..n {
                let mut s = WPoly::zero(&f.chart.vars);
                for i in 0..n {
                    if m[a][i].is_zero() {
                        continue;
                    }
                    for j in 0..n {
                        if m[c][j].is_zero() || dcof[i][j].is_zero() {
                            continue;
                        }
                        s = &s + &(&dcof[i][j] * &(&m[a][i] * &m[c][j]));
                    }
                }
                if s != WPoly::constant(&f.chart.vars, ds.coeff(b, a, c)) {
                    return Err((b, a, c));
                }
            }
        }
    }
    Ok(())
}

/// Rank over the fraction field of the fields of length ≤ ℓ, for ℓ = 1..=ρ.
pub fn rank_filtration(f: &Frame) -> Vec<usize> {
    (1..=f.rho)
        .map(|l| {
            let rows: Vec<Vec<WPoly>> = f.fields.iter().zip(&f.labels).filter(|(_, lab)| lab.length <= l).map(|(x, _)| x.coeffs.clone()).collect();
            linalg::symbolic_rank(&rows)
        })
        .collect()
}

/// Each constructed field `μ[L_t, L_p]` shows up in its own Darboux row with the
/// coefficient `−1/μ` on `σ_t ∧ σ_p`.
pub fn construction_wedges_ok(f: &Frame, ds: &DarbouxStructure) -> bool {
    f.labels.iter().all(|l| match l.word {
        None => true,
        Some((t, p)) => ds.coeff(l.index, t, p) == -l.mu.inv(),
    })
}

/// Homogeneity audit over all frame fields.
pub fn homogeneity_ok(f: &Frame) -> bool {
    f.fields.iter().zip(&f.labels).all(|(x, l)| f.chart.is_homogeneous(x, l.length))
}

/// Weight of every coefficient of `∂/∂w_j` in the ambient generator is `[w_j] − 1`.
pub fn generator_weights_ok(m: &Model) -> bool {
    generator_field(m).coeffs.iter().all(|(&v, c)| {
        let target = m.vars.weight(v) - 1;
        matches!(c.weight(), WeightClass::Exact(w) if w == target) || c.is_zero()
    })
}
