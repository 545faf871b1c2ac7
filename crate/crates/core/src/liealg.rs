//! The graded Lie algebra dual to the constant-type `{e}`-structure, with exact checks
//! of Jacobi, grading, `𝔤₀`, the negative part and generation by `𝔤₋₁`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::cartan::FinalStructure;
use crate::exactalg::{linalg, GaussianRational};
use crate::frame::Frame;

/// Sparse vector in the basis of the algebra.
pub type Vector = BTreeMap<usize, GaussianRational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasisKind {
    Frame(usize),
    Alpha,
    AlphaBar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElement {
    pub name: String,
    pub degree: i32,
    pub kind: BasisKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedLieAlgebra {
    pub basis: Vec<BasisElement>,
    /// `[e_i, e_j]` for `i < j`; absent keys are zero.
    pub brackets: BTreeMap<(usize, usize), Vector>,
}

fn add_into(v: &mut Vector, i: usize, c: &GaussianRational) {
    if c.is_zero() {
        return;
    }
    let e = v.entry(i).or_insert_with(GaussianRational::zero);
    *e = &*e + c;
    if e.is_zero() {
        v.remove(&i);
    }
}

/// Dualizes `dθ^r = Σ c^r_{ij} θ^i ∧ θ^j` into `[e_i, e_j] = -Σ c^r_{ij} e_r`.
/// The basis is the frame in display order followed by `α` and, when `a1` stays
/// complex, `ᾱ`.
pub fn from_structure(frame: &Frame, fs: &FinalStructure) -> GradedLieAlgebra {
    let order = frame.display_order();
    let mut pos = vec![0usize; frame.len()];
    let mut basis = Vec::new();
    for (i, &a) in order.iter().enumerate() {
        pos[a] = i;
        basis.push(BasisElement { name: format!("v{}", frame.labels[a].name()), degree: -(frame.length(a) as i32), kind: BasisKind::Frame(a) });
    }
    let alpha = basis.len();
    basis.push(BasisElement { name: "v_alpha".into(), degree: 0, kind: BasisKind::Alpha });
    let alpha_bar = (fs.group_dim == 2).then(|| {
        basis.push(BasisElement { name: "v_alphab".into(), degree: 0, kind: BasisKind::AlphaBar });
        alpha + 1
    });
    let mut brackets: BTreeMap<(usize, usize), Vector> = BTreeMap::new();
    let mut put = |i: usize, j: usize, r: usize, c: &GaussianRational| {
        // coefficient c of θ^i ∧ θ^j in dθ^r contributes -c e_r to [e_i, e_j]
        let (a, b, c) = if i < j { (i, j, -c) } else { (j, i, c.clone()) };
        add_into(brackets.entry((a, b)).or_default(), r, &c);
    };
    for eq in &fs.equations {
        let r = pos[eq.row];
        let (p, q) = (GaussianRational::from_int(eq.diag.0 as i64), GaussianRational::from_int(eq.diag.1 as i64));
        match alpha_bar {
            Some(ab) => {
                put(alpha, r, r, &p);
                put(ab, r, r, &q);
            }
            None => put(alpha, r, r, &(&p + &q)),
        }
        for (&(x, y), c) in &eq.terms {
            put(pos[x], pos[y], r, c);
        }
    }
    brackets.retain(|_, v| !v.is_empty());
    GradedLieAlgebra { basis, brackets }
}

impl GradedLieAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn bracket(&self, i: usize, j: usize) -> Vector {
        if i == j {
            return Vector::new();
        }
        let (a, b, neg) = if i < j { (i, j, false) } else { (j, i, true) };
        let mut v = self.brackets.get(&(a, b)).cloned().unwrap_or_default();
        if neg {
            for c in v.values_mut() {
                *c = -&*c;
            }
        }
        v
    }

    pub fn bracket_vec(&self, u: &Vector, v: &Vector) -> Vector {
        let mut out = Vector::new();
        for (i, a) in u {
            for (j, b) in v {
                let ab = a * b;
                for (r, c) in self.bracket(*i, *j) {
                    add_into(&mut out, r, &(&ab * &c));
                }
            }
        }
        out
    }

    fn unit(i: usize) -> Vector {
        Vector::from([(i, GaussianRational::one())])
    }

    /// First triple violating `[x,[y,z]] + [y,[z,x]] + [z,[x,y]] = 0`.
    pub fn jacobi_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.dim();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let (x, y, z) = (Self::unit(i), Self::unit(j), Self::unit(k));
                    let mut s = self.bracket_vec(&x, &self.bracket_vec(&y, &z));
                    for (r, c) in self.bracket_vec(&y, &self.bracket_vec(&z, &x)) {
                        add_into(&mut s, r, &c);
                    }
                    for (r, c) in self.bracket_vec(&z, &self.bracket_vec(&x, &y)) {
                        add_into(&mut s, r, &c);
                    }
                    if !s.is_empty() {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    /// `[𝔤_a, 𝔤_b] ⊂ 𝔤_{a+b}` on basis elements.
    pub fn grading_closed(&self) -> bool {
        self.brackets.iter().all(|(&(i, j), v)| v.keys().all(|&r| self.basis[r].degree == self.basis[i].degree + self.basis[j].degree))
    }

    pub fn graded_dims(&self) -> BTreeMap<i32, usize> {
        let mut out = BTreeMap::new();
        for b in &self.basis {
            *out.entry(b.degree).or_insert(0) += 1;
        }
        out
    }

    pub fn degree_indices(&self, d: i32) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.basis[i].degree == d).collect()
    }

    pub fn g0_abelian(&self) -> bool {
        let g0 = self.degree_indices(0);
        g0.iter().all(|&i| g0.iter().all(|&j| self.bracket(i, j).is_empty()))
    }

    pub fn has_positive_part(&self) -> bool {
        self.basis.iter().any(|b| b.degree > 0)
    }

    /// On the negative part, `[v_x, v_y]` equals the frame bracket `[L_x, L_y]`.
    pub fn negative_part_matches(&self, frame: &Frame) -> bool {
        let idx: BTreeMap<usize, usize> =
            self.basis.iter().enumerate().filter_map(|(i, b)| if let BasisKind::Frame(a) = b.kind { Some((a, i)) } else { None }).collect();
        for x in 0..frame.len() {
            for y in 0..frame.len() {
                let mut expect = Vector::new();
                for (c, v) in &frame.brackets[x][y] {
                    add_into(&mut expect, idx[c], v);
                }
                if self.bracket(idx[&x], idx[&y]) != expect {
                    return false;
                }
            }
        }
        true
    }

    /// `𝔤₋` is spanned by iterated brackets of `𝔤₋₁`.
    pub fn generated_by_minus_one(&self) -> bool {
        let neg: Vec<usize> = (0..self.dim()).filter(|&i| self.basis[i].degree < 0).collect();
        let gens: Vec<Vector> = self.degree_indices(-1).into_iter().map(Self::unit).collect();
        let mut span: Vec<Vector> = gens.clone();
        let mut layer = gens.clone();
        while !layer.is_empty() {
            let mut next = Vec::new();
            for g in &gens {
                for l in &layer {
                    let b = self.bracket_vec(g, l);
                    if b.is_empty() {
                        continue;
                    }
                    let mut trial = span.clone();
                    trial.push(b.clone());
                    if self.rank_of(&trial) > span.len() {
                        span.push(b.clone());
                        next.push(b);
                    }
                }
            }
            layer = next;
        }
        span.len() == neg.len()
    }

    fn rank_of(&self, vs: &[Vector]) -> usize {
        let rows: Vec<Vec<GaussianRational>> =
            vs.iter().map(|v| (0..self.dim()).map(|i| v.get(&i).cloned().unwrap_or_else(GaussianRational::zero)).collect()).collect();
        linalg::rank(&rows)
    }

    /// Upper-triangle bracket table rows `(name_i, name_j, value)` with nonzero value.
    pub fn table(&self) -> Vec<(String, String, String)> {
        self.brackets.iter().map(|(&(i, j), v)| (self.basis[i].name.clone(), self.basis[j].name.clone(), self.render(v))).collect()
    }

    pub fn render(&self, v: &Vector) -> String {
        if v.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (i, c)) in v.iter().enumerate() {
            let name = &self.basis[*i].name;
            let term = if c.is_one() {
                name.clone()
            } else if *c == -GaussianRational::one() {
                format!("-{name}")
            } else if c.re.is_zero() || c.im.is_zero() {
                format!("{c}*{name}")
            } else {
                format!("({c})*{name}")
            };
            if k > 0 && !term.starts_with('-') {
                s.push_str(" + ");
            } else if k > 0 {
                s.push(' ');
            }
            s.push_str(&term);
        }
        s
    }
}
