//! Pushforward of the initial frame under an arbitrary biholomorphism, expressed in
//! a formal lifted frame `𝐋`. Produces the ambiguity matrix **g** with named weighted
//! group parameters and its exact inverse.

use std::cell::RefCell;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exactalg::GaussianRational;
use crate::frame::Frame;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AmbiguityError {
    #[error("pushforward of {0} has leading coefficient {1}, expected a pure power of a1 and its conjugate")]
    BadLeading(String, String),
    #[error("pushforward of {0} has a component outside the strictly shorter labels")]
    BadShape(String),
}

/// Iterated derivative of `a1` (or `ā1`) along `𝐋_{1,1}` (letter 0) and `𝐋_{1,2}`
/// (letter 1); `word[0]` is the outermost derivative.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DerivSymbol {
    pub conj_base: bool,
    pub word: Vec<u8>,
}

impl DerivSymbol {
    pub fn conj(&self) -> DerivSymbol {
        DerivSymbol { conj_base: !self.conj_base, word: self.word.iter().map(|l| 1 - l).collect() }
    }
}

impl fmt::Display for DerivSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.word {
            write!(f, "{}(", if *l == 0 { "L" } else { "Lb" })?;
        }
        write!(f, "{}", if self.conj_base { "ab1" } else { "a1" })?;
        for _ in &self.word {
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Reality {
    Real,
    Imag,
    Complex,
}

/// Opaque unknowns of the parameter algebra.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    D(DerivSymbol),
    /// Named group parameter `a_index` (or its conjugate).
    P { index: usize, conj: bool, weight: u32, reality: Reality },
    /// Absorption unknown `t_{label+1}` (or its conjugate); the absorption system gives it weight 0.
    T { label: usize, conj: bool, weight: u32 },
}

impl Atom {
    pub fn weight(&self) -> i32 {
        match self {
            Atom::D(_) => 1,
            Atom::P { weight, .. } | Atom::T { weight, .. } => *weight as i32,
        }
    }

    /// Conjugate atom with the sign it picks up (only imaginary parameters flip sign).
    fn conj(&self) -> (Atom, bool) {
        match self {
            Atom::D(s) => (Atom::D(s.conj()), false),
            Atom::P { index, conj, weight, reality } => match reality {
                Reality::Real => (self.clone(), false),
                Reality::Imag => (self.clone(), true),
                Reality::Complex => (Atom::P { index: *index, conj: !conj, weight: *weight, reality: *reality }, false),
            },
            Atom::T { label, conj, weight } => (Atom::T { label: *label, conj: !conj, weight: *weight }, false),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::D(s) => write!(f, "{s}"),
            Atom::P { index, conj, .. } => write!(f, "{}{index}", if *conj { "ab" } else { "a" }),
            Atom::T { label, conj, .. } => write!(f, "{}{}", if *conj { "tb" } else { "t" }, label + 1),
        }
    }
}

/// Laurent monomial `a1^e1 · ā1^e1b · Π atom^n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PMono {
    pub e1: i32,
    pub e1b: i32,
    pub atoms: BTreeMap<Atom, u32>,
}

impl PMono {
    pub fn one() -> Self {
        PMono { e1: 0, e1b: 0, atoms: BTreeMap::new() }
    }

    pub fn weight(&self) -> i32 {
        self.e1 + self.e1b + self.atoms.iter().map(|(a, n)| a.weight() * *n as i32).sum::<i32>()
    }

    pub fn atom_degree(&self) -> u32 {
        self.atoms.values().sum()
    }

    fn mul(&self, o: &PMono) -> PMono {
        let mut atoms = self.atoms.clone();
        for (a, n) in &o.atoms {
            *atoms.entry(a.clone()).or_default() += n;
        }
        PMono { e1: self.e1 + o.e1, e1b: self.e1b + o.e1b, atoms }
    }
}

/// Element of `Q(i)[a1^{±1}, ā1^{±1}][atoms]`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ParamFraction {
    terms: BTreeMap<PMono, GaussianRational>,
}

impl ParamFraction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::from_term(PMono::one(), c)
    }

    pub fn from_term(m: PMono, c: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        ParamFraction { terms }
    }

    /// `a1^e1 · ā1^e1b`.
    pub fn a1_pow(e1: i32, e1b: i32) -> Self {
        Self::from_term(PMono { e1, e1b, atoms: BTreeMap::new() }, GaussianRational::one())
    }

    pub fn atom(a: Atom) -> Self {
        Self::from_term(PMono { e1: 0, e1b: 0, atoms: BTreeMap::from([(a, 1)]) }, GaussianRational::one())
    }

    pub fn symbol(s: DerivSymbol) -> Self {
        if s.word.is_empty() {
            if s.conj_base {
                Self::a1_pow(0, 1)
            } else {
                Self::a1_pow(1, 0)
            }
        } else {
            Self::atom(Atom::D(s))
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PMono, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        ParamFraction { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut atoms = BTreeMap::new();
            let mut neg = false;
            for (a, n) in &m.atoms {
                let (ca, flip) = a.conj();
                if flip && n % 2 == 1 {
                    neg = !neg;
                }
                *atoms.entry(ca).or_default() += n;
            }
            let c = if neg { -c.conj() } else { c.conj() };
            out.add_term(PMono { e1: m.e1b, e1b: m.e1, atoms }, c);
        }
        out
    }

    fn add_term(&mut self, m: PMono, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// The common weight of all terms; `None` for zero or an inhomogeneous element.
    pub fn weight(&self) -> Option<i32> {
        let mut it = self.terms.keys().map(PMono::weight);
        let first = it.next()?;
        it.all(|w| w == first).then_some(first)
    }

    pub fn is_homogeneous_of(&self, w: i32) -> bool {
        self.is_zero() || self.weight() == Some(w)
    }

    pub fn max_atom_degree(&self) -> u32 {
        self.terms.keys().map(PMono::atom_degree).max().unwrap_or(0)
    }

    /// `Some((c, e1, e1b))` when the element is a single pure `a1`-monomial.
    pub fn as_a1_monomial(&self) -> Option<(GaussianRational, i32, i32)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next()?;
        m.atoms.is_empty().then(|| (c.clone(), m.e1, m.e1b))
    }

    pub fn as_constant(&self) -> Option<GaussianRational> {
        if self.is_zero() {
            return Some(GaussianRational::zero());
        }
        match self.as_a1_monomial() {
            Some((c, 0, 0)) => Some(c),
            _ => None,
        }
    }

    /// Inverse of a single `c·a1^p·ā1^q` term.
    pub fn inv_monomial(&self) -> Option<Self> {
        let (c, e1, e1b) = self.as_a1_monomial()?;
        Some(Self::from_term(PMono { e1: -e1, e1b: -e1b, atoms: BTreeMap::new() }, c.inv()))
    }

    pub fn contains_atom(&self, pred: impl Fn(&Atom) -> bool) -> bool {
        self.terms.keys().any(|m| m.atoms.keys().any(&pred))
    }

    /// Replaces atoms by images; atoms mapped to `None` are kept.
    pub fn substitute(&self, f: &dyn Fn(&Atom) -> Option<ParamFraction>) -> Self {
        let mut cache: HashMap<Atom, Option<ParamFraction>> = HashMap::new();
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut term = Self::from_term(PMono { e1: m.e1, e1b: m.e1b, atoms: BTreeMap::new() }, c.clone());
            for (a, n) in &m.atoms {
                let img = cache.entry(a.clone()).or_insert_with(|| f(a)).clone();
                let base = img.unwrap_or_else(|| Self::atom(a.clone()));
                for _ in 0..*n {
                    term = &term * &base;
                }
                if term.is_zero() {
                    break;
                }
            }
            out = &out + &term;
        }
        out
    }

    /// Sets `a1 = v` (and `ā1 = v̄`), returning atom-monomials with numeric coefficients.
    pub fn evaluate_a1(&self, v: &GaussianRational) -> BTreeMap<BTreeMap<Atom, u32>, GaussianRational> {
        let vb = v.conj();
        let mut out: BTreeMap<BTreeMap<Atom, u32>, GaussianRational> = BTreeMap::new();
        for (m, c) in &self.terms {
            let x = &(c * &v.pow(m.e1)) * &vb.pow(m.e1b);
            let e = out.entry(m.atoms.clone()).or_insert_with(GaussianRational::zero);
            *e += &x;
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Every `(a1, ā1)` exponent pair occurring, for reporting residual `(a1/ā1)^d` factors.
    pub fn a1_exponents(&self) -> Vec<(i32, i32)> {
        self.terms.keys().map(|m| (m.e1, m.e1b)).collect()
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let mut factors: Vec<String> = Vec::new();
            let mut denom: Vec<String> = Vec::new();
            for (name, e) in [("a1", m.e1), ("ab1", m.e1b)] {
                match e.cmp(&0) {
                    std::cmp::Ordering::Greater => factors.push(pow_str(name, e as u32)),
                    std::cmp::Ordering::Less => denom.push(pow_str(name, (-e) as u32)),
                    std::cmp::Ordering::Equal => {}
                }
            }
            for (a, n) in &m.atoms {
                factors.push(pow_str(&a.to_string(), *n));
            }
            let cs = c.to_string();
            let simple = c.is_real() || c.is_imaginary();
            let (neg, body) = match (simple, cs.strip_prefix('-')) {
                (true, Some(rest)) => (true, rest.to_string()),
                (true, None) => (false, cs.clone()),
                (false, _) => (false, format!("({cs})")),
            };
            let mut piece = if factors.is_empty() {
                body
            } else if body == "1" {
                factors.join("*")
            } else {
                format!("{body}*{}", factors.join("*"))
            };
            if !denom.is_empty() {
                piece = format!("{piece}/({})", denom.join("*"));
            }
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&piece);
        }
        out
    }
}

fn pow_str(name: &str, e: u32) -> String {
    if e == 1 {
        name.to_string()
    } else {
        format!("{name}^{e}")
    }
}

impl fmt::Display for ParamFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl<'a> std::ops::Add<&'a ParamFraction> for &'a ParamFraction {
    type Output = ParamFraction;
    fn add(self, o: &ParamFraction) -> ParamFraction {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> std::ops::Sub<&'a ParamFraction> for &'a ParamFraction {
    type Output = ParamFraction;
    fn sub(self, o: &ParamFraction) -> ParamFraction {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl<'a> std::ops::Mul<&'a ParamFraction> for &'a ParamFraction {
    type Output = ParamFraction;
    fn mul(self, o: &ParamFraction) -> ParamFraction {
        let mut out = ParamFraction::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl std::ops::Neg for &ParamFraction {
    type Output = ParamFraction;
    fn neg(self) -> ParamFraction {
        self.scale(&-GaussianRational::one())
    }
}

/// Formal derivations `𝐋_x` on the parameter algebra, following the frame words:
/// letters prepend to derivative symbols, longer labels act as `μ(𝐋_t𝐋_p − 𝐋_p𝐋_t)`.
pub struct Deriver<'f> {
    frame: &'f Frame,
    cache: RefCell<HashMap<(usize, DerivSymbol), ParamFraction>>,
}

impl<'f> Deriver<'f> {
    pub fn new(frame: &'f Frame) -> Self {
        Deriver { frame, cache: RefCell::new(HashMap::new()) }
    }

    fn derive_symbol(&self, x: usize, s: &DerivSymbol) -> ParamFraction {
        if let Some(v) = self.cache.borrow().get(&(x, s.clone())) {
            return v.clone();
        }
        let out = match self.frame.labels[x].word {
            None => {
                let mut word = vec![x as u8];
                word.extend(&s.word);
                ParamFraction::symbol(DerivSymbol { conj_base: s.conj_base, word })
            }
            Some((t, p)) => {
                let tp = self.derive(t, &self.derive_symbol(p, s));
                let pt = self.derive(p, &self.derive_symbol(t, s));
                (&tp - &pt).scale(&self.frame.labels[x].mu)
            }
        };
        self.cache.borrow_mut().insert((x, s.clone()), out.clone());
        out
    }

    /// `𝐋_x(f)` by the Leibniz rule. Only derivative symbols and `a1`, `ā1` may occur.
    pub fn derive(&self, x: usize, f: &ParamFraction) -> ParamFraction {
        let mut out = ParamFraction::zero();
        for (m, c) in &f.terms {
            let rest = |drop_e1: i32, drop_e1b: i32, drop: Option<&Atom>| {
                let mut atoms = m.atoms.clone();
                if let Some(a) = drop {
                    let n = atoms.get_mut(a).unwrap();
                    *n -= 1;
                    if *n == 0 {
                        atoms.remove(a);
                    }
                }
                PMono { e1: m.e1 - drop_e1, e1b: m.e1b - drop_e1b, atoms }
            };
            if m.e1 != 0 {
                let d = self.derive_symbol(x, &DerivSymbol { conj_base: false, word: vec![] });
                let r = ParamFraction::from_term(rest(1, 0, None), c * &GaussianRational::from_int(m.e1 as i64));
                out = &out + &(&r * &d);
            }
            if m.e1b != 0 {
                let d = self.derive_symbol(x, &DerivSymbol { conj_base: true, word: vec![] });
                let r = ParamFraction::from_term(rest(0, 1, None), c * &GaussianRational::from_int(m.e1b as i64));
                out = &out + &(&r * &d);
            }
            for (a, n) in &m.atoms {
                let Atom::D(s) = a else { panic!("derivation of a named parameter") };
                let d = self.derive_symbol(x, s);
                let r = ParamFraction::from_term(rest(0, 0, Some(a)), c * &GaussianRational::from_int(*n as i64));
                out = &out + &(&r * &d);
            }
        }
        out
    }
}

/// `h_*(L_a) = Σ_b F[a][b] 𝐋_b`, with entries over derivative symbols of `a1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pushforward {
    pub f: Vec<Vec<ParamFraction>>,
}

/// Expands `μ[Σ_x X_x 𝐋_x, Σ_y Y_y 𝐋_y]` with the frame's bracket constants.
fn bracket_rows(frame: &Frame, der: &Deriver, xs: &[ParamFraction], ys: &[ParamFraction]) -> Vec<ParamFraction> {
    let n = frame.len();
    let mut out = vec![ParamFraction::zero(); n];
    for x in 0..n {
        if xs[x].is_zero() {
            continue;
        }
        for y in 0..n {
            if ys[y].is_zero() {
                continue;
            }
            let prod = &xs[x] * &ys[y];
            for (c, k) in &frame.brackets[x][y] {
                out[*c] = &out[*c] + &prod.scale(k);
            }
            out[y] = &out[y] + &(&xs[x] * &der.derive(x, &ys[y]));
            out[x] = &out[x] - &(&ys[y] * &der.derive(y, &xs[x]));
        }
    }
    out
}

pub fn pushforward_frame(frame: &Frame) -> Pushforward {
    let n = frame.len();
    let der = Deriver::new(frame);
    let mut f: Vec<Vec<ParamFraction>> = Vec::with_capacity(n);
    let mut r0 = vec![ParamFraction::zero(); n];
    r0[0] = ParamFraction::a1_pow(1, 0);
    let mut r1 = vec![ParamFraction::zero(); n];
    r1[1] = ParamFraction::a1_pow(0, 1);
    f.push(r0);
    f.push(r1);
    for c in 2..n {
        let l = &frame.labels[c];
        let (t, p) = l.word.expect("labels beyond the generators carry words");
        let row: Vec<ParamFraction> = bracket_rows(frame, &der, &f[t], &f[p]).iter().map(|e| e.scale(&l.mu)).collect();
        f.push(row);
    }
    Pushforward { f }
}

/// Named group parameter `a_index`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub index: usize,
    pub weight: u32,
    pub reality: Reality,
    /// Defining expression over derivative symbols.
    pub expr: ParamFraction,
    /// `(a, b)` positions in the pushforward (`F[a][b]`) where it first appeared.
    pub origin: (usize, usize),
}

impl Param {
    pub fn atom(&self, conj: bool) -> ParamFraction {
        let a = Atom::P { index: self.index, conj: false, weight: self.weight, reality: self.reality };
        let p = ParamFraction::atom(a);
        if conj {
            p.conj()
        } else {
            p
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParameterTable {
    pub params: Vec<Param>,
}

impl ParameterTable {
    pub fn get(&self, index: usize) -> Option<&Param> {
        self.params.iter().find(|p| p.index == index)
    }

    /// Weights `(1, [a_2], [a_3], …)` including `a1`.
    pub fn weights(&self) -> Vec<u32> {
        std::iter::once(1).chain(self.params.iter().map(|p| p.weight)).collect()
    }

    /// Maps named atoms back to their defining expressions.
    pub fn expand(&self, e: &ParamFraction) -> ParamFraction {
        e.substitute(&|a| match a {
            Atom::P { index, conj, .. } => {
                let p = self.get(*index)?;
                Some(if *conj { p.expr.conj() } else { p.expr.clone() })
            }
            _ => None,
        })
    }
}

/// Lower-triangular ambiguity matrix in label order: `Γ_r = Σ_c g[r][c] σ_c`,
/// with `g[r][c] = F[c][r]` after naming.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbiguityMatrix {
    pub g: Vec<Vec<ParamFraction>>,
    /// `(p, q)`: `g[r][r] = a1^p ā1^q`.
    pub diag: Vec<(i32, i32)>,
}

impl AmbiguityMatrix {
    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }
}

fn reality_of(e: &ParamFraction) -> Reality {
    let c = e.conj();
    if c == *e {
        Reality::Real
    } else if c == -e {
        Reality::Imag
    } else {
        Reality::Complex
    }
}

/// Names every nonzero off-diagonal pushforward entry, reusing a name when the entry
/// equals `±e` or `±ē` for an existing name `e`. Rows go in label order, columns in
/// display order over strictly shorter labels.
pub fn name_parameters(frame: &Frame, push: &Pushforward) -> Result<(ParameterTable, AmbiguityMatrix), AmbiguityError> {
    let n = frame.len();
    let order = frame.display_order();
    let mut params: Vec<Param> = Vec::new();
    let mut g = vec![vec![ParamFraction::zero(); n]; n];
    let mut diag = vec![(0, 0); n];
    for a in 0..n {
        let la = frame.length(a);
        let lead = &push.f[a][a];
        match lead.as_a1_monomial() {
            Some((c, p, q)) if c.is_one() && p >= 0 && q >= 0 && (p + q) as usize == la => {
                diag[a] = (p, q);
                g[a][a] = lead.clone();
            }
            _ => return Err(AmbiguityError::BadLeading(frame.labels[a].name(), lead.render())),
        }
        for b in 0..n {
            if b != a && frame.length(b) >= la && !push.f[a][b].is_zero() {
                return Err(AmbiguityError::BadShape(frame.labels[a].name()));
            }
        }
        for &b in order.iter().filter(|&&b| frame.length(b) < la) {
            let e = &push.f[a][b];
            if e.is_zero() {
                continue;
            }
            let ec = e.conj();
            let neg = -e;
            let negc = -&ec;
            let found = params.iter().find_map(|p| {
                if p.expr == *e {
                    Some(p.atom(false))
                } else if p.expr == neg {
                    Some(-&p.atom(false))
                } else if p.expr == ec {
                    Some(p.atom(true))
                } else if p.expr == negc {
                    Some(-&p.atom(true))
                } else {
                    None
                }
            });
            g[b][a] = match found {
                Some(v) => v,
                None => {
                    let p = Param { index: params.len() + 2, weight: la as u32, reality: reality_of(e), expr: e.clone(), origin: (a, b) };
                    let v = p.atom(false);
                    params.push(p);
                    v
                }
            };
        }
    }
    Ok((ParameterTable { params }, AmbiguityMatrix { g, diag }))
}

/// Exact inverse by forward substitution, rows processed from the longest labels down.
pub fn invert_ambiguity(frame: &Frame, g: &AmbiguityMatrix) -> Vec<Vec<ParamFraction>> {
    let n = g.len();
    let mut rows: Vec<usize> = (0..n).collect();
    rows.sort_by_key(|&r| std::cmp::Reverse(frame.length(r)));
    let mut inv = vec![vec![ParamFraction::zero(); n]; n];
    for &r in &rows {
        let d = g.g[r][r].inv_monomial().expect("diagonal is a pure a1 monomial");
        for col in 0..n {
            let mut acc = if col == r { ParamFraction::one() } else { ParamFraction::zero() };
            for c in 0..n {
                if c != r && !g.g[r][c].is_zero() && !inv[c][col].is_zero() {
                    acc = &acc - &(&g.g[r][c] * &inv[c][col]);
                }
            }
            inv[r][col] = &acc * &d;
        }
    }
    inv
}

pub fn mat_mul(a: &[Vec<ParamFraction>], b: &[Vec<ParamFraction>]) -> Vec<Vec<ParamFraction>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut s = ParamFraction::zero();
                    for k in 0..n {
                        if !a[i][k].is_zero() && !b[k][j].is_zero() {
                            s = &s + &(&a[i][k] * &b[k][j]);
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn is_identity(m: &[Vec<ParamFraction>]) -> bool {
    m.iter().enumerate().all(|(i, row)| row.iter().enumerate().all(|(j, e)| if i == j { *e == ParamFraction::one() } else { e.is_zero() }))
}

/// Sets every derivative symbol with a nonempty word to zero.
pub fn vanish_substitution(e: &ParamFraction) -> ParamFraction {
    e.substitute(&|a| match a {
        Atom::D(s) if !s.word.is_empty() => Some(ParamFraction::zero()),
        _ => None,
    })
}

/// Nonzero entries in column `c` of **g** all have weight `len(c)`.
pub fn column_weights_ok(frame: &Frame, g: &AmbiguityMatrix) -> bool {
    (0..g.len()).all(|r| (0..g.len()).all(|c| g.g[r][c].is_homogeneous_of(frame.length(c) as i32)))
}

/// Nonzero entries in row `b` of **g**⁻¹ all have weight `−len(b)`.
pub fn inverse_row_weights_ok(frame: &Frame, inv: &[Vec<ParamFraction>]) -> bool {
    inv.iter().enumerate().all(|(b, row)| row.iter().all(|e| e.is_homogeneous_of(-(frame.length(b) as i32))))
}

/// The four first-order derivative symbols `L(a1), Lb(a1), L(ab1), Lb(ab1)`.
pub fn first_order_symbols() -> Vec<DerivSymbol> {
    let mut v = Vec::new();
    for conj_base in [false, true] {
        for l in [0u8, 1] {
            v.push(DerivSymbol { conj_base, word: vec![l] });
        }
    }
    v
}

fn det(m: &[Vec<ParamFraction>]) -> ParamFraction {
    let n = m.len();
    if n == 0 {
        return ParamFraction::one();
    }
    let mut acc = ParamFraction::zero();
    for (j, e) in m[0].iter().enumerate() {
        if e.is_zero() {
            continue;
        }
        let minor: Vec<Vec<ParamFraction>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect()).collect();
        let t = e * &det(&minor);
        acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
    }
    acc
}

/// Checks that the parameters defined purely by first-order derivative symbols force
/// all four of them to vanish for every nonzero `a1`: some 4×4 minor of their
/// coefficient matrix is a single nonzero `a1`-monomial. Returns the names used.
pub fn first_order_forcing(table: &ParameterTable) -> Option<Vec<usize>> {
    let syms = first_order_symbols();
    let mut rows: Vec<(usize, Vec<ParamFraction>)> = Vec::new();
    for p in &table.params {
        let first_order = p.expr.terms().all(|(m, _)| {
            m.atoms.len() == 1 && m.atom_degree() == 1 && matches!(m.atoms.keys().next(), Some(Atom::D(s)) if s.word.len() == 1)
        });
        if !first_order {
            continue;
        }
        for e in [p.expr.clone(), p.expr.conj()] {
            let row = syms
                .iter()
                .map(|s| {
                    let mut c = ParamFraction::zero();
                    for (m, v) in e.terms() {
                        if m.atoms.contains_key(&Atom::D(s.clone())) {
                            c = &c + &ParamFraction::from_term(PMono { e1: m.e1, e1b: m.e1b, atoms: BTreeMap::new() }, v.clone());
                        }
                    }
                    c
                })
                .collect();
            rows.push((p.index, row));
        }
    }
    let k = rows.len();
    for a in 0..k {
        for b in (a + 1)..k {
            for c in (b + 1)..k {
                for d in (c + 1)..k {
                    let m: Vec<Vec<ParamFraction>> = [a, b, c, d].iter().map(|&i| rows[i].1.clone()).collect();
                    if det(&m).as_a1_monomial().is_some() {
                        let mut used: Vec<usize> = [a, b, c, d].iter().map(|&i| rows[i].0).collect();
                        used.dedup();
                        return Some(used);
                    }
                }
            }
        }
    }
    None
}

/// Scale factors `s_a` with `L_a^{(k−1)} = s_a · L_a^{(k)}` for labels matched by word.
fn word_scaling(small: &Frame, big: &Frame) -> Option<Vec<(usize, GaussianRational)>> {
    let mut map: Vec<(usize, GaussianRational)> = vec![(0, GaussianRational::one()), (1, GaussianRational::one())];
    for a in 2..small.len() {
        let (t, p) = small.labels[a].word?;
        let (bt, bs_t) = map[t].clone();
        let (bp, bs_p) = map[p].clone();
        let b = (0..big.len()).find(|&b| big.labels[b].word == Some((bt, bp)))?;
        let s = &(&(&small.labels[a].mu / &big.labels[b].mu) * &bs_t) * &bs_p;
        map.push((b, s));
    }
    Some(map)
}

/// Nesting check between consecutive codimensions: each pushforward row of the
/// smaller model equals the matching row of the larger one after rescaling by the
/// word factors, `F_small[a][b] = (s_a / s_b) F_big[a'][b']`, and vanishes elsewhere.
pub fn nesting_ok(small: &Frame, push_small: &Pushforward, big: &Frame, push_big: &Pushforward) -> bool {
    let Some(map) = word_scaling(small, big) else { return false };
    for a in 0..small.len() {
        let (ba, sa) = &map[a];
        for b in 0..small.len() {
            let (bb, sb) = &map[b];
            let expect = push_big.f[*ba][*bb].scale(&(sa / sb));
            if push_small.f[a][b] != expect {
                return false;
            }
        }
    }
    true
}
