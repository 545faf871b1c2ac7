//! Acceptance suite: one PASS/FAIL line per criterion, with its runtime budget.
//!
//! The k = 6 and k = 3 fixtures are transcribed by hand from the published worked
//! example and compared exactly; the remaining criteria use oracles that are
//! computed here independently of the library code under test.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crcartan::ambiguity::{is_identity, mat_mul, nesting_ok, ParamFraction};
use crcartan::cartan::{realify, solve_real, t_atom, Unknown};
use crcartan::exactalg::{GaussianRational as GR, VariableTable, WPoly};
use crcartan::freelie::{brute_force_dim, free_lie_dim, free_lie_dims, hall_rank, hall_word_oracle, model_length};
use crcartan::liealg::{BasisKind, GradedLieAlgebra, Vector};
use crcartan::report::{report_from_pipeline, AnalysisOptions, Pipeline};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn run(k: usize) -> Result<Pipeline, String> {
    Pipeline::run(k, None).map_err(|e| format!("k = {k}: {e}"))
}

fn gi(re: i64, im: i64) -> GR {
    GR::from_parts(re, im)
}

fn audits_ok(p: &Pipeline, full: bool) -> Result<(), String> {
    let failed: Vec<String> = p.audits(full).into_iter().filter(|a| !a.passed).map(|a| format!("{} ({})", a.name, a.detail)).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(format!("k = {}: audits failed: {}", p.k(), failed.join(", ")))
    }
}

// ---------------------------------------------------------------------------
// Criterion 1: the worked k = 6 example
// ---------------------------------------------------------------------------

/// Greek names of the worked example, in its display order, then α and ᾱ.
const GREEK: [&str; 8] = ["nu", "mu", "mub", "sigma", "sigmab", "rho", "zeta", "zetab"];

/// Transcribed ambiguity matrix. `D` marks the diagonal; `~` marks a conjugate.
const G6: [[&str; 8]; 8] = [
    ["D", "0", "0", "0", "0", "0", "0", "0"],
    ["0", "D", "0", "0", "0", "0", "0", "0"],
    ["0", "0", "D", "0", "0", "0", "0", "0"],
    ["a13", "a6", "0", "D", "0", "0", "0", "0"],
    ["~a13", "0", "~a6", "0", "D", "0", "0", "0"],
    ["a11", "a7", "~a7", "a3", "~a3", "D", "0", "0"],
    ["a12", "a8", "~a9", "a4", "a5", "a2", "D", "0"],
    ["~a12", "a9", "~a8", "~a5", "~a4", "~a2", "0", "D"],
];

const DIAG6: [(i32, i32); 8] = [(2, 2), (3, 1), (1, 3), (2, 1), (1, 2), (1, 1), (1, 0), (0, 1)];

/// Printed weight list: `[a1]=1, [a2]=2, [a3]=[a4]=[a5]=3, [a6]=…=[a13]=4`.
fn printed_weight(n: usize) -> u32 {
    match n {
        1 => 1,
        2 => 2,
        3..=5 => 3,
        _ => 4,
    }
}

/// Frame index of each Greek name, located through the bracket words rather than assumed.
fn locate_k6(p: &Pipeline) -> Result<[usize; 8], String> {
    let f = &p.frame;
    ensure!(f.len() == 8, "frame has {} fields, expected 8", f.len());
    let (l, lb) = (0usize, f.labels[0].partner);
    ensure!(f.labels[0].word.is_none() && f.labels[lb].word.is_none() && lb == 1, "generators are not at slots 0, 1");
    let find = |a: usize, b: usize, mu: GR| -> Result<usize, String> {
        (0..f.len()).find(|&c| f.labels[c].word == Some((a, b)) && f.labels[c].mu == mu).ok_or_else(|| format!("no field with word [{a},{b}]"))
    };
    let t = find(l, lb, GR::i())?;
    let s = find(l, t, GR::one())?;
    let sb = find(lb, t, GR::one())?;
    let u = find(l, s, GR::one())?;
    let ub = find(lb, sb, GR::one())?;
    let v = find(l, sb, GR::one())?;
    Ok([v, u, ub, s, sb, t, l, lb])
}

fn fixture_equations(p: &Pipeline, vars: &Arc<VariableTable>) -> Check {
    let z = WPoly::var(vars, vars.z());
    let zb = WPoly::var(vars, vars.zbar());
    let c = |re, im| WPoly::constant(vars, gi(re, im));
    let z2zb = &(&z * &z) * &zb;
    let zzb2 = &(&z * &zb) * &zb;
    let z3zb = &(&(&z * &z) * &z) * &zb;
    let zzb3 = &(&(&z * &zb) * &zb) * &zb;
    // w3 - conj(w3) = 2(z^2 zb - z zb^2) means Im w3 = -i (z^2 zb - z zb^2), likewise for w5
    let expected = [
        &z * &zb,
        &z2zb + &zzb2,
        &c(0, -1) * &(&z2zb - &zzb2),
        &z3zb + &zzb3,
        &c(0, -1) * &(&z3zb - &zzb3),
        &(&z * &z) * &(&zb * &zb),
    ];
    ensure!(p.model.phi.len() == 6, "{} defining equations", p.model.phi.len());
    for (j, (got, want)) in p.model.phi.iter().zip(&expected).enumerate() {
        ensure!(got == want, "Im w{} = {} differs from {}", j + 1, got.render(), want.render());
        ensure!(got.is_real(), "Im w{} is not real", j + 1);
    }
    ensure!(p.model.weights == vec![2, 3, 3, 4, 4, 4], "weights {:?}", p.model.weights);
    Ok("six equations and weights match".into())
}

fn fixture_frame(p: &Pipeline, ix: &[usize; 8]) -> Check {
    let f = &p.frame;
    let [v, u, ub, s, sb, t, l, lb] = *ix;
    // [L,Lb] = -i T, [L,T] = S, [Lb,T] = Sb, [L,S] = U, [Lb,Sb] = Ub, [L,Sb] = [Lb,S] = V
    let listed: Vec<(usize, usize, usize, GR)> = vec![
        (l, lb, t, gi(0, -1)),
        (l, t, s, GR::one()),
        (lb, t, sb, GR::one()),
        (l, s, u, GR::one()),
        (lb, sb, ub, GR::one()),
        (l, sb, v, GR::one()),
        (lb, s, v, GR::one()),
    ];
    for a in 0..8 {
        for b in 0..8 {
            let mut want = BTreeMap::new();
            for &(x, y, c, ref coef) in &listed {
                if (x, y) == (a, b) {
                    want.insert(c, coef.clone());
                } else if (y, x) == (a, b) {
                    want.insert(c, -coef);
                }
            }
            ensure!(f.brackets[a][b] == want, "bracket [{},{}] is {:?}", f.labels[a].name(), f.labels[b].name(), f.brackets[a][b]);
        }
    }
    Ok("8 fields, bracket words and all remaining brackets zero".into())
}

fn fixture_darboux(p: &Pipeline, ix: &[usize; 8]) -> Check {
    let g = |n: &str| ix[GREEK.iter().position(|x| *x == n).unwrap()];
    let table: Vec<(&str, Vec<(&str, &str, GR)>)> = vec![
        ("nu", vec![("sigmab", "zeta", GR::one()), ("sigma", "zetab", GR::one())]),
        ("mu", vec![("sigma", "zeta", GR::one())]),
        ("mub", vec![("sigmab", "zetab", GR::one())]),
        ("sigma", vec![("rho", "zeta", GR::one())]),
        ("sigmab", vec![("rho", "zetab", GR::one())]),
        ("rho", vec![("zeta", "zetab", GR::i())]),
        ("zeta", vec![]),
        ("zetab", vec![]),
    ];
    for (c, terms) in &table {
        for a in 0..8 {
            for b in 0..8 {
                let mut want = GR::zero();
                for (x, y, coef) in terms {
                    if (g(x), g(y)) == (a, b) {
                        want = &want + coef;
                    } else if (g(y), g(x)) == (a, b) {
                        want = &want - coef;
                    }
                }
                ensure!(p.darboux.coeff(g(c), a, b) == want, "d{c}_0 coefficient on slots ({a},{b})");
            }
        }
    }
    Ok("Darboux table matches".into())
}

/// Our counterpart of a printed parameter name: `(our index, conj flip, sign)`.
type NameMap = BTreeMap<usize, (usize, bool, GR)>;

fn parse_name(s: &str) -> Option<(usize, bool)> {
    let (conj, rest) = s.strip_prefix('~').map_or((false, s), |r| (true, r));
    rest.strip_prefix('a').and_then(|n| n.parse().ok()).map(|n| (n, conj))
}

fn fixture_parameters(p: &Pipeline, ix: &[usize; 8]) -> Result<(NameMap, String), String> {
    let g = &p.g.g;
    let mut map: NameMap = BTreeMap::new();
    for (r, row) in G6.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            let ours = &g[ix[r]][ix[c]];
            match *cell {
                "0" => ensure!(ours.is_zero(), "entry ({r},{c}) should vanish, got {}", ours.render()),
                "D" => {
                    let (e1, e1b) = DIAG6[r];
                    ensure!(*ours == ParamFraction::a1_pow(e1, e1b), "diagonal ({r},{r}) is {}", ours.render());
                }
                name => {
                    let (n, conj) = parse_name(name).expect("transcribed name");
                    let hit = p.params.params.iter().find_map(|q| {
                        [false, true].into_iter().find_map(|qc| {
                            [GR::one(), -GR::one()].into_iter().find(|sg| *ours == q.atom(qc).scale(sg)).map(|sg| (q.index, qc != conj, sg))
                        })
                    });
                    let Some(hit) = hit else { return Err(format!("entry ({r},{c}) = {} is not a signed parameter", ours.render())) };
                    match map.get(&n) {
                        Some(prev) if *prev != hit => return Err(format!("printed a{n} maps inconsistently")),
                        _ => {
                            map.insert(n, hit);
                        }
                    }
                }
            }
        }
    }
    let ours: BTreeSet<usize> = map.values().map(|v| v.0).collect();
    ensure!(ours.len() == map.len(), "name map is not injective");
    let all: BTreeSet<usize> = p.params.params.iter().map(|q| q.index).collect();
    ensure!(ours == all, "parameters {:?} are not all visible in the printed matrix", all.difference(&ours).collect::<Vec<_>>());
    for (&n, &(idx, _, _)) in &map {
        let w = p.params.get(idx).map(|q| q.weight).unwrap_or(0);
        ensure!(w == printed_weight(n), "printed a{n} has weight {} but ours a{idx} has {w}", printed_weight(n));
    }
    // The printed weight list runs to a13, yet a10 never occurs in the printed matrix.
    let printed: BTreeSet<usize> = map.keys().copied().collect();
    ensure!(!printed.contains(&10) && printed.iter().max() == Some(&13), "unexpected printed name set {printed:?}");
    let mut weights = p.params.weights();
    weights.sort();
    ensure!(weights == vec![1, 2, 3, 3, 3, 4, 4, 4, 4, 4, 4, 4], "weights {weights:?}");
    let renames: Vec<String> = map.iter().filter(|(n, (i, c, s))| **n != *i || *c || !s.is_one()).map(|(n, (i, c, _))| format!("a{n}->{}a{i}", if *c { "~" } else { "" })).collect();
    let detail = format!(
        "matrix, zero pattern and diagonal match; {} parameters with weights (1,2,3,3,3,4^7): the printed weight list runs to a13 but a10 never occurs in the printed matrix; renames {}",
        map.len() + 1,
        renames.join(" ")
    );
    Ok((map, detail))
}

/// Printed `a_n` (or its conjugate) expressed through our parameters.
fn printed_atom(p: &Pipeline, map: &NameMap, n: usize, conj: bool) -> ParamFraction {
    if n == 1 {
        return if conj { ParamFraction::a1_pow(0, 1) } else { ParamFraction::a1_pow(1, 0) };
    }
    let (idx, flip, sign) = &map[&n];
    p.params.get(*idx).expect("mapped parameter").atom(*flip != conj).scale(sign)
}

fn fixture_system(p: &Pipeline, map: &NameMap) -> Check {
    let a = |n: usize| printed_atom(p, map, n, false);
    let ab = |n: usize| printed_atom(p, map, n, true);
    let k = |re: i64, im: i64| ParamFraction::constant(gi(re, im));
    let mono = ParamFraction::a1_pow;
    let over = |x: ParamFraction, e1: i32, e1b: i32| &x * &mono(-e1, -e1b);
    let (t1, t2, tb1, tb2) = (t_atom(0, false), t_atom(1, false), t_atom(0, true), t_atom(1, true));
    let lin = |c1: i64, c2: i64, cb1: i64, cb2: i64| {
        &(&t1.scale(&GR::from_int(c1)) + &t2.scale(&GR::from_int(c2))) + &(&tb1.scale(&GR::from_int(cb1)) + &tb2.scale(&GR::from_int(cb2)))
    };
    let eq = |lhs: ParamFraction, rhs: ParamFraction| &lhs - &rhs;
    // The seven printed equations "torsion = absorption", as printed.
    let mut printed = vec![
        ("S_dnu", eq(-&over(ab(13), 2, 2), lin(2, 0, 0, 2))),
        ("S_dmu.1", eq(-&over(a(6), 3, 1), lin(3, 0, 0, 1))),
        ("S_dmu.2", eq(ParamFraction::zero(), lin(0, 3, 1, 0))),
        ("S_dsigma.1", eq(&over(a(6), 3, 1) - &over(a(3), 2, 1), lin(2, 0, 0, 1))),
        ("S_dsigma.2", eq(over(ab(13), 2, 2), lin(0, 2, 1, 0))),
        ("S_drho", eq(&over(a(3), 2, 1) + &over(&k(0, 1) * &ab(2), 1, 1), lin(1, 0, 0, 1))),
        ("S_dzeta", eq(over(&k(0, 1) * &a(2), 1, 1), lin(0, 1, 0, 0))),
    ];
    let ours: Vec<ParamFraction> = p.system.iter().map(|e| e.lhs()).collect();
    let matches = |e: &ParamFraction| ours.iter().position(|o| *o == *e || *o == -e || o.conj() == *e || o.conj() == -e);
    let unmatched: Vec<&str> = printed.iter().filter(|(_, e)| matches(e).is_none()).map(|(n, _)| *n).collect();
    ensure!(unmatched == vec!["S_dsigma.2"], "printed equations without a counterpart: {unmatched:?}");
    // That equation prints a conjugate on a13; the lifted coframe row gives a13 itself.
    printed[4].1 = eq(over(a(13), 2, 2), lin(0, 2, 1, 0));
    let hit: BTreeSet<usize> = printed.iter().filter_map(|(_, e)| matches(e)).collect();
    ensure!(hit.len() == ours.len() && printed.iter().all(|(_, e)| matches(e).is_some()), "system does not match the corrected printed equations");

    // The five cleared equations; their solution set must equal that of our system.
    let five = vec![
        &(&ab(13) + &(&k(2, 0) * &(&ab(1) * &a(3)))) + &(&k(0, 2) * &(&(&a(1) * &ab(1)) * &ab(2))),
        &(&a(6) + &(&k(3, 0) * &(&a(1) * &a(3)))) + &(&k(0, 5) * &(&(&a(1) * &a(1)) * &ab(2))),
        &ab(3) + &(&k(0, 1) * &(&ab(1) * &a(2))),
        &(&a(6) - &(&k(3, 0) * &(&a(1) * &a(3)))) - &(&k(0, 3) * &(&(&a(1) * &a(1)) * &ab(2))),
        &ab(13) - &(&a(1) * &ab(3)),
    ];
    for five_eq in &five {
        ensure!(five_eq.weight().is_some(), "cleared equation {} is not weighted homogeneous", five_eq.render());
    }
    let printed_unknowns: BTreeSet<Unknown> = [2, 3, 6, 13].iter().map(|n| Unknown::Param(map[n].0)).collect();
    for value in [gi(1, 0), GR::new(GR::from_ratio(3, 5).re, GR::from_ratio(4, 5).re), gi(2, -1)] {
        let sol5 = solve_real(&realify(&five, &value).map_err(|e| e.to_string())?).map_err(|e| format!("cleared system: {e}"))?;
        let sol = solve_real(&realify(&ours, &value).map_err(|e| e.to_string())?).map_err(|e| format!("our system: {e}"))?;
        let params5: BTreeSet<Unknown> = sol5.keys().copied().collect();
        let params: BTreeSet<Unknown> = sol.keys().copied().filter(|u| matches!(u, Unknown::Param(_))).collect();
        ensure!(params5 == printed_unknowns && params == printed_unknowns, "unknown sets differ: {params5:?} vs {params:?}");
        ensure!(sol5.values().all(GR::is_zero) && sol.values().all(GR::is_zero), "a solution is not zero at a1 = {value}");
    }
    ensure!(p.solution.iter().all(|(_, v)| v.is_zero()), "pipeline solution is not zero");
    Ok(format!("{} equations, 6 verbatim and 1 after the a13 conjugation fix; unique zero solution as for the five cleared equations", ours.len()))
}

fn fixture_final(p: &Pipeline, ix: &[usize; 8]) -> Check {
    let g = |n: &str| ix[GREEK.iter().position(|x| *x == n).unwrap()];
    ensure!(!p.real_alpha && !p.reduced.normalizable && p.final_structure.group_dim == 2, "a1 is normalizable");
    let want: Vec<(&str, (i32, i32), Vec<(&str, &str, GR)>)> = vec![
        ("nu", (2, 2), vec![("sigmab", "zeta", GR::one()), ("sigma", "zetab", GR::one())]),
        ("mu", (3, 1), vec![("sigma", "zeta", GR::one())]),
        ("mub", (1, 3), vec![("sigmab", "zetab", GR::one())]),
        ("sigma", (2, 1), vec![("rho", "zeta", GR::one())]),
        ("sigmab", (1, 2), vec![("rho", "zetab", GR::one())]),
        ("rho", (1, 1), vec![("zeta", "zetab", GR::i())]),
        ("zeta", (1, 0), vec![]),
        ("zetab", (0, 1), vec![]),
    ];
    ensure!(p.final_structure.equations.len() == 8, "{} final equations", p.final_structure.equations.len());
    for (row, diag, terms) in &want {
        let fe = p.final_structure.equations.iter().find(|e| e.row == g(row)).ok_or(format!("no equation for d{row}"))?;
        ensure!(fe.diag == *diag, "d{row} diagonal {:?}", fe.diag);
        let mut expect: BTreeMap<(usize, usize), GR> = BTreeMap::new();
        for (x, y, c) in terms {
            let (a, b, c) = if g(x) < g(y) { (g(x), g(y), c.clone()) } else { (g(y), g(x), -c) };
            expect.insert((a, b), c);
        }
        ensure!(fe.terms == expect, "d{row} terms {:?}", fe.terms);
    }
    ensure!(p.final_structure.total_forms() == 10, "{} forms", p.final_structure.total_forms());
    Ok("a1 not normalizable; constant structure equations match".into())
}

fn basis_index(alg: &GradedLieAlgebra, kind: &BasisKind) -> Option<usize> {
    alg.basis.iter().position(|b| b.kind == *kind)
}

fn fixture_algebra(p: &Pipeline, ix: &[usize; 8]) -> Check {
    let alg = &p.algebra;
    ensure!(alg.dim() == 10, "dimension {}", alg.dim());
    let mut order: Vec<usize> = Vec::new();
    for &a in ix {
        order.push(basis_index(alg, &BasisKind::Frame(a)).ok_or("frame element missing")?);
    }
    order.push(basis_index(alg, &BasisKind::Alpha).ok_or("v_alpha missing")?);
    order.push(basis_index(alg, &BasisKind::AlphaBar).ok_or("v_alphab missing")?);
    // Printed upper triangle, in the order nu mu mub sigma sigmab rho zeta zetab alpha alphab.
    let (nu, mu, mub, sg, sgb, rho, ze, zeb, al, alb) = (0, 1, 2, 3, 4, 5, 6, 7, 8, 9);
    let one = GR::one;
    let table: Vec<(usize, usize, Vec<(usize, GR)>)> = vec![
        (nu, al, vec![(nu, gi(2, 0))]),
        (nu, alb, vec![(nu, gi(2, 0))]),
        (mu, al, vec![(mu, gi(3, 0))]),
        (mu, alb, vec![(mu, one())]),
        (mub, al, vec![(mub, one())]),
        (mub, alb, vec![(mub, gi(3, 0))]),
        (sg, ze, vec![(mu, -one())]),
        (sg, zeb, vec![(nu, -one())]),
        (sg, al, vec![(sg, gi(2, 0))]),
        (sg, alb, vec![(sg, one())]),
        (sgb, ze, vec![(nu, -one())]),
        (sgb, zeb, vec![(mub, -one())]),
        (sgb, al, vec![(sgb, one())]),
        (sgb, alb, vec![(sgb, gi(2, 0))]),
        (rho, ze, vec![(sg, -one())]),
        (rho, zeb, vec![(sgb, -one())]),
        (rho, al, vec![(rho, one())]),
        (rho, alb, vec![(rho, one())]),
        (ze, zeb, vec![(rho, gi(0, -1))]),
        (ze, al, vec![(ze, one())]),
        (zeb, alb, vec![(zeb, one())]),
    ];
    for i in 0..10 {
        for j in (i + 1)..10 {
            let want: Vector = table.iter().find(|(a, b, _)| (*a, *b) == (i, j)).map(|(_, _, v)| v.iter().map(|(r, c)| (order[*r], c.clone())).collect()).unwrap_or_default();
            ensure!(alg.bracket(order[i], order[j]) == want, "bracket ({i},{j}) is {}", alg.render(&alg.bracket(order[i], order[j])));
        }
    }
    let dims = alg.graded_dims();
    ensure!(dims == BTreeMap::from([(-4, 3), (-3, 2), (-2, 1), (-1, 2), (0, 2)]), "grading {dims:?}");
    Ok("10-dim bracket table matches; grading (3,2,1,2|2)".into())
}

fn criterion_1() -> Check {
    let p = run(6)?;
    let vars = p.model.vars.clone();
    let ix = locate_k6(&p)?;
    let mut notes = vec![fixture_equations(&p, &vars)?, fixture_frame(&p, &ix)?, fixture_darboux(&p, &ix)?];
    let (map, d) = fixture_parameters(&p, &ix)?;
    notes.push(d);
    notes.push(fixture_system(&p, &map)?);
    notes.push(fixture_final(&p, &ix)?);
    notes.push(fixture_algebra(&p, &ix)?);
    audits_ok(&p, true)?;
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------------------
// Criteria 2 and 3: k = 3 and k = 4
// ---------------------------------------------------------------------------

fn criterion_2() -> Check {
    let p = run(3)?;
    let vars = &p.model.vars;
    let z = WPoly::var(vars, vars.z());
    let zb = WPoly::var(vars, vars.zbar());
    let zzb = &z * &zb;
    // Im w1 = z zb, Im w2 = z^2 zb + z zb^2, Im w3 = i (z^2 zb - z zb^2)
    let expected = vec![zzb.clone(), &zzb * &(&z + &zb), &WPoly::constant(vars, GR::i()) * &(&zzb * &(&z - &zb))];
    ensure!(p.model.phi == expected, "equations {:?}", p.model.real_equations());
    ensure!(p.frame.rho == 3 && p.model.rho() == 3, "length {}", p.frame.rho);
    ensure!(!p.real_alpha && !p.reduced.normalizable, "a1 is normalizable");
    ensure!(p.algebra.dim() == 7, "dimension {}", p.algebra.dim());
    let dims = p.algebra.graded_dims();
    ensure!(dims == BTreeMap::from([(-3, 2), (-2, 1), (-1, 2), (0, 2)]), "grading {dims:?}");
    audits_ok(&p, true)?;
    Ok("5-cubic equations, rho = 3, a1 not normalizable, dim 7 graded (2,1,2|2)".into())
}

fn criterion_3() -> Check {
    let p = run(4)?;
    ensure!(p.real_alpha && p.reduced.normalizable, "a1 is not normalizable");
    ensure!(p.final_structure.group_dim == 1, "group dimension {}", p.final_structure.group_dim);
    ensure!(p.algebra.dim() == 3 + 4, "dimension {}", p.algebra.dim());
    audits_ok(&p, true)?;
    Ok("a1 normalizable to real, dim 7".into())
}

// ---------------------------------------------------------------------------
// Criteria 4 and 7: the sweep k = 2..=10
// ---------------------------------------------------------------------------

fn sweep() -> Result<Vec<Pipeline>, String> {
    (2..=10usize).into_par_iter().map(run).collect()
}

fn criterion_4(ps: &[Pipeline]) -> Check {
    let mut dims = Vec::new();
    let fails: Vec<String> = ps
        .par_iter()
        .filter_map(|p| {
            let k = p.k();
            let alg = &p.algebra;
            let g0 = alg.degree_indices(0).len();
            let report = report_from_pipeline(p, &AnalysisOptions::default());
            let problems = [
                (p.solution.values().all(GR::is_zero), "nonzero solution"),
                (!alg.has_positive_part(), "positive part"),
                (alg.g0_abelian() && (g0 == 1 || g0 == 2), "g0 not Abelian of dim 1 or 2"),
                (alg.dim() == 3 + k || alg.dim() == 4 + k, "dimension outside {3+k, 4+k}"),
                (report.verdict.rigid, "verdict not rigid"),
            ];
            let mut bad: Vec<String> = problems.iter().filter(|(ok, _)| !ok).map(|(_, m)| format!("k = {k}: {m}")).collect();
            match p.full_torsion() {
                Ok(ft) if ft.constant_at_solution => {}
                Ok(ft) => bad.push(format!("k = {k}: full torsion not constant ({:?} unforced)", ft.unforced)),
                Err(e) => bad.push(format!("k = {k}: full torsion: {e}")),
            }
            if let Err(e) = audits_ok(p, true) {
                bad.push(e);
            }
            (!bad.is_empty()).then(|| bad.join("; "))
        })
        .collect();
    ensure!(fails.is_empty(), "{}", fails.join(" | "));
    for p in ps {
        dims.push(format!("{}:{}", p.k(), p.algebra.dim()));
    }
    Ok(format!("rigid with zero solution for k = 2..10 (k:dim {})", dims.join(" ")))
}

fn criterion_7(ps: &[Pipeline]) -> Check {
    for p in ps {
        let k = p.k();
        let alg = &p.algebra;
        ensure!(alg.jacobi_violation().is_none(), "k = {k}: Jacobi fails");
        ensure!(alg.brackets.keys().all(|&(i, j)| i < j), "k = {k}: bracket table is not stored upper-triangular");
        for i in 0..alg.dim() {
            let ei: Vector = BTreeMap::from([(i, GR::one())]);
            ensure!(alg.bracket_vec(&ei, &ei).is_empty(), "k = {k}: [e{i}, e{i}] != 0");
            for j in 0..alg.dim() {
                let ej: Vector = BTreeMap::from([(j, GR::one())]);
                let (x, mut y) = (alg.bracket_vec(&ei, &ej), alg.bracket_vec(&ej, &ei));
                y.values_mut().for_each(|c| *c = -&*c);
                ensure!(x == y, "k = {k}: antisymmetry fails at ({i},{j})");
                let di = alg.basis[i].degree + alg.basis[j].degree;
                ensure!(x.keys().all(|&r| alg.basis[r].degree == di), "k = {k}: grading fails at ({i},{j})");
            }
        }
        ensure!(is_identity(&mat_mul(&p.g.g, &p.ginv)) && is_identity(&mat_mul(&p.ginv, &p.g.g)), "k = {k}: g g^-1 != I");
    }
    Ok(format!("Jacobi, antisymmetry, grading and g g^-1 = I on {} algebras", ps.len()))
}

// ---------------------------------------------------------------------------
// Criterion 5: free Lie oracles
// ---------------------------------------------------------------------------

fn criterion_5() -> Check {
    let dims = free_lie_dims(8);
    let mut brute = Vec::new();
    for l in 1..=8usize {
        let b = brute_force_dim(l);
        ensure!(dims[l - 1] == b as u64, "length {l}: necklace {} vs brute force {b}", dims[l - 1]);
        ensure!(hall_word_oracle(l).len() == b && hall_rank(l) == b, "length {l}: Hall words disagree");
        brute.push(b);
    }
    // Cumulative rule from the brute-force counts: rho is the least l with 2+k <= n_l.
    for k in 1..=12usize {
        let mut n = 0;
        let mut rho = 0;
        for (l, b) in brute.iter().enumerate() {
            n += b;
            if n >= 2 + k {
                rho = l + 1;
                break;
            }
        }
        let (got, strict) = model_length(k);
        ensure!(got == rho, "k = {k}: model_length {got} vs rule {rho}");
        ensure!(strict == (n > 2 + k), "k = {k}: strictness flag");
    }
    ensure!(model_length(3).0 == 3 && model_length(6).0 == 4, "worked examples");
    ensure!(free_lie_dim(1) == 2, "length 1");
    Ok(format!("dims {dims:?} agree with Hall and brute force; model_length matches for k = 1..12"))
}

// ---------------------------------------------------------------------------
// Criterion 6: weight invariants and nesting
// ---------------------------------------------------------------------------

/// Weight of every term, computed from the monomial data.
fn term_weights(e: &ParamFraction) -> BTreeSet<i32> {
    e.terms().map(|(m, _)| m.e1 + m.e1b + m.atoms.iter().map(|(a, n)| a.weight() * *n as i32).sum::<i32>()).collect()
}

fn criterion_6() -> Check {
    let ps: Vec<Pipeline> = (2..=6usize).into_par_iter().map(run).collect::<Result<_, _>>()?;
    let mut n_torsion = 0;
    let mut n_s = 0;
    for p in &ps {
        let k = p.k();
        for (r, row) in p.structure.torsion.iter().enumerate() {
            for (w, t) in row {
                let ws = term_weights(t);
                ensure!(ws.is_empty() || ws == BTreeSet::from([0]), "k = {k}: torsion of d{} on {w:?} has weights {ws:?}", p.frame.labels[r].name());
                n_torsion += 1;
            }
        }
        for (b, row) in p.ginv.iter().enumerate() {
            let ws: BTreeSet<i32> = row.iter().flat_map(term_weights).collect();
            ensure!(ws.is_empty() || ws == BTreeSet::from([-(p.frame.length(b) as i32)]), "k = {k}: inverse row {b} has weights {ws:?}");
        }
        for e in &p.system {
            let lhs = e.lhs();
            // clear the a1 denominators, then require a polynomial of a single weight
            let (m1, m1b) = lhs.terms().fold((0, 0), |(x, y), (m, _)| (x.min(m.e1), y.min(m.e1b)));
            let cleared = &lhs * &ParamFraction::a1_pow(-m1, -m1b);
            ensure!(cleared.terms().all(|(m, _)| m.e1 >= 0 && m.e1b >= 0), "k = {k}: clearing left a denominator");
            let ws = term_weights(&cleared);
            ensure!(ws.len() <= 1, "k = {k}: equation {} is not weighted homogeneous", lhs.render());
            n_s += 1;
        }
    }
    for pair in ps.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        ensure!(nesting_ok(&a.frame, &a.push, &b.frame, &b.push), "nesting fails for ({}, {})", a.k(), b.k());
    }
    Ok(format!("{n_torsion} torsion coefficients of weight 0, uniform inverse rows, {n_s} homogeneous equations, nesting for (2,3)..(5,6)"))
}

// ---------------------------------------------------------------------------

fn report(n: usize, budget: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let r = f();
    let took = start.elapsed();
    let ok = r.is_ok() && took <= budget;
    let msg = match r {
        Ok(d) if took <= budget => d,
        Ok(d) => format!("{d} (over budget)"),
        Err(e) => e,
    };
    println!("{} criterion {n} [{:.2?} / {:.0?}]: {msg}", if ok { "PASS" } else { "FAIL" }, took, budget);
    ok
}

fn main() -> ExitCode {
    let mut ok = true;
    ok &= report(1, Duration::from_secs(60), criterion_1);
    ok &= report(2, Duration::from_secs(10), criterion_2);
    ok &= report(3, Duration::from_secs(30), criterion_3);
    let start = Instant::now();
    let swept = sweep();
    let sweep_time = start.elapsed();
    ok &= report(4, Duration::from_secs(600).saturating_sub(sweep_time), || {
        let ps = swept.as_ref().map_err(Clone::clone)?;
        criterion_4(ps).map(|d| format!("{d}; pipelines built in {sweep_time:.2?}"))
    });
    ok &= report(5, Duration::from_secs(5), criterion_5);
    ok &= report(6, Duration::from_secs(120), criterion_6);
    ok &= report(7, Duration::from_secs(600), || criterion_7(swept.as_ref().map_err(Clone::clone)?));
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
