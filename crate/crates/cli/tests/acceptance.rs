//! Acceptance criteria 1-10. Runs without the libtest harness so every
//! criterion prints one PASS/FAIL line; exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use cutlab::corpus;
use cutlab::family::{self, FamilyParams, SimStatus};
use cutlab::gomory::{enumerate_integer_points, gomory_cuts};
use cutlab::graph::{encode, BipartiteGraph};
use cutlab::milp::{self, cut_is_valid_for};
use cutlab::policy::{self, PolicyParams};
use cutlab::rng::{self, int_range, uniform, uniform_range, Rng};
use cutlab::scoring::{scip_score, ScoringWeights, SelectionContext};
use cutlab::selector::{select_cuts, select_cuts_refill};
use cutlab::simplex::{solve_lp, LpStatus, RelaxedModel};
use cutlab::trainer::{self, AdversarialFamilyEnv, Environment, RolloutConfig, RolloutEnv, TrainConfig};
use cutlab::vertex::{same_point_set, vertex_enumerate};
use cutlab::{ConsType, Cut, MilpInstance, Point, VarType};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn within(limit: Duration, t: Instant) -> Result<(), String> {
    let el = t.elapsed();
    if el > limit {
        Err(format!("took {el:?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

// 1 --------------------------------------------------------------------------

fn c1_theorem_demo() -> Check {
    let t = Instant::now();
    let dir = ok(tempfile::tempdir())?;
    let out = ok(Command::new(env!("CARGO_BIN_EXE_cutlab"))
        .args(["theorem-demo", "--grid", "0:0.1:1", "--max-rounds", "1000", "--out"])
        .arg(dir.path())
        .output())?;
    ensure!(out.status.code() == Some(0), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    let mut rd = ok(csv::Reader::from_path(dir.path().join("theorem.csv")))?;
    let rows: Vec<csv::StringRecord> = ok(rd.records().collect())?;
    ensure!(rows.len() == 12, "{} rows", rows.len());
    for r in &rows[..11] {
        ensure!(&r[1] == "NotSolved" && &r[2] == "1000", "grid row {:?}", r);
    }
    ensure!(&rows[11][1] == "SolvedByGC(1)", "midpoint row {:?}", rows[11]);

    // same run through the library for the point/objective tolerances
    let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let rep = ok(family::theorem_demo(&grid, 1000))?;
    for r in &rep.rows[..11] {
        let first = r.outcome.chosen_types[0];
        ensure!(r.outcome.chosen_types.iter().all(|&k| k == first), "lambda {} switched type", r.lambda);
    }
    let mid = &rep.rows[11].outcome;
    ensure!(mid.final_x.max_dist(&[1.0, 1.0, 0.0]) <= 1e-6, "final x {:?}", &*mid.final_x);
    let z = *mid.lp_objectives.last().unwrap();
    let want = -9.0 - rep.params.d();
    ensure!((z - want).abs() <= 1e-9, "objective {z} vs {want}");
    within(Duration::from_secs(60), t)?;
    Ok(format!(
        "d={:.6} a={:.6} interval [{:.6}, {:.6}], 11 NotSolved + SolvedByGC(1)",
        rep.params.d(),
        rep.params.a(),
        rep.interval.lb,
        rep.interval.ub
    ))
}

// 2 --------------------------------------------------------------------------

fn c2_unsolvable() -> Check {
    let t = Instant::now();
    let p = ok(family::construct_unsolvable(0.5, 0.05))?;
    let solved: Vec<usize> = (0..=1000usize)
        .into_par_iter()
        .map(|k| family::simulate_pure_cutting(p, k as f64 / 1000.0, 1000).map(|o| (k, o.status)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter(|(_, s)| *s != SimStatus::NotSolved)
        .map(|(k, _)| k)
        .collect();
    ensure!(solved.is_empty(), "solved at lambda indices {:?}", &solved[..solved.len().min(10)]);
    within(Duration::from_secs(600), t)?;
    Ok(format!("a={:.6}: 1001/1001 NotSolved in {:.1?}", p.a(), t.elapsed()))
}

// 3 --------------------------------------------------------------------------

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let d: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    d.abs() / (nu * nv)
}

/// Interval bounds straight from the definitions of the two measures.
fn direct_bounds(a: f64, d: f64) -> (f64, f64) {
    let c = [1.0, -(10.0 + d), -a];
    let g = cosine(&c, &[-10.0, 10.0, 1.0]);
    let i = cosine(&c, &[-1.0, 0.0, 1.0]);
    let o = cosine(&c, &[-1.0, 10.0, 0.0]);
    // GC vs ISC: isp 2/3 vs 1; GC vs OPC: isp 2/3 vs 1/2
    let ub = (g - i) / (g - i + 1.0 / 3.0);
    let lb = (o - g) / (o - g + 1.0 / 6.0);
    (lb, ub)
}

fn bisect_max_a(d: f64) -> f64 {
    let f = |a: f64| {
        let (lb, ub) = direct_bounds(a, d);
        ub - lb
    };
    let (mut lo, mut hi) = (0.0, 20.0);
    assert!(f(lo) > 0.0 && f(hi) < 0.0, "bracket fails at d={d}");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn c3_closed_forms() -> Check {
    let mut r = rng::seeded(3);
    let (mut worst_gap, mut worst_root) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let d = uniform(&mut r);
        let m = family::max_a(d);
        let gap = (family::lambda_ub(m, d) - family::lambda_lb(m, d)).abs();
        let root = (m - bisect_max_a(d)).abs();
        ensure!(gap <= 1e-7, "d={d}: |ub - lb| = {gap:e}");
        ensure!(root <= 1e-7, "d={d}: max_a {m} vs oracle, diff {root:e}");
        // closed forms against the definitions on the interior too
        let a = uniform_range(&mut r, 0.0, m);
        let (lb, ub) = direct_bounds(a, d);
        ensure!((family::lambda_lb(a, d) - lb).abs() <= 1e-9, "lambda_lb({a}, {d})");
        ensure!((family::lambda_ub(a, d) - ub).abs() <= 1e-9, "lambda_ub({a}, {d})");
        worst_gap = worst_gap.max(gap);
        worst_root = worst_root.max(root);
    }
    Ok(format!("50 d: max |ub-lb| {worst_gap:.1e}, max |max_a - oracle| {worst_root:.1e}"))
}

// 4 --------------------------------------------------------------------------

/// Integer points by brute force: each (x1, x3) in the box, then the ends of
/// the feasible x2 interval.
fn brute_integer_points(inst: &MilpInstance) -> Vec<Point> {
    let rows = inst.dense_rows();
    let mut out = Vec::new();
    for x1 in -3..=3 {
        for x3 in 0..=1 {
            let (x1, x3) = (x1 as f64, x3 as f64);
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            let mut feasible = true;
            for (row, &b) in rows.iter().zip(inst.rhs()) {
                let rest = b - row[0] * x1 - row[2] * x3;
                if row[1] > 0.0 {
                    hi = hi.min(rest / row[1]);
                } else if row[1] < 0.0 {
                    lo = lo.max(rest / row[1]);
                } else if rest < -1e-12 {
                    feasible = false;
                }
            }
            if !feasible || lo > hi + 1e-12 {
                continue;
            }
            for x2 in [lo, hi] {
                if x2.is_finite() && !out.iter().any(|p: &Point| p.max_dist(&[x1, x2, x3]) < 1e-12) {
                    out.push(Point::from([x1, x2, x3]));
                }
            }
        }
    }
    out
}

fn strip_integer(set: &[Point]) -> Vec<Point> {
    let ints = family::integer_points();
    set.iter().filter(|p| !ints.iter().any(|q| q.max_dist(p) < 1e-9)).cloned().collect()
}

fn lp_after(inst: &MilpInstance, cut: Cut) -> Result<(Point, f64), String> {
    let sol = solve_lp(&ok(RelaxedModel::new(inst.clone()).with_cut(cut))?);
    ensure!(sol.status == LpStatus::Optimal, "LP status {:?}", sol.status);
    Ok((sol.x, sol.objective))
}

fn member(x: &Point, set: &[Point], tol: f64) -> bool {
    set.iter().any(|p| p.max_dist(x) <= tol)
}

fn family_facts(p: FamilyParams) -> Result<(), String> {
    let inst = make(p);
    let ints = family::integer_points();
    let base = RelaxedModel::new(inst.clone());

    // integer points
    let brute = brute_integer_points(&inst);
    ensure!(same_point_set(&brute, &ints, 1e-9), "integer set {:?}", brute);
    for q in &ints {
        ensure!(ok(milp::is_integer_feasible(&inst, q, 1e-9))?, "{:?} infeasible", &**q);
    }

    // vertex sets
    let mut root_set = ints.clone();
    root_set.push(family::root_vertex());
    ensure!(same_point_set(&ok(vertex_enumerate(&base))?, &root_set, 1e-7), "root vertex set");
    for n in 1..=5 {
        let sets = ok(family::cut_vertex_sets(n))?;
        let cases = [
            ("GC", family::good_cut(), &sets.gc),
            ("ISC", ok(family::isc(n))?, &sets.isc),
            ("OPC", ok(family::opc(n))?, &sets.opc),
        ];
        for (name, cut, want) in cases {
            let got = ok(vertex_enumerate(&ok(base.clone().with_cut(cut))?))?;
            ensure!(same_point_set(&got, want, 1e-7), "n={n} {name} vertex set {:?}", got);
        }
    }

    for n in 1..=5 {
        let sets = ok(family::cut_vertex_sets(n))?;
        let isc_facet = strip_integer(&sets.isc);
        let opc_facet = strip_integer(&sets.opc);
        ensure!(isc_facet.len() == 3 && opc_facet.len() == 3, "facet sizes");

        // GC and the widened OPC cut off the ISC facet
        let wide = ok(family::widened_opc(n))?;
        ensure!(ok(family::epsilon(n))? < 0.1, "eps_{n}");
        for v in &isc_facet {
            ensure!(family::good_cut().violation(v) > 1e-12, "GC misses {:?}", &**v);
            ensure!(wide.violation(v) > 1e-12, "widened OPC misses {:?}", &**v);
        }
        ensure!(ok(cut_is_valid_for(&wide, &ints, 1e-12))?, "widened OPC invalid at n={n}");

        // GC and ISC^{n+1} cut off the OPC facet
        let deeper = ok(family::isc(n + 1))?;
        for v in &opc_facet {
            ensure!(family::good_cut().violation(v) > 1e-12, "GC misses {:?}", &**v);
            ensure!(deeper.violation(v) > 1e-12, "ISC^{} misses {:?}", n + 1, &**v);
        }
        ensure!(ok(cut_is_valid_for(&deeper, &ints, 1e-12))?, "ISC^{} invalid", n + 1);

        // LP optimum after ISC^n / OPC^n sits on the new facet
        let (x, _) = lp_after(&inst, ok(family::isc(n))?)?;
        ensure!(member(&x, &isc_facet, 1e-7), "after ISC^{n}: {:?}", &*x);
        let (x, _) = lp_after(&inst, ok(family::opc(n))?)?;
        ensure!(member(&x, &opc_facet, 1e-7), "after OPC^{n}: {:?}", &*x);
    }

    // root LP optimum, strictly better than every other vertex
    let c = p.objective();
    let root = solve_lp(&base);
    ensure!(root.status == LpStatus::Optimal, "root {:?}", root.status);
    ensure!(root.x.max_dist(&family::root_vertex()) <= 1e-7, "root x {:?}", &*root.x);
    let zr = dot(&c, &family::root_vertex());
    for q in &ints {
        ensure!(zr < dot(&c, q), "root not strictly optimal vs {:?}", &**q);
    }

    // after GC, (1,1,0) is the LP optimum with value -9-d
    let (x, z) = lp_after(&inst, family::good_cut())?;
    ensure!(x.max_dist(&[1.0, 1.0, 0.0]) <= 1e-7, "after GC x {:?}", &*x);
    ensure!((z - family::integer_optimum(p)).abs() <= 1e-9, "after GC z {z}");
    let frac = Point::from([61.0 / 91.0, 60.0 / 91.0, 10.0 / 91.0]);
    ensure!(z < dot(&c, &frac), "GC fractional vertex not worse");

    // interval construction at this (a, d)
    let eps_hat = family::max_a(p.d()) - p.a();
    let iv = ok(family::good_cut_interval(p.d(), eps_hat))?;
    ensure!(iv.ub > iv.lb, "empty interval at {:?}", p);
    let s = ok(family::candidate_scores(p, iv.midpoint()))?;
    ensure!(s[0] >= s[1] && s[0] >= s[2], "midpoint scores {s:?}");
    Ok(())
}

fn make(p: FamilyParams) -> MilpInstance {
    family::make_instance(p)
}

fn c4_family_facts() -> Check {
    let mut r = rng::seeded(4);
    for _ in 0..20 {
        let d = uniform_range(&mut r, 0.01, 0.99);
        let a = uniform_range(&mut r, 0.01, family::max_a(d) - 0.01);
        let p = ok(FamilyParams::new(a, d))?;
        family_facts(p).map_err(|e| format!("(a={a}, d={d}): {e}"))?;
    }
    Ok("20 interior (a,d): integer set, vertex sets n=1..5, facet separation, LP optima, intervals".into())
}

// 5 --------------------------------------------------------------------------

fn random_cut(r: &mut Rng, n: usize) -> Cut {
    loop {
        let a: Vec<f64> = (0..n).map(|_| int_range(r, -4, 4) as f64).collect();
        if a.iter().any(|&v| v != 0.0) {
            return Cut::new(a, int_range(r, -3, 6) as f64).unwrap();
        }
    }
}

fn random_pool(r: &mut Rng, n: usize, size: usize) -> Vec<Cut> {
    let mut pool: Vec<Cut> = Vec::with_capacity(size);
    while pool.len() < size {
        let roll = uniform(r);
        if roll < 0.2 && !pool.is_empty() {
            // exact or scaled copy
            let k = int_range(r, 0, pool.len() as i64 - 1) as usize;
            pool.push(pool[k].scaled(uniform_range(r, 0.5, 3.0)));
        } else if roll < 0.35 && !pool.is_empty() {
            // near copy
            let k = int_range(r, 0, pool.len() as i64 - 1) as usize;
            let mut a = pool[k].coeffs().to_vec();
            let j = int_range(r, 0, n as i64 - 1) as usize;
            a[j] += uniform_range(r, -0.3, 0.3);
            if let Ok(c) = Cut::new(a, pool[k].rhs()) {
                pool.push(c);
            }
        } else {
            pool.push(random_cut(r, n));
        }
    }
    pool
}

fn cos_cuts(a: &Cut, b: &Cut) -> f64 {
    cosine(a.coeffs(), b.coeffs()).min(1.0)
}

/// Walk the pool in (score desc, index asc) order and keep every cut not too
/// parallel to a forced or already kept one.
fn naive_select(
    pool: &[Cut],
    forced: &[Cut],
    max_cuts: usize,
    scores: &[f64],
    thr: f64,
    refill: bool,
) -> Vec<Cut> {
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).unwrap().then(i.cmp(&j)));
    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        if kept.len() == max_cuts {
            break;
        }
        let clash = forced.iter().any(|f| cos_cuts(&pool[i], f) >= thr)
            || kept.iter().any(|&k| cos_cuts(&pool[i], &pool[k]) >= thr);
        if !clash {
            kept.push(i);
        }
    }
    if refill {
        for &i in &order {
            if kept.len() == max_cuts {
                break;
            }
            if !kept.contains(&i) {
                kept.push(i);
            }
        }
    }
    forced.iter().cloned().chain(kept.into_iter().map(|i| pool[i].clone())).collect()
}

fn c5_selector() -> Check {
    let mut r = rng::seeded(5);
    let mut filtered = 0;
    for case in 0..500 {
        let n = int_range(&mut r, 2, 6) as usize;
        let size = int_range(&mut r, 0, 20) as usize;
        let pool = random_pool(&mut r, n, size);
        let forced: Vec<Cut> = (0..int_range(&mut r, 0, 2)).map(|_| random_cut(&mut r, n)).collect();
        let vtypes: Vec<VarType> = (0..n)
            .map(|_| [VarType::Binary, VarType::Integer, VarType::Continuous][int_range(&mut r, 0, 2) as usize])
            .collect();
        let c: Vec<f64> = (0..n).map(|_| int_range(&mut r, -5, 5) as f64 + 0.5).collect();
        let xlp = Point::new((0..n).map(|_| uniform_range(&mut r, -2.0, 2.0)).collect());
        let inc = (uniform(&mut r) < 0.5).then(|| Point::new((0..n).map(|_| int_range(&mut r, -2, 2) as f64).collect()));
        let ctx = ok(SelectionContext::new(c, xlp, inc))?;
        let w = if uniform(&mut r) < 0.5 {
            let raw: Vec<f64> = (0..4).map(|_| uniform(&mut r)).collect();
            let s: f64 = raw.iter().sum();
            ScoringWeights::normalized([raw[0] / s, raw[1] / s, raw[2] / s, 1.0 - (raw[0] + raw[1] + raw[2]) / s])
                .unwrap_or(ScoringWeights::equal())
        } else {
            ok(ScoringWeights::raw([0; 4].map(|_| uniform_range(&mut r, -1.0, 1.0))))?
        };
        let thr = [0.5, 0.8, 0.9, 0.99, 1.0][int_range(&mut r, 0, 4) as usize];
        let max_cuts = int_range(&mut r, 1, 10) as usize;
        let scores: Vec<f64> =
            ok(pool.iter().map(|cut| scip_score(&w, cut, &ctx, &vtypes)).collect::<Result<_, _>>())?;

        let got = ok(select_cuts(&pool, &forced, max_cuts, &w, &ctx, &vtypes, thr))?;
        let want = naive_select(&pool, &forced, max_cuts, &scores, thr, false);
        ensure!(got.selected == want, "case {case}: selector {:?} vs oracle {:?}", got.selected, want);
        ensure!(got.n_selected == want.len() - forced.len(), "case {case}: n_selected");
        if got.n_selected < max_cuts.min(pool.len()) {
            filtered += 1;
        }
        let got = ok(select_cuts_refill(&pool, &forced, max_cuts, &w, &ctx, &vtypes, thr))?;
        let want = naive_select(&pool, &forced, max_cuts, &scores, thr, true);
        ensure!(got.selected == want, "case {case}: refill selector differs from oracle");
    }
    Ok(format!("500 pools match the oracle ({filtered} with parallelism filtering)"))
}

// 6 --------------------------------------------------------------------------

fn random_lp(r: &mut Rng, n: usize, m: usize) -> MilpInstance {
    let lower: Vec<f64> = (0..n).map(|_| int_range(r, -3, 0) as f64).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + int_range(r, 1, 5) as f64).collect();
    let c: Vec<f64> = (0..n).map(|_| int_range(r, -5, 5) as f64).collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..m {
        for j in 0..n {
            let v = int_range(r, -4, 4) as f64;
            if v != 0.0 {
                a.push((i, j, v));
            }
        }
        b.push(int_range(r, -4, 12) as f64 / 2.0);
    }
    MilpInstance::new(
        format!("lp{n}x{m}"),
        c,
        a,
        b,
        lower,
        upper,
        vec![VarType::Continuous; n],
        vec![ConsType::Linear; m],
    )
    .unwrap()
}

fn c6_simplex() -> Check {
    let mut r = rng::seeded(6);
    let (mut feasible, mut worst) = (0, 0.0f64);
    for case in 0..200 {
        let n = int_range(&mut r, 1, 6) as usize;
        let m = int_range(&mut r, 0, 8) as usize;
        let inst = random_lp(&mut r, n, m);
        let model = RelaxedModel::new(inst.clone());
        let verts = ok(vertex_enumerate(&model))?;
        let sol = solve_lp(&model);
        if verts.is_empty() {
            ensure!(sol.status == LpStatus::Infeasible, "case {case}: no vertices but {:?}", sol.status);
            continue;
        }
        feasible += 1;
        let best = verts.iter().map(|v| dot(inst.objective(), v)).fold(f64::INFINITY, f64::min);
        ensure!(sol.status == LpStatus::Optimal, "case {case}: {:?}", sol.status);
        let diff = (sol.objective - best).abs();
        ensure!(diff <= 1e-7, "case {case}: simplex {} vs vertices {best}", sol.objective);
        ensure!(cutlab::simplex::max_violation(&model, &sol.x) <= 1e-7, "case {case}: infeasible x");
        worst = worst.max(diff);
    }
    ensure!(feasible >= 100, "only {feasible} feasible LPs generated");
    Ok(format!("200 LPs ({feasible} feasible), max |diff| {worst:.1e}"))
}

// 7 --------------------------------------------------------------------------

fn random_bounded_milp(r: &mut Rng, mixed: bool) -> MilpInstance {
    let n = int_range(r, 2, 4) as usize;
    let m = int_range(r, 1, 4) as usize;
    let upper: Vec<f64> = (0..n).map(|_| int_range(r, 1, 4) as f64).collect();
    let c: Vec<f64> = (0..n).map(|_| int_range(r, -9, 3) as f64).collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..m {
        for j in 0..n {
            let v = int_range(r, -3, 7) as f64;
            if v != 0.0 {
                a.push((i, j, v));
            }
        }
        b.push(int_range(r, 2, 20) as f64);
    }
    let mut vt = vec![VarType::Integer; n];
    if mixed {
        vt[int_range(r, 0, n as i64 - 1) as usize] = VarType::Continuous;
    }
    MilpInstance::new("rand", c, a, b, vec![0.0; n], upper, vt, vec![ConsType::Linear; m]).unwrap()
}

/// Largest value of `cut·x` over the mixed-integer feasible set.
fn max_over_mixed(inst: &MilpInstance, cut: &Cut) -> f64 {
    let ints: Vec<usize> = (0..inst.n()).filter(|&j| inst.vtypes()[j].is_integer()).collect();
    let neg: Vec<f64> = cut.coeffs().iter().map(|v| -v).collect();
    let mut best = f64::NEG_INFINITY;
    let mut cur: Vec<i64> = ints.iter().map(|&j| inst.lower()[j] as i64).collect();
    loop {
        let (mut lo, mut hi) = (inst.lower().to_vec(), inst.upper().to_vec());
        for (k, &j) in ints.iter().enumerate() {
            lo[j] = cur[k] as f64;
            hi[j] = cur[k] as f64;
        }
        let fixed = inst.with_bounds(lo, hi).unwrap().with_objective(neg.clone()).unwrap();
        let sol = solve_lp(&RelaxedModel::new(fixed));
        if sol.status == LpStatus::Optimal {
            best = best.max(-sol.objective);
        }
        let mut k = 0;
        loop {
            if k == ints.len() {
                return best;
            }
            if cur[k] < inst.upper()[ints[k]] as i64 {
                cur[k] += 1;
                break;
            }
            cur[k] = inst.lower()[ints[k]] as i64;
            k += 1;
        }
    }
}

fn c7_gomory() -> Check {
    let mut r = rng::seeded(7);
    let (mut with_cuts, mut total) = (0, 0);
    for case in 0..100 {
        let mixed = case % 2 == 1;
        let inst = random_bounded_milp(&mut r, mixed);
        let pts = if mixed { Vec::new() } else { ok(enumerate_integer_points(&RelaxedModel::new(inst.clone()), 100_000))? };
        let mut model = RelaxedModel::new(inst.clone());
        let mut produced = 0;
        for _round in 0..3 {
            let sol = solve_lp(&model);
            if sol.status != LpStatus::Optimal {
                break;
            }
            let cuts = ok(gomory_cuts(&model, &sol))?;
            if cuts.is_empty() {
                break;
            }
            for cut in &cuts {
                ensure!(cut.violation(&sol.x) > 0.0, "case {case}: cut does not separate");
                let worst = if mixed {
                    max_over_mixed(&inst, cut) - cut.rhs()
                } else {
                    pts.iter().map(|p| cut.violation(p)).fold(f64::NEG_INFINITY, f64::max)
                };
                ensure!(worst <= 1e-7, "case {case}: cut {:?} violated by {worst:e}", cut);
            }
            produced += cuts.len();
            for cut in cuts {
                ok(model.push_cut(cut))?;
            }
        }
        if produced > 0 {
            with_cuts += 1;
        }
        total += produced;
    }
    ensure!(with_cuts >= 30, "only {with_cuts} instances produced cuts");
    Ok(format!("{total} cuts on {with_cuts}/100 instances, no violation > 1e-7"))
}

// 8 --------------------------------------------------------------------------

fn fd_graphs() -> Vec<BipartiteGraph> {
    vec![
        encode(&corpus::packing(4, 3, 1)),
        encode(&corpus::covering(3, 2, 2)),
        encode(&corpus::lot_sizing(2, 3)),
        encode(&family::make_instance(FamilyParams::new(1.3, 0.4).unwrap())),
        encode(&corpus::packing(2, 1, 5)),
    ]
}

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

fn c8_gradcheck() -> Check {
    const H: f64 = 1e-5;
    let mut worst = 0.0f64;
    for (gi, g) in fd_graphs().iter().enumerate() {
        let theta = PolicyParams::init(3, 100 + gi as u64);
        let mut r = rng::seeded(200 + gi as u64);
        let w = [0; 4].map(|_| uniform_range(&mut r, -1.0, 1.0));
        let mu = ok(policy::forward(g, &theta))?;
        // unit variance keeps the finite-difference round-off at the scale of mu
        let act = ok(policy::sample_action_with(mu, 1.0, &mut r))?;
        let ana_mu = ok(policy::grad_mu(g, &theta, &w))?;
        let ana_lp = ok(policy::grad_logprob(g, &theta, &act))?;
        let f_mu = |th: &PolicyParams| {
            let m = policy::forward(g, th).unwrap();
            m.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()
        };
        let f_lp = |th: &PolicyParams| {
            let m = policy::forward(g, th).unwrap();
            // log density without its constant
            -act.sample.iter().zip(&m).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (2.0 * act.gamma)
        };
        for k in 0..theta.len() {
            let mut p = theta.clone();
            p.as_mut_slice()[k] += H;
            let mut q = theta.clone();
            q.as_mut_slice()[k] -= H;
            let n_mu = (f_mu(&p) - f_mu(&q)) / (2.0 * H);
            let n_lp = (f_lp(&p) - f_lp(&q)) / (2.0 * H);
            let e = rel_err(ana_mu[k], n_mu).max(rel_err(ana_lp[k], n_lp));
            ensure!(e <= 1e-4, "graph {gi} param {k}: analytic {} / {} vs numeric {n_mu} / {n_lp}", ana_mu[k], ana_lp[k]);
            worst = worst.max(e);
        }
    }
    Ok(format!(
        "5 graphs x {} params (width 3), max rel err {worst:.1e}",
        PolicyParams::param_count(3)
    ))
}

// 9 --------------------------------------------------------------------------

const TRAIN_EPOCHS: usize = 200;
const HIT_DRAWS: usize = 1000;

fn c9_learning() -> Check {
    let t = Instant::now();
    let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let (_, iv) = ok(family::construct_adversarial(&grid))?;
    let env = AdversarialFamilyEnv::new(iv, 50);
    let ss = ok(policy::seed_search(&[env.graph().clone()], 1000, policy::DEFAULT_HIDDEN))?;
    let gamma0 = ok(policy::gamma_schedule(0, TRAIN_EPOCHS))?;
    let gamma_end = ok(policy::gamma_schedule(TRAIN_EPOCHS, TRAIN_EPOCHS))?;
    let runs: Vec<(f64, f64)> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let mut theta = PolicyParams::init(policy::DEFAULT_HIDDEN, ss.seed);
            let mu0 = policy::forward(env.graph(), &theta)?;
            let before = env.hit_rate(mu0, gamma0, HIT_DRAWS, rng::derive(seed, &[1]))?;
            let cfg = TrainConfig { epochs: TRAIN_EPOCHS, n_samples: 40, seed, center_rewards: true, ..TrainConfig::default() };
            trainer::train(&mut theta, std::slice::from_ref(&env), &cfg, |_| {})?;
            let mu = policy::forward(env.graph(), &theta)?;
            let after = env.hit_rate(mu, gamma_end, HIT_DRAWS, rng::derive(seed, &[2]))?;
            Ok((before, after))
        })
        .collect::<cutlab::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let good = runs.iter().filter(|(b, a)| *b < 0.2 && *a > 0.9).count();
    let desc: Vec<String> = runs.iter().map(|(b, a)| format!("{b:.2}->{a:.2}")).collect();
    ensure!(good >= 8, "{good}/10 seeds: {}", desc.join(" "));
    within(Duration::from_secs(600), t)?;
    Ok(format!("interval [{:.4}, {:.4}], {good}/10 seeds: {}", iv.lb, iv.ub, desc.join(" ")))
}

// 10 -------------------------------------------------------------------------

fn c10_grid() -> Check {
    ensure!(trainer::compositions(10).len() == 286, "compositions(10)");
    let cfg = RolloutConfig { n_rounds: 5, cuts_per_round: 2, ..RolloutConfig::default() };
    let insts = [corpus::packing(8, 4, 0), corpus::packing(8, 4, 1), corpus::packing(8, 4, 2), corpus::lot_sizing(6, 0)];
    let mut nonneg = 0;
    let mut notes = Vec::new();
    for inst in insts {
        let env = ok(RolloutEnv::new(inst, cfg.clone()))?;
        let r10 = ok(trainer::grid_search(&env, 10))?;
        ensure!(r10.table.len() == 286, "{} scenarios at resolution 10", r10.table.len());
        // equal weights are a grid point only when 4 divides the resolution
        let r12 = ok(trainer::grid_search(&env, 12))?;
        ensure!(r12.table.iter().any(|row| row.weights == [0.25; 4]), "baseline not in the grid");
        if r12.best_improvement >= 0.0 {
            nonneg += 1;
        }
        notes.push(format!("{:.3}/{:.3}", r10.best_improvement, r12.best_improvement));
    }
    ensure!(nonneg >= 3, "{nonneg}/4 instances with improvement >= 0");
    Ok(format!("286 scenarios; improvement (res 10/12) {}; {nonneg}/4 >= 0", notes.join(" ")))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Check); 10] = [
        (1, "theorem demo", c1_theorem_demo),
        (2, "unsolvable instance", c2_unsolvable),
        (3, "closed-form consistency", c3_closed_forms),
        (4, "family structure", c4_family_facts),
        (5, "selector oracle", c5_selector),
        (6, "simplex oracle", c6_simplex),
        (7, "gomory validity", c7_gomory),
        (8, "gradient check", c8_gradcheck),
        (9, "learning capability", c9_learning),
        (10, "grid search", c10_grid),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|s| name.contains(s.as_str()) || s == &id.to_string()) {
            continue;
        }
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let el = t.elapsed();
        match res {
            Ok(msg) => println!("PASS {id:>2} {name}: {msg} [{el:.2?}]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {msg} [{el:.2?}]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
