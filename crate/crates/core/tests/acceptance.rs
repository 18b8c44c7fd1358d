//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion; exits nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use isp_limits::cli::{cmd_bench, cmd_scale};
use isp_limits::decompose::block_sets;
use isp_limits::exact::{self, mediant_bounds, ratio};
use isp_limits::feasibility::max_gap_set;
use isp_limits::fixtures;
use isp_limits::problem::marginal_sum;
use isp_limits::scaling::{check_diag_equivalent, row_adjust, run_scaling_observed};
use isp_limits::{
    decompose, hall_check, isp_run, isp_run_exact, limit_pair, phi, step_one, Grid, IndexSet, IspOptions, LimitOptions, Ratio,
    SupportPattern,
};
use num_traits::Zero;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn within_time(start: Instant, limit: Duration, what: &str) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure!(took < limit, "{what} took {took:?}, limit {limit:?}");
    Ok(took)
}

fn total(v: &[Ratio]) -> Ratio {
    v.iter().fold(Ratio::zero(), |s, x| s + x)
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

/// Reference 500-round iterates of the 4×4 example to 1%.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let report = cmd_scale(&fixtures::example_problem(), 500, 0.0, None, None).map_err(|e| e.to_string())?;
    let took = within_time(start, Duration::from_secs(1), "500 rounds")?;
    let it = report.iterate.ok_or("scale report has no iterate")?;
    ensure!(it.k == Some(500), "iterate is round {:?}", it.k);
    let mut worst: f64 = 0.0;
    for (name, got, want) in [("B", &it.b, &fixtures::EXAMPLE_B500), ("C", &it.c, &fixtures::EXAMPLE_C500)] {
        for i in 0..4 {
            for j in 0..4 {
                let (g, w) = (got[i][j], want[i][j]);
                if w == 0.0 {
                    ensure!(g == 0.0, "{name}[{}][{}] = {g}, expected structural zero", i + 1, j + 1);
                } else {
                    let e = rel_err(g, w);
                    worst = worst.max(e);
                    ensure!(e <= 0.01, "{name}[{}][{}] = {g}, reference {w} (rel {e:.2e})", i + 1, j + 1);
                }
            }
        }
    }
    Ok(format!("max relative deviation {worst:.2e}, runtime {took:?}"))
}

/// `b₁₂(k) = 1/(2k)` on `[[1,1],[0,1]]`.
fn criterion_2() -> Outcome {
    let p = fixtures::slow_problem();
    let trace =
        isp_run_exact(&p, &IspOptions { max_iters: 100, tol: 0.0, stride: 1, ..IspOptions::default() }).map_err(|e| e.to_string())?;
    ensure!(trace.iterates.len() == 100, "exact run kept {} iterates", trace.iterates.len());
    for it in &trace.iterates {
        let want = ratio(1, 2 * it.k as i64);
        ensure!(it.b[(0, 1)] == want, "exact b12({}) = {}, expected {want}", it.k, it.b[(0, 1)]);
    }

    let mut worst: f64 = 0.0;
    let opts = IspOptions::rounds(100_000);
    let a = p.float_matrix();
    run_scaling_observed(a, p.float_row_targets(), p.float_col_targets(), &opts, |step| {
        worst = worst.max((step.b[(0, 1)] - 0.5 / step.k as f64).abs());
    })
    .map_err(|e| e.to_string())?;
    ensure!(worst <= 1e-12, "float b12 deviates by {worst:.3e}");
    Ok(format!("exact for k <= 100; float max abs error {worst:.2e} for k <= 1e5"))
}

/// Rounds to tolerance: naive against decomposition.
fn criterion_3() -> Outcome {
    let r = cmd_bench(&fixtures::slow_problem(), 1e-6, 100_000, None).map_err(|e| e.to_string())?.bench.ok_or("no bench")?;
    ensure!(!r.naive.reached_tol, "naive reached 1e-6 within {} rounds", r.naive.iterations);
    ensure!(r.naive.iterations == 100_000, "naive stopped after {}", r.naive.iterations);
    ensure!(r.accelerated.reached_tol && r.accelerated.iterations <= 2, "accelerated: {:?}", r.accelerated);

    let q = cmd_bench(&fixtures::two_quotient_problem(), 1e-9, 100_000, None).map_err(|e| e.to_string())?.bench.ok_or("no bench")?;
    ensure!(q.accelerated.reached_tol && q.accelerated.iterations <= 2, "two-quotient accelerated: {:?}", q.accelerated);
    Ok(format!(
        "naive col deviation {:.2e} after 1e5 rounds, accelerated {} / {} rounds",
        r.naive.final_col_deviation, r.accelerated.iterations, q.accelerated.iterations
    ))
}

/// Hall test against subset enumeration.
fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(4);
    let mut infeasible = 0;
    for case in 0..1000 {
        let (m, n) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let density = rng.gen_range(0.2..0.8);
        let s = random_support(&mut rng, m, n, density);
        let r = random_targets(&mut rng, m, 20);
        let c = random_targets(&mut rng, n, 20);
        let t = if case % 3 == 0 { total(&r) / total(&c) } else { random_ratio(&mut rng, 20) };
        let cert = hall_check(&s, &r, &c, &t);
        let brute = brute_max_gap(&s, &r, &c, &t);
        ensure!(cert.gap == brute.gap, "case {case}: gap {} vs brute {}", cert.gap, brute.gap);
        ensure!(cert.is_feasible() == brute.gap.is_zero(), "case {case}: verdict mismatch");
        ensure!(
            cert.witness == mask_set(brute.maximal, m),
            "case {case}: witness {} vs maximal {}",
            cert.witness,
            mask_set(brute.maximal, m)
        );
        infeasible += usize::from(!cert.is_feasible());
    }
    let took = within_time(start, Duration::from_secs(10), "1000 Hall instances")?;
    Ok(format!("1000 instances ({infeasible} infeasible), runtime {took:?}"))
}

struct PhiCase {
    support: SupportPattern,
    r: Vec<Ratio>,
    c: Vec<Ratio>,
}

fn phi_cases() -> Vec<PhiCase> {
    let mut rng = rng(5);
    let example = fixtures::example_problem();
    let mut cases =
        vec![PhiCase { support: example.support().clone(), r: example.row_targets().to_vec(), c: example.col_targets().to_vec() }];
    for case in 0..500 {
        let (m, n) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let density = rng.gen_range(0.2..0.8);
        let support = random_support(&mut rng, m, n, density);
        // small targets make ties between row sets common
        let max = if case % 2 == 0 { 4 } else { 20 };
        let r = random_targets(&mut rng, m, max);
        let c = random_targets(&mut rng, n, max);
        cases.push(PhiCase { support, r, c });
    }
    cases
}

/// Max-ratio set against subset enumeration.
fn criterion_5() -> Outcome {
    let cases = phi_cases();
    let mut ties = 0;
    for (k, case) in cases.iter().enumerate() {
        let got = phi(&case.support, &case.r, &case.c);
        let brute = brute_phi(&case.support, &case.r, &case.c);
        let m = case.support.rows();
        ensure!(got.ratio == brute.ratio, "case {k}: ratio {} vs brute {}", got.ratio, brute.ratio);
        ensure!(got.rows == mask_set(brute.largest, m), "case {k}: rows {} vs brute {}", got.rows, mask_set(brute.largest, m));
        let widest = brute.largest.count_ones();
        ensure!(brute.maximizers.iter().filter(|x| x.count_ones() == widest).count() == 1, "case {k}: largest maximizer is not unique");
        ensure!(got.cols == case.support.neighborhood(&got.rows), "case {k}: columns are not N(rows)");
        ties += usize::from(brute.maximizers.len() > 1);
    }
    let ex = phi(&cases[0].support, &cases[0].r, &cases[0].c);
    ensure!(ex.rows == IndexSet::full(4) && ex.ratio == ratio(17, 11), "example gives {} at {}", ex.rows, ex.ratio);
    Ok(format!("{} instances ({ties} with several maximizers), example {} at 17/11", cases.len(), ex.rows))
}

/// Decomposition against the support of a long naive run.
fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(6);
    let mut multi = 0;
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let density = rng.gen_range(0.3..0.8);
        let p = random_problem(&mut rng, 5, density, 9, 9);
        let d = decompose(&p).map_err(|e| format!("case {case}: {e}"))?;
        let (b, c, naive) = naive_blocks(&p, 100_000, 1e-4);
        let got = block_sets(&d.blocks);
        ensure!(got == naive, "case {case}: blocks {:?} vs naive {:?}\n{:?}", got, naive, p);
        let lp = limit_pair(&p, &LimitOptions::default()).map_err(|e| format!("case {case}: {e}"))?;
        let diff = lp.b.max_abs_diff(&b).max(lp.c.max_abs_diff(&c));
        worst = worst.max(diff);
        ensure!(diff <= 1e-3, "case {case}: limit pair differs from naive iterate by {diff:.3e}");
        multi += usize::from(d.blocks.len() > 1);
    }
    let took = within_time(start, Duration::from_secs(60), "200 decompositions")?;
    Ok(format!("200 instances ({multi} with several blocks), max sup-norm gap {worst:.2e}, runtime {took:?}"))
}

fn sup_rel(got: &Grid<f64>, want: &Grid<f64>) -> f64 {
    got.as_slice().iter().zip(want.as_slice()).map(|(g, w)| if *w == 0.0 { g.abs() } else { rel_err(*g, *w) }).fold(0.0, f64::max)
}

/// Structural invariants of the iterates and of the decomposition.
fn criterion_7() -> Outcome {
    let mut rng = rng(7);
    let mut checked = 0;
    for case in 0..150 {
        let density = rng.gen_range(0.3..0.9);
        let p = random_problem(&mut rng, 5, density, 9, 20);
        let (m, n) = (p.rows(), p.cols());
        let (r, cv) = (p.float_row_targets(), p.float_col_targets());
        let a = p.float_matrix();
        let trace = isp_run(&p, &IspOptions { max_iters: 40, tol: 0.0, stride: 1, ..IspOptions::default() }).map_err(|e| e.to_string())?;
        let bound = p.row_total().max(p.col_total());
        let bound = exact::to_f64(&bound) * (1.0 + 1e-12);
        let t = random_ratio(&mut rng, 9);
        let scaled = p.with_scaled_row_targets(&t).map_err(|e| e.to_string())?;
        let scaled_trace =
            isp_run(&scaled, &IspOptions { max_iters: 40, tol: 0.0, stride: 1, ..IspOptions::default() }).map_err(|e| e.to_string())?;
        let tf = exact::to_f64(&t);

        let mut prev_c = a.clone();
        for (it, sit) in trace.iterates.iter().zip(&scaled_trace.iterates) {
            let k = it.k;
            // marginals
            for (s, want) in it.b.row_sums().iter().zip(r) {
                ensure!(rel_err(*s, *want) <= 1e-12, "case {case} k={k}: row sum {s} vs {want}");
            }
            for (s, want) in it.c.col_sums().iter().zip(cv) {
                ensure!(rel_err(*s, *want) <= 1e-12, "case {case} k={k}: column sum {s} vs {want}");
            }
            // recurrence
            let again = row_adjust(&prev_c, r).map_err(|e| e.to_string())?.matrix;
            ensure!(sup_rel(&it.b, &again) <= 1e-12, "case {case} k={k}: B(k) is not the row adjustment of C(k-1)");
            prev_c = it.c.clone();
            // support and bound
            for (g, name) in [(&it.b, "B"), (&it.c, "C")] {
                ensure!(SupportPattern::of(g) == *p.support(), "case {case} k={k}: support of {name} changed");
                ensure!(g.max_entry() <= bound, "case {case} k={k}: {name} entry {} above {bound}", g.max_entry());
                ensure!(
                    check_diag_equivalent(a, g, 1e-9).map_err(|e| e.to_string())?,
                    "case {case} k={k}: {name} not diagonally equivalent to A"
                );
            }
            // cross ratios
            for i in 0..m {
                for i2 in i + 1..m {
                    for j in 0..n {
                        for j2 in j + 1..n {
                            let quad = |g: &Grid<f64>| [g[(i, j)], g[(i2, j2)], g[(i, j2)], g[(i2, j)]];
                            for g in [&it.b, &it.c] {
                                let (x, y) = (quad(a), quad(g));
                                if x.iter().chain(&y).all(|v| *v > 1e-9) {
                                    let before = x[0] * x[1] / (x[2] * x[3]);
                                    let after = y[0] * y[1] / (y[2] * y[3]);
                                    ensure!(rel_err(after, before) <= 1e-9, "case {case} k={k}: cross ratio {after} vs {before}");
                                }
                            }
                        }
                    }
                }
            }
            // covariance under scaled row targets
            let tb = it.b.map(|v| v * tf);
            ensure!(sup_rel(&sit.b, &tb) <= 1e-12, "case {case} k={k}: B' != tB");
            ensure!(sup_rel(&sit.c, &it.c) <= 1e-12, "case {case} k={k}: C' != C");
        }

        let peeled = step_one(&p).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(peeled.blocks.windows(2).all(|w| w[0].quotient > w[1].quotient), "case {case}: peel quotients not strictly decreasing");
        let d = decompose(&p).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(d.quotient_order_holds(), "case {case}: quotients out of order");
        ensure!(d.edge_ordering_holds(p.support()), "case {case}: edge ordering fails");

        let lp = limit_pair(&p, &LimitOptions::default()).map_err(|e| format!("case {case}: {e}"))?;
        for block in &lp.decomposition.blocks {
            let q = exact::to_f64(&(marginal_sum(p.col_targets(), &block.cols) / marginal_sum(p.row_targets(), &block.rows)));
            for i in block.rows.iter() {
                for j in block.cols.iter() {
                    let want = q * lp.b[(i, j)];
                    ensure!((lp.c[(i, j)] - want).abs() <= 1e-9 * want.max(1.0), "case {case}: C != (c(J)/r(I)) B at ({i},{j})");
                }
            }
        }
        checked += trace.iterates.len();
    }
    Ok(format!("150 instances, {checked} iterates checked"))
}

/// Mediant bounds, lattice closure of maximizers, feasibility of the max-ratio block.
fn criterion_8() -> Outcome {
    let mut rng = rng(8);
    let mut equal_families = 0;
    for case in 0..10_000 {
        let len = rng.gen_range(1..=8);
        let q: Vec<Ratio> = (0..len).map(|_| random_ratio(&mut rng, 30)).collect();
        let p: Vec<Ratio> = if case % 5 == 0 {
            let k = random_ratio(&mut rng, 30);
            q.iter().map(|x| x * &k).collect()
        } else {
            (0..len).map(|_| random_ratio(&mut rng, 30)).collect()
        };
        let got = mediant_bounds(&p, &q).map_err(|e| e.to_string())?;
        let ratios: Vec<Ratio> = p.iter().zip(&q).map(|(a, b)| a / b).collect();
        let lo = ratios.iter().min().unwrap();
        let hi = ratios.iter().max().unwrap();
        let combined = total(&p) / total(&q);
        ensure!(got.lo == *lo && got.hi == *hi && got.combined == combined, "case {case}: bounds mismatch");
        ensure!(*lo <= combined && combined <= *hi, "case {case}: combined ratio outside bounds");
        let touches = combined == *lo || combined == *hi;
        ensure!(touches == (lo == hi) && got.all_equal == touches, "case {case}: equality case wrong");
        equal_families += usize::from(touches);
    }

    let cases = phi_cases();
    for (k, case) in cases.iter().enumerate() {
        let brute = brute_phi(&case.support, &case.r, &case.c);
        let family: std::collections::BTreeSet<u64> = brute.maximizers.iter().copied().collect();
        for &x in &family {
            for &y in &family {
                ensure!(family.contains(&(x | y)), "case {k}: union of maximizers is not a maximizer");
                ensure!(x & y == 0 || family.contains(&(x & y)), "case {k}: intersection of maximizers is not a maximizer");
            }
        }
        let got = phi(&case.support, &case.r, &case.c);
        let sub = case.support.restrict(&got.rows, &got.cols);
        let r: Vec<Ratio> = got.rows.iter().map(|i| case.r[i].clone()).collect();
        let c: Vec<Ratio> = got.cols.iter().map(|j| case.c[j].clone()).collect();
        let (gap, _) = max_gap_set(&sub, &r, &c, &got.ratio);
        ensure!(gap.is_zero(), "case {k}: max-ratio block infeasible at its own quotient (gap {gap})");
        ensure!(total(&r) == &got.ratio * total(&c), "case {k}: block totals do not balance");
    }
    Ok(format!("10000 mediant families ({equal_families} equal-ratio), {} lattice/feasibility cases", cases.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("reference 500-round iterates within 1%", criterion_1),
        ("b12(k) = 1/(2k), exact and float", criterion_2),
        ("rounds to tolerance, naive vs decomposition", criterion_3),
        ("Hall test vs enumeration", criterion_4),
        ("max-ratio set vs enumeration", criterion_5),
        ("decomposition vs long naive run", criterion_6),
        ("iterate and decomposition invariants", criterion_7),
        ("mediant bounds and maximizer lattice", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("[PASS] criterion {}: {name} ({detail})", k + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
