//! Acceptance run: one PASS/FAIL line per criterion; exits non-zero on any
//! failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use energia_core::checks::{check_holder_mixed, check_war2, corpus_rng, random_set, run_suite, Suite};
use energia_core::constants::{eric_params, gemn_params, rtp_constants, thrt_trace, EvalCtx, LogBase};
use energia_core::decompose::{com2_budget, com2_simulate, decompose, Adversary, DecomposeConfig, Decomposition};
use energia_core::energy::oracle::{energy_oracle, DEFAULT_MAX_TUPLES};
use energia_core::energy::{energy, mixed_energy, rep_function, Mode};
use energia_core::exact::{parse_rational, PowerProduct};
use energia_core::kp::{bsg_extract, kp_pipeline, kp_verify, BsgTargets, Branch, KpMode, KpParams, PopularSumGraph};
use energia_core::set::{iterated_sumset, Generator};
use energia_core::{Error, IntSet};

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

/// The oracle corpus: 500 sets of at most 8 elements.
fn corpus() -> Vec<IntSet> {
    let mut rng = corpus_rng(500);
    (0..500).map(|_| random_set(&mut rng, 1..=8, -40..=40, false)).collect()
}

const MODES: [Mode; 2] = [Mode::Additive, Mode::Multiplicative];

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut runs = 0;
    for a in corpus() {
        for s in 2..=4 {
            for mode in MODES {
                let fast = energy(&a, s, mode).map_err(err)?.count;
                let slow = energy_oracle(&a, s, mode, DEFAULT_MAX_TUPLES).map_err(err)?.count;
                ensure(fast == slow, || format!("{a:?} s={s} {}: {fast} vs {slow}", mode.name()))?;
                runs += 1;
            }
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("{runs} energies equal, {:.1}s", took.as_secs_f64()))
}

fn identities() -> Outcome {
    let mut runs = 0;
    for a in corpus() {
        for s in 1..=4 {
            for mode in MODES {
                let r = rep_function(&a, s, mode).map_err(err)?;
                ensure(r.total() == Integer::from(a.len()).pow(s), || format!("{a:?}: total mass"))?;
                ensure(r.sum_squares() == energy(&a, s, mode).map_err(err)?.count, || format!("{a:?}: square mass"))?;
                runs += 1;
            }
        }
    }
    let pinned = [
        (IntSet::new([1, 2, 3]), Mode::Additive, 19),
        (IntSet::new([1, 2, 4]), Mode::Multiplicative, 19),
        (IntSet::new([1, 2, 5, 11]), Mode::Additive, 28),
    ];
    for (a, mode, want) in pinned {
        let fast = energy(&a, 2, mode).map_err(err)?.count;
        let slow = energy_oracle(&a, 2, mode, DEFAULT_MAX_TUPLES).map_err(err)?.count;
        ensure(fast == want && slow == want, || format!("{a:?}: {fast}/{slow}, expected {want}"))?;
    }
    Ok(format!("{runs} representation functions; pinned energies 19, 19, 28"))
}

fn battery() -> Outcome {
    let start = Instant::now();
    let suites =
        [Suite::Young, Suite::Holder, Suite::Mlpain, Suite::Union, Suite::Plunnecke, Suite::Csref, Suite::MixedCs];
    let mut total = 0;
    for suite in suites {
        let reports = run_suite(suite, 1000, 3, DEFAULT_MAX_TUPLES).map_err(err)?;
        let bad: Vec<_> = reports.iter().filter(|r| r.is_violation()).collect();
        ensure(bad.is_empty(), || format!("{}: {} violations, first {:?}", suite.name(), bad.len(), bad[0]))?;
        total += reports.len();
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(300), || format!("took {took:?}"))?;
    Ok(format!("{} suites x 1000 cases, {total} checks, 0 failures, {:.1}s", suites.len(), took.as_secs_f64()))
}

fn counterexamples() -> Outcome {
    for n in 4..=8 {
        let a = Generator::Mixed { n }.generate().map_err(err)?;
        let cube = Integer::from(a.len()).pow(3);
        let e = energy(&a, 2, Mode::Additive).map_err(err)?.count;
        let m = energy(&a, 2, Mode::Multiplicative).map_err(err)?.count;
        ensure(Integer::from(16) * &e >= cube && Integer::from(32) * &m >= cube, || format!("N={n}: E={e} M={m}"))?;
    }
    let zero = vec![IntSet::new(0..=10); 4];
    let mixed = mixed_energy(&zero, Mode::Multiplicative).map_err(err)?.count;
    ensure(mixed >= 121, || format!("mixed energy {mixed}"))?;
    let guard = check_holder_mixed(&zero, Mode::Multiplicative);
    ensure(matches!(guard, Err(Error::ZeroElement)), || format!("guard returned {guard:?}"))?;
    let squares = Generator::Powers { k: 2, n: 20 }.generate().map_err(err)?;
    let product = energy(&squares, 2, Mode::Additive).map_err(err)?.count * squares.sumset(&squares).len();
    ensure(product >= 160_000, || format!("E_2*|2N| = {product}"))?;
    let report = check_war2(2, 2, 20, DEFAULT_MAX_TUPLES).map_err(err)?;
    ensure(report.holds, || format!("{report:?}"))?;
    Ok(format!("A_N for N=4..8; mixed energy {mixed} >= 121 with the guard rejecting 0; E_2*|2N| = {product}"))
}

fn fiber_equivalence() -> Outcome {
    let mut rng = corpus_rng(5);
    for _ in 0..50 {
        let a = random_set(&mut rng, 2..=6, -30..=30, false);
        common::compare(&a)?;
    }
    Ok("50 sets, every stage cardinality equal".into())
}

fn constructive_bsg() -> Outcome {
    let mut worst = f64::INFINITY;
    for seed in 0..20 {
        let noise = random_set(&mut corpus_rng(seed), 32..=32, 1..=1_000_000, false);
        let u = IntSet::new(1..=32).union(&noise);
        let r = rep_function(&u, 2, Mode::Additive).map_err(err)?;
        // at least two unordered representations
        let filter = IntSet::new(r.iter().filter(|(_, c)| *c >= 3).map(|(n, _)| n.clone()));
        let g = PopularSumGraph::new(u.clone(), u.clone(), filter, Mode::Additive).map_err(err)?;
        let (a, report) = bsg_extract(&g, Some(&BsgTargets::default()), LogBase::Two).map_err(err)?;
        let doubled = a.sumset(&a).len();
        ensure(report.holds && doubled <= 4 * a.len() && 8 * a.len() >= u.len(), || {
            format!("seed {seed}: |A'|={} |A'+A'|={doubled} report {}", a.len(), report.holds)
        })?;
        worst = worst.min(a.len() as f64 / u.len() as f64);
    }
    Ok(format!("20 seeds; smallest |A'|/|U| = {worst:.3}"))
}

fn kp() -> Outcome {
    let a = IntSet::new(1..=16);
    let p = KpParams::new(4, parse_rational("0.05").unwrap(), KpMode::Calibrated);
    let res = kp_pipeline(&a, &p).map_err(err)?;
    ensure(res.branch == Branch::Subset, || format!("branch {}", res.branch.name()))?;
    let b = res.a_prime.clone().expect("subset branch");
    let spread = iterated_sumset(&b, 2, 1).map_err(err)?.len();
    ensure(b.len() >= 8 && spread <= 10 * b.len(), || format!("|A'|={} |2A'-A'|={spread}", b.len()))?;
    let reports = kp_verify(&res, &a, &[(1, 1), (2, 1), (2, 2)], None).map_err(err)?;
    ensure(reports.len() == 3 && reports.iter().all(|r| r.holds), || format!("{reports:?}"))?;
    Ok(format!("SubsetBranch, |A'| = {}, |2A'-A'| = {spread}, 3 constant bounds hold", b.len()))
}

/// `|X|` empty or `E(X) ≤ |X|^{2.8}`, exactly.
fn small_energy(x: &IntSet, mode: Mode) -> Result<bool, String> {
    if x.is_empty() {
        return Ok(true);
    }
    let e = energy(x, 2, mode).map_err(err)?.count;
    let bound = PowerProduct::one().pow(x.len(), parse_rational("2.8").unwrap());
    Ok(PowerProduct::new(e).cmp_exact(&bound).map_err(err)?.is_le())
}

fn run_decompose(a: &IntSet) -> Result<Decomposition, String> {
    let cfg = DecomposeConfig { k: parse_rational("1.2").unwrap(), s: 2, q: 4, ..DecomposeConfig::default() };
    let d = decompose(a, &cfg).map_err(err)?;
    ensure(d.b.union(&d.c) == *a && d.b.is_disjoint(&d.c), || "not a partition".into())?;
    ensure(d.iterations_used <= d.budget, || format!("{} iterations > budget {}", d.iterations_used, d.budget))?;
    ensure(small_energy(&d.b, Mode::Additive)?, || format!("E_2(B) too large, B = {:?}", d.b))?;
    ensure(small_energy(&d.c, Mode::Multiplicative)?, || format!("M_2(C) too large, C = {:?}", d.c))?;
    ensure(d.final_reports.iter().all(|r| r.holds), || format!("{:?}", d.final_reports))?;
    Ok(d)
}

fn decomposer() -> Outcome {
    let powers = IntSet::new((0..16).map(|i| Integer::from(3).pow(i)));
    let mixed = IntSet::new(1..=32).union(&powers);
    let d = run_decompose(&mixed)?;
    let ap = run_decompose(&IntSet::new(1..=32))?;
    ensure(ap.b.is_empty(), || format!("AP gave B = {:?}", ap.b))?;
    let gp = run_decompose(&powers)?;
    ensure(gp.iterations_used <= 1 && gp.trace.iter().all(|x| x.iteration == 1), || {
        format!("GP needed {} iterations", gp.iterations_used)
    })?;
    Ok(format!(
        "|B|={} |C|={} in {} of {} iterations; AP: B empty; GP: settled in {} iteration",
        d.b.len(),
        d.c.len(),
        d.iterations_used,
        d.budget,
        gp.iterations_used
    ))
}

fn constants() -> Outcome {
    let t2 = rtp_constants(2, 128).map_err(err)?;
    let t3 = rtp_constants(3, 128).map_err(err)?;
    ensure(t2.t_k == 2412 && t3.t_k == 4988, || format!("T_2={} T_3={}", t2.t_k, t3.t_k))?;
    let x = Float::with_val(256, 1) + Float::with_val(256, Rational::from((1, 2412)));
    let eta = x.log2();
    let tol = Float::with_val(256, &eta) >> 50u32;
    let lo_err = Float::with_val(256, &eta - &t2.eta_k.lo).abs();
    let hi_err = Float::with_val(256, &t2.eta_k.hi - &eta).abs();
    ensure(lo_err <= tol && hi_err <= tol, || "eta_2 enclosure too wide or off".into())?;
    let ctx = EvalCtx::default();
    let g = gemn_params(&Rational::from(1), 2, LogBase::Two).map_err(err)?;
    let lambda = g.lambda.eval(&ctx).map_err(err)?.exact;
    let l = g.l.eval(&ctx).map_err(err)?.exact;
    ensure(lambda == Some(Rational::from(31)) && l == Some(Rational::from(37200)), || format!("{lambda:?} {l:?}"))?;
    let e = eric_params(&Rational::from(30), 2).map_err(err)?;
    let s2 = e.log2_s2.eval(&ctx).map_err(err)?.exact;
    ensure(s2 == Some(Rational::from(246)), || format!("log2 s2 = {s2:?}"))?;
    for k in [2u32, 3] {
        let tr = thrt_trace(k, &Rational::from(1), &Integer::from(64)).map_err(err)?;
        let t = rtp_constants(k, 64).map_err(err)?.t_k;
        ensure(tr.growth == Rational::from(1) + Rational::from((1, t)), || format!("growth {}", tr.growth))?;
    }
    Ok("T_2=2412 T_3=4988, eta_2 to 50 bits, Lambda=31 l=37200, log2 s2=246, exact growth".into())
}

fn com2() -> Outcome {
    let mut worst = String::new();
    for n in [16u64, 64, 256] {
        for c in [Rational::from((1, 4)), Rational::from((1, 2))] {
            let budget = com2_budget(n, &c, &Rational::from(1)).map_err(err)?;
            let used = com2_simulate(n, &c, &Rational::from(1), Adversary::Minimal).map_err(err)?;
            ensure(used <= budget, || format!("n={n} c={c}: {used} > {budget}"))?;
            worst = format!("n={n} c={c}: {used} <= {budget}");
        }
    }
    Ok(format!("6 cases; last {worst}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("representation identities", identities),
        ("inequality battery", battery),
        ("counterexample reproductions", counterexamples),
        ("fiber oracle equivalence", fiber_equivalence),
        ("constructive BSG", constructive_bsg),
        ("structured-subset pipeline", kp),
        ("decomposer end-to-end", decomposer),
        ("constants reproduction", constants),
        ("deletion budget", com2),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] criterion {}: {name}: {detail} ({secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {detail} ({secs:.2}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
