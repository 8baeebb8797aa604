use std::path::Path;

use clap::{Args, Subcommand, ValueEnum};
use energia_core::checks::{corpus_rng, random_set, run_suite, CheckReport, Suite};
use energia_core::constants::{
    bta_eta, eric_params, gemn_params, rtp_constants, rtp_exponent_bound, thrt_trace, EvalCtx, ExponentExpr, LogBase,
    TraceEntry,
};
use energia_core::decompose::{decompose as run_decompose, decompose_eric, DecomposeConfig, Decomposition, EricConfig, Extractor};
use energia_core::energy::oracle::energy_oracle;
use energia_core::energy::{energy as fast_energy, Mode};
use energia_core::exact::{format_float, parse_rational as exact_rational, Interval};
use energia_core::kp::{kp_pipeline, kp_verify, Branch, KpParams, KpResult};
use energia_core::set::{iterated_product_set, iterated_sumset, Generator};
use energia_core::IntSet;
use rug::{Integer, Rational};
use serde_json::{json, Value};

use crate::input::{read_set, render_set};
use crate::report::{decimal, real, Report};
use crate::{Ctx, Failure, KpModeArg};

pub fn parse_rational(s: &str) -> Result<Rational, String> {
    exact_rational(s).map_err(|e| e.to_string())
}

pub fn parse_pair(s: &str) -> Result<(u32, u32), String> {
    let (m, n) = s.split_once(',').ok_or_else(|| format!("expected m,n, got {s:?}"))?;
    let num = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("{x:?}: {e}"));
    Ok((num(m)?, num(n)?))
}

#[derive(Clone, Debug)]
pub struct Suites(pub Vec<Suite>);

pub fn parse_suites(s: &str) -> Result<Suites, String> {
    if s == "all" {
        return Ok(Suites(Suite::ALL.to_vec()));
    }
    let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
    s.parse::<Suite>().map(|x| Suites(vec![x])).map_err(|_| format!("unknown suite {s:?}; known: all, {}", names.join(", ")))
}

fn load(report: &mut Report, path: Option<&Path>) -> Result<IntSet, Failure> {
    let a = read_set(path).map_err(Failure::Usage)?;
    report.input(&a);
    Ok(a)
}

fn count(x: impl ToString) -> Value {
    Value::String(x.to_string())
}

pub fn write_csv(ctx: &Ctx, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let Some(path) = &ctx.csv else { return Ok(()) };
    let io = |e: csv::Error| Failure::Io(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn energy(ctx: &Ctx, report: &mut Report, path: Option<&Path>, s: u32, mode: Mode, oracle: bool) -> Result<(), Failure> {
    let a = load(report, path)?;
    let e = fast_energy(&a, s, mode)?;
    report.put("energy", count(&e.count));
    report.put("arity", s);
    report.put("mode", mode.name());
    report.put("set_size", count(a.len()));
    if let Some(x) = &e.exponent {
        report.put("exponent", json!({ "value": decimal(&format_float(x, 25)), "precision_bits": x.prec() }));
    }
    if oracle {
        let o = energy_oracle(&a, s, mode, ctx.guard)?;
        report.put("oracle", count(&o.count));
        report.put("oracle_agrees", o.count == e.count);
        if o.count != e.count {
            return Err(Failure::Lib(energia_core::Error::Invariant("convolution and enumeration disagree".into())));
        }
    }
    Ok(())
}

pub fn sumset(report: &mut Report, path: Option<&Path>, m: u32, n: u32, mode: Mode) -> Result<(), Failure> {
    let a = load(report, path)?;
    let (set, size) = match mode {
        Mode::Additive => {
            let s = iterated_sumset(&a, m, n)?;
            (render_set(&s), s.len())
        }
        Mode::Multiplicative => {
            let s = iterated_product_set(&a, m, n)?;
            let all_integral = s.iter().all(|x| *x.denom() == 1);
            let v = if all_integral {
                render_set(&IntSet::new(s.iter().map(|x| x.numer().clone())))
            } else {
                Value::Array(s.iter().map(count).collect())
            };
            (v, s.len())
        }
    };
    report.put("set", set);
    report.put("size", count(size));
    report.put("m", m);
    report.put("n", n);
    report.put("mode", mode.name());
    Ok(())
}

pub fn check(ctx: &Ctx, report: &mut Report, suites: &Suites, cases: usize) -> Result<(), Failure> {
    let mut summary = serde_json::Map::new();
    for &suite in &suites.0 {
        let reports = run_suite(suite, cases, ctx.seed, ctx.guard)?;
        let mut names: Vec<&str> = reports.iter().map(|r| r.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        summary.insert(
            suite.name().into(),
            json!({
                "cases": count(cases),
                "checks": count(reports.len()),
                "passed": count(reports.iter().filter(|r| r.holds).count()),
                "violations": count(reports.iter().filter(|r| r.is_violation()).count()),
                "informational": count(reports.iter().filter(|r| !r.mandatory).count()),
                "lemmas": names,
            }),
        );
        report.checks.extend(reports);
    }
    report.put("suites", summary);
    Ok(())
}

fn opt(x: &Option<Integer>) -> Value {
    x.as_ref().map_or(Value::Null, count)
}

pub fn kp_json(res: &KpResult) -> Value {
    let s = &res.stats;
    json!({
        "branch": res.branch.name(),
        "mode": res.mode.name(),
        "op": res.op.name(),
        "arity": res.arity,
        "delta": res.delta.to_string(),
        "nu": real(&res.nu, 25),
        "set_size": count(res.set_size),
        "energy_s": count(&res.energy_s),
        "energy_half": count(&res.energy_half),
        "energy_condition": res.energy_condition,
        "a_prime": res.a_prime.as_ref().map_or(Value::Null, render_set),
        "u_prime": res.u_prime.as_ref().map_or(Value::Null, render_set),
        "anchor_sum": opt(&res.anchor_sum),
        "z_sum": opt(&res.z_sum),
        "shift": opt(&res.shift),
        "stats": {
            "S": count(s.s), "G": count(s.g), "anchor_score": count(s.anchor_score), "G1": count(s.g1),
            "Y": count(s.y), "Y1": count(s.y1), "Y2": count(s.y2), "sigma_Y1": count(s.sigma_y1),
            "sigma_Y2": count(s.sigma_y2), "sigma_G1": count(s.sigma_g1), "U": count(s.u), "V": count(s.v),
            "S'": count(s.s_prime), "graph_edges": count(s.graph_edges), "U'": count(s.u_prime),
            "Y3": count(s.y3), "A'": count(s.a_prime),
        },
        "trace": res.trace.iter().map(|r| json!({
            "stage": r.stage,
            "cardinality": count(r.cardinality),
            "threshold": r.threshold,
        })).collect::<Vec<_>>(),
    })
}

pub fn kp(
    ctx: &Ctx,
    report: &mut Report,
    path: Option<&Path>,
    p: &KpParams,
    pairs: &[(u32, u32)],
    practical: Option<&Rational>,
) -> Result<(), Failure> {
    let a = load(report, path)?;
    let res = kp_pipeline(&a, p)?;
    report.put("kp", kp_json(&res));
    report.checks.extend(res.checks.iter().cloned());
    if !pairs.is_empty() {
        if res.branch == Branch::Subset {
            report.checks.extend(kp_verify(&res, &a, pairs, practical)?);
        } else {
            report.put("verify", "skipped: the energy branch has no subset");
        }
    }
    let rows: Vec<Vec<String>> = res
        .trace
        .iter()
        .map(|r| vec![r.stage.to_string(), r.cardinality.to_string(), r.threshold.clone().unwrap_or_default()])
        .collect();
    write_csv(ctx, &["stage", "cardinality", "threshold"], &rows)
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ExtractorArg {
    Auto,
    #[value(alias = "kp")]
    KpMultiplicative,
    Exhaustive,
}

impl From<ExtractorArg> for Extractor {
    fn from(e: ExtractorArg) -> Extractor {
        match e {
            ExtractorArg::Auto => Extractor::Auto,
            ExtractorArg::KpMultiplicative => Extractor::KpMultiplicative,
            ExtractorArg::Exhaustive => Extractor::Exhaustive,
        }
    }
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    /// Integers, whitespace-separated or as a JSON array; `-` or nothing
    /// reads standard input.
    input: Option<std::path::PathBuf>,
    #[arg(long, default_value = "1", value_parser = parse_rational)]
    k: Rational,
    /// Multiplicative energy arity of the stopping rule.
    #[arg(long, default_value_t = 2)]
    s: u32,
    /// Additive energies are `E_{q/2}`.
    #[arg(long, default_value_t = 4)]
    q: u32,
    #[arg(long, value_enum, default_value = "calibrated")]
    mode: KpModeArg,
    #[arg(long, value_enum, default_value = "auto")]
    extractor: ExtractorArg,
    #[arg(long, value_parser = parse_rational)]
    piece_exponent: Option<Rational>,
    #[arg(long, value_parser = parse_rational)]
    final_exponent: Option<Rational>,
    /// Pieces have at least `⌈Cc·|A_i|^{1−c}⌉` elements.
    #[arg(long, default_value = "1/2", value_parser = parse_rational)]
    c: Rational,
    #[arg(long, default_value = "1", value_parser = parse_rational)]
    cc: Rational,
    #[arg(long, default_value = "0.05", value_parser = parse_rational)]
    delta: Rational,
    /// `m` in the reported `|B^(m)|`.
    #[arg(long, default_value_t = 2)]
    m: u32,
    /// Run the dual loop: multiplicatively small pieces, additive stopping rule.
    #[arg(long)]
    dual: bool,
    #[arg(long, default_value_t = 2)]
    s1: u32,
    #[arg(long, default_value_t = 2)]
    s2: u32,
    /// Residuals of at most this size stop the dual loop.
    #[arg(long, default_value_t = 4)]
    small_set: usize,
}

fn decomposition_json(d: &Decomposition) -> Value {
    json!({
        "B": render_set(&d.b),
        "C": render_set(&d.c),
        "B_size": count(d.b.len()),
        "C_size": count(d.c.len()),
        "budget": count(d.budget),
        "iterations_used": count(d.iterations_used),
        "extractor_failed": d.extractor_failed,
        "trace": d.trace.iter().map(|x| json!({
            "branch": x.branch.name(),
            "iteration": count(x.iteration),
            "strategy": x.strategy,
            "piece": render_set(&x.piece),
            "min_size": count(x.min_size),
            "certificate": x.report,
        })).collect::<Vec<_>>(),
        "stop_reports": d.stop_reports,
        "final_reports": d.final_reports,
    })
}

pub fn decompose(ctx: &Ctx, report: &mut Report, args: &DecomposeArgs) -> Result<(), Failure> {
    let a = load(report, args.input.as_deref())?;
    let d = if args.dual {
        let cfg = EricConfig {
            k: args.k.clone(),
            s1: args.s1,
            s2: args.s2,
            small_set: args.small_set,
            mode: args.mode.into(),
            extractor: args.extractor.into(),
            c: args.c.clone(),
            cc: args.cc.clone(),
            delta: args.delta.clone(),
        };
        decompose_eric(&a, &cfg)?
    } else {
        let cfg = DecomposeConfig {
            k: args.k.clone(),
            s: args.s,
            q: args.q,
            mode: args.mode.into(),
            extractor: args.extractor.into(),
            piece_exponent: args.piece_exponent.clone(),
            final_exponent: args.final_exponent.clone(),
            c: args.c.clone(),
            cc: args.cc.clone(),
            delta: args.delta.clone(),
            m: args.m,
        };
        run_decompose(&a, &cfg)?
    };
    report.put("loop", if args.dual { "dual" } else { "sum-product" });
    report.put("decomposition", decomposition_json(&d));
    report.checks.extend(d.trace.iter().map(|x| x.report.clone()));
    report.checks.extend(d.stop_reports.iter().cloned());
    report.checks.extend(d.final_reports.iter().cloned());
    let rows: Vec<Vec<String>> = d
        .trace
        .iter()
        .map(|x| {
            vec![
                x.branch.name().to_string(),
                x.iteration.to_string(),
                x.strategy.to_string(),
                x.piece.len().to_string(),
                x.min_size.to_string(),
                x.report.lhs.clone(),
                x.report.rhs.clone(),
                x.report.holds.to_string(),
            ]
        })
        .collect();
    write_csv(ctx, &["branch", "iteration", "strategy", "piece_size", "min_size", "energy", "bound", "holds"], &rows)
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LogArg {
    Two,
    Natural,
}

#[derive(Subcommand, Debug)]
pub enum ConstantsCmd {
    /// `T_k` and `η_k`; with `--s`, also the exponent bound at `s`.
    Rtp {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        s: Option<Integer>,
    },
    /// `Λ, l, m, U, s` of the sum-product loop.
    Gemn {
        #[arg(long, value_parser = parse_rational)]
        k: Rational,
        #[arg(long)]
        q: u32,
        /// Reading of `log q` in `Λ`.
        #[arg(long, value_enum, default_value = "two")]
        log: LogArg,
    },
    /// `k, s₂, U₁, s₁` of the dual loop.
    Eric {
        #[arg(long, value_parser = parse_rational)]
        b: Rational,
        #[arg(long)]
        m: u32,
    },
    /// The geometric exponent iteration.
    Thrt {
        #[arg(long)]
        k: u32,
        #[arg(long, value_parser = parse_rational)]
        lambda0: Rational,
        #[arg(long)]
        s: Integer,
    },
    /// Largest `k` whose parameter chain keeps `log₂ s` below a target.
    Bta {
        #[arg(long, value_parser = parse_rational)]
        log2_s: Rational,
    },
}

fn trace_json(t: &[TraceEntry]) -> Value {
    serde_json::to_value(t).expect("serialisable")
}

fn interval_json(iv: &Interval) -> Value {
    json!({
        "lo": format_float(&iv.lo, 30),
        "hi": format_float(&iv.hi, 30),
        "precision_bits": iv.prec(),
    })
}

pub fn constants(ctx: &Ctx, report: &mut Report, which: &ConstantsCmd) -> Result<(), Failure> {
    let ectx = EvalCtx { prec: ctx.precision, ..EvalCtx::default() };
    match which {
        ConstantsCmd::Rtp { k, s } => {
            let c = rtp_constants(*k, ctx.precision)?;
            report.put("T_k", count(&c.t_k));
            report.put("eta_k", real(&c.eta_k, 25)["value"].clone());
            report.put("eta_k_enclosure", interval_json(&c.eta_k));
            if let Some(s) = s {
                report.put("exponent_bound", real(&rtp_exponent_bound(*k, s, ctx.precision)?, 25));
            }
        }
        ConstantsCmd::Gemn { k, q, log } => {
            let base = match log {
                LogArg::Two => LogBase::Two,
                LogArg::Natural => LogBase::Natural,
            };
            report.put("trace", trace_json(&gemn_params(k, *q, base)?.trace(&ectx)?));
        }
        ConstantsCmd::Eric { b, m } => {
            report.put("trace", trace_json(&eric_params(b, *m)?.trace(&ectx)?));
        }
        ConstantsCmd::Thrt { k, lambda0, s } => {
            let t = thrt_trace(*k, lambda0, s)?;
            report.put("r", t.r);
            report.put("growth", t.growth.to_string());
            report.put("crossing", t.crossing.map_or(Value::Null, count));
            let show = |v: &Rational| decimal(&format_float(&rug::Float::with_val(ctx.precision, v), 25));
            report.put("values", t.values.iter().map(show).collect::<Vec<_>>());
            let rows: Vec<Vec<String>> =
                t.values.iter().enumerate().map(|(i, v)| vec![i.to_string(), show(v), v.to_string()]).collect();
            write_csv(ctx, &["i", "value", "exact"], &rows)?;
        }
        ConstantsCmd::Bta { log2_s } => {
            let r = bta_eta(&ExponentExpr::rat(log2_s.clone()), &ectx)?;
            report.put("k", r.k.to_string());
            report.put("k_decimal", decimal(&format_float(&rug::Float::with_val(ctx.precision, &r.k), 25)));
            report.put("q", r.q);
            report.put("certificate", trace_json(&r.certificate));
        }
    }
    Ok(())
}

#[derive(Subcommand, Debug)]
pub enum GenCmd {
    /// `{start + i·step}`.
    Ap {
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        start: i64,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        step: i64,
        #[arg(long)]
        n: u32,
    },
    /// `{start·ratio^i}`.
    Gp {
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        start: i64,
        #[arg(long, default_value_t = 2, allow_negative_numbers = true)]
        ratio: i64,
        #[arg(long)]
        n: u32,
    },
    /// `{1, 2^k, …, N^k}`.
    Powers {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
    },
    /// `{1..N} ∪ {N², …, N^N}`.
    Mixed {
        #[arg(long)]
        n: u32,
    },
    /// `{1..N}`.
    Interval {
        #[arg(long)]
        n: u32,
    },
    /// `{p(i) : 1 ≤ i ≤ N}`, coefficients in increasing degree.
    Poly {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        coeffs: Vec<i64>,
        #[arg(long)]
        n: u32,
    },
    /// Distinct uniform values from `[min, max]`, from the global seed.
    Random {
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        min: i64,
        #[arg(long, default_value_t = 1000, allow_negative_numbers = true)]
        max: i64,
        #[arg(long)]
        exclude_zero: bool,
    },
}

pub fn generate(ctx: &Ctx, kind: &GenCmd) -> Result<IntSet, Failure> {
    let g = match kind {
        GenCmd::Ap { start, step, n } => Generator::Ap { start: *start, step: *step, n: *n },
        GenCmd::Gp { start, ratio, n } => Generator::Gp { start: *start, ratio: *ratio, n: *n },
        GenCmd::Powers { k, n } => Generator::Powers { k: *k, n: *n },
        GenCmd::Mixed { n } => Generator::Mixed { n: *n },
        GenCmd::Interval { n } => Generator::Interval { n: *n },
        GenCmd::Poly { coeffs, n } => {
            Generator::PolyImage { coeffs: coeffs.clone(), domain: Generator::Interval { n: *n }.generate()? }
        }
        GenCmd::Random { size, min, max, exclude_zero } => {
            if min > max || *size == 0 {
                return Err(Failure::Usage("need min <= max and a positive size".into()));
            }
            return Ok(random_set(&mut corpus_rng(ctx.seed), *size..=*size, *min..=*max, *exclude_zero));
        }
    };
    Ok(g.generate()?)
}

/// A mandatory yes/no assertion as a report: `1 >= 1` when it holds.
pub fn assertion(name: &str, holds: bool, detail: String) -> CheckReport {
    use energia_core::checks::{Relation, Side};
    CheckReport::evaluate(name, Side::int(u32::from(holds)), Relation::Ge, Side::int(1), &detail)
        .expect("integer comparison")
        .with_note(detail)
}
