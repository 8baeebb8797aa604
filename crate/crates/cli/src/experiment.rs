use clap::Subcommand;
use energia_core::checks::{check_holder_mixed, check_war2, CheckReport, Relation, Side};
use energia_core::decompose::{decompose, DecomposeConfig};
use energia_core::energy::oracle::energy_oracle;
use energia_core::energy::{energy, mixed_energy, Mode};
use energia_core::set::{iterated_sumset, Generator};
use energia_core::{Error, IntSet};
use rug::ops::Pow;
use rug::{Integer, Rational};
use serde_json::json;

use crate::commands::{assertion, parse_rational, write_csv};
use crate::input::render_set;
use crate::report::Report;
use crate::{Ctx, Failure, KpModeArg};

#[derive(Subcommand, Debug)]
pub enum ExperimentCmd {
    /// `E_s(𝒩_k)·|s𝒩_k| ≥ N^{2s}` for `𝒩_k = {1, 2^k, …, N^k}`.
    WarrenSquares {
        #[arg(long, default_value_t = 20)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 2)]
        s: u32,
    },
    /// Decomposes an arithmetic progression joined with a geometric one.
    ApGpMix {
        #[arg(long, default_value_t = 32)]
        ap: u32,
        #[arg(long, default_value_t = 16)]
        gp: u32,
        #[arg(long, default_value_t = 3)]
        ratio: i64,
        #[arg(long, default_value = "1.2", value_parser = parse_rational)]
        k: Rational,
        #[arg(long, default_value_t = 2)]
        s: u32,
        #[arg(long, default_value_t = 4)]
        q: u32,
        #[arg(long, value_enum, default_value = "calibrated")]
        mode: KpModeArg,
    },
    /// Mixed multiplicative energy of four copies of `{0..N}` is large, and the
    /// product bound refuses sets containing 0.
    ZeroObstruction {
        #[arg(long, default_value_t = 10)]
        n: u32,
    },
}

pub fn run(ctx: &Ctx, report: &mut Report, which: &ExperimentCmd) -> Result<(), Failure> {
    match which {
        ExperimentCmd::WarrenSquares { n, k, s } => {
            let a = Generator::Powers { k: *k, n: *n }.generate()?;
            report.input(&a);
            let e = energy(&a, *s, Mode::Additive)?.count;
            let size = iterated_sumset(&a, *s, 0)?.len();
            report.put("set", render_set(&a));
            report.put("energy", e.to_string());
            report.put("sumset_size", size.to_string());
            report.put("product", Integer::from(&e * size).to_string());
            report.put("target", Integer::from(*n).pow(2 * s).to_string());
            // the brute-force cross-check respects the tuple guard
            match energy_oracle(&a, *s, Mode::Additive, ctx.guard) {
                Ok(o) => report.checks.push(assertion("energy-oracle", o.count == e, format!("oracle {}", o.count))),
                Err(err) if err.is_guard() => report.put("oracle", "skipped: over the tuple guard"),
                Err(err) => return Err(err.into()),
            }
            report.checks.push(check_war2(*k, *s, *n, ctx.guard)?);
        }
        ExperimentCmd::ApGpMix { ap, gp, ratio, k, s, q, mode } => {
            let ap_set = Generator::Ap { start: 1, step: 1, n: *ap }.generate()?;
            let gp_set = Generator::Gp { start: 1, ratio: *ratio, n: *gp }.generate()?;
            let a = ap_set.union(&gp_set);
            report.input(&a);
            let cfg = DecomposeConfig { k: k.clone(), s: *s, q: *q, mode: (*mode).into(), ..DecomposeConfig::default() };
            let d = decompose(&a, &cfg)?;
            report.put("set", render_set(&a));
            report.put("B", render_set(&d.b));
            report.put("C", render_set(&d.c));
            report.put("iterations_used", d.iterations_used.to_string());
            report.put("budget", d.budget.to_string());
            report.put("extractor_failed", d.extractor_failed);
            let partition = d.b.union(&d.c) == a && d.b.is_disjoint(&d.c);
            report.checks.push(assertion("exact-partition", partition, format!("|B| = {}, |C| = {}", d.b.len(), d.c.len())));
            report.checks.push(CheckReport::evaluate(
                "iteration-budget",
                Side::int(d.iterations_used),
                Relation::Le,
                Side::int(d.budget),
                &a.canonical(),
            )?);
            report.checks.extend(d.trace.iter().map(|x| x.report.clone()));
            report.checks.extend(d.final_reports.iter().cloned());
            let rows: Vec<Vec<String>> = d
                .trace
                .iter()
                .map(|x| vec![x.iteration.to_string(), x.strategy.to_string(), x.piece.len().to_string(), x.report.lhs.clone()])
                .collect();
            write_csv(ctx, &["iteration", "strategy", "piece_size", "energy"], &rows)?;
        }
        ExperimentCmd::ZeroObstruction { n } => {
            let a = IntSet::new(0..=i64::from(*n));
            report.input(&a);
            let copies = vec![a.clone(); 4];
            let mixed = mixed_energy(&copies, Mode::Multiplicative)?.count;
            let floor = Integer::from(n + 1).pow(2);
            report.put("mixed_energy", mixed.to_string());
            report.checks.push(CheckReport::evaluate(
                "zero-mixed-energy",
                Side::int(mixed),
                Relation::Ge,
                Side::int(floor),
                &a.canonical(),
            )?);
            let guard = check_holder_mixed(&copies, Mode::Multiplicative);
            let rejected = matches!(guard, Err(Error::ZeroElement));
            report.put("product_bound", json!(if rejected { "rejected: 0 in a multiplicative set" } else { "accepted" }));
            report.checks.push(assertion("zero-guard", rejected, "the multiplicative product bound must refuse 0".into()));
        }
    }
    Ok(())
}
