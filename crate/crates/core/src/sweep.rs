//! Parameter sweeps over the two benchmark problems, with CSV rendering.
//!
//! Rows of a sweep (one per budget value) run on a bounded pool of worker
//! threads; cells within a row run in order so each LP can start from the
//! previous basis. Results come back in grid order whatever the schedule.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::problems::{build_portfolio_with, gen_knapsack, KnapsackParams, PortfolioData, PortfolioParams};
use crate::reform::block_value;
use crate::solver::{solve_conic, solve_lp_warm, Basis, SolverConfig, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackCell {
    pub delta: f64,
    pub eps: f64,
    pub objective: f64,
    pub status: Status,
    pub solve_ms: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioCell {
    pub delta_bar: f64,
    pub eps: f64,
    /// Optimal worst-case CVaR.
    pub objective: f64,
    pub status: Status,
    pub solve_ms: f64,
    pub cut_count: usize,
    /// Worst-case CVaR of the nominal portfolio.
    pub nominal_value: f64,
    /// `(nominal_value - objective) / objective`.
    pub gap: f64,
    pub x: Vec<f64>,
}

fn check_lists(outer: &[f64], eps: &[f64], outer_name: &str) -> Result<()> {
    if outer.is_empty() {
        return Err(Error::Usage(format!("the {outer_name} list is empty")));
    }
    if eps.is_empty() {
        return Err(Error::Usage("the epsilon list is empty".into()));
    }
    if let Some(e) = eps.iter().find(|e| !(0.0..1.0).contains(*e)) {
        return Err(Error::Domain {
            what: "eps",
            value: *e,
            domain: "[0, 1)",
        });
    }
    Ok(())
}

/// Runs `job(r)` for every row index on at most `workers` threads and
/// returns the results in row order.
fn run_rows<T: Send>(rows: usize, workers: usize, job: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = workers.clamp(1, rows.max(1));
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<T>>> = Mutex::new((0..rows).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let r = next.fetch_add(1, Ordering::Relaxed);
                if r >= rows {
                    break;
                }
                let v = job(r);
                out.lock().expect("no worker panics while holding the lock")[r] = Some(v);
            });
        }
    });
    out.into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|v| v.expect("every row ran"))
        .collect()
}

/// Default worker count: the available parallelism.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Knapsack objective for every `(delta, eps)` pair, deltas outermost.
pub fn knapsack_sweep(base: &KnapsackParams, deltas: &[f64], eps: &[f64], cfg: &SolverConfig, workers: usize) -> Result<Vec<KnapsackCell>> {
    check_lists(deltas, eps, "delta")?;
    cfg.validate()?;
    let rows = run_rows(deltas.len(), workers, |r| -> Result<Vec<KnapsackCell>> {
        let mut basis: Option<Basis> = None;
        let mut cells = Vec::with_capacity(eps.len());
        for &e in eps {
            let p = KnapsackParams {
                delta: deltas[r],
                eps: e,
                ..*base
            };
            let t0 = Instant::now();
            let (_, built) = gen_knapsack(&p)?;
            let (res, b) = solve_lp_warm(&built.model, cfg, basis.as_ref())?;
            let solve_ms = t0.elapsed().as_secs_f64() * 1e3;
            basis = Some(b);
            cells.push(KnapsackCell {
                delta: deltas[r],
                eps: e,
                objective: res.objective,
                status: res.status,
                solve_ms,
                x: built.decision(&res),
            });
        }
        Ok(cells)
    });
    rows.into_iter().collect::<Result<Vec<_>>>().map(|r| r.into_iter().flatten().collect())
}

/// Portfolio optimum and nominal-portfolio gap for every `(delta_bar, eps)`
/// pair, budgets outermost.
pub fn portfolio_sweep(
    data: &PortfolioData,
    base: &PortfolioParams,
    delta_bars: &[f64],
    eps: &[f64],
    cfg: &SolverConfig,
    workers: usize,
) -> Result<Vec<PortfolioCell>> {
    check_lists(delta_bars, eps, "delta_bar")?;
    cfg.validate()?;
    let rows = run_rows(delta_bars.len(), workers, |r| -> Result<Vec<PortfolioCell>> {
        eps.iter()
            .map(|&e| {
                let p = PortfolioParams {
                    delta_bar: delta_bars[r],
                    eps: e,
                    ..*base
                };
                let t0 = Instant::now();
                let (inst, built) = build_portfolio_with(data, &p)?;
                let res = solve_conic(&built.model, cfg);
                let solve_ms = t0.elapsed().as_secs_f64() * 1e3;
                let nominal_value = block_value(&inst.spec()?, &inst.nominal_portfolio(), cfg)?;
                Ok(PortfolioCell {
                    delta_bar: delta_bars[r],
                    eps: e,
                    objective: res.objective,
                    status: res.status,
                    solve_ms,
                    cut_count: res.cut_count,
                    nominal_value,
                    gap: (nominal_value - res.objective) / res.objective,
                    x: built.decision(&res),
                })
            })
            .collect()
    });
    rows.into_iter().collect::<Result<Vec<_>>>().map(|r| r.into_iter().flatten().collect())
}

fn ms(v: f64, timing: bool) -> String {
    if timing {
        format!("{v:.1}")
    } else {
        "0".into()
    }
}

/// CSV with header `delta,epsilon,objective,status,solve_ms` after one
/// `#` comment line of metadata. Without `timing` the time column is 0 so
/// reruns are byte-identical.
pub fn knapsack_csv(meta: &str, cells: &[KnapsackCell], timing: bool) -> String {
    let mut out = format!("# {meta}\ndelta,epsilon,objective,status,solve_ms\n");
    for c in cells {
        let _ = writeln!(out, "{},{},{:.9},{},{}", c.delta, c.eps, c.objective, c.status, ms(c.solve_ms, timing));
    }
    out
}

/// CSV with header
/// `delta_bar,epsilon,objective,status,solve_ms,cut_count,nominal_value,gap,x1..xn`.
pub fn portfolio_csv(meta: &str, cells: &[PortfolioCell], timing: bool) -> String {
    let n = cells.first().map_or(0, |c| c.x.len());
    let mut out = format!("# {meta}\ndelta_bar,epsilon,objective,status,solve_ms,cut_count,nominal_value,gap");
    for j in 1..=n {
        let _ = write!(out, ",x{j}");
    }
    out.push('\n');
    for c in cells {
        let _ = write!(
            out,
            "{},{},{:.9},{},{},{},{:.9},{:.9}",
            c.delta_bar,
            c.eps,
            c.objective,
            c.status,
            ms(c.solve_ms, timing),
            c.cut_count,
            c.nominal_value,
            c.gap
        );
        for v in &c.x {
            // Clean tiny negatives so the text does not flicker in sign.
            let v = if v.abs() < 5e-10 { 0.0 } else { *v };
            let _ = write!(out, ",{v:.6}");
        }
        out.push('\n');
    }
    out
}
