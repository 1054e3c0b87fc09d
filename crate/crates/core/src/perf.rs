//! Performance models, timing categories and the scaling harness.

use crate::error::{Error, Result};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

/// Memory bandwidths in GB/s and the traffic of one lattice cell update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MachineModel {
    pub bandwidth_fast: f64,
    pub bandwidth_slow: f64,
    pub bytes_per_cell_update: f64,
}

impl MachineModel {
    /// D3Q19 in double precision: 19 loads and 19 stores of 8 bytes.
    pub const D3Q19_BYTES: f64 = 304.0;

    pub fn new(bandwidth_fast: f64, bandwidth_slow: f64, bytes_per_cell_update: f64) -> Result<Self> {
        if !(bandwidth_fast > 0.0 && bandwidth_slow > 0.0 && bytes_per_cell_update >= 0.0) {
            return Err(Error::Config(format!(
                "bandwidths must be positive (got {bandwidth_fast}, {bandwidth_slow})"
            )));
        }
        Ok(MachineModel {
            bandwidth_fast,
            bandwidth_slow,
            bytes_per_cell_update,
        })
    }
}

/// Bandwidth-bound lower limit of one step over `cells`, in milliseconds.
pub fn roofline_tmin(model: &MachineModel, cells: f64) -> f64 {
    model.bytes_per_cell_update * cells / (model.bandwidth_fast * 1e9) * 1e3
}

/// Amdahl estimate of the speedup from moving the fraction `frac_acc` of a
/// bandwidth-bound workload from slow to fast memory.
pub fn hybrid_speedup(frac_acc: f64, bw_slow: f64, bw_fast: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&frac_acc) || !(bw_slow > 0.0 && bw_fast > 0.0) {
        return Err(Error::Config(format!(
            "need 0 <= frac_acc <= 1 and positive bandwidths (got {frac_acc}, {bw_slow}, {bw_fast})"
        )));
    }
    Ok(1.0 / (1.0 + frac_acc * (bw_slow / bw_fast - 1.0)))
}

/// Ratio of two measured throughputs.
pub fn measured_speedup(fast: f64, slow: f64) -> Result<f64> {
    if !(slow > 0.0) {
        return Err(Error::Config(format!("baseline throughput {slow} must be positive")));
    }
    Ok(fast / slow)
}

/// Million lattice cell updates per second.
pub fn mlups(cells: f64, steps: f64, seconds: f64) -> Result<f64> {
    if !(seconds > 0.0) {
        return Err(Error::Config(format!("run time {seconds} s must be positive")));
    }
    Ok(cells * steps / seconds / 1e6)
}

/// Per-worker throughput relative to the single-worker entry.
/// `series` holds `(workers, MLUPs per worker)`.
pub fn parallel_efficiency(series: &[(usize, f64)]) -> Result<Vec<f64>> {
    let base = match series.first() {
        Some(&(1, b)) if b > 0.0 => b,
        _ => return Err(Error::Config("efficiency series needs a positive 1-worker baseline first".into())),
    };
    Ok(series.iter().map(|&(_, m)| m / base).collect())
}

/// Timed parts of a coupled step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Psm,
    PsmComm,
    Mapping,
    SetU,
    RedF,
    Pd,
    PdComm,
    Other,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::Psm,
        Category::PsmComm,
        Category::Mapping,
        Category::SetU,
        Category::RedF,
        Category::Pd,
        Category::PdComm,
        Category::Other,
    ];

    pub fn key(self) -> &'static str {
        ["PSM", "PSM-comm", "mapping", "setU", "redF", "PD", "PD-comm", "other"][self as usize]
    }
}

/// Monotonic time source in nanoseconds.
pub trait Clock: Sync {
    fn now_ns(&self) -> u64;
}

/// A clock that never advances.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_ns(&self) -> u64 {
        0
    }
}

/// Per-worker accumulated nanoseconds per category. `transfer_ns` covers
/// copying particle data into and out of the fluid kernels; it is part of
/// the mapping and reduction categories, reported separately for reference.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WorkerTimes {
    pub ns: [u64; 8],
    pub transfer_ns: u64,
}

impl WorkerTimes {
    pub fn add(&mut self, cat: Category, ns: u64) {
        self.ns[cat as usize] += ns;
    }

    pub fn get(&self, cat: Category) -> u64 {
        self.ns[cat as usize]
    }

    pub fn merge(&mut self, o: &WorkerTimes) {
        for k in 0..8 {
            self.ns[k] += o.ns[k];
        }
        self.transfer_ns += o.transfer_ns;
    }
}

/// Per-step wall times in milliseconds keyed by category.
#[derive(Clone, Debug, PartialEq)]
pub struct TimingReport {
    pub per_step_ms: [f64; 8],
    pub transfer_ms: f64,
    pub total_ms: f64,
    pub steps: u64,
    pub cells: u64,
    pub workers: usize,
}

impl TimingReport {
    /// Each named category is the maximum over workers; `other` is the
    /// remainder of the wall time.
    pub fn from_workers(workers: &[WorkerTimes], wall_ns: u64, steps: u64, cells: u64, worker_count: usize) -> Self {
        let s = steps.max(1) as f64;
        let mut per_step_ms = [0.0f64; 8];
        let mut transfer = 0u64;
        for w in workers {
            for cat in Category::ALL {
                if cat == Category::Other {
                    continue;
                }
                let v = w.get(cat) as f64 / 1e6 / s;
                per_step_ms[cat as usize] = per_step_ms[cat as usize].max(v);
            }
            transfer = transfer.max(w.transfer_ns);
        }
        let total_ms = wall_ns as f64 / 1e6 / s;
        let named: f64 = per_step_ms.iter().sum();
        per_step_ms[Category::Other as usize] = (total_ms - named).max(0.0);
        TimingReport {
            per_step_ms,
            transfer_ms: transfer as f64 / 1e6 / s,
            total_ms,
            steps,
            cells,
            workers: worker_count,
        }
    }

    pub fn get(&self, cat: Category) -> f64 {
        self.per_step_ms[cat as usize]
    }

    /// Tab-separated: a header line of keys, then one line of values.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        for cat in Category::ALL {
            let _ = write!(s, "{}\t", cat.key());
        }
        s.push_str("total\ttransfer\n");
        for v in self.per_step_ms {
            let _ = write!(s, "{v:.4}\t");
        }
        let _ = writeln!(s, "{:.4}\t{:.4}", self.total_ms, self.transfer_ms);
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingMode {
    Weak,
    Strong,
}

/// Block grid for `workers` blocks, doubling alternately along x, y and z.
pub fn weak_block_grid(workers: usize) -> Result<[usize; 3]> {
    if workers == 0 || !workers.is_power_of_two() {
        return Err(Error::Config(format!("weak scaling needs a power-of-two worker count, got {workers}")));
    }
    let mut g = [1usize; 3];
    let mut axis = 0;
    let mut n = 1;
    while n < workers {
        g[axis] *= 2;
        axis = (axis + 1) % 3;
        n *= 2;
    }
    Ok(g)
}

/// One benchmark run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSample {
    pub cells: u64,
    pub steps: u64,
    pub seconds: f64,
    pub timing: TimingReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub workers: usize,
    pub cells: u64,
    pub cells_per_worker: u64,
    pub seconds: f64,
    pub mlups: f64,
    pub mlups_per_worker: f64,
    pub efficiency: f64,
    /// Index of the repetition kept.
    pub best_rep: usize,
    pub timing: TimingReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    pub mode: ScalingMode,
    pub rows: Vec<ScalingRow>,
}

/// Run every worker count `reps` times and keep the fastest repetition.
/// `run(workers, rep)` performs one benchmark.
pub fn scaling_harness(
    mode: ScalingMode,
    worker_counts: &[usize],
    reps: usize,
    mut run: impl FnMut(usize, usize) -> Result<RunSample>,
) -> Result<ScalingReport> {
    if reps == 0 {
        return Err(Error::Config("at least one repetition is required".into()));
    }
    if worker_counts.first() != Some(&1) {
        return Err(Error::Config("worker counts must start with the 1-worker baseline".into()));
    }
    let mut rows = Vec::new();
    for &w in worker_counts {
        let mut best: Option<(usize, RunSample)> = None;
        for rep in 0..reps {
            let s = run(w, rep)?;
            if best.as_ref().map_or(true, |(_, b)| s.seconds < b.seconds) {
                best = Some((rep, s));
            }
        }
        let (best_rep, s) = best.expect("reps > 0");
        let m = mlups(s.cells as f64, s.steps as f64, s.seconds)?;
        rows.push(ScalingRow {
            workers: w,
            cells: s.cells,
            cells_per_worker: s.cells / w as u64,
            seconds: s.seconds,
            mlups: m,
            mlups_per_worker: m / w as f64,
            efficiency: 0.0,
            best_rep,
            timing: s.timing,
        });
    }
    let series: Vec<(usize, f64)> = rows.iter().map(|r| (r.workers, r.mlups_per_worker)).collect();
    for (r, e) in rows.iter_mut().zip(parallel_efficiency(&series)?) {
        r.efficiency = e;
    }
    match mode {
        ScalingMode::Weak => {
            if rows.windows(2).any(|w| w[0].cells_per_worker != w[1].cells_per_worker) {
                return Err(Error::Config("weak scaling runs must keep cells per worker constant".into()));
            }
        }
        ScalingMode::Strong => {
            if rows.windows(2).any(|w| w[0].cells != w[1].cells) {
                return Err(Error::Config("strong scaling runs must keep the total cell count".into()));
            }
        }
    }
    Ok(ScalingReport { mode, rows })
}

impl ScalingReport {
    /// Tab-separated table with one row per worker count.
    pub fn to_table(&self) -> String {
        let mut s = String::from("workers\tcells\tcells_per_worker\tseconds\tbest_rep\tMLUPs\tMLUPs_per_worker\tefficiency\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{:.6}\t{}\t{:.3}\t{:.3}\t{:.4}",
                r.workers, r.cells, r.cells_per_worker, r.seconds, r.best_rep, r.mlups, r.mlups_per_worker, r.efficiency
            );
        }
        s
    }
}
