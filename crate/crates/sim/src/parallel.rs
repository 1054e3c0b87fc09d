//! Multithreaded phase execution: blocks are shared out among threads that
//! talk only through channels.

use psmflow_core::partition::{BlockWorker, Envelope, Executor, Phase};
use psmflow_core::perf::Clock;
use psmflow_core::{Error, Result};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::time::Instant;

/// Monotonic wall clock.
#[derive(Clone, Copy, Debug)]
pub struct StdClock {
    start: Instant,
}

impl StdClock {
    pub fn new() -> Self {
        StdClock { start: Instant::now() }
    }
}

impl Default for StdClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for StdClock {
    fn now_ns(&self) -> u64 {
        self.start.elapsed().as_nanos() as u64
    }
}

enum Msg {
    Env(usize, Envelope),
    /// Thread finished sending for phase `seq`.
    Done(usize),
    Abort,
}

/// Runs each phase on `threads` scoped threads. Messages of phase `n` are
/// held back until every thread has finished phase `n`, which gives the same
/// delivery semantics as [`psmflow_core::partition::Sequential`].
#[derive(Clone, Copy, Debug)]
pub struct Threaded {
    pub threads: usize,
}

impl Threaded {
    pub fn new(threads: usize) -> Self {
        Threaded { threads: threads.max(1) }
    }
}

#[allow(clippy::too_many_arguments)]
fn thread_loop(
    me: usize,
    base: usize,
    workers: &mut [BlockWorker],
    phases: &[Phase],
    clock: &dyn Clock,
    rx: Receiver<Msg>,
    txs: Vec<Sender<Msg>>,
    chunk: usize,
) -> Result<()> {
    let nthreads = txs.len();
    let abort = |txs: &[Sender<Msg>]| {
        for (t, tx) in txs.iter().enumerate() {
            if t != me {
                let _ = tx.send(Msg::Abort);
            }
        }
    };
    // a peer can run at most one phase ahead of us
    let mut ahead: Vec<Envelope> = Vec::new();
    let mut ahead_done = 0;
    for (seq, &phase) in phases.iter().enumerate() {
        let mut out = Vec::new();
        for w in workers.iter_mut() {
            match w.run_phase(phase, clock) {
                Ok(v) => out.extend(v),
                Err(e) => {
                    abort(&txs);
                    return Err(e);
                }
            }
        }
        let t_wait = clock.now_ns();
        let mut local = core::mem::take(&mut ahead);
        for env in out {
            let t = env.dst / chunk;
            if t == me {
                local.push(env);
            } else if t < nthreads {
                let _ = txs[t].send(Msg::Env(seq, env));
            } else {
                abort(&txs);
                return Err(Error::Sync(format!("message for missing block {}", env.dst)));
            }
        }
        for (t, tx) in txs.iter().enumerate() {
            if t != me {
                let _ = tx.send(Msg::Done(seq));
            }
        }
        let mut pending = nthreads - 1 - ahead_done;
        ahead_done = 0;
        while pending > 0 {
            match rx.recv() {
                Ok(Msg::Env(s, env)) if s == seq => local.push(env),
                Ok(Msg::Env(_, env)) => ahead.push(env),
                Ok(Msg::Done(s)) if s == seq => pending -= 1,
                Ok(Msg::Done(_)) => ahead_done += 1,
                Ok(Msg::Abort) | Err(_) => return Err(Error::Sync("aborted by another worker".into())),
            }
        }
        let waited = clock.now_ns().saturating_sub(t_wait);
        if let Err(e) = deliver(workers, base, local) {
            abort(&txs);
            return Err(e);
        }
        let share = waited / workers.len().max(1) as u64;
        for w in workers.iter_mut() {
            w.times.add(phase.comm_category(), share);
        }
    }
    Ok(())
}

/// Deliver to this thread's blocks, enforcing one message per
/// `(src, dst, kind)` and phase.
fn deliver(workers: &mut [BlockWorker], base: usize, mut batch: Vec<Envelope>) -> Result<()> {
    batch.sort_by_key(|e| (e.dst, e.src, e.payload.tag()));
    if let Some(w) = batch
        .windows(2)
        .find(|w| (w[0].dst, w[0].src, w[0].payload.tag()) == (w[1].dst, w[1].src, w[1].payload.tag()))
    {
        return Err(Error::Sync(format!(
            "duplicate message kind {} from block {} to {}",
            w[0].payload.tag(),
            w[0].src,
            w[0].dst
        )));
    }
    for env in batch {
        let i = env.dst - base;
        workers[i].deliver(env);
    }
    Ok(())
}

impl Executor for Threaded {
    fn run_phases(&mut self, workers: &mut [BlockWorker], phases: &[Phase], clock: &dyn Clock) -> Result<()> {
        let n = workers.len();
        let threads = self.threads.min(n).max(1);
        if threads == 1 {
            return psmflow_core::partition::Sequential.run_phases(workers, phases, clock);
        }
        let chunk = n.div_ceil(threads);
        let chunks: Vec<&mut [BlockWorker]> = workers.chunks_mut(chunk).collect();
        let nthreads = chunks.len();
        let (txs, rxs): (Vec<Sender<Msg>>, Vec<Receiver<Msg>>) = (0..nthreads).map(|_| channel()).unzip();
        std::thread::scope(|s| {
            let handles: Vec<_> = chunks
                .into_iter()
                .zip(rxs)
                .enumerate()
                .map(|(t, (ws, rx))| {
                    let txs = txs.clone();
                    s.spawn(move || thread_loop(t, t * chunk, ws, phases, clock, rx, txs, chunk))
                })
                .collect();
            let mut first_err = None;
            for h in handles {
                let r = h.join().unwrap_or_else(|_| Err(Error::Sync("worker thread panicked".into())));
                if let Err(e) = r {
                    // the originating error outranks the aborts it caused
                    let is_abort = matches!(&e, Error::Sync(m) if m.starts_with("aborted"));
                    match &first_err {
                        None => first_err = Some(e),
                        Some(Error::Sync(m)) if m.starts_with("aborted") && !is_abort => first_err = Some(e),
                        _ => {}
                    }
                }
            }
            match first_err {
                Some(e) => Err(e),
                None => Ok(()),
            }
        })
    }
}
