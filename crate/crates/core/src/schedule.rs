//! Dependency-driven row scheduling shared by factorization and triangular
//! solves.
//!
//! Every row has a ready flag. Workers claim rows in a fixed order through a
//! shared counter and advance each claimed row until it needs a dependency
//! whose flag is not yet set. Instead of spinning on that flag, the worker
//! parks the row with its cursor and keeps going: it retries parked rows
//! (oldest first) and claims the next row. The lowest unfinished row always
//! has every dependency finished, so some worker can always advance it.
//!
//! A row's arithmetic is the same sequence of operations in every mode; only
//! the inter-row timing differs, so results are bitwise reproducible.

use std::marker::PhantomData;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Execution strategy for row-scheduled kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    #[default]
    Sequential,
    Scheduled,
}

/// Mode, worker count and optional scheduling jitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Execution {
    pub mode: ExecMode,
    pub worker_count: usize,
    /// Seeds random yields between row steps to perturb thread interleaving.
    pub jitter_seed: Option<u64>,
}

impl Default for Execution {
    fn default() -> Self {
        Self::sequential()
    }
}

impl Execution {
    pub fn sequential() -> Self {
        Self {
            mode: ExecMode::Sequential,
            worker_count: 1,
            jitter_seed: None,
        }
    }

    pub fn scheduled(worker_count: usize) -> Self {
        Self {
            mode: ExecMode::Scheduled,
            worker_count: worker_count.max(1),
            jitter_seed: None,
        }
    }

    pub fn with_jitter(mut self, seed: u64) -> Self {
        self.jitter_seed = Some(seed);
        self
    }
}

/// Order in which rows are claimed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ClaimOrder {
    Ascending,
    Descending,
}

#[derive(Debug, Default)]
pub(crate) struct ReadyFlags(Vec<AtomicBool>);

impl ReadyFlags {
    /// Resizes to `n` and clears every flag. Returns true if storage was reallocated.
    pub fn reset(&mut self, n: usize) -> bool {
        let grew = self.0.len() != n;
        if grew {
            self.0 = (0..n).map(|_| AtomicBool::new(false)).collect();
        } else {
            for f in &self.0 {
                f.store(false, Ordering::Relaxed);
            }
        }
        grew
    }

    #[inline]
    pub fn is_ready(&self, i: usize) -> bool {
        self.0[i].load(Ordering::Acquire)
    }

    #[inline]
    fn set(&self, i: usize) {
        self.0[i].store(true, Ordering::Release);
    }
}

/// A per-row kernel that can stop at an unready dependency and resume later.
pub(crate) trait RowTask: Sync {
    type State: Send;

    fn begin(&self, row: usize) -> Self::State;

    /// Advances `row` as far as its dependencies allow. Returns true once the
    /// row is complete. Must not block.
    fn advance(&self, row: usize, state: &mut Self::State, ready: &ReadyFlags) -> bool;
}

/// Runs `task` over rows `0..n` and leaves every flag set.
pub(crate) fn run<T: RowTask>(
    task: &T,
    n: usize,
    order: ClaimOrder,
    exec: Execution,
    ready: &mut ReadyFlags,
) {
    ready.reset(n);
    let row_at = |k: usize| match order {
        ClaimOrder::Ascending => k,
        ClaimOrder::Descending => n - 1 - k,
    };
    let ready = &*ready;
    if exec.mode == ExecMode::Sequential || exec.worker_count <= 1 && exec.jitter_seed.is_none() {
        for k in 0..n {
            let row = row_at(k);
            let mut st = task.begin(row);
            let done = task.advance(row, &mut st, ready);
            debug_assert!(done, "sequential order must satisfy dependencies");
            ready.set(row);
        }
        return;
    }

    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for w in 0..exec.worker_count {
            let next = &next;
            scope.spawn(move || {
                let mut rng = exec
                    .jitter_seed
                    .map(|s| ChaCha8Rng::seed_from_u64(s.wrapping_add(w as u64)));
                let mut parked: Vec<(usize, T::State)> = Vec::new();
                loop {
                    let mut progressed = false;
                    let mut i = 0;
                    while i < parked.len() {
                        jitter(&mut rng);
                        let (row, st) = &mut parked[i];
                        if task.advance(*row, st, ready) {
                            ready.set(*row);
                            parked.remove(i);
                            progressed = true;
                        } else {
                            i += 1;
                        }
                    }
                    let k = next.fetch_add(1, Ordering::Relaxed);
                    if k < n {
                        let row = row_at(k);
                        let mut st = task.begin(row);
                        jitter(&mut rng);
                        if task.advance(row, &mut st, ready) {
                            ready.set(row);
                        } else {
                            parked.push((row, st));
                        }
                    } else if parked.is_empty() {
                        break;
                    } else if !progressed {
                        std::thread::yield_now();
                    }
                }
            });
        }
    });
}

fn jitter(rng: &mut Option<ChaCha8Rng>) {
    if let Some(rng) = rng {
        match rng.gen_range(0..8) {
            0 => std::thread::yield_now(),
            1 => {
                for _ in 0..rng.gen_range(0..200) {
                    std::hint::spin_loop();
                }
            }
            _ => {}
        }
    }
}

/// Raw shared view of a mutable slice for the row-ownership protocol: a row
/// writes only its own entries and reads other rows only after their ready
/// flag is observed with acquire ordering.
pub(crate) struct SharedSlice<'a> {
    ptr: *mut f64,
    len: usize,
    _marker: PhantomData<&'a mut [f64]>,
}

unsafe impl Sync for SharedSlice<'_> {}
unsafe impl Send for SharedSlice<'_> {}

impl<'a> SharedSlice<'a> {
    pub fn new(slice: &'a mut [f64]) -> Self {
        Self {
            ptr: slice.as_mut_ptr(),
            len: slice.len(),
            _marker: PhantomData,
        }
    }

    /// # Safety
    /// No other thread may be writing entry `i`.
    #[inline]
    pub unsafe fn get(&self, i: usize) -> f64 {
        debug_assert!(i < self.len);
        *self.ptr.add(i)
    }

    /// # Safety
    /// The caller must own entry `i` under the row protocol.
    #[inline]
    pub unsafe fn set(&self, i: usize, v: f64) {
        debug_assert!(i < self.len);
        *self.ptr.add(i) = v;
    }
}
