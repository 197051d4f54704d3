//! Seeding, worker pools and wall-clock timing.

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the control stream for one cell in one stage; independent of scheduling.
pub fn cell_seed(seed: u64, cell_id: u64, stage: u8) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ cell_id) ^ u64::from(stage))
}

pub(crate) struct Pool {
    #[cfg(feature = "parallel")]
    inner: Option<rayon::ThreadPool>,
    pub workers: usize,
}

impl Pool {
    /// `workers == 0` uses every available core.
    pub fn new(workers: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            let workers = if workers == 0 {
                std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
            } else {
                workers
            };
            let inner = if workers > 1 {
                rayon::ThreadPoolBuilder::new().num_threads(workers).build().ok()
            } else {
                None
            };
            Pool { inner, workers }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = workers;
            Pool { workers: 1 }
        }
    }

    /// `items.map(f)` in input order.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.inner {
            use rayon::prelude::*;
            return pool.install(|| items.par_iter().map(&f).collect());
        }
        items.iter().map(f).collect()
    }
}

pub(crate) struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub fn start() -> Self {
        Stopwatch {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    /// Seconds since [`Stopwatch::start`]; always 0 where no monotonic clock exists.
    pub fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}
