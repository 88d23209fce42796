use rayon::ThreadPool;

use super::{EngineError, IngestOptions, MapBundle, StateGrid};
use crate::ecc::EccParams;
use crate::frame::{Frame, FrameDims};

/// A single stream: owns the state grid, the output buffers and, for more
/// than one thread, a dedicated worker pool.
pub struct Pipeline {
    params: EccParams,
    options: IngestOptions,
    grid: Option<StateGrid>,
    bundle: MapBundle,
    pool: Option<ThreadPool>,
}

impl Pipeline {
    pub fn new(params: EccParams, closing_radius: usize, threads: usize) -> Result<Self, EngineError> {
        let threads = threads.max(1);
        let pool = if threads > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .thread_name(|i| format!("eccmap-worker-{i}"))
                .build()
                .map_err(|e| EngineError::ThreadPool(e.to_string()))?;
            Some(pool)
        } else {
            None
        };
        Ok(Self {
            params,
            options: IngestOptions { closing_radius, workers: threads },
            grid: None,
            bundle: MapBundle::new(0, 0),
            pool,
        })
    }

    pub fn params(&self) -> &EccParams {
        &self.params
    }

    pub fn threads(&self) -> usize {
        self.options.workers
    }

    /// Allocates state for `dims` ahead of the first frame.
    pub fn prepare(&mut self, dims: FrameDims) -> Result<(), EngineError> {
        if self.grid.is_none() {
            self.grid = Some(StateGrid::new(dims.height, dims.width, dims.channels)?);
            self.bundle = MapBundle::new(dims.height, dims.width);
        }
        Ok(())
    }

    pub fn grid(&self) -> Option<&StateGrid> {
        self.grid.as_ref()
    }

    /// Feeds one frame. The stream's dimensions are fixed by the first frame.
    pub fn push(&mut self, frame: &Frame) -> Result<&MapBundle, EngineError> {
        self.prepare(frame.dims())?;
        let grid = self.grid.as_mut().expect("prepared above");
        let (params, options, bundle) = (&self.params, &self.options, &mut self.bundle);
        match &self.pool {
            Some(pool) => pool.install(|| grid.ingest_into(frame.view(), params, options, bundle))?,
            None => grid.ingest_into(frame.view(), params, options, bundle)?,
        }
        Ok(&self.bundle)
    }
}
