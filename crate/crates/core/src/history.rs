//! Ring buffer of past network values for delayed lookups.

use crate::{Error, Result};

/// Per-neuron circular storage of the last `window` values, laid out slot
/// major so that one lag is a contiguous row across neurons.
///
/// Slots are filled with the initial value at construction, so lookups that
/// reach before time zero see the (constant) initial history.
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    n: usize,
    window: usize,
    head: usize,
    data: Vec<f64>,
}

impl HistoryBuffer {
    /// Window size `ceil(tau_max / dt) + 1`, enough for every rounded lag.
    pub fn window_for(tau_max: f64, dt: f64) -> usize {
        (tau_max / dt).ceil() as usize + 1
    }

    pub fn new(window: usize, initial: &[f64]) -> Result<Self> {
        if window == 0 || initial.is_empty() {
            return Err(Error::config("history buffer needs a positive window and at least one neuron"));
        }
        let n = initial.len();
        let mut data = Vec::with_capacity(window * n);
        for _ in 0..window {
            data.extend_from_slice(initial);
        }
        Ok(Self { n, window, head: 0, data })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn neurons(&self) -> usize {
        self.n
    }

    /// Values stored `lag` pushes ago (lag 0 is the newest row).
    #[inline]
    pub fn row(&self, lag: usize) -> &[f64] {
        debug_assert!(lag < self.window);
        let slot = (self.head + self.window - lag) % self.window;
        &self.data[slot * self.n..(slot + 1) * self.n]
    }

    #[inline]
    pub fn get(&self, neuron: usize, lag: usize) -> f64 {
        self.row(lag)[neuron]
    }

    /// Slot that the next [`advance`](Self::advance) will expose as lag 0.
    pub fn next_row_mut(&mut self) -> &mut [f64] {
        let slot = (self.head + 1) % self.window;
        &mut self.data[slot * self.n..(slot + 1) * self.n]
    }

    pub fn advance(&mut self) {
        self.head = (self.head + 1) % self.window;
    }

    pub fn push(&mut self, values: &[f64]) {
        self.next_row_mut().copy_from_slice(values);
        self.advance();
    }
}
