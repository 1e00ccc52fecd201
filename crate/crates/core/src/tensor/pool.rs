//! Thread-local recycling of large `f64` buffers.
//!
//! A training step allocates and frees the same set of activation-sized
//! buffers every iteration. Handing them back here keeps them out of the
//! system allocator, which would otherwise return them to the OS and fault
//! them back in on the next step.

use std::cell::RefCell;

const MIN_POOLED: usize = 1024;
const MAX_POOLED: usize = 256;

thread_local! {
    static FREE: RefCell<Vec<Vec<f64>>> = const { RefCell::new(Vec::new()) };
}

/// A zero-filled buffer of length `len`.
pub(crate) fn zeroed(len: usize) -> Vec<f64> {
    let mut v = take(len);
    v.resize(len, 0.0);
    v
}

/// An empty buffer with capacity for at least `len` values.
pub(crate) fn take(len: usize) -> Vec<f64> {
    if len >= MIN_POOLED {
        let hit = FREE.with(|f| {
            let mut f = f.borrow_mut();
            let pos = f.iter().position(|b| b.capacity() >= len && b.capacity() <= 2 * len)?;
            Some(f.swap_remove(pos))
        });
        if let Some(mut v) = hit {
            v.clear();
            return v;
        }
    }
    Vec::with_capacity(len)
}

pub(crate) fn give(v: Vec<f64>) {
    if v.capacity() < MIN_POOLED {
        return;
    }
    FREE.with(|f| {
        let mut f = f.borrow_mut();
        if f.len() < MAX_POOLED {
            f.push(v);
        }
    });
}
