//! Bounded lock-free single-producer/single-consumer FIFO.
//!
//! Both ends are wait-free: `push` and `pop` never loop or block. The
//! producer owns the tail index and the consumer owns the head index; each
//! side keeps a cached copy of the other's index and only reloads it when the
//! cache says the ring looks full (or empty). A slot's contents are published
//! by the release store of the index that follows the write.

use std::cell::UnsafeCell;
use std::fmt;
use std::mem::MaybeUninit;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

/// Default ring capacity used by farm channels.
pub const DEFAULT_CAPACITY: usize = 512;

#[repr(align(128))]
struct Padded<T>(T);

struct Ring<T> {
    slots: Box<[UnsafeCell<MaybeUninit<T>>]>,
    /// Next position to read; written only by the consumer.
    head: Padded<AtomicUsize>,
    /// Next position to write; written only by the producer.
    tail: Padded<AtomicUsize>,
}

// SAFETY: a slot is accessed by the producer only while it is outside
// [head, tail) and by the consumer only while inside it; the acquire/release
// pairs on head and tail order those accesses.
unsafe impl<T: Send> Send for Ring<T> {}
unsafe impl<T: Send> Sync for Ring<T> {}

impl<T> Ring<T> {
    fn capacity(&self) -> usize {
        self.slots.len()
    }

    fn slot(&self, pos: usize) -> *mut MaybeUninit<T> {
        self.slots[pos % self.slots.len()].get()
    }
}

impl<T> Drop for Ring<T> {
    fn drop(&mut self) {
        let head = *self.head.0.get_mut();
        let tail = *self.tail.0.get_mut();
        for pos in head..tail {
            // SAFETY: positions in [head, tail) hold initialized items and we
            // have exclusive access.
            unsafe { (*self.slot(pos)).assume_init_drop() };
        }
    }
}

/// Item handed back by a push into a full channel.
#[derive(PartialEq, Eq)]
pub struct Full<T>(pub T);

impl<T> fmt::Debug for Full<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Full(..)")
    }
}

pub struct Producer<T> {
    ring: Arc<Ring<T>>,
    tail: usize,
    cached_head: usize,
}

pub struct Consumer<T> {
    ring: Arc<Ring<T>>,
    head: usize,
    cached_tail: usize,
}

/// Creates a channel holding at most `capacity` items.
///
/// # Panics
/// If `capacity` is zero.
pub fn channel<T>(capacity: usize) -> (Producer<T>, Consumer<T>) {
    assert!(capacity > 0, "channel capacity must be positive");
    let slots = (0..capacity).map(|_| UnsafeCell::new(MaybeUninit::uninit())).collect();
    let ring = Arc::new(Ring {
        slots,
        head: Padded(AtomicUsize::new(0)),
        tail: Padded(AtomicUsize::new(0)),
    });
    (
        Producer {
            ring: Arc::clone(&ring),
            tail: 0,
            cached_head: 0,
        },
        Consumer {
            ring,
            head: 0,
            cached_tail: 0,
        },
    )
}

impl<T> Producer<T> {
    pub fn push(&mut self, item: T) -> Result<(), Full<T>> {
        let cap = self.ring.capacity();
        if self.tail - self.cached_head == cap {
            self.cached_head = self.ring.head.0.load(Ordering::Acquire);
            if self.tail - self.cached_head == cap {
                return Err(Full(item));
            }
        }
        // SAFETY: the slot at tail is outside [head, tail), so the consumer
        // does not touch it until the store below publishes it.
        unsafe { (*self.ring.slot(self.tail)).write(item) };
        self.tail += 1;
        self.ring.tail.0.store(self.tail, Ordering::Release);
        Ok(())
    }

    pub fn capacity(&self) -> usize {
        self.ring.capacity()
    }

    /// Items currently resident, as seen from the producer side.
    pub fn len(&self) -> usize {
        self.tail - self.ring.head.0.load(Ordering::Acquire)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.capacity()
    }
}

impl<T> Consumer<T> {
    pub fn pop(&mut self) -> Option<T> {
        if self.head == self.cached_tail {
            self.cached_tail = self.ring.tail.0.load(Ordering::Acquire);
            if self.head == self.cached_tail {
                return None;
            }
        }
        // SAFETY: head < tail, so the slot was initialized and published by
        // the producer's release store; the producer will not reuse it until
        // the head store below.
        let item = unsafe { (*self.ring.slot(self.head)).assume_init_read() };
        self.head += 1;
        self.ring.head.0.store(self.head, Ordering::Release);
        Some(item)
    }

    pub fn capacity(&self) -> usize {
        self.ring.capacity()
    }

    pub fn len(&self) -> usize {
        self.ring.tail.0.load(Ordering::Acquire) - self.head
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
