use std::collections::VecDeque;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use crate::vision::TargetObservation;
use crate::{Error, Result};

/// A payload stamped with its position in the topic.
#[derive(Clone, Debug, PartialEq)]
pub struct Message<T> {
    pub seq: u64,
    pub payload: T,
}

struct Topic<T> {
    queue: VecDeque<Message<T>>,
    next_seq: u64,
    closed: bool,
}

/// In-process single-topic channel with FIFO delivery and strictly
/// increasing sequence numbers starting at 1. Clones share the topic.
pub struct Bus<T> {
    shared: Arc<(Mutex<Topic<T>>, Condvar)>,
}

/// Topic carrying detection results from the camera side to the controller.
pub type VisionBus = Bus<TargetObservation>;

impl<T> Clone for Bus<T> {
    fn clone(&self) -> Self {
        Self {
            shared: Arc::clone(&self.shared),
        }
    }
}

impl<T> Default for Bus<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> Bus<T> {
    pub fn new() -> Self {
        let topic = Topic {
            queue: VecDeque::new(),
            next_seq: 1,
            closed: false,
        };
        Self {
            shared: Arc::new((Mutex::new(topic), Condvar::new())),
        }
    }

    fn lock(&self) -> MutexGuard<'_, Topic<T>> {
        self.shared.0.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Appends a message and returns its sequence number.
    pub fn publish(&self, payload: T) -> Result<u64> {
        let mut topic = self.lock();
        if topic.closed {
            return Err(Error::BusClosed);
        }
        let seq = topic.next_seq;
        topic.next_seq += 1;
        topic.queue.push_back(Message { seq, payload });
        self.shared.1.notify_all();
        Ok(seq)
    }

    /// Further publishes fail; queued messages stay readable.
    pub fn close(&self) {
        self.lock().closed = true;
        self.shared.1.notify_all();
    }

    pub fn is_closed(&self) -> bool {
        self.lock().closed
    }

    /// Messages published but not yet consumed.
    pub fn pending(&self) -> usize {
        self.lock().queue.len()
    }

    fn wait_nonempty(&self, timeout: Option<Duration>) -> Result<MutexGuard<'_, Topic<T>>> {
        let deadline = timeout.map(|t| Instant::now() + t);
        let mut topic = self.lock();
        loop {
            if !topic.queue.is_empty() {
                return Ok(topic);
            }
            if topic.closed {
                return Err(Error::BusClosed);
            }
            topic = match deadline {
                None => self.shared.1.wait(topic).unwrap_or_else(|e| e.into_inner()),
                Some(d) => {
                    let now = Instant::now();
                    if now >= d {
                        return Err(Error::Timeout);
                    }
                    self.shared
                        .1
                        .wait_timeout(topic, d - now)
                        .unwrap_or_else(|e| e.into_inner())
                        .0
                }
            };
        }
    }

    /// Oldest unread message; blocks up to `timeout` (forever when `None`).
    pub fn recv(&self, timeout: Option<Duration>) -> Result<Message<T>> {
        let mut topic = self.wait_nonempty(timeout)?;
        Ok(topic.queue.pop_front().expect("queue checked non-empty"))
    }

    /// Newest message, discarding any older unread ones.
    pub fn recv_latest(&self, timeout: Option<Duration>) -> Result<Message<T>> {
        let mut topic = self.wait_nonempty(timeout)?;
        let last = topic.queue.pop_back().expect("queue checked non-empty");
        topic.queue.clear();
        Ok(last)
    }
}
