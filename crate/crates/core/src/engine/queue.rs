use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::{EngineError, SimTime};

/// An event with its assigned position in the total order.
#[derive(Clone, Debug)]
pub struct Scheduled<E> {
    pub time: SimTime,
    pub seq: u64,
    pub payload: E,
}

impl<E> PartialEq for Scheduled<E> {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}

impl<E> Eq for Scheduled<E> {}

impl<E> PartialOrd for Scheduled<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Scheduled<E> {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

/// Min-queue over `(time, seq)`. `seq` comes from a counter bumped on every
/// successful `schedule`, so simultaneous events pop in scheduling order.
#[derive(Debug)]
pub struct EventQueue<E> {
    heap: BinaryHeap<Reverse<Scheduled<E>>>,
    now: SimTime,
    next_seq: u64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            now: SimTime::ZERO,
            next_seq: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn schedule(&mut self, time: SimTime, payload: E) -> Result<u64, EngineError> {
        if time < self.now {
            return Err(EngineError::SchedulingInPast { at: time, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Scheduled { time, seq, payload }));
        Ok(seq)
    }

    /// Pending payloads in no particular order.
    pub fn pending(&self) -> impl Iterator<Item = &E> {
        self.heap.iter().map(|Reverse(s)| &s.payload)
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|Reverse(s)| s.time)
    }

    /// Pops the next event and advances the clock to its time.
    pub fn pop(&mut self) -> Option<Scheduled<E>> {
        let Reverse(next) = self.heap.pop()?;
        debug_assert!(next.time >= self.now);
        self.now = next.time;
        Some(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_time_events_pop_in_schedule_order() {
        let mut q = EventQueue::new();
        q.schedule(SimTime(5), "A").unwrap();
        q.schedule(SimTime(5), "B").unwrap();
        assert_eq!(q.pop().unwrap().payload, "A");
        assert_eq!(q.pop().unwrap().payload, "B");
    }

    #[test]
    fn scheduling_in_the_past_is_rejected() {
        let mut q = EventQueue::new();
        q.schedule(SimTime(7), ()).unwrap();
        q.pop();
        assert_eq!(
            q.schedule(SimTime(3), ()),
            Err(EngineError::SchedulingInPast { at: SimTime(3), now: SimTime(7) })
        );
    }

    #[test]
    fn single_timer_advances_clock() {
        let mut q = EventQueue::new();
        q.schedule(SimTime(10), "timer").unwrap();
        let ev = q.pop().unwrap();
        assert_eq!(ev.time, SimTime(10));
        assert_eq!(q.now(), SimTime(10));
        assert!(q.pop().is_none());
    }

    #[test]
    fn order_is_lexicographic_time_then_seq() {
        let mut q = EventQueue::new();
        q.schedule(SimTime(9), 0).unwrap();
        q.schedule(SimTime(2), 1).unwrap();
        q.schedule(SimTime(9), 2).unwrap();
        q.schedule(SimTime(2), 3).unwrap();
        let order: Vec<_> = std::iter::from_fn(|| q.pop()).map(|s| s.payload).collect();
        assert_eq!(order, vec![1, 3, 0, 2]);
    }
}
