use serde::{Deserialize, Serialize};

use crate::dynamics::Trace;
use crate::error::{invalid, Result};

/// Energy excursion class of a path over a window.
///
/// `A2`: the energy falls below `H₀/2` before it ever exceeds `2H₀`.
/// `A3`: it exceeds `2H₀` first. `A1`: it stays in `[H₀/2, 2H₀]` throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventClass {
    A1,
    A2,
    A3,
}

/// First-hit classifier fed one energy sample at a time.
#[derive(Debug, Clone, Copy)]
pub struct EventTracker {
    h0: f64,
    hit: Option<EventClass>,
}

impl EventTracker {
    pub fn new(h0: f64) -> Self {
        Self { h0, hit: None }
    }

    pub fn observe(&mut self, h: f64) {
        if self.hit.is_some() {
            return;
        }
        if h < 0.5 * self.h0 {
            self.hit = Some(EventClass::A2);
        } else if !(h <= 2.0 * self.h0) {
            self.hit = Some(EventClass::A3);
        }
    }

    pub fn class(&self) -> EventClass {
        self.hit.unwrap_or(EventClass::A1)
    }
}

pub fn classify_event(trace: &Trace, h0: f64) -> Result<EventClass> {
    if trace.is_empty() {
        return invalid("cannot classify an empty trace");
    }
    let mut tracker = EventTracker::new(h0);
    trace.energy.iter().for_each(|&h| tracker.observe(h));
    Ok(tracker.class())
}

/// Relative frequencies of A1, A2, A3; they sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EventFrequencies {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl EventFrequencies {
    pub fn tally(classes: &[EventClass]) -> Self {
        let n = classes.len().max(1) as f64;
        let count = |c| classes.iter().filter(|&&x| x == c).count() as f64 / n;
        Self {
            a1: count(EventClass::A1),
            a2: count(EventClass::A2),
            a3: count(EventClass::A3),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify(series: &[f64]) -> EventClass {
        let mut t = EventTracker::new(series[0]);
        series.iter().for_each(|&h| t.observe(h));
        t.class()
    }

    #[test]
    fn first_hit_classes() {
        assert_eq!(classify(&[4.0, 4.0, 4.0]), EventClass::A1);
        assert_eq!(classify(&[4.0, 3.0, 1.0, 5.0]), EventClass::A2);
        assert_eq!(classify(&[4.0, 12.0, 6.0]), EventClass::A3);
        assert_eq!(classify(&[4.0, 9.0, 1.0]), EventClass::A3);
        assert_eq!(classify(&[4.0, 1.0, 9.0]), EventClass::A2);
        assert_eq!(classify(&[4.0, 2.0, 8.0]), EventClass::A1);
    }

    #[test]
    fn frequencies_sum_to_one() {
        let f = EventFrequencies::tally(&[EventClass::A1, EventClass::A3, EventClass::A3]);
        assert!((f.a1 + f.a2 + f.a3 - 1.0).abs() < 1e-15);
    }
}
