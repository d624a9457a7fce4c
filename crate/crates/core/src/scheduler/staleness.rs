use rand::Rng;

use super::config::StalenessModel;

/// A stretch of time over which a good's excess demand is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub z: f64,
}

impl Segment {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Exact summary of one good's excess demand over an update interval.
///
/// `segments` may contain zero-length pieces: when several goods update at
/// the same instant, the intermediate states are visited for no time but
/// still count toward `z_min` and `z_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalStats {
    pub z_min: f64,
    pub z_max: f64,
    pub z_avg: f64,
    /// Value on the first segment of positive length.
    pub z_start: f64,
    /// Instantaneous value just before the update.
    pub z_accurate: f64,
    pub segments: Vec<Segment>,
}

impl IntervalStats {
    /// Builds the summary from piecewise-constant segments covering the
    /// interval in time order. At least one segment must have positive length.
    pub fn from_segments(segments: Vec<Segment>, z_accurate: f64) -> Self {
        let mut z_min = z_accurate;
        let mut z_max = z_accurate;
        let mut weighted = 0.0;
        let mut total = 0.0;
        let mut z_start = None;
        for s in &segments {
            z_min = z_min.min(s.z);
            z_max = z_max.max(s.z);
            if !s.is_empty() {
                weighted += s.len() * s.z;
                total += s.len();
                z_start.get_or_insert(s.z);
            }
        }
        let z_avg = if total > 0.0 {
            (weighted / total).clamp(z_min, z_max)
        } else {
            z_accurate
        };
        IntervalStats {
            z_min,
            z_max,
            z_avg,
            z_start: z_start.unwrap_or(z_accurate),
            z_accurate,
            segments,
        }
    }

    /// Excess demand at `offset` time units after the interval start.
    pub fn z_at_offset(&self, offset: f64) -> f64 {
        let Some(first) = self.segments.first() else {
            return self.z_accurate;
        };
        let t = first.start + offset;
        let mut last = self.z_start;
        for s in self.segments.iter().filter(|s| !s.is_empty()) {
            last = s.z;
            if t < s.end {
                return s.z;
            }
        }
        last
    }

    fn span(&self) -> f64 {
        match (self.segments.first(), self.segments.last()) {
            (Some(a), Some(b)) => b.end - a.start,
            _ => 0.0,
        }
    }
}

/// Picks the stale excess demand a seller acts on.
pub fn observe_z_tilde<R: Rng + ?Sized>(
    stats: &IntervalStats,
    model: StalenessModel,
    rng: &mut R,
) -> f64 {
    match model {
        StalenessModel::Endpoint => stats.z_accurate,
        StalenessModel::Start => stats.z_start,
        StalenessModel::TimeWeightedAverage => stats.z_avg,
        StalenessModel::RandomPoint => {
            let u: f64 = rng.random();
            stats.z_at_offset(u * stats.span())
        }
        StalenessModel::AdversarialMaxGap => {
            if (stats.z_accurate - stats.z_min).abs() >= (stats.z_max - stats.z_accurate).abs() {
                stats.z_min
            } else {
                stats.z_max
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_segment() -> IntervalStats {
        let late = 1.0 / 1.9 - 1.0;
        IntervalStats::from_segments(
            vec![
                Segment {
                    start: 0.0,
                    end: 0.5,
                    z: -0.5,
                },
                Segment {
                    start: 0.5,
                    end: 1.0,
                    z: late,
                },
            ],
            late,
        )
    }

    #[test]
    fn two_segment_statistics() {
        let s = two_segment();
        assert_eq!(s.z_min, -0.5);
        assert!((s.z_max + 0.473684).abs() < 1e-6);
        assert!((s.z_avg + 0.486842).abs() < 1e-6);
        assert_eq!(s.z_start, -0.5);
    }

    #[test]
    fn models_pick_expected_values() {
        let s = two_segment();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            observe_z_tilde(&s, StalenessModel::Endpoint, &mut rng),
            s.z_accurate
        );
        assert_eq!(observe_z_tilde(&s, StalenessModel::Start, &mut rng), -0.5);
        assert_eq!(
            observe_z_tilde(&s, StalenessModel::AdversarialMaxGap, &mut rng),
            -0.5
        );
        assert_eq!(
            observe_z_tilde(&s, StalenessModel::TimeWeightedAverage, &mut rng),
            s.z_avg
        );
        for _ in 0..100 {
            let z = observe_z_tilde(&s, StalenessModel::RandomPoint, &mut rng);
            assert!(z == -0.5 || z == s.z_max);
        }
    }

    #[test]
    fn zero_length_pieces_widen_the_range_only() {
        let s = IntervalStats::from_segments(
            vec![
                Segment {
                    start: 0.0,
                    end: 1.0,
                    z: 0.1,
                },
                Segment {
                    start: 1.0,
                    end: 1.0,
                    z: 0.4,
                },
            ],
            0.1,
        );
        assert_eq!((s.z_min, s.z_max, s.z_avg, s.z_start), (0.1, 0.4, 0.1, 0.1));
        assert_eq!(s.z_at_offset(0.99), 0.1);
    }
}
