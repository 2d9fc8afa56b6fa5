/// Number of target discs on the flicking board.
pub const TARGET_COUNT: usize = 7;

const RADIAL_STEP_MM: f64 = 100.0;
const LATERAL_OFFSET_MM: f64 = 150.0;

/// Target disc position relative to the launch point, mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlickTarget {
    /// 1-based, closest first.
    pub index: usize,
    /// Distance along the board axis.
    pub radial: f64,
    /// Offset across the board axis; positive for odd targets.
    pub lateral: f64,
}

/// Targets at 100 mm radial increments with alternating +/-150 mm lateral
/// offsets.
pub fn flick_targets() -> Vec<FlickTarget> {
    (1..=TARGET_COUNT)
        .map(|index| FlickTarget {
            index,
            radial: RADIAL_STEP_MM * index as f64,
            lateral: if index % 2 == 1 {
                LATERAL_OFFSET_MM
            } else {
                -LATERAL_OFFSET_MM
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let targets = flick_targets();
        assert_eq!(targets.len(), 7);
        assert!(targets
            .windows(2)
            .all(|w| w[1].radial - w[0].radial == 100.0));
        assert!(targets.iter().all(|t| t.lateral.abs() == 150.0));
        assert!(targets.windows(2).all(|w| w[0].lateral == -w[1].lateral));
        assert_eq!(targets[0].radial, 100.0);
    }
}
