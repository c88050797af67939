//! Generation-indexed morphological development schedules.
//!
//! Three regimes: no development (the adult body from generation 0), linear
//! leg growth from the shortest legs to full length, and motion-range
//! freeing from half the final joint range to the full range. A schedule is
//! piecewise linear in the generation index and constant from
//! `end_generation` on, so all regimes share the same final morphology.

use crate::quadruped::{Morphology, QuadrupedSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ScheduleKind {
    /// Fixed adult morphology for the whole run.
    None,
    /// Legs start fully contracted and grow linearly to full length.
    Growth,
    /// The available joint range starts at half the final range and widens
    /// linearly; applied at output denormalization, not at the physical
    /// joint limit.
    MotionRange,
}

/// Initial fraction of the final joint range for [`ScheduleKind::MotionRange`].
pub const MOTION_RANGE_START_FRACTION: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DevelopmentSchedule {
    pub kind: ScheduleKind,
    /// Generation at which the final morphology is reached. Ignored for
    /// `ScheduleKind::None`.
    pub end_generation: u32,
}

impl DevelopmentSchedule {
    pub fn reference() -> DevelopmentSchedule {
        DevelopmentSchedule {
            kind: ScheduleKind::None,
            end_generation: 0,
        }
    }

    pub fn growth(end_generation: u32) -> DevelopmentSchedule {
        DevelopmentSchedule {
            kind: ScheduleKind::Growth,
            end_generation,
        }
    }

    pub fn motion_range(end_generation: u32) -> DevelopmentSchedule {
        DevelopmentSchedule {
            kind: ScheduleKind::MotionRange,
            end_generation,
        }
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        match self.kind {
            ScheduleKind::None => Ok(()),
            ScheduleKind::Growth | ScheduleKind::MotionRange => {
                if self.end_generation >= 1 {
                    Ok(())
                } else {
                    Err("developmental schedules need end_generation >= 1")
                }
            }
        }
    }

    /// Fraction of development completed at `generation`, in [0, 1].
    fn progress(&self, generation: u32) -> f64 {
        if generation >= self.end_generation {
            1.0
        } else {
            generation as f64 / self.end_generation as f64
        }
    }
}

/// The morphology every individual of `generation` is evaluated with.
pub fn morphology_at(
    schedule: DevelopmentSchedule,
    generation: u32,
    spec: &QuadrupedSpec,
) -> Morphology {
    let adult = Morphology::adult(spec);
    match schedule.kind {
        ScheduleKind::None => adult,
        ScheduleKind::Growth => {
            let extension = spec.prismatic_stroke_max * schedule.progress(generation);
            Morphology::new(extension, 1.0).expect("growth schedule stays in bounds")
        }
        ScheduleKind::MotionRange => {
            let fraction = MOTION_RANGE_START_FRACTION
                + (1.0 - MOTION_RANGE_START_FRACTION) * schedule.progress(generation);
            Morphology::new(spec.prismatic_stroke_max, fraction)
                .expect("motion-range schedule stays in bounds")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI_2: f64 = core::f64::consts::FRAC_PI_2;
    const PI_4: f64 = core::f64::consts::FRAC_PI_4;

    #[test]
    fn growth_endpoints_match_leg_lengths() {
        let spec = QuadrupedSpec::default();
        let s = DevelopmentSchedule::growth(60);
        assert_eq!(morphology_at(s, 0, &spec).leg_length(&spec), 0.10);
        assert_eq!(morphology_at(s, 60, &spec).leg_length(&spec), 0.175);
        assert_eq!(morphology_at(s, 300, &spec).leg_length(&spec), 0.175);
        // Linear in between.
        assert!((morphology_at(s, 30, &spec).leg_length(&spec) - 0.1375).abs() < 1e-15);
        // Full joint range throughout.
        assert_eq!(morphology_at(s, 0, &spec).motion_fraction(), 1.0);
    }

    #[test]
    fn motion_range_endpoints_match_angles() {
        let spec = QuadrupedSpec::default();
        let s = DevelopmentSchedule::motion_range(60);
        assert!((morphology_at(s, 0, &spec).max_angle(&spec) - PI_4).abs() < 1e-15);
        assert!((morphology_at(s, 60, &spec).max_angle(&spec) - PI_2).abs() < 1e-15);
        assert_eq!(morphology_at(s, 30, &spec).motion_fraction(), 0.75);
        // Legs are adult-length throughout.
        assert_eq!(morphology_at(s, 0, &spec).leg_length(&spec), 0.175);
    }

    #[test]
    fn reference_is_adult_everywhere() {
        let spec = QuadrupedSpec::default();
        let s = DevelopmentSchedule::reference();
        for generation in [0, 1, 50, 299] {
            let m = morphology_at(s, generation, &spec);
            assert_eq!(m.leg_length(&spec), 0.175);
            assert_eq!(m.motion_fraction(), 1.0);
        }
    }

    #[test]
    fn schedules_converge_to_the_reference_morphology() {
        let spec = QuadrupedSpec::default();
        let reference = morphology_at(DevelopmentSchedule::reference(), 500, &spec);
        for end in [20, 40, 60, 80, 100, 120] {
            for s in [
                DevelopmentSchedule::growth(end),
                DevelopmentSchedule::motion_range(end),
            ] {
                for g in [end, end + 1, end + 500] {
                    assert_eq!(morphology_at(s, g, &spec), reference);
                }
            }
        }
    }

    #[test]
    fn schedules_are_monotone_in_generation() {
        let spec = QuadrupedSpec::default();
        for s in [
            DevelopmentSchedule::growth(77),
            DevelopmentSchedule::motion_range(77),
        ] {
            let mut last_len = 0.0;
            let mut last_fraction = 0.0;
            for g in 0..200 {
                let m = morphology_at(s, g, &spec);
                assert!(m.leg_length(&spec) >= last_len);
                assert!(m.motion_fraction() >= last_fraction);
                last_len = m.leg_length(&spec);
                last_fraction = m.motion_fraction();
            }
        }
    }

    #[test]
    fn validation_rejects_zero_end_generation() {
        assert!(DevelopmentSchedule::growth(0).validate().is_err());
        assert!(DevelopmentSchedule::reference().validate().is_ok());
    }
}
