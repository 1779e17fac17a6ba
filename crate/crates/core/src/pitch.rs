//! Spelled pitches and their chromatic arithmetic.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The seven diatonic letter names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Step {
    C,
    D,
    E,
    F,
    G,
    A,
    B,
}

impl Step {
    pub const ALL: [Step; 7] = [
        Step::C,
        Step::D,
        Step::E,
        Step::F,
        Step::G,
        Step::A,
        Step::B,
    ];

    /// Semitone offset of the natural step above C.
    pub fn base_semitone(self) -> i32 {
        match self {
            Step::C => 0,
            Step::D => 2,
            Step::E => 4,
            Step::F => 5,
            Step::G => 7,
            Step::A => 9,
            Step::B => 11,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Step::C => 'C',
            Step::D => 'D',
            Step::E => 'E',
            Step::F => 'F',
            Step::G => 'G',
            Step::A => 'A',
            Step::B => 'B',
        }
    }

    /// Case-insensitive letter lookup.
    pub fn from_letter(c: char) -> Option<Step> {
        match c.to_ascii_uppercase() {
            'C' => Some(Step::C),
            'D' => Some(Step::D),
            'E' => Some(Step::E),
            'F' => Some(Step::F),
            'G' => Some(Step::G),
            'A' => Some(Step::A),
            'B' => Some(Step::B),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid scientific pitch {0:?}")]
pub struct PitchParseError(pub String);

/// A spelled pitch: letter name, accidental and scientific octave (C4 is middle C).
///
/// The spelling is kept distinct from the chromatic value, so `D#4` and `Eb4`
/// are different pitches that share chromatic number 63.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PitchSpelled {
    pub step: Step,
    /// Accidental in semitones, restricted to [-2, 2].
    pub alteration: i8,
    pub octave: i8,
}

impl PitchSpelled {
    pub fn new(step: Step, alteration: i8, octave: i8) -> PitchSpelled {
        debug_assert!((-2..=2).contains(&alteration));
        PitchSpelled {
            step,
            alteration,
            octave,
        }
    }

    pub fn natural(step: Step, octave: i8) -> PitchSpelled {
        PitchSpelled::new(step, 0, octave)
    }

    /// MIDI-style chromatic number: `12 * (octave + 1) + base(step) + alteration`.
    /// C4 maps to 60.
    pub fn chromatic_number(&self) -> i32 {
        12 * (self.octave as i32 + 1) + self.step.base_semitone() + self.alteration as i32
    }

    /// Respells a chromatic number, preferring naturals, then single sharps,
    /// then single flats. Naturals and sharps cover all twelve classes, so the
    /// flat preference never has to fire; it is kept for the documented order.
    pub fn from_chromatic(n: i32) -> PitchSpelled {
        const SPELLINGS: [(Step, i8); 12] = [
            (Step::C, 0),
            (Step::C, 1),
            (Step::D, 0),
            (Step::D, 1),
            (Step::E, 0),
            (Step::F, 0),
            (Step::F, 1),
            (Step::G, 0),
            (Step::G, 1),
            (Step::A, 0),
            (Step::A, 1),
            (Step::B, 0),
        ];
        let (step, alteration) = SPELLINGS[n.rem_euclid(12) as usize];
        let octave = (n.div_euclid(12) - 1) as i8;
        PitchSpelled {
            step,
            alteration,
            octave,
        }
    }

    /// Scientific pitch notation, e.g. `C4`, `D#4`, `Bb3`, `C##5`.
    pub fn scientific_name(&self) -> String {
        format!("{}{}", self.pitch_class_name(), self.octave)
    }

    /// Scientific name with the octave stripped, e.g. `D#`.
    pub fn pitch_class_name(&self) -> String {
        let mut s = String::new();
        s.push(self.step.letter());
        for _ in 0..self.alteration.abs() {
            s.push(if self.alteration > 0 { '#' } else { 'b' });
        }
        s
    }

    /// Parses scientific pitch notation as produced by [`scientific_name`].
    ///
    /// [`scientific_name`]: PitchSpelled::scientific_name
    pub fn parse_scientific(text: &str) -> Result<PitchSpelled, PitchParseError> {
        let err = || PitchParseError(text.to_string());
        let mut chars = text.chars().peekable();
        let step = chars
            .next()
            .filter(char::is_ascii_uppercase)
            .and_then(Step::from_letter)
            .ok_or_else(err)?;
        let mut alteration: i8 = 0;
        while let Some(&c) = chars.peek() {
            let delta = match c {
                '#' => 1,
                'b' => -1,
                _ => break,
            };
            if alteration != 0 && alteration.signum() != delta {
                return Err(err());
            }
            alteration += delta;
            if alteration.abs() > 2 {
                return Err(err());
            }
            chars.next();
        }
        let octave: i8 = chars.collect::<String>().parse().map_err(|_| err())?;
        Ok(PitchSpelled {
            step,
            alteration,
            octave,
        })
    }
}

impl fmt::Display for PitchSpelled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.scientific_name())
    }
}
