//! Staff symbols and a restricted Humdrum kern parser.
//!
//! The supported subset is a single `**kern` spine containing clefs, numeric
//! meters, notes, rests and barlines. Notes carry dotted kern durations and
//! up to double accidentals. Everything else the kern format allows (ties,
//! slurs, beams, chords, grace notes, key signatures, ...) is skipped, so a
//! staff parses to exactly the symbols the query encodings are built from.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::duration::Duration;
use crate::pitch::{PitchSpelled, Step};

/// Clef shapes recognized by the subset grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClefShape {
    G,
    F,
    C,
}

impl ClefShape {
    pub fn letter(self) -> char {
        match self {
            ClefShape::G => 'G',
            ClefShape::F => 'F',
            ClefShape::C => 'C',
        }
    }
}

/// A clef on a staff line (1 = bottom line, 5 = top line).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clef {
    pub shape: ClefShape,
    pub line: u8,
}

/// A numeric time signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Meter {
    pub num: u32,
    pub den: u32,
}

/// One symbol of a parsed staff, in left-to-right record order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StaffSymbol {
    Clef(Clef),
    Meter(Meter),
    Note {
        pitch: PitchSpelled,
        duration: Duration,
    },
    Rest {
        duration: Duration,
    },
    Barline,
}

/// Symbol kind, used when noise substitutions must stay same-kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Clef,
    Meter,
    Note,
    Rest,
    Barline,
}

impl StaffSymbol {
    pub fn kind(&self) -> SymbolKind {
        match self {
            StaffSymbol::Clef(_) => SymbolKind::Clef,
            StaffSymbol::Meter(_) => SymbolKind::Meter,
            StaffSymbol::Note { .. } => SymbolKind::Note,
            StaffSymbol::Rest { .. } => SymbolKind::Rest,
            StaffSymbol::Barline => SymbolKind::Barline,
        }
    }

    /// The kern record this symbol serializes to.
    ///
    /// Note and rest durations must be kern-expressible (always true for
    /// parsed staves; see [`Duration::kern_recip`]).
    pub fn kern_record(&self) -> String {
        match self {
            StaffSymbol::Clef(c) => format!("*clef{}{}", c.shape.letter(), c.line),
            StaffSymbol::Meter(m) => format!("*M{}/{}", m.num, m.den),
            StaffSymbol::Note { pitch, duration } => {
                format!("{}{}", recip_or_panic(duration), kern_pitch(pitch))
            }
            StaffSymbol::Rest { duration } => format!("{}r", recip_or_panic(duration)),
            StaffSymbol::Barline => "=".to_string(),
        }
    }
}

fn recip_or_panic(d: &Duration) -> String {
    d.kern_recip()
        .unwrap_or_else(|| panic!("duration {d} has no kern recip form"))
}

/// Kern pitch text: `c` is C4, doubling moves outward (`cc` = C5, `CC` = C2),
/// `#` raises and `-` lowers by a semitone.
fn kern_pitch(p: &PitchSpelled) -> String {
    let (letter, count) = if p.octave >= 4 {
        (p.step.letter().to_ascii_lowercase(), p.octave as i32 - 3)
    } else {
        (p.step.letter(), 4 - p.octave as i32)
    };
    debug_assert!(count >= 1, "octave {} outside kern range", p.octave);
    let mut s: String = std::iter::repeat(letter).take(count as usize).collect();
    for _ in 0..p.alteration.abs() {
        s.push(if p.alteration > 0 { '#' } else { '-' });
    }
    s
}

/// A single line of music: the unit of transcription and retrieval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Staff {
    pub id: String,
    pub symbols: Vec<StaffSymbol>,
}

impl Staff {
    pub fn new(id: impl Into<String>, symbols: Vec<StaffSymbol>) -> Staff {
        Staff {
            id: id.into(),
            symbols,
        }
    }

    /// Notes in staff order, skipping every other symbol kind.
    pub fn notes(&self) -> impl Iterator<Item = (&PitchSpelled, &Duration)> {
        self.symbols.iter().filter_map(|s| match s {
            StaffSymbol::Note { pitch, duration } => Some((pitch, duration)),
            _ => None,
        })
    }

    pub fn note_count(&self) -> usize {
        self.notes().count()
    }

    /// Kern records of all symbols; the token sequence SER is computed over.
    pub fn symbol_records(&self) -> Vec<String> {
        self.symbols.iter().map(StaffSymbol::kern_record).collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed spine: {0}")]
    MalformedSpine(String),
    #[error("record {record}: multiple spines are not supported")]
    MultiSpine { record: usize },
    #[error("record {record}: unrecognized token {token:?}")]
    BadToken { record: usize, token: String },
}

/// Parses a single-spine kern text into a [`Staff`].
///
/// Comment records, null records and unrecognized tandem interpretations are
/// skipped, as are data tokens carrying out-of-subset markup (ties, slurs,
/// beams, chords, grace notes). A data token that carries no such markup but
/// still fails the subset grammar is a [`ParseError::BadToken`].
pub fn parse_kern(text: &str, staff_id: &str) -> Result<Staff, ParseError> {
    enum State {
        BeforeHeader,
        Open,
        Closed,
    }

    let mut state = State::BeforeHeader;
    let mut symbols = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let record = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if line.starts_with('!') {
            continue;
        }
        if line.contains('\t') {
            return Err(ParseError::MultiSpine { record });
        }
        match state {
            State::BeforeHeader => {
                if line == "**kern" {
                    state = State::Open;
                } else {
                    return Err(ParseError::MalformedSpine(format!(
                        "record {record}: expected **kern header, found {line:?}"
                    )));
                }
            }
            State::Open => {
                if line == "*-" {
                    state = State::Closed;
                } else if line == "." {
                    // null record
                } else if let Some(rest) = line.strip_prefix("**") {
                    // a second exclusive interpretation cannot open mid-spine
                    let _ = rest;
                    return Err(ParseError::BadToken {
                        record,
                        token: line.to_string(),
                    });
                } else if line.starts_with('*') {
                    if let Some(sym) = parse_tandem(line) {
                        symbols.push(sym);
                    }
                } else if line.starts_with('=') {
                    symbols.push(StaffSymbol::Barline);
                } else {
                    match parse_data_token(line) {
                        Ok(Some(sym)) => symbols.push(sym),
                        Ok(None) => {}
                        Err(()) => {
                            return Err(ParseError::BadToken {
                                record,
                                token: line.to_string(),
                            })
                        }
                    }
                }
            }
            State::Closed => {
                return Err(ParseError::BadToken {
                    record,
                    token: line.to_string(),
                });
            }
        }
    }

    match state {
        State::BeforeHeader => Err(ParseError::MalformedSpine(
            "no **kern header found".to_string(),
        )),
        State::Open => Err(ParseError::MalformedSpine(
            "missing *- spine terminator".to_string(),
        )),
        State::Closed => Ok(Staff::new(staff_id, symbols)),
    }
}

/// Recognizes `*clef<S><L>` and `*M<p>/<q>`; every other tandem token is
/// outside the subset and yields `None` (skipped).
fn parse_tandem(line: &str) -> Option<StaffSymbol> {
    if let Some(rest) = line.strip_prefix("*clef") {
        let mut chars = rest.chars();
        let shape = match chars.next() {
            Some('G') => ClefShape::G,
            Some('F') => ClefShape::F,
            Some('C') => ClefShape::C,
            _ => return None,
        };
        let line_no = match (chars.next(), chars.next()) {
            (Some(d @ '1'..='5'), None) => d as u8 - b'0',
            _ => return None,
        };
        return Some(StaffSymbol::Clef(Clef {
            shape,
            line: line_no,
        }));
    }
    if let Some(rest) = line.strip_prefix("*M") {
        let (num, den) = rest.split_once('/')?;
        let num: u32 = num.parse().ok()?;
        let den: u32 = den.parse().ok()?;
        if num >= 1 && den >= 1 {
            return Some(StaffSymbol::Meter(Meter { num, den }));
        }
    }
    None
}

/// Characters that mark a data token as out-of-subset kern (ties, slurs,
/// beams, stems, ornaments, grace notes, editorial signifiers, chords).
/// Tokens containing any of these are skipped rather than rejected.
const MARKUP_CHARS: &str = " []{}()_<>LJKkqQPpMmWwTtSsRrOoUuVvXxYyNn$%&@|:;',`\"~^\\/";

fn is_markup(c: char) -> bool {
    MARKUP_CHARS.contains(c)
}

/// Parses one data record. `Ok(None)` means the token is valid kern outside
/// the subset and is skipped; `Err(())` means it matches no recognized form.
fn parse_data_token(token: &str) -> Result<Option<StaffSymbol>, ()> {
    match parse_strict_token(token) {
        Some(sym) => Ok(Some(sym)),
        None if token.chars().any(is_markup) => Ok(None),
        None => Err(()),
    }
}

/// The strict subset form: `<digits><dots>(<pitch letters><accidentals> | r)`.
fn parse_strict_token(token: &str) -> Option<StaffSymbol> {
    let rest = token;
    let digits_len = rest.chars().take_while(char::is_ascii_digit).count();
    if digits_len == 0 {
        return None;
    }
    let digit: u64 = rest[..digits_len].parse().ok()?;
    if digit == 0 {
        // breve ("0") is valid kern but outside the subset grammar
        return None;
    }
    let rest = &rest[digits_len..];
    let dots = rest.chars().take_while(|&c| c == '.').count();
    let rest = &rest[dots..];
    let duration = Duration::from_kern(digit, dots as u32);

    if rest == "r" {
        return Some(StaffSymbol::Rest { duration });
    }

    // pitch letters: a homogeneous run of one letter, one case
    let mut chars = rest.chars();
    let first = chars.next()?;
    let step = Step::from_letter(first)?;
    if !first.is_ascii_alphabetic() {
        return None;
    }
    let letter_count = rest.chars().take_while(|&c| c == first).count();
    let rest = &rest[letter_count..];
    if rest.chars().any(|c| c.eq_ignore_ascii_case(&first)) {
        return None; // mixed case or interleaved letters
    }
    let octave = if first.is_ascii_lowercase() {
        3 + letter_count as i32
    } else {
        4 - letter_count as i32
    };
    if !(-1..=9).contains(&octave) {
        return None;
    }

    let alteration = match rest {
        "" => 0,
        _ if rest.chars().all(|c| c == '#') => rest.len() as i32,
        _ if rest.chars().all(|c| c == '-') => -(rest.len() as i32),
        _ => return None,
    };
    if alteration.abs() > 2 {
        return None;
    }

    Some(StaffSymbol::Note {
        pitch: PitchSpelled::new(step, alteration as i8, octave as i8),
        duration,
    })
}

/// Emits the canonical subset syntax for a staff, one record per symbol,
/// wrapped in `**kern` / `*-`. `parse_kern` reproduces the staff exactly.
pub fn serialize_kern(staff: &Staff) -> String {
    let mut out = String::from("**kern\n");
    for sym in &staff.symbols {
        out.push_str(&sym.kern_record());
        out.push('\n');
    }
    out.push_str("*-");
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransposeError {
    #[error("transposition by {semitones} moves a note to octave {octave}, outside [-1, 9]")]
    OctaveOutOfRange { semitones: i32, octave: i32 },
}

/// Shifts every note by a chromatic amount, respelling each result with the
/// natural-then-sharp-then-flat rule. Non-note symbols are unchanged.
pub fn transpose(staff: &Staff, semitones: i32) -> Result<Staff, TransposeError> {
    let symbols = staff
        .symbols
        .iter()
        .map(|sym| match sym {
            StaffSymbol::Note { pitch, duration } => {
                let n = pitch.chromatic_number() + semitones;
                let octave = n.div_euclid(12) - 1;
                if !(-1..=9).contains(&octave) {
                    return Err(TransposeError::OctaveOutOfRange { semitones, octave });
                }
                Ok(StaffSymbol::Note {
                    pitch: PitchSpelled::from_chromatic(n),
                    duration: *duration,
                })
            }
            other => Ok(other.clone()),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Staff::new(staff.id.clone(), symbols))
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("duplicate staff id {0:?}")]
    DuplicateStaffId(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: ParseError,
    },
}

/// An ordered collection of staves with unique ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    staves: Vec<Staff>,
    provenance: String,
}

impl Corpus {
    pub fn new(staves: Vec<Staff>, provenance: impl Into<String>) -> Result<Corpus, CorpusError> {
        let mut seen = BTreeSet::new();
        for staff in &staves {
            if !seen.insert(staff.id.as_str()) {
                return Err(CorpusError::DuplicateStaffId(staff.id.clone()));
            }
        }
        Ok(Corpus {
            staves,
            provenance: provenance.into(),
        })
    }

    /// Loads every `.krn` file of a directory, in file-name order. The staff
    /// id is the file name stem.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
        let dir = dir.as_ref();
        let io_err = |path: &Path, source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| io_err(dir, e))?
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| io_err(dir, e))?
            .into_iter()
            .map(|entry| entry.path())
            .filter(|p| p.extension().is_some_and(|ext| ext == "krn"))
            .collect();
        paths.sort();

        let mut staves = Vec::with_capacity(paths.len());
        for path in &paths {
            let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let staff = parse_kern(&text, &stem).map_err(|source| CorpusError::Parse {
                path: path.display().to_string(),
                source,
            })?;
            staves.push(staff);
        }
        Corpus::new(staves, dir.display().to_string())
    }

    pub fn staves(&self) -> &[Staff] {
        &self.staves
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn get(&self, staff_id: &str) -> Option<&Staff> {
        self.staves.iter().find(|s| s.id == staff_id)
    }

    pub fn len(&self) -> usize {
        self.staves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.staves.is_empty()
    }
}

impl fmt::Display for Staff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serialize_kern(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn note(pitch: PitchSpelled, num: u64, den: u64) -> StaffSymbol {
        StaffSymbol::Note {
            pitch,
            duration: Duration::new(num, den),
        }
    }

    #[test]
    fn parses_reference_staff() {
        // 4c = quarter C4, 8d# = eighth D#4, 4.r = dotted-quarter rest
        let staff = parse_kern("**kern\n*clefG2\n*M3/4\n4c\n8d#\n=\n4.r\n*-", "s").unwrap();
        assert_eq!(
            staff.symbols,
            vec![
                StaffSymbol::Clef(Clef {
                    shape: ClefShape::G,
                    line: 2
                }),
                StaffSymbol::Meter(Meter { num: 3, den: 4 }),
                note(PitchSpelled::natural(Step::C, 4), 1, 4),
                note(PitchSpelled::new(Step::D, 1, 4), 1, 8),
                StaffSymbol::Barline,
                StaffSymbol::Rest {
                    duration: Duration::new(3, 8)
                },
            ]
        );
    }

    #[test]
    fn parses_empty_spine() {
        let staff = parse_kern("**kern\n*-", "s").unwrap();
        assert!(staff.symbols.is_empty());
    }

    #[test]
    fn octave_letter_conventions() {
        let staff = parse_kern("**kern\n4c\n4cc\n4ccc\n4C\n4CC\n4B-\n*-", "s").unwrap();
        let pitches: Vec<String> = staff.notes().map(|(p, _)| p.scientific_name()).collect();
        assert_eq!(pitches, ["C4", "C5", "C6", "C3", "C2", "Bb3"]);
    }

    #[test]
    fn crlf_and_blank_lines_accepted() {
        let staff = parse_kern("**kern\r\n4c\r\n\r\n*-\r\n", "s").unwrap();
        assert_eq!(staff.symbols.len(), 1);
    }

    #[test]
    fn rejects_multi_spine() {
        assert_eq!(
            parse_kern("**kern\n4c\t4e\n*-", "s"),
            Err(ParseError::MultiSpine { record: 2 })
        );
        assert!(matches!(
            parse_kern("**kern\t**kern\n*-\t*-", "s"),
            Err(ParseError::MultiSpine { record: 1 })
        ));
    }

    #[test]
    fn rejects_malformed_spine() {
        assert!(matches!(
            parse_kern("4c\n*-", "s"),
            Err(ParseError::MalformedSpine(_))
        ));
        assert!(matches!(
            parse_kern("**kern\n4c", "s"),
            Err(ParseError::MalformedSpine(_))
        ));
        assert!(matches!(
            parse_kern("", "s"),
            Err(ParseError::MalformedSpine(_))
        ));
    }

    #[test]
    fn skips_comments_nulls_and_unknown_tandems() {
        let text = "**kern\n!! global comment\n! local\n*k[f#]\n*met(C)\n.\n*staff1\n4c\n*-";
        let staff = parse_kern(text, "s").unwrap();
        assert_eq!(staff.symbols.len(), 1);
    }

    #[test]
    fn skips_out_of_subset_markup_tokens() {
        // tie, beam, chord, grace note, slur
        let text = "**kern\n[4c\n8cL\n4c 4e\ncq\n(8d\n4n#\n*-";
        let staff = parse_kern(text, "s").unwrap();
        assert!(staff.symbols.is_empty());
    }

    #[test]
    fn bad_tokens_are_errors() {
        for bad in ["4c###", "4c--chaos", "zzz", "4ce", "4Cc", "0c", "4h"] {
            let text = format!("**kern\n{bad}\n*-");
            assert!(
                matches!(parse_kern(&text, "s"), Err(ParseError::BadToken { record: 2, .. })),
                "{bad:?} should be a bad token"
            );
        }
    }

    #[test]
    fn second_exclusive_interpretation_is_an_error() {
        assert!(matches!(
            parse_kern("**kern\n**kern\n*-", "s"),
            Err(ParseError::BadToken { record: 2, .. })
        ));
    }

    #[test]
    fn data_after_terminator_is_an_error() {
        assert!(matches!(
            parse_kern("**kern\n*-\n4c", "s"),
            Err(ParseError::BadToken { record: 3, .. })
        ));
        // trailing comments are fine
        assert!(parse_kern("**kern\n*-\n!!done", "s").is_ok());
    }

    #[test]
    fn serializes_reference_examples() {
        let staff = Staff::new("s", vec![note(PitchSpelled::natural(Step::C, 4), 1, 4)]);
        assert_eq!(serialize_kern(&staff), "**kern\n4c\n*-");
        assert_eq!(serialize_kern(&Staff::new("s", vec![])), "**kern\n*-");
        let clef = Staff::new(
            "s",
            vec![StaffSymbol::Clef(Clef {
                shape: ClefShape::F,
                line: 4,
            })],
        );
        assert_eq!(serialize_kern(&clef), "**kern\n*clefF4\n*-");
    }

    #[test]
    fn serialize_then_parse_round_trips() {
        let text = "**kern\n*clefG2\n*M6/8\n8dd-\n16e##\n=\n2.r\n4CC\n=\n*-";
        let staff = parse_kern(text, "s").unwrap();
        assert_eq!(parse_kern(&serialize_kern(&staff), "s").unwrap(), staff);
        assert_eq!(serialize_kern(&staff), text.replace("e##", "e##"));
    }

    #[test]
    fn transpose_examples() {
        let c4 = Staff::new("s", vec![note(PitchSpelled::natural(Step::C, 4), 1, 4)]);
        let up = transpose(&c4, 12).unwrap();
        assert_eq!(
            up.symbols[0],
            note(PitchSpelled::natural(Step::C, 5), 1, 4)
        );
        assert_eq!(transpose(&c4, 0).unwrap(), c4);

        let pair = Staff::new(
            "s",
            vec![
                note(PitchSpelled::natural(Step::E, 4), 1, 4),
                note(PitchSpelled::natural(Step::G, 4), 1, 4),
            ],
        );
        let shifted = transpose(&pair, 1).unwrap();
        assert_eq!(
            shifted.symbols,
            vec![
                note(PitchSpelled::natural(Step::F, 4), 1, 4),
                note(PitchSpelled::new(Step::G, 1, 4), 1, 4),
            ]
        );
    }

    #[test]
    fn transpose_octave_bounds() {
        let low = Staff::new("s", vec![note(PitchSpelled::natural(Step::C, -1), 1, 4)]);
        assert!(matches!(
            transpose(&low, -1),
            Err(TransposeError::OctaveOutOfRange { .. })
        ));
        let high = Staff::new("s", vec![note(PitchSpelled::natural(Step::B, 9), 1, 4)]);
        assert!(matches!(
            transpose(&high, 1),
            Err(TransposeError::OctaveOutOfRange { .. })
        ));
    }

    #[test]
    fn transpose_composes_at_chromatic_level() {
        let staff = parse_kern("**kern\n4c\n8d#\n4B-\n2e\n*-", "s").unwrap();
        let via_sum = transpose(&staff, 7).unwrap();
        let via_steps = transpose(&transpose(&staff, 3).unwrap(), 4).unwrap();
        let nums = |s: &Staff| -> Vec<i32> {
            s.notes().map(|(p, _)| p.chromatic_number()).collect()
        };
        assert_eq!(nums(&via_sum), nums(&via_steps));
    }

    #[test]
    fn corpus_rejects_duplicate_ids() {
        let a = Staff::new("x", vec![]);
        let b = Staff::new("x", vec![]);
        assert!(matches!(
            Corpus::new(vec![a, b], "test"),
            Err(CorpusError::DuplicateStaffId(_))
        ));
    }
}
