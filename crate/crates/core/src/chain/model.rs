use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bath::{BathSemantics, BathSide, BathSpec};
use super::config::Configuration;
use super::label::{breakdown_charge, dipole_label, east_regions, multipole, reduce_word, spin_pattern, SectorLabel};
use crate::error::{Error, Result};

/// Pair-flip colour symbols, indexed by letter.
const COLOR_SYMBOLS: &[u8] = b"rgbycmkw";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Breakdown,
    Tjz,
    PairFlip { colors: u8 },
    Dipole3,
    Dipole4,
    East,
}

/// Which [`SectorLabel`] variant a model produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKind {
    BreakdownCharge,
    SpinPattern,
    ReducedWord,
    Dipole,
    Multipole,
    East,
}

/// Optional model parameters, as found in config files.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Number of colours for the pair-flip model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u8>,
    /// Facilitation range for the East model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
}

impl ModelKind {
    pub fn from_name(name: &str, params: &ModelParams) -> Result<Self> {
        let kind = match name {
            "breakdown" => ModelKind::Breakdown,
            "tjz" => ModelKind::Tjz,
            "pairflip" => {
                let q = params.q.unwrap_or(2);
                if !(2..=4).contains(&q) {
                    return Err(Error::InvalidParams(format!(
                        "pairflip needs 2 <= q <= 4 colours, got {q}"
                    )));
                }
                ModelKind::PairFlip { colors: q }
            }
            "dipole3" => ModelKind::Dipole3,
            "dipole4" => ModelKind::Dipole4,
            "east" => {
                if let Some(r) = params.r {
                    if r != 1 {
                        return Err(Error::InvalidParams(format!(
                            "east is implemented for r = 1 only, got {r}"
                        )));
                    }
                }
                ModelKind::East
            }
            other => return Err(Error::UnknownModel(other.to_string())),
        };
        if params.q.is_some() && !matches!(kind, ModelKind::PairFlip { .. }) {
            return Err(Error::InvalidParams(format!("`q` does not apply to {name}")));
        }
        if params.r.is_some() && kind != ModelKind::East {
            return Err(Error::InvalidParams(format!("`r` does not apply to {name}")));
        }
        Ok(kind)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Breakdown => "breakdown",
            ModelKind::Tjz => "tjz",
            ModelKind::PairFlip { .. } => "pairflip",
            ModelKind::Dipole3 => "dipole3",
            ModelKind::Dipole4 => "dipole4",
            ModelKind::East => "east",
        }
    }

    pub fn params(&self) -> ModelParams {
        match self {
            ModelKind::PairFlip { colors } => ModelParams {
                q: Some(*colors),
                r: None,
            },
            _ => ModelParams::default(),
        }
    }

    pub fn d(&self) -> usize {
        match self {
            ModelKind::PairFlip { colors } => *colors as usize,
            ModelKind::East => 2,
            _ => 3,
        }
    }

    pub fn window(&self) -> usize {
        match self {
            ModelKind::Dipole3 | ModelKind::East => 3,
            ModelKind::Dipole4 => 4,
            _ => 2,
        }
    }

    pub fn min_len(&self) -> usize {
        match self {
            ModelKind::Dipole3 => 3,
            ModelKind::Dipole4 => 4,
            _ => 2,
        }
    }

    pub fn label_kind(&self) -> LabelKind {
        match self {
            ModelKind::Breakdown => LabelKind::BreakdownCharge,
            ModelKind::Tjz => LabelKind::SpinPattern,
            ModelKind::PairFlip { .. } => LabelKind::ReducedWord,
            ModelKind::Dipole3 => LabelKind::Dipole,
            ModelKind::Dipole4 => LabelKind::Multipole,
            ModelKind::East => LabelKind::East,
        }
    }

    pub fn default_bath(&self) -> BathSpec {
        match self {
            ModelKind::Tjz => BathSpec::new(BathSide::Right, BathSemantics::UniformResample),
            ModelKind::Dipole3 | ModelKind::Dipole4 => BathSpec::new(BathSide::Left, BathSemantics::DipoleTwoSite),
            ModelKind::East => BathSpec::new(BathSide::Left, BathSemantics::EastSecondSite),
            _ => BathSpec::new(BathSide::Left, BathSemantics::UniformResample),
        }
    }

    /// Bath with the model's semantics on the given side.
    pub fn bath_on(&self, side: BathSide) -> BathSpec {
        BathSpec::new(side, self.default_bath().semantics)
    }

    /// Groups of window contents that the local dynamics mixes among.
    fn local_classes(&self) -> Vec<Vec<Vec<u8>>> {
        match self {
            ModelKind::Breakdown => vec![vec![vec![0, 1], vec![2, 0]], vec![vec![0, 2], vec![2, 1]]],
            ModelKind::Tjz => vec![vec![vec![0, 1], vec![1, 0]], vec![vec![0, 2], vec![2, 0]]],
            ModelKind::PairFlip { colors } => vec![(0..*colors).map(|a| vec![a, a]).collect()],
            ModelKind::East => vec![vec![vec![1, 1, 0], vec![1, 0, 1]]],
            ModelKind::Dipole3 | ModelKind::Dipole4 => {
                let w = self.window();
                let mut groups: Vec<((i64, i64), Vec<Vec<u8>>)> = Vec::new();
                for idx in 0..3u64.pow(w as u32) {
                    let c = Configuration::from_index(idx, 3, w).into_letters();
                    let key = multipole(&c);
                    match groups.iter_mut().find(|(k, _)| *k == key) {
                        Some((_, g)) => g.push(c),
                        None => groups.push((key, vec![c])),
                    }
                }
                groups.into_iter().map(|(_, g)| g).filter(|g| g.len() > 1).collect()
            }
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::PairFlip { colors } => write!(f, "pairflip(q={colors})"),
            other => f.write_str(other.name()),
        }
    }
}

/// A reversible local rewrite `from -> to` on a window of `from.len()` sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub from: Vec<u8>,
    pub to: Vec<u8>,
}

/// Lookup from window contents to the class of contents it can be rewritten into.
#[derive(Clone, Debug)]
pub struct GateTable {
    window: usize,
    d: u64,
    span: u64,
    class_of: Vec<u32>,
    classes: Vec<Vec<u32>>,
}

const NO_CLASS: u32 = u32::MAX;

impl GateTable {
    fn new(window: usize, d: usize, classes: &[Vec<Vec<u8>>]) -> Self {
        let span = (d as u64).pow(window as u32);
        let mut class_of = vec![NO_CLASS; span as usize];
        let mut out = Vec::with_capacity(classes.len());
        for (ci, class) in classes.iter().enumerate() {
            let members: Vec<u32> = class
                .iter()
                .map(|c| super::config::encode(c, d as u64) as u32)
                .collect();
            for &m in &members {
                class_of[m as usize] = ci as u32;
            }
            out.push(members);
        }
        Self {
            window,
            d: d as u64,
            span,
            class_of,
            classes: out,
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Number of distinct window contents, `d^window`.
    pub fn span(&self) -> u64 {
        self.span
    }

    /// Members of the class containing window value `local`, or an empty slice.
    #[inline]
    pub fn class(&self, local: u64) -> &[u32] {
        match self.class_of[local as usize] {
            NO_CLASS => &[],
            c => &self.classes[c as usize],
        }
    }

    pub fn classes(&self) -> &[Vec<u32>] {
        &self.classes
    }

    /// Resamples the window starting at 0-indexed `start` uniformly within its class.
    #[inline]
    pub fn apply<R: Rng + ?Sized>(&self, letters: &mut [u8], start: usize, rng: &mut R) {
        let w = &mut letters[start..start + self.window];
        let local = super::config::encode(w, self.d);
        let class = self.class(local);
        if class.len() < 2 {
            return;
        }
        let pick = class[rng.gen_range(0..class.len())] as u64;
        super::config::decode_into(pick, self.d, w);
    }
}

/// A constraint model on a chain of fixed length, together with its bath.
#[derive(Clone, Debug)]
pub struct Model {
    kind: ModelKind,
    len: usize,
    bath: BathSpec,
    rules: Vec<Rule>,
    gates: GateTable,
}

/// Builds a model by name with its default bath.
pub fn make_model(name: &str, len: usize, params: &ModelParams) -> Result<Model> {
    Model::new(ModelKind::from_name(name, params)?, len)
}

impl Model {
    pub fn new(kind: ModelKind, len: usize) -> Result<Self> {
        if len < kind.min_len() {
            return Err(Error::ChainTooShort {
                model: kind.name().to_string(),
                len,
                min: kind.min_len(),
            });
        }
        if len > super::config::MAX_PACKED_LEN {
            return Err(Error::InvalidParams(format!(
                "chain length {len} exceeds {}",
                super::config::MAX_PACKED_LEN
            )));
        }
        let classes = kind.local_classes();
        let rules = classes
            .iter()
            .flat_map(|class| {
                class.iter().flat_map(move |a| {
                    class.iter().filter(move |b| *b != a).map(move |b| Rule {
                        from: a.clone(),
                        to: b.clone(),
                    })
                })
            })
            .collect();
        let gates = GateTable::new(kind.window(), kind.d(), &classes);
        let bath = kind.default_bath();
        bath.validate(len, kind.d())?;
        Ok(Self {
            kind,
            len,
            bath,
            rules,
            gates,
        })
    }

    pub fn with_bath(mut self, bath: BathSpec) -> Result<Self> {
        bath.validate(self.len, self.d())?;
        self.bath = bath;
        Ok(self)
    }

    pub fn with_bath_side(self, side: BathSide) -> Result<Self> {
        let bath = self.kind.bath_on(side);
        self.with_bath(bath)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn d(&self) -> usize {
        self.kind.d()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn window(&self) -> usize {
        self.kind.window()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn bath(&self) -> &BathSpec {
        &self.bath
    }

    pub fn gates(&self) -> &GateTable {
        &self.gates
    }

    pub fn label_kind(&self) -> LabelKind {
        self.kind.label_kind()
    }

    /// `d^L` as a wide integer.
    pub fn state_count(&self) -> u128 {
        (self.d() as u128).pow(self.len as u32)
    }

    pub fn validate(&self, config: &Configuration) -> Result<()> {
        if config.len() != self.len {
            return Err(Error::InvalidConfiguration(format!(
                "length {} does not match L = {}",
                config.len(),
                self.len
            )));
        }
        Configuration::checked(config.letters().to_vec(), self.d()).map(|_| ())
    }

    /// Every configuration one bulk move away, as `(1-indexed window start, result)`.
    pub fn applicable_moves(&self, config: &Configuration) -> Vec<(usize, Configuration)> {
        let w = self.window();
        let d = self.d() as u64;
        let letters = config.letters();
        let mut out = Vec::new();
        if letters.len() < w {
            return out;
        }
        for start in 0..=letters.len() - w {
            let local = super::config::encode(&letters[start..start + w], d);
            for &m in self.gates.class(local) {
                if m as u64 == local {
                    continue;
                }
                let mut next = letters.to_vec();
                super::config::decode_into(m as u64, d, &mut next[start..start + w]);
                out.push((start + 1, Configuration::new(next)));
            }
        }
        out
    }

    pub fn invariant_label(&self, config: &Configuration) -> SectorLabel {
        self.label(config.letters())
    }

    pub fn label(&self, letters: &[u8]) -> SectorLabel {
        match self.kind {
            ModelKind::Breakdown => SectorLabel::BreakdownCharge {
                charge: breakdown_charge(letters),
            },
            ModelKind::Tjz => SectorLabel::SpinPattern {
                spins: spin_pattern(letters),
            },
            ModelKind::PairFlip { .. } => SectorLabel::ReducedWord {
                word: reduce_word(letters),
            },
            ModelKind::Dipole3 => dipole_label(letters),
            ModelKind::Dipole4 => {
                let (charge, dipole) = multipole(letters);
                SectorLabel::Multipole { charge, dipole }
            }
            ModelKind::East => SectorLabel::East {
                regions: east_regions(letters),
            },
        }
    }

    /// Parses a configuration written with the model's symbols.
    ///
    /// breakdown: `012`; tjz: `0ud` or `0↑↓`; pairflip: `rgby` or digits;
    /// dipole: `-0+`; east: `10` or `•◦`.
    pub fn parse_config(&self, s: &str) -> Result<Configuration> {
        let letters = s.chars().map(|c| self.symbol_value(c)).collect::<Result<Vec<u8>>>()?;
        let config = Configuration::new(letters);
        self.validate(&config)?;
        Ok(config)
    }

    fn symbol_value(&self, c: char) -> Result<u8> {
        let bad = || Error::InvalidConfiguration(format!("symbol `{c}` is not valid for {}", self.name()));
        let v = match (self.kind, c) {
            (ModelKind::Tjz, '0') => 0,
            (ModelKind::Tjz, 'u' | '↑') => 1,
            (ModelKind::Tjz, 'd' | '↓') => 2,
            (ModelKind::Dipole3 | ModelKind::Dipole4, '-' | '−') => 0,
            (ModelKind::Dipole3 | ModelKind::Dipole4, '0') => 1,
            (ModelKind::Dipole3 | ModelKind::Dipole4, '+') => 2,
            (ModelKind::East, '0' | '◦') => 0,
            (ModelKind::East, '1' | '•') => 1,
            (ModelKind::PairFlip { .. }, c) if c.is_ascii_lowercase() => {
                COLOR_SYMBOLS.iter().position(|&s| s as char == c).ok_or_else(bad)? as u8
            }
            (ModelKind::PairFlip { .. } | ModelKind::Breakdown, c) if c.is_ascii_digit() => {
                c.to_digit(10).unwrap() as u8
            }
            _ => return Err(bad()),
        };
        if v as usize >= self.d() {
            return Err(bad());
        }
        Ok(v)
    }

    /// Inverse of [`Model::parse_config`] using ASCII symbols.
    pub fn format_config(&self, letters: &[u8]) -> String {
        letters
            .iter()
            .map(|&a| match self.kind {
                ModelKind::Tjz => ['0', 'u', 'd'][a as usize],
                ModelKind::Dipole3 | ModelKind::Dipole4 => ['-', '0', '+'][a as usize],
                ModelKind::PairFlip { .. } => COLOR_SYMBOLS[a as usize] as char,
                _ => (b'0' + a) as char,
            })
            .collect()
    }
}
