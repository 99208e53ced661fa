//! The `a^n b^n c^n` next-symbol prediction benchmark.
//!
//! Strings `S a^n b^n c^n` are presented one symbol at a time on four input
//! channels (S, a, b, c), each +1 when its symbol is observed and -1
//! otherwise. Four binary readouts predict whether a, b, c or the terminator
//! T may legally follow. A string is accepted when the predicted set equals
//! the legal set at every step.

use std::fmt;

use crate::error::{Error, Result};
use crate::lstm::{InputMode, LstmNetwork};
use crate::readout::{ActivationTable, Readout};

/// Input channels: S, a, b, c.
pub const N_SYMBOL_INPUTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    S,
    A,
    B,
    C,
    T,
}

/// The symbols with a dedicated classifier, in classifier order.
pub const PREDICTED: [Symbol; 4] = [Symbol::A, Symbol::B, Symbol::C, Symbol::T];

impl Symbol {
    pub fn as_char(self) -> char {
        match self {
            Symbol::S => 'S',
            Symbol::A => 'a',
            Symbol::B => 'b',
            Symbol::C => 'c',
            Symbol::T => 'T',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        Some(match c {
            'S' => Symbol::S,
            'a' => Symbol::A,
            'b' => Symbol::B,
            'c' => Symbol::C,
            'T' => Symbol::T,
            _ => return None,
        })
    }

    /// Four-channel input encoding; the terminator is never presented.
    pub fn encode(self) -> [f64; N_SYMBOL_INPUTS] {
        let hot = match self {
            Symbol::S => 0,
            Symbol::A => 1,
            Symbol::B => 2,
            Symbol::C => 3,
            Symbol::T => usize::MAX,
        };
        std::array::from_fn(|k| if k == hot { 1.0 } else { -1.0 })
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// A subset of {S, a, b, c, T}.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SymbolSet(u8);

impl SymbolSet {
    pub const EMPTY: SymbolSet = SymbolSet(0);

    pub fn of(symbols: &[Symbol]) -> Self {
        let mut s = Self::EMPTY;
        for &sym in symbols {
            s.insert(sym);
        }
        s
    }

    pub fn insert(&mut self, sym: Symbol) {
        self.0 |= sym.bit();
    }

    pub fn contains(self, sym: Symbol) -> bool {
        self.0 & sym.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for SymbolSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let members: String = [Symbol::S, Symbol::A, Symbol::B, Symbol::C, Symbol::T]
            .into_iter()
            .filter(|&s| self.contains(s))
            .map(Symbol::as_char)
            .collect();
        write!(f, "{{{members}}}")
    }
}

/// Legal continuations of `prefix` (which must start with S) under the
/// language `{a^n b^n c^n T : n >= 1}`, by counting. Empty for illegal prefixes.
pub fn legal_next(prefix: &[Symbol]) -> SymbolSet {
    let Some((&Symbol::S, body)) = prefix.split_first() else {
        return SymbolSet::EMPTY;
    };
    let (mut a, mut b, mut c) = (0usize, 0usize, 0usize);
    for &sym in body {
        match sym {
            Symbol::A if b == 0 && c == 0 => a += 1,
            Symbol::B if c == 0 && b < a => b += 1,
            Symbol::C if b == a && c < a => c += 1,
            _ => return SymbolSet::EMPTY,
        }
    }
    match (a, b, c) {
        (0, _, _) => SymbolSet::of(&[Symbol::A]),
        (_, 0, _) => SymbolSet::of(&[Symbol::A, Symbol::B]),
        (a, b, 0) if b < a => SymbolSet::of(&[Symbol::B]),
        (a, _, 0) => {
            debug_assert_eq!(b, a);
            SymbolSet::of(&[Symbol::C])
        }
        (a, _, c) if c < a => SymbolSet::of(&[Symbol::C]),
        _ => SymbolSet::of(&[Symbol::T]),
    }
}

/// One legal string `S a^n b^n c^n` with its per-step legal-next sets.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolString {
    pub n: usize,
    pub symbols: Vec<Symbol>,
    pub legal_next: Vec<SymbolSet>,
}

impl SymbolString {
    pub fn new(n: usize) -> Self {
        let mut symbols = Vec::with_capacity(3 * n + 1);
        symbols.push(Symbol::S);
        for sym in [Symbol::A, Symbol::B, Symbol::C] {
            symbols.extend(std::iter::repeat_n(sym, n));
        }
        let legal_next = (1..=symbols.len())
            .map(|k| legal_next(&symbols[..k]))
            .collect();
        Self {
            n,
            symbols,
            legal_next,
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn inputs(&self) -> Vec<Vec<f64>> {
        encode_inputs(&self.symbols)
    }

    /// ±1 targets for the classifier of `symbol`, one per step.
    pub fn targets(&self, symbol: Symbol) -> Vec<f64> {
        self.legal_next
            .iter()
            .map(|set| if set.contains(symbol) { 1.0 } else { -1.0 })
            .collect()
    }

    /// Symbols as text, e.g. `SaabbccT`.
    pub fn to_text(&self) -> String {
        self.symbols
            .iter()
            .map(|s| s.as_char())
            .chain(std::iter::once('T'))
            .collect()
    }
}

pub fn encode_inputs(symbols: &[Symbol]) -> Vec<Vec<f64>> {
    symbols.iter().map(|s| s.encode().to_vec()).collect()
}

/// Legal strings for `n = 1..=N`, first half for training, second for validation.
#[derive(Debug, Clone, PartialEq)]
pub struct CslDataset {
    pub strings: Vec<SymbolString>,
}

impl CslDataset {
    pub fn max_n(&self) -> usize {
        self.strings.len()
    }

    fn split(&self) -> usize {
        self.strings.len() / 2
    }

    pub fn training(&self) -> &[SymbolString] {
        &self.strings[..self.split()]
    }

    pub fn validation(&self) -> &[SymbolString] {
        &self.strings[self.split()..]
    }

    /// One string per line.
    pub fn to_text(&self) -> String {
        self.strings.iter().map(|s| s.to_text() + "\n").collect()
    }
}

pub fn generate_csl_set(max_n: usize) -> Result<CslDataset> {
    if max_n < 2 {
        return Err(Error::InvalidConfig(format!(
            "need N >= 2 so the validation half is non-empty, got {max_n}"
        )));
    }
    Ok(CslDataset {
        strings: (1..=max_n).map(SymbolString::new).collect(),
    })
}

/// Activation rows for each string, resetting the network before every string.
pub fn collect_activations(
    net: &mut LstmNetwork,
    strings: &[SymbolString],
) -> Result<Vec<Vec<Vec<f64>>>> {
    strings
        .iter()
        .map(|s| {
            net.reset();
            net.run_sequence(&s.inputs(), None, InputMode::ExternalOnly)
        })
        .collect()
}

/// Four tables (classifiers a, b, c, T) sharing rows, differing in targets.
pub fn tables_from_activations(
    activations: &[Vec<Vec<f64>>],
    strings: &[SymbolString],
    width: usize,
) -> Result<[ActivationTable; 4]> {
    let mut tables: [ActivationTable; 4] = std::array::from_fn(|_| ActivationTable::new(width));
    for (rows, string) in activations.iter().zip(strings) {
        for (table, &sym) in tables.iter_mut().zip(&PREDICTED) {
            table.push_sequence(rows, &string.targets(sym))?;
        }
    }
    Ok(tables)
}

pub fn build_csl_tables(
    net: &mut LstmNetwork,
    strings: &[SymbolString],
) -> Result<[ActivationTable; 4]> {
    if net.n_inputs() != N_SYMBOL_INPUTS {
        return Err(Error::InputLength {
            expected: N_SYMBOL_INPUTS,
            got: net.n_inputs(),
        });
    }
    let activations = collect_activations(net, strings)?;
    tables_from_activations(&activations, strings, net.n_cells())
}

/// Fits one readout per classifier.
pub fn fit_classifiers<R, F>(tables: &[ActivationTable; 4], fit: F) -> Result<[R; 4]>
where
    F: Fn(&ActivationTable) -> Result<R>,
{
    let [a, b, c, t] = tables;
    Ok([fit(a)?, fit(b)?, fit(c)?, fit(t)?])
}

/// Symbols whose classifier output is strictly positive.
pub fn predicted_set<R: Readout>(models: &[R; 4], phi: &[f64]) -> Result<SymbolSet> {
    let mut set = SymbolSet::EMPTY;
    for (model, &sym) in models.iter().zip(&PREDICTED) {
        if model.predict(phi)? > 0.0 {
            set.insert(sym);
        }
    }
    Ok(set)
}

/// Acceptance rule over a presented symbol sequence (starting with S) and the
/// predicted set after each symbol: at every step the prediction must equal
/// the legal-next set of the prefix and contain the symbol that actually
/// follows (T after the last one).
pub fn accepts(symbols: &[Symbol], predictions: &[SymbolSet]) -> bool {
    symbols.len() == predictions.len()
        && !symbols.is_empty()
        && (0..symbols.len()).all(|t| step_accepted(symbols, t, predictions[t]))
}

fn step_accepted(symbols: &[Symbol], t: usize, predicted: SymbolSet) -> bool {
    let following = symbols.get(t + 1).copied().unwrap_or(Symbol::T);
    predicted == legal_next(&symbols[..=t]) && predicted.contains(following)
}

/// Runs `symbols` through a freshly reset network and applies [`accepts`].
pub fn classify_string<R: Readout>(
    net: &mut LstmNetwork,
    models: &[R; 4],
    symbols: &[Symbol],
) -> Result<bool> {
    net.reset();
    for t in 0..symbols.len() {
        let phi = net.step(&symbols[t].encode())?;
        if !step_accepted(symbols, t, predicted_set(models, phi)?) {
            return Ok(false);
        }
    }
    Ok(!symbols.is_empty())
}

/// Largest `m <= max_n` such that every string with `n <= m` is accepted.
pub fn csl_generalization<R: Readout>(
    net: &mut LstmNetwork,
    models: &[R; 4],
    max_n: usize,
) -> Result<usize> {
    for n in 1..=max_n {
        if !classify_string(net, models, &SymbolString::new(n).symbols)? {
            return Ok(n - 1);
        }
    }
    Ok(max_n)
}

/// Number of per-step, per-classifier sign errors over the given activations.
pub fn count_sign_errors<R: Readout>(
    models: &[R; 4],
    activations: &[Vec<Vec<f64>>],
    strings: &[SymbolString],
) -> Result<usize> {
    let mut errors = 0;
    for (rows, string) in activations.iter().zip(strings) {
        for (phi, legal) in rows.iter().zip(&string.legal_next) {
            for (model, &sym) in models.iter().zip(&PREDICTED) {
                let positive = model.predict(phi)? > 0.0;
                if positive != legal.contains(sym) {
                    errors += 1;
                }
            }
        }
    }
    Ok(errors)
}

/// Mean of `max(0, 1 - d * y)` over every step and classifier, with `d` the
/// +-1 target and `y` the raw classifier output.
pub fn hinge_residual<R: Readout>(
    models: &[R; 4],
    activations: &[Vec<Vec<f64>>],
    strings: &[SymbolString],
) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for (rows, string) in activations.iter().zip(strings) {
        for (phi, legal) in rows.iter().zip(&string.legal_next) {
            for (model, &sym) in models.iter().zip(&PREDICTED) {
                let target = if legal.contains(sym) { 1.0 } else { -1.0 };
                total += (1.0 - target * model.predict(phi)?).max(0.0);
                count += 1;
            }
        }
    }
    Ok(if count == 0 {
        0.0
    } else {
        total / count as f64
    })
}

/// Sign errors of `models` (fitted on the training half) over the training
/// and validation halves together.
pub fn csl_fitness<R: Readout>(
    net: &mut LstmNetwork,
    models: &[R; 4],
    dataset: &CslDataset,
) -> Result<f64> {
    let activations = collect_activations(net, &dataset.strings)?;
    Ok(count_sign_errors(models, &activations, &dataset.strings)? as f64)
}
