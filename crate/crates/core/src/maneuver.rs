//! Discrete maneuver automaton: the atomic Hold/Forward/Backward succession
//! rules and their parallel composition over `p` outputs.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::primitives::AtomicTag;
use crate::scenario::PrimitiveMode;
use crate::workspace::{FaceLabel, Sign};

/// One atomic primitive per output. Encoded in base 3 with output 0 as the
/// least significant digit (`H = 0, F = 1, B = 2`), so all-Hold is code 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CompositePrimitive(pub Vec<AtomicTag>);

impl CompositePrimitive {
    pub fn all_hold(p: usize) -> CompositePrimitive {
        CompositePrimitive(vec![AtomicTag::Hold; p])
    }

    pub fn from_code(mut code: u32, p: usize) -> CompositePrimitive {
        let mut tags = Vec::with_capacity(p);
        for _ in 0..p {
            tags.push(AtomicTag::from_code(code % 3));
            code /= 3;
        }
        CompositePrimitive(tags)
    }

    pub fn code(&self) -> u32 {
        self.0.iter().rev().fold(0, |acc, t| acc * 3 + t.code())
    }

    pub fn p(&self) -> usize {
        self.0.len()
    }

    pub fn tags(&self) -> &[AtomicTag] {
        &self.0
    }

    pub fn moving_count(&self) -> usize {
        self.0.iter().filter(|&&t| t != AtomicTag::Hold).count()
    }

    pub fn is_all_hold(&self) -> bool {
        self.moving_count() == 0
    }
}

impl fmt::Display for CompositePrimitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.0 {
            write!(f, "{}", t.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for CompositePrimitive {
    type Err = Error;
    fn from_str(s: &str) -> Result<CompositePrimitive> {
        s.chars()
            .map(|c| {
                AtomicTag::from_symbol(c)
                    .ok_or_else(|| Error::InvalidArgument(format!("bad primitive `{s}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(CompositePrimitive)
    }
}

/// Allowed single-output successions `(from, face sign, to)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomicEdgeTable {
    allowed: [[[bool; 3]; 3]; 3],
}

impl Default for AtomicEdgeTable {
    /// Crossing: F →{H, F} on `+`, B →{H, B} on `-`. Not crossing: H →{H, F, B},
    /// F → F, B → B. A coordinate already moving mid-box is never re-targeted.
    fn default() -> Self {
        use AtomicTag::*;
        AtomicEdgeTable::from_triples(&[
            (Forward, Sign::Plus, Hold),
            (Forward, Sign::Plus, Forward),
            (Backward, Sign::Minus, Hold),
            (Backward, Sign::Minus, Backward),
            (Hold, Sign::Zero, Hold),
            (Hold, Sign::Zero, Forward),
            (Hold, Sign::Zero, Backward),
            (Forward, Sign::Zero, Forward),
            (Backward, Sign::Zero, Backward),
        ])
    }
}

impl AtomicEdgeTable {
    pub fn from_triples(triples: &[(AtomicTag, Sign, AtomicTag)]) -> AtomicEdgeTable {
        let mut allowed = [[[false; 3]; 3]; 3];
        for &(from, sign, to) in triples {
            allowed[from.code() as usize][sign.code() as usize][to.code() as usize] = true;
        }
        AtomicEdgeTable { allowed }
    }

    /// Parses `"F+H"`-style triples.
    pub fn from_specs(specs: &[String]) -> Result<AtomicEdgeTable> {
        let mut triples = Vec::with_capacity(specs.len());
        for spec in specs {
            let chars: Vec<char> = spec.trim().chars().collect();
            let parsed = match chars.as_slice() {
                [a, s, b] => AtomicTag::from_symbol(*a)
                    .zip(Sign::from_symbol(*s))
                    .zip(AtomicTag::from_symbol(*b))
                    .map(|((a, s), b)| (a, s, b)),
                _ => None,
            };
            match parsed {
                Some((from, sign, to)) => {
                    if let Some(exit) = from.exit_sign() {
                        if sign != Sign::Zero && sign != exit {
                            return Err(Error::Semantic(format!(
                                "atomic edge `{spec}` crosses a face {from} never reaches"
                            )));
                        }
                    } else if sign != Sign::Zero {
                        return Err(Error::Semantic(format!(
                            "atomic edge `{spec}`: Hold never crosses a face"
                        )));
                    }
                    triples.push((from, sign, to));
                }
                None => {
                    return Err(Error::Semantic(format!("malformed atomic edge `{spec}`")));
                }
            }
        }
        Ok(AtomicEdgeTable::from_triples(&triples))
    }

    pub fn allows(&self, from: AtomicTag, sign: Sign, to: AtomicTag) -> bool {
        self.allowed[from.code() as usize][sign.code() as usize][to.code() as usize]
    }

    pub fn targets(&self, from: AtomicTag, sign: Sign) -> impl Iterator<Item = AtomicTag> + '_ {
        AtomicTag::ALL
            .into_iter()
            .filter(move |&to| self.allows(from, sign, to))
    }

    pub fn triples(&self) -> Vec<(AtomicTag, Sign, AtomicTag)> {
        let mut out = Vec::new();
        for from in AtomicTag::ALL {
            for sign in Sign::ALL {
                for to in self.targets(from, sign) {
                    out.push((from, sign, to));
                }
            }
        }
        out
    }
}

/// Default atomic edge table.
pub fn atomic_edges() -> AtomicEdgeTable {
    AtomicEdgeTable::default()
}

/// Faces a composite primitive may reach first: every nonempty subset of its
/// moving outputs crossing together, each in its own direction.
pub fn outcomes(m: &CompositePrimitive) -> Vec<FaceLabel> {
    let mut labels: Vec<FaceLabel> = outcome_codes(m)
        .into_iter()
        .map(|c| FaceLabel::from_code(c, m.p()))
        .collect();
    labels.sort_by_key(|l| l.code());
    labels
}

fn outcome_codes(m: &CompositePrimitive) -> Vec<u32> {
    let moving: Vec<(usize, Sign)> = m
        .tags()
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.exit_sign().map(|s| (i, s)))
        .collect();
    let mut codes = Vec::with_capacity((1 << moving.len()) - 1);
    for subset in 1u32..(1 << moving.len()) {
        let mut code = 0u32;
        for (bit, &(i, sign)) in moving.iter().enumerate() {
            if subset & (1 << bit) != 0 {
                code += sign.code() * 3u32.pow(i as u32);
            }
        }
        codes.push(code);
    }
    codes.sort_unstable();
    codes
}

/// Successor primitives after `m` reaches face `label`, using the default table.
pub fn successors(m: &CompositePrimitive, label: &FaceLabel) -> Result<Vec<CompositePrimitive>> {
    successors_with(&AtomicEdgeTable::default(), m, label)
}

pub fn successors_with(
    table: &AtomicEdgeTable,
    m: &CompositePrimitive,
    label: &FaceLabel,
) -> Result<Vec<CompositePrimitive>> {
    if label.p() != m.p() || !outcome_codes(m).contains(&label.code()) {
        return Err(Error::ContractViolation(format!(
            "face {label} is not an outcome of primitive {m}"
        )));
    }
    let mut out = vec![Vec::with_capacity(m.p())];
    for (&tag, &sign) in m.tags().iter().zip(label.signs()) {
        let targets: Vec<AtomicTag> = table.targets(tag, sign).collect();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                targets.iter().map(move |&t| {
                    let mut next = prefix.clone();
                    next.push(t);
                    next
                })
            })
            .collect();
    }
    let mut result: Vec<CompositePrimitive> = out.into_iter().map(CompositePrimitive).collect();
    result.sort_by_key(|c| c.code());
    Ok(result)
}

const NOT_IN_MA: u32 = u32::MAX;

/// Composed maneuver automaton. Primitives are indexed densely in increasing
/// code order; in ND mode the index equals the code.
#[derive(Debug, Clone)]
pub struct ManeuverAutomaton {
    p: usize,
    mode: PrimitiveMode,
    table: AtomicEdgeTable,
    primitives: Vec<CompositePrimitive>,
    index_of_code: Vec<u32>,
    outcomes: Vec<Vec<u32>>,
    /// Per primitive, per outcome slot: successor primitive indices.
    successors: Vec<Vec<Vec<u32>>>,
}

impl ManeuverAutomaton {
    pub fn compose(p: usize, mode: PrimitiveMode) -> ManeuverAutomaton {
        ManeuverAutomaton::compose_with(p, mode, AtomicEdgeTable::default())
    }

    pub fn compose_with(p: usize, mode: PrimitiveMode, table: AtomicEdgeTable) -> ManeuverAutomaton {
        assert!(p >= 1, "at least one output is required");
        let total = 3u32.pow(p as u32);
        let mut primitives = Vec::new();
        let mut index_of_code = vec![NOT_IN_MA; total as usize];
        for code in 0..total {
            let m = CompositePrimitive::from_code(code, p);
            let keep = match mode {
                PrimitiveMode::ND => true,
                PrimitiveMode::D => m.moving_count() <= 1,
            };
            if keep {
                index_of_code[code as usize] = primitives.len() as u32;
                primitives.push(m);
            }
        }
        let mut outcomes = Vec::with_capacity(primitives.len());
        let mut successors = Vec::with_capacity(primitives.len());
        for m in &primitives {
            let codes = outcome_codes(m);
            let mut per_slot = Vec::with_capacity(codes.len());
            for &code in &codes {
                let label = FaceLabel::from_code(code, p);
                let succ = successors_with(&table, m, &label).expect("label is an outcome");
                let mut idx: Vec<u32> = succ
                    .iter()
                    .map(|s| index_of_code[s.code() as usize])
                    .filter(|&i| i != NOT_IN_MA)
                    .collect();
                idx.sort_unstable();
                per_slot.push(idx);
            }
            outcomes.push(codes);
            successors.push(per_slot);
        }
        ManeuverAutomaton {
            p,
            mode,
            table,
            primitives,
            index_of_code,
            outcomes,
            successors,
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn mode(&self) -> PrimitiveMode {
        self.mode
    }

    pub fn table(&self) -> &AtomicEdgeTable {
        &self.table
    }

    pub fn primitive_count(&self) -> usize {
        self.primitives.len()
    }

    pub fn primitive(&self, index: usize) -> &CompositePrimitive {
        &self.primitives[index]
    }

    pub fn primitives(&self) -> &[CompositePrimitive] {
        &self.primitives
    }

    pub fn index_of(&self, m: &CompositePrimitive) -> Option<usize> {
        if m.p() != self.p {
            return None;
        }
        match self.index_of_code[m.code() as usize] {
            NOT_IN_MA => None,
            i => Some(i as usize),
        }
    }

    pub fn all_hold_index(&self) -> usize {
        0
    }

    /// Outcome label codes of a primitive, ascending.
    pub fn outcome_codes(&self, index: usize) -> &[u32] {
        &self.outcomes[index]
    }

    /// Slot of `label_code` within the outcomes of `index`.
    pub fn outcome_slot(&self, index: usize, label_code: u32) -> Option<usize> {
        self.outcomes[index].binary_search(&label_code).ok()
    }

    /// Successor indices for the outcome in `slot`, ascending.
    pub fn successor_indices(&self, index: usize, slot: usize) -> &[u32] {
        &self.successors[index][slot]
    }

    /// All edges as `(source, label code, target)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, u32, usize)> + '_ {
        (0..self.primitives.len()).flat_map(move |m| {
            self.outcomes[m]
                .iter()
                .zip(&self.successors[m])
                .flat_map(move |(&label, succ)| succ.iter().map(move |&t| (m, label, t as usize)))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.successors
            .iter()
            .flat_map(|slots| slots.iter().map(|s| s.len()))
            .sum()
    }

    pub fn dump(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        for (m, label, t) in self.edges() {
            writeln!(
                out,
                "{} {} {}",
                self.primitives[m],
                FaceLabel::from_code(label, self.p),
                self.primitives[t]
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;
    use AtomicTag::*;

    fn prim(s: &str) -> CompositePrimitive {
        s.parse().unwrap()
    }

    fn label(s: &str) -> FaceLabel {
        s.parse().unwrap()
    }

    #[test]
    fn atomic_table_examples() {
        let t = atomic_edges();
        assert!(t.allows(Forward, Sign::Plus, Hold));
        assert!(!t.allows(Forward, Sign::Plus, Backward));
        assert!(t.allows(Hold, Sign::Zero, Forward));
        assert!(!t.allows(Forward, Sign::Zero, Hold));
        assert_eq!(t.triples().len(), 9);
    }

    #[test]
    fn composition_counts() {
        assert_eq!(ManeuverAutomaton::compose(1, PrimitiveMode::ND).primitive_count(), 3);
        assert_eq!(ManeuverAutomaton::compose(2, PrimitiveMode::ND).primitive_count(), 9);
        assert_eq!(ManeuverAutomaton::compose(3, PrimitiveMode::ND).primitive_count(), 27);
        let d = ManeuverAutomaton::compose(2, PrimitiveMode::D);
        let names: BTreeSet<String> = d.primitives().iter().map(|m| m.to_string()).collect();
        let expected: BTreeSet<String> =
            ["HH", "FH", "BH", "HF", "HB"].iter().map(|s| s.to_string()).collect();
        assert_eq!(names, expected);
    }

    #[test]
    fn outcome_examples() {
        assert_eq!(outcomes(&prim("FH")), vec![label("+0")]);
        let ff: BTreeSet<FaceLabel> = outcomes(&prim("FF")).into_iter().collect();
        let expected: BTreeSet<FaceLabel> =
            [label("+0"), label("0+"), label("++")].into_iter().collect();
        assert_eq!(ff, expected);
        assert!(outcomes(&prim("HH")).is_empty());
        assert_eq!(outcomes(&prim("FBF")).len(), 7);
    }

    #[test]
    fn successor_examples() {
        let s: BTreeSet<String> = successors(&prim("FH"), &label("+0"))
            .unwrap()
            .iter()
            .map(|m| m.to_string())
            .collect();
        let e: BTreeSet<String> = ["HH", "FH", "HF", "FF", "HB", "FB"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(s, e);
        assert_eq!(successors(&prim("FF"), &label("++")).unwrap().len(), 4);
        let s: BTreeSet<String> = successors(&prim("BH"), &label("-0"))
            .unwrap()
            .iter()
            .map(|m| m.to_string())
            .collect();
        let e: BTreeSet<String> = ["HH", "BH", "HF", "BF", "HB", "BB"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(s, e);
        assert!(matches!(
            successors(&prim("FH"), &label("0+")),
            Err(Error::ContractViolation(_))
        ));
    }

    /// Brute force: every (m, σ, m') triple over all labels, checked against
    /// the atomic table component by component.
    fn brute_force_edges(p: usize, mode: PrimitiveMode) -> BTreeSet<(u32, u32, u32)> {
        let table = atomic_edges();
        let n = 3u32.pow(p as u32);
        let keep = |m: &CompositePrimitive| mode == PrimitiveMode::ND || m.moving_count() <= 1;
        let mut out = BTreeSet::new();
        for mc in 0..n {
            let m = CompositePrimitive::from_code(mc, p);
            if !keep(&m) {
                continue;
            }
            for lc in 1..n {
                let l = FaceLabel::from_code(lc, p);
                // Label must be a subset of the moving outputs in their directions.
                let consistent = m.tags().iter().zip(l.signs()).all(|(t, s)| {
                    *s == Sign::Zero || t.exit_sign() == Some(*s)
                });
                if !consistent {
                    continue;
                }
                for tc in 0..n {
                    let t = CompositePrimitive::from_code(tc, p);
                    if !keep(&t) {
                        continue;
                    }
                    let ok = (0..p).all(|i| table.allows(m.0[i], l.0[i], t.0[i]));
                    if ok {
                        out.insert((mc, lc, tc));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn composed_edges_match_brute_force() {
        for p in 1..=3 {
            for mode in [PrimitiveMode::ND, PrimitiveMode::D] {
                let ma = ManeuverAutomaton::compose(p, mode);
                let got: BTreeSet<(u32, u32, u32)> = ma
                    .edges()
                    .map(|(m, l, t)| (ma.primitive(m).code(), l, ma.primitive(t).code()))
                    .collect();
                assert_eq!(got.len(), ma.edge_count());
                assert_eq!(got, brute_force_edges(p, mode), "p = {p}, {mode}");
                let self_consistent: usize = (0..ma.primitive_count())
                    .map(|m| {
                        outcomes(ma.primitive(m))
                            .iter()
                            .map(|l| {
                                successors(ma.primitive(m), l)
                                    .unwrap()
                                    .iter()
                                    .filter(|s| ma.index_of(s).is_some())
                                    .count()
                            })
                            .sum::<usize>()
                    })
                    .sum();
                assert_eq!(self_consistent, ma.edge_count());
            }
        }
    }

    #[test]
    fn edge_labels_are_outcomes_and_d_is_sub_automaton() {
        for p in 1..=3 {
            let nd = ManeuverAutomaton::compose(p, PrimitiveMode::ND);
            let d = ManeuverAutomaton::compose(p, PrimitiveMode::D);
            for (m, l, _) in nd.edges() {
                assert!(nd.outcome_codes(m).contains(&l));
                assert!(l != 0);
            }
            let nd_edges: BTreeSet<(u32, u32, u32)> = nd
                .edges()
                .map(|(m, l, t)| (nd.primitive(m).code(), l, nd.primitive(t).code()))
                .collect();
            for (m, l, t) in d.edges() {
                assert!(nd_edges.contains(&(d.primitive(m).code(), l, d.primitive(t).code())));
                assert_eq!(d.outcome_codes(m).len(), 1);
            }
        }
    }

    #[test]
    fn custom_table_parsing() {
        let specs: Vec<String> = ["F+H", "H0H", "H0F", "F0F"].iter().map(|s| s.to_string()).collect();
        let t = AtomicEdgeTable::from_specs(&specs).unwrap();
        assert!(t.allows(Forward, Sign::Plus, Hold));
        assert!(!t.allows(Forward, Sign::Plus, Forward));
        assert!(AtomicEdgeTable::from_specs(&["H+F".to_string()]).is_err());
        assert!(AtomicEdgeTable::from_specs(&["F-H".to_string()]).is_err());
        assert!(AtomicEdgeTable::from_specs(&["FH".to_string()]).is_err());
    }
}
