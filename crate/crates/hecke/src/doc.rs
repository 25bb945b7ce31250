//! Stable textual forms: key strings, term lists, and the JSON documents the
//! command-line tool emits.  Every arbitrary-precision integer travels as a
//! decimal string so no reader has to guess at number widths; structural
//! numbers (ranks, primes, exponents, valuations) stay plain JSON numbers.
//! Documents carry a schema label and the engine version that produced them.

use serde::{Deserialize, Serialize};

use crate::coset::HeckeElement;
use crate::gl::GLKey;
use crate::heis::{HeisElt, HeisKey};
use crate::linalg::{ExpVector, PInt, PMatrix};
use crate::{Error, Result};

pub const SCHEMA_ELEMENT: &str = "hecke.element/1";
pub const SCHEMA_SERIES: &str = "hecke.series/1";
pub const SCHEMA_COSETS: &str = "hecke.double-cosets/1";
pub const SCHEMA_REPORT: &str = "hecke.report/1";
pub const ENGINE: &str = env!("CARGO_PKG_VERSION");

/// One term: key string and decimal coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc {
    pub key: String,
    pub coeff: String,
}

/// A Hecke element, keys in the system's native sort order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementDoc {
    pub schema: String,
    pub engine: String,
    pub system: String,
    pub terms: Vec<TermDoc>,
}

/// A truncated series; `coeffs[k]` is the element at X^k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesDoc {
    pub schema: String,
    pub engine: String,
    pub system: String,
    pub coeffs: Vec<Vec<TermDoc>>,
}

/// One double coset: its key and its degree (left-coset count).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetDoc {
    pub key: String,
    pub degree: String,
}

/// All double cosets at one index valuation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetListDoc {
    pub schema: String,
    pub engine: String,
    pub system: String,
    pub valuation: u32,
    pub cosets: Vec<CosetDoc>,
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("document serialization cannot fail")
}

pub fn element_doc<K: Ord + Clone>(
    system: &str,
    e: &HeckeElement<K>,
    key_str: impl Fn(&K) -> String,
) -> ElementDoc {
    ElementDoc {
        schema: SCHEMA_ELEMENT.to_string(),
        engine: ENGINE.to_string(),
        system: system.to_string(),
        terms: terms_doc(e, key_str),
    }
}

pub fn terms_doc<K: Ord + Clone>(
    e: &HeckeElement<K>,
    key_str: impl Fn(&K) -> String,
) -> Vec<TermDoc> {
    e.terms()
        .map(|(k, c)| TermDoc {
            key: key_str(k),
            coeff: c.to_string(),
        })
        .collect()
}

// ---- key strings ----------------------------------------------------------

/// Lattice key "e₀,e₁,…" (ascending exponents, comma-separated).
pub fn gl_key_str(k: &GLKey) -> String {
    k.exps()
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parse a lattice key; exponents are sorted ascending, so "1,0" and "0,1"
/// name the same double coset.  Surrounding parentheses are tolerated.
pub fn parse_gl_key(s: &str, r: usize) -> Result<GLKey> {
    let body = strip_parens(s);
    let mut exps = Vec::new();
    for piece in body.split(',') {
        let e: u32 = piece.trim().parse().map_err(|_| bad_gl_key(s))?;
        exps.push(e);
    }
    if exps.len() != r {
        return Err(bad_gl_key(s));
    }
    exps.sort_unstable();
    Ok(ExpVector::from_sorted(exps))
}

fn bad_gl_key(s: &str) -> Error {
    Error::Usage(format!(
        "cannot parse lattice key {s:?}: expected comma-separated exponents like 0,1"
    ))
}

/// Heisenberg key "a,b,c,d;x,y": matrix part row-major, then translation.
pub fn heis_key_str(k: &HeisKey) -> String {
    heis_elt_str(&k.0)
}

pub fn heis_elt_str(e: &HeisElt) -> String {
    format!(
        "{},{},{},{};{},{}",
        e.mat.at(0, 0),
        e.mat.at(0, 1),
        e.mat.at(1, 0),
        e.mat.at(1, 1),
        e.tr[0],
        e.tr[1]
    )
}

/// Parse a Heisenberg element (not necessarily canonical) at the prime p.
pub fn parse_heis_elt(s: &str, p: u64) -> Result<HeisElt> {
    let body = strip_parens(s);
    let bad = || {
        Error::Usage(format!(
            "cannot parse Heisenberg element {s:?}: expected a,b,c,d;x,y \
             (matrix row-major, then translation)"
        ))
    };
    let (m, t) = body.split_once(';').ok_or_else(bad)?;
    let ments = parse_int_list(m).ok_or_else(bad)?;
    let tents = parse_int_list(t).ok_or_else(bad)?;
    if ments.len() != 4 || tents.len() != 2 {
        return Err(bad());
    }
    Ok(HeisElt::new(PMatrix::new(p, 2, ments), tents))
}

fn parse_int_list(s: &str) -> Option<Vec<PInt>> {
    s.split(',').map(|x| x.trim().parse::<PInt>().ok()).collect()
}

fn strip_parens(s: &str) -> &str {
    let t = s.trim();
    t.strip_prefix('(')
        .and_then(|u| u.strip_suffix(')'))
        .unwrap_or(t)
        .trim()
}

// ---- cacheable term lists -------------------------------------------------

pub fn gl_terms_to_json(terms: &[(GLKey, PInt)]) -> String {
    let docs: Vec<TermDoc> = terms
        .iter()
        .map(|(k, c)| TermDoc {
            key: gl_key_str(k),
            coeff: c.to_string(),
        })
        .collect();
    serde_json::to_string(&docs).expect("term serialization cannot fail")
}

pub fn gl_terms_from_json(s: &str, r: usize) -> Option<Vec<(GLKey, PInt)>> {
    let docs: Vec<TermDoc> = serde_json::from_str(s).ok()?;
    docs.into_iter()
        .map(|d| {
            let k = parse_gl_key(&d.key, r).ok()?;
            let c = d.coeff.parse::<PInt>().ok()?;
            Some((k, c))
        })
        .collect()
}

pub fn heis_terms_to_json(terms: &[(HeisKey, PInt)]) -> String {
    let docs: Vec<TermDoc> = terms
        .iter()
        .map(|(k, c)| TermDoc {
            key: heis_key_str(k),
            coeff: c.to_string(),
        })
        .collect();
    serde_json::to_string(&docs).expect("term serialization cannot fail")
}

pub fn heis_terms_from_json(s: &str, p: u64) -> Option<Vec<(HeisKey, PInt)>> {
    let docs: Vec<TermDoc> = serde_json::from_str(s).ok()?;
    docs.into_iter()
        .map(|d| {
            let e = parse_heis_elt(&d.key, p).ok()?;
            let c = d.coeff.parse::<PInt>().ok()?;
            Some((HeisKey(e), c))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heis::heis_canonical_left;

    #[test]
    fn gl_key_roundtrip() {
        let k = ExpVector::from_sorted(vec![0, 2, 5]);
        assert_eq!(gl_key_str(&k), "0,2,5");
        assert_eq!(parse_gl_key("0,2,5", 3).unwrap(), k);
        assert_eq!(parse_gl_key("(5, 0, 2)", 3).unwrap(), k);
        assert!(parse_gl_key("0,1", 3).is_err());
        assert!(parse_gl_key("0,x", 2).is_err());
    }

    #[test]
    fn heis_key_roundtrip() {
        let e = heis_canonical_left(&HeisElt::from_i64(3, [1, 0, 0, 3], [0, 1]));
        let s = heis_elt_str(&e);
        assert_eq!(s, "1,0,0,3;0,1");
        assert_eq!(parse_heis_elt(&s, 3).unwrap(), e);
        assert!(parse_heis_elt("1,0,0,3", 3).is_err());
        assert!(parse_heis_elt("1,0,0;1,2", 3).is_err());
    }

    #[test]
    fn gl_terms_json_roundtrip() {
        let terms = vec![
            (ExpVector::from_sorted(vec![0, 2]), PInt::from(1)),
            (ExpVector::from_sorted(vec![1, 1]), PInt::from(-12)),
        ];
        let json = gl_terms_to_json(&terms);
        assert_eq!(gl_terms_from_json(&json, 2).unwrap(), terms);
        assert_eq!(gl_terms_from_json(&json, 3), None);
        assert_eq!(gl_terms_from_json("not json", 2), None);
    }

    #[test]
    fn heis_terms_json_roundtrip() {
        let k = HeisKey(heis_canonical_left(&HeisElt::from_i64(
            2,
            [1, 0, 0, 2],
            [0, 1],
        )));
        let terms = vec![(k, PInt::from(7))];
        let json = heis_terms_to_json(&terms);
        assert_eq!(heis_terms_from_json(&json, 2).unwrap(), terms);
        assert_eq!(heis_terms_from_json("[{\"key\":1}]", 2), None);
    }

    #[test]
    fn element_doc_shape() {
        let e = HeckeElement::from_terms(vec![
            (ExpVector::from_sorted(vec![0, 2]), PInt::from(1)),
            (ExpVector::from_sorted(vec![1, 1]), PInt::from(4)),
        ]);
        let d = element_doc("gl(r=2,p=3)", &e, gl_key_str);
        assert_eq!(d.terms.len(), 2);
        assert_eq!(d.terms[0].key, "0,2");
        assert_eq!(d.terms[1].coeff, "4");
        let json = to_json(&d);
        let back: ElementDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }
}
