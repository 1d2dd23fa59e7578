use std::fmt::Write as _;

use super::{Geometry, Position, RowSpan};
use crate::error::{Error, Result};

/// An immutable window of F₂ cells satisfying the three-dot rule on every
/// complete triple `p, p+(1,0), p+(0,1)`.
///
/// Bits are packed row by row, 64 cells per word, least significant bit at
/// the row's leftmost cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Patch {
    geometry: Geometry,
    words: Vec<u64>,
    row_words: Vec<usize>,
}

fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl Patch {
    fn blank(geometry: Geometry) -> Self {
        let mut row_words = Vec::with_capacity(geometry.rows().len() + 1);
        let mut acc = 0;
        for r in geometry.rows() {
            row_words.push(acc);
            acc += words_for(r.len());
        }
        row_words.push(acc);
        Self { geometry, words: vec![0; acc], row_words }
    }

    /// The all-zero configuration on `geometry`.
    pub fn zeros(geometry: Geometry) -> Self {
        Self::blank(geometry)
    }

    /// Validated constructor: `bits` lists one value per cell in row-major order.
    pub fn from_cells(geometry: Geometry, bits: impl IntoIterator<Item = bool>) -> Result<Self> {
        let bits: Vec<bool> = bits.into_iter().collect();
        if bits.len() != geometry.len() {
            return Err(Error::CellCountMismatch { expected: geometry.len(), got: bits.len() });
        }
        let mut it = bits.into_iter();
        let p = Self::fill(geometry, |_| it.next().unwrap());
        p.rule_check()?;
        Ok(p)
    }

    /// Validated constructor from a cell function.
    pub fn from_fn(geometry: Geometry, f: impl FnMut(Position) -> bool) -> Result<Self> {
        let p = Self::fill(geometry, f);
        p.rule_check()?;
        Ok(p)
    }

    /// Builds a patch whose rule validity is guaranteed by construction.
    pub(crate) fn from_fn_unchecked(geometry: Geometry, f: impl FnMut(Position) -> bool) -> Self {
        let p = Self::fill(geometry, f);
        debug_assert!(p.rule_check().is_ok(), "constructed patch violates the rule");
        p
    }

    fn fill(geometry: Geometry, mut f: impl FnMut(Position) -> bool) -> Self {
        let mut p = Self::blank(geometry);
        for slot in 0..p.geometry.rows().len() {
            let r = p.geometry.rows()[slot];
            let base = p.row_words[slot];
            for (i, k) in (r.k_lo..=r.k_hi).enumerate() {
                if f(Position::new(k, r.l)) {
                    p.words[base + i / 64] |= 1 << (i % 64);
                }
            }
        }
        p
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Value at `p`, or `None` outside the window.
    #[inline]
    pub fn get(&self, p: Position) -> Option<bool> {
        let slot = self.geometry.row_slot(p.l)?;
        let r = &self.geometry.rows()[slot];
        if !r.contains_k(p.k) {
            return None;
        }
        let i = (p.k - r.k_lo) as usize;
        Some((self.words[self.row_words[slot] + i / 64] >> (i % 64)) & 1 == 1)
    }

    /// Value at `p`; panics outside the window.
    #[inline]
    pub fn bit(&self, p: Position) -> bool {
        self.get(p).unwrap_or_else(|| panic!("{p} outside the window"))
    }

    /// True iff `p` is inside the window and carries a 1.
    #[inline]
    pub fn in_y(&self, p: Position) -> bool {
        self.get(p) == Some(true)
    }

    pub fn cells(&self) -> impl Iterator<Item = (Position, bool)> + '_ {
        self.geometry.cells().map(|p| (p, self.bit(p)))
    }

    /// Cells carrying a 1.
    pub fn ones(&self) -> impl Iterator<Item = Position> + '_ {
        self.cells().filter_map(|(p, b)| b.then_some(p))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `len` bits of row `slot` starting at column `k`, packed LSB first.
    fn extract(&self, slot: usize, k: i64, len: usize) -> Vec<u64> {
        let r = &self.geometry.rows()[slot];
        let row = &self.words[self.row_words[slot]..self.row_words[slot + 1]];
        let start = (k - r.k_lo) as usize;
        let mut out = vec![0u64; words_for(len)];
        for (w, o) in out.iter_mut().enumerate() {
            let bit = start + w * 64;
            let (q, s) = (bit / 64, bit % 64);
            let lo = row.get(q).copied().unwrap_or(0) >> s;
            let hi = if s == 0 { 0 } else { row.get(q + 1).copied().unwrap_or(0) << (64 - s) };
            *o = lo | hi;
        }
        let tail = len % 64;
        if tail != 0 {
            *out.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
        out
    }

    /// Base positions of every complete triple summing to 1, in row-major order.
    pub fn rule_violations(&self) -> Vec<Position> {
        let rows = self.geometry.rows();
        let mut bad = Vec::new();
        for slot in 0..rows.len() {
            let r = rows[slot];
            let Some(up_slot) = self.geometry.row_slot(r.l + 1) else { continue };
            let up = rows[up_slot];
            let k0 = r.k_lo.max(up.k_lo);
            let k1 = (r.k_hi - 1).min(up.k_hi);
            if k1 < k0 {
                continue;
            }
            let len = (k1 - k0 + 1) as usize;
            let a = self.extract(slot, k0, len);
            let b = self.extract(slot, k0 + 1, len);
            let c = self.extract(up_slot, k0, len);
            for w in 0..a.len() {
                let mut v = a[w] ^ b[w] ^ c[w];
                while v != 0 {
                    let t = v.trailing_zeros() as i64;
                    bad.push(Position::new(k0 + 64 * w as i64 + t, r.l));
                    v &= v - 1;
                }
            }
        }
        bad
    }

    /// Re-verifies the local rule on every complete triple.
    pub fn rule_check(&self) -> Result<()> {
        let bad = self.rule_violations();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::RuleViolation(bad))
        }
    }

    /// The view of `T^a S^b x`: cell `p` of the result holds `x(p + (a, b))`.
    pub fn shift_view(&self, a: i64, b: i64) -> Patch {
        Patch {
            geometry: self.geometry.translate(Position::new(-a, -b)),
            words: self.words.clone(),
            row_words: self.row_words.clone(),
        }
    }

    /// Materialised copy of the cells of `target`, which must lie inside the window.
    pub fn restrict(&self, target: &Geometry) -> Result<Patch> {
        if let Some(p) = target.cells().find(|&p| !self.geometry.contains(p)) {
            return Err(Error::OutOfWindow(p));
        }
        Ok(Patch::from_fn_unchecked(target.clone(), |p| self.bit(p)))
    }

    /// Pointwise sum over F₂. Both patches must share the geometry.
    pub fn xor(&self, other: &Patch) -> Result<Patch> {
        if self.geometry != other.geometry {
            return Err(Error::InvalidGeometry("xor of patches on different windows".into()));
        }
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect();
        Ok(Patch { geometry: self.geometry.clone(), words, row_words: self.row_words.clone() })
    }

    /// The textual `tridot-patch v1` encoding.
    pub fn to_text(&self) -> String {
        let rows = self.geometry.rows();
        let mut s = format!("tridot-patch v1 rows={}\n", rows.len());
        for (slot, r) in rows.iter().enumerate() {
            let row = &self.words[self.row_words[slot]..self.row_words[slot + 1]];
            let digits = r.len().div_ceil(4);
            let mut hex = String::with_capacity(digits);
            for d in (0..digits).rev() {
                let nib = (row[d / 16] >> ((d % 16) * 4)) & 0xf;
                hex.push(char::from_digit(nib as u32, 16).unwrap());
            }
            writeln!(s, "l={} k0={} n={} bits={}", r.l, r.k_lo, r.len(), hex).unwrap();
        }
        s
    }

    /// Parses the `tridot-patch v1` encoding and re-validates the rule.
    pub fn from_text(text: &str) -> Result<Patch> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        let count: usize = header
            .strip_prefix("tridot-patch v1 rows=")
            .and_then(|r| r.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header `{header}`")))?;
        let mut spans = Vec::with_capacity(count);
        let mut hexes = Vec::with_capacity(count);
        for line in lines {
            let mut l = None;
            let mut k0 = None;
            let mut n = None;
            let mut bits = None;
            for field in line.split_whitespace() {
                let (key, val) =
                    field.split_once('=').ok_or_else(|| Error::Parse(format!("bad field `{field}`")))?;
                let num = |v: &str| v.parse::<i64>().map_err(|_| Error::Parse(format!("bad number `{v}`")));
                match key {
                    "l" => l = Some(num(val)?),
                    "k0" => k0 = Some(num(val)?),
                    "n" => n = Some(num(val)?),
                    "bits" => bits = Some(val.to_string()),
                    _ => return Err(Error::Parse(format!("unknown field `{key}`"))),
                }
            }
            let missing = || Error::Parse(format!("incomplete row `{line}`"));
            let (l, k0, n, bits) = (l.ok_or_else(missing)?, k0.ok_or_else(missing)?, n.ok_or_else(missing)?, bits.ok_or_else(missing)?);
            if n < 1 || bits.len() != (n as usize).div_ceil(4) {
                return Err(Error::Parse(format!("row l={l}: {} hex digits for {n} cells", bits.len())));
            }
            spans.push(RowSpan { l, k_lo: k0, k_hi: k0 + n - 1 });
            hexes.push(bits);
        }
        if spans.len() != count {
            return Err(Error::Parse(format!("header announces {count} rows, found {}", spans.len())));
        }
        let mut order: Vec<usize> = (0..spans.len()).collect();
        order.sort_by_key(|&i| spans[i].l);
        let geometry = Geometry::from_rows(spans.clone())?;
        let mut values = Vec::with_capacity(geometry.len());
        for &i in &order {
            let hex = hexes[i].as_bytes();
            let n = spans[i].len();
            for bit in 0..n {
                let digit = hex[hex.len() - 1 - bit / 4] as char;
                let nib = digit.to_digit(16).ok_or_else(|| Error::Parse(format!("bad hex digit `{digit}`")))?;
                values.push((nib >> (bit % 4)) & 1 == 1);
            }
            let top_bits = hex.len() * 4 - n;
            let top = (hex[0] as char).to_digit(16).unwrap_or(0);
            if top_bits > 0 && top >> (4 - top_bits) != 0 {
                return Err(Error::Parse(format!("row l={}: bits beyond the row length", spans[i].l)));
            }
        }
        Patch::from_cells(geometry, values)
    }

    /// The triangle of side `n` above `bottom`, completed upward by
    /// `x(k, l+1) = x(k, l) ⊕ x(k+1, l)` with one word-level shift-xor per row.
    pub fn triangle_from_bottom_row(base: Position, bottom: &[bool]) -> Result<Patch> {
        if bottom.is_empty() {
            return Err(Error::InvalidGeometry("empty bottom row".into()));
        }
        let n = bottom.len() - 1;
        let geometry = Geometry::triangle(base, n as u32);
        let mut p = Self::blank(geometry);
        let mut cur = vec![0u64; words_for(n + 1)];
        for (i, &b) in bottom.iter().enumerate() {
            if b {
                cur[i / 64] |= 1 << (i % 64);
            }
        }
        for slot in 0..=n {
            let len = n + 1 - slot;
            let base_w = p.row_words[slot];
            let nw = words_for(len);
            p.words[base_w..base_w + nw].copy_from_slice(&cur[..nw]);
            let tail = len % 64;
            if tail != 0 {
                p.words[base_w + nw - 1] &= (1u64 << tail) - 1;
            }
            // next[i] = cur[i] ^ cur[i+1]
            let mut next = vec![0u64; cur.len()];
            for w in 0..cur.len() {
                let carry = cur.get(w + 1).map_or(0, |c| c << 63);
                next[w] = cur[w] ^ ((cur[w] >> 1) | carry);
            }
            cur = next;
        }
        debug_assert!(p.rule_check().is_ok());
        Ok(p)
    }
}
