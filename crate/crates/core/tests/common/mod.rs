#![allow(dead_code)]

use flowtwist::{AnchoredWord, Boundary, Symbol, VertexShift};

/// Every legal periodic word `2w` with at most `max_len` letters.
pub fn circular_words(max_len: usize) -> Vec<AnchoredWord> {
    let shift = VertexShift::standard();
    let mut out = Vec::new();
    let mut cur = vec![Symbol::S2];
    fn go(shift: &VertexShift, max_len: usize, cur: &mut Vec<Symbol>, out: &mut Vec<AnchoredWord>) {
        if shift.allows(*cur.last().unwrap(), Symbol::S2) {
            out.push(AnchoredWord::new(cur.clone(), Boundary::Circular).unwrap());
        }
        if cur.len() == max_len {
            return;
        }
        for s in Symbol::SHIFT {
            if shift.allows(*cur.last().unwrap(), s) {
                cur.push(s);
                go(shift, max_len, cur, out);
                cur.pop();
            }
        }
    }
    go(&shift, max_len, &mut cur, &mut out);
    out
}

/// Bit words of length at most `max_len` that do not end in 0.
pub fn reduced_bit_words(max_len: usize) -> Vec<String> {
    (0..=max_len)
        .flat_map(flowtwist::verify::bit_words)
        .filter(|w| !w.ends_with('0'))
        .collect()
}
