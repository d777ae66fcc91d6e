//! Independent brute force for Game of 24 over exact fractions.

/// Exact fraction with a positive denominator, reduced.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Q(i128, i128);

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Q {
    fn new(n: i128, d: i128) -> Option<Q> {
        if d == 0 {
            return None;
        }
        let g = gcd(n, d).max(1);
        let s = if d < 0 { -1 } else { 1 };
        Some(Q(s * n / g, s * d / g))
    }

    fn apply(self, op: char, o: Q) -> Option<Q> {
        match op {
            '+' => Q::new(self.0 * o.1 + o.0 * self.1, self.1 * o.1),
            '-' => Q::new(self.0 * o.1 - o.0 * self.1, self.1 * o.1),
            '*' => Q::new(self.0 * o.0, self.1 * o.1),
            _ => Q::new(self.0 * o.1, self.1 * o.0),
        }
    }
}

fn permutations(v: [i64; 4]) -> Vec<[i64; 4]> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let idx = [a, b, c, d];
                    let mut seen = [false; 4];
                    if idx.iter().all(|&i| !std::mem::replace(&mut seen[i], true)) {
                        out.push([v[a], v[b], v[c], v[d]]);
                    }
                }
            }
        }
    }
    out
}

/// Brute force over the five binary tree shapes, all orderings and all 64
/// operator triples. Returns a fully parenthesized expression reaching 24.
pub fn oracle(v: [i64; 4]) -> Option<String> {
    const OPS: [char; 4] = ['+', '-', '*', '/'];
    let target = Q(24, 1);
    for p in permutations(v) {
        let [a, b, c, d] = p.map(|x| Q(x as i128, 1));
        for o1 in OPS {
            for o2 in OPS {
                for o3 in OPS {
                    let [w, x, y, z] = p;
                    let shapes: [(Option<Q>, String); 5] = [
                        (
                            a.apply(o1, b).and_then(|ab| ab.apply(o2, c)).and_then(|abc| abc.apply(o3, d)),
                            format!("((({w}{o1}{x}){o2}{y}){o3}{z})"),
                        ),
                        (
                            b.apply(o1, c).and_then(|bc| a.apply(o2, bc)).and_then(|abc| abc.apply(o3, d)),
                            format!("(({w}{o2}({x}{o1}{y})){o3}{z})"),
                        ),
                        (
                            a.apply(o1, b).and_then(|ab| c.apply(o3, d).and_then(|cd| ab.apply(o2, cd))),
                            format!("(({w}{o1}{x}){o2}({y}{o3}{z}))"),
                        ),
                        (
                            b.apply(o1, c).and_then(|bc| bc.apply(o2, d)).and_then(|bcd| a.apply(o3, bcd)),
                            format!("({w}{o3}(({x}{o1}{y}){o2}{z}))"),
                        ),
                        (
                            c.apply(o1, d).and_then(|cd| b.apply(o2, cd)).and_then(|bcd| a.apply(o3, bcd)),
                            format!("({w}{o3}({x}{o2}({y}{o1}{z})))"),
                        ),
                    ];
                    if let Some((_, expr)) = shapes.into_iter().find(|(val, _)| *val == Some(target)) {
                        return Some(expr);
                    }
                }
            }
        }
    }
    None
}

pub fn multisets() -> Vec<[i64; 4]> {
    let mut out = Vec::new();
    for a in 1..=6 {
        for b in a..=6 {
            for c in b..=6 {
                for d in c..=6 {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}
