#![allow(dead_code)]

/// Probability masses of the full outcome tree of one packet under simple ARQ
/// with a `d`-round limit and flipped acknowledgements.
#[derive(Debug, Default, Clone, Copy)]
pub struct TreeMass {
    pub total: f64,
    pub lost: f64,
    pub round_weighted: f64,
    pub leaves: usize,
}

/// Walks every branch: decode or not (unless already decoded), then the
/// acknowledgement arrives intact or flipped.
pub fn enumerate_tree(eps: f64, eps_fb: f64, d: u32) -> TreeMass {
    let mut acc = TreeMass::default();
    walk(eps, eps_fb, d, 1, false, 1.0, &mut acc);
    acc
}

fn walk(eps: f64, eps_fb: f64, d: u32, round: u32, decoded: bool, p: f64, acc: &mut TreeMass) {
    let decode_branches: Vec<(bool, f64)> = if decoded {
        vec![(true, 1.0)]
    } else {
        vec![(true, 1.0 - eps), (false, eps)]
    };
    for (dec, pd) in decode_branches {
        for (flip, pf) in [(false, 1.0 - eps_fb), (true, eps_fb)] {
            let prob = p * pd * pf;
            let ack_seen = dec != flip;
            if ack_seen || round == d {
                acc.total += prob;
                acc.round_weighted += prob * f64::from(round);
                acc.leaves += 1;
                if !dec {
                    acc.lost += prob;
                }
            } else {
                walk(eps, eps_fb, d, round + 1, dec, prob, acc);
            }
        }
    }
}
