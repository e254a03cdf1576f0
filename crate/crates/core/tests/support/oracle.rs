//! Brute-force reference evaluation by explicit nested loops.
//!
//! Nothing here calls into the convolution pipeline: transition masses,
//! binomials, the detection formula and the capacities are all recomputed
//! from their closed forms.

#![allow(dead_code)]

use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy)]
pub struct Setup {
    pub theta_alpha: f64,
    pub theta_beta: f64,
    pub n_pu: u32,
    pub gamma_p: f64,
    pub gamma_s: f64,
    pub t_s: f64,
    pub l: u32,
    pub s: u32,
}

fn cdf(theta: f64, x: f64) -> f64 {
    1.0 - (-x / theta).exp()
}

fn pmf(theta: f64, t_s: f64, j: u32) -> f64 {
    cdf(theta, (j + 1) as f64 * t_s) - cdf(theta, j as f64 * t_s)
}

fn choose(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut num = 1u128;
    let mut den = 1u128;
    for t in 0..k as u128 {
        num *= n as u128 - t;
        den *= t + 1;
    }
    (num / den) as f64
}

pub fn detect(eta: f64, l: u32, n: u32, gamma_p: f64) -> f64 {
    let signal = n as f64 * gamma_p;
    0.5 * libm::erfc(
        (eta - l as f64 - signal) / (2.0 * 2f64.sqrt() * (l as f64 / 2.0 + signal).sqrt()),
    )
}

pub fn capacity(gamma_s: f64, interference: f64) -> f64 {
    (1.0 + gamma_s / (1.0 + interference)).log2()
}

/// One summand slot: the list of `(contribution, mass)` a single PU can take.
type Slot = Vec<(u32, f64)>;

/// Cartesian product over `slots`, accumulating contributions additively and
/// masses multiplicatively.
fn nested(slots: &[Slot], acc_value: u32, acc_mass: f64, out: &mut BTreeMap<u32, f64>) {
    match slots.split_first() {
        None => *out.entry(acc_value).or_insert(0.0) += acc_mass,
        Some((first, rest)) => {
            for &(v, w) in first {
                nested(rest, acc_value + v, acc_mass * w, out);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleCell {
    pub i: u32,
    pub m: u32,
    pub k: u32,
    pub prob: f64,
    /// Joint mass over total occupied sensing samples (sums to `prob`).
    pub sense: BTreeMap<u32, f64>,
    /// Joint mass over the transmission interference numerator (sums to
    /// `prob`); empty for Case I.
    pub tx: BTreeMap<u32, f64>,
}

/// Direct evaluation of the nested sums for every `(i, m, k)`.
pub fn cells(st: &Setup, whole_frame: bool) -> Vec<OracleCell> {
    let n = st.n_pu;
    let (l, s) = (st.l, st.s);
    let p_b = st.theta_alpha / (st.theta_alpha + st.theta_beta);
    let p_i = 1.0 - p_b;
    let t_sense = l as f64 * st.t_s;
    let t_frame = s as f64 * st.t_s;

    let arrival: Slot = (0..l)
        .map(|a| (l - a, pmf(st.theta_beta, st.t_s, a)))
        .collect();
    let departure: Slot = (0..l)
        .map(|d| (d, pmf(st.theta_alpha, st.t_s, d)))
        .collect();
    let stay_busy_tx: Slot = (l..=s)
        .map(|g| {
            let w = if g < s {
                pmf(st.theta_alpha, st.t_s, g)
            } else {
                1.0 - cdf(st.theta_alpha, t_frame)
            };
            (g - l, w)
        })
        .collect();
    let stay_idle_tx: Slot = (l..=s)
        .map(|c| {
            let w = if c < s {
                pmf(st.theta_beta, st.t_s, c)
            } else {
                1.0 - cdf(st.theta_beta, t_frame)
            };
            (s - c, w)
        })
        .collect();

    let mut out = Vec::new();
    for i in 0..=n {
        for m in 0..=n {
            let k_lo = (m + i).saturating_sub(n);
            for k in k_lo..=m.min(i) {
                let arrivals = i - k;
                let departures = m - k;
                let idle = n - arrivals - m;
                let factor = choose(m, k)
                    * choose(n - m, arrivals)
                    * choose(n, m)
                    * p_b.powi(m as i32)
                    * p_i.powi((n - m) as i32);

                let mut sense_slots: Vec<Slot> = Vec::new();
                sense_slots.extend(std::iter::repeat_n(arrival.clone(), arrivals as usize));
                sense_slots.extend(std::iter::repeat_n(departure.clone(), departures as usize));
                let mut sense = BTreeMap::new();
                nested(&sense_slots, k * l, 1.0, &mut sense);

                let (tx, outer) = if whole_frame {
                    let mut tx_slots: Vec<Slot> = Vec::new();
                    tx_slots.extend(std::iter::repeat_n(stay_busy_tx.clone(), k as usize));
                    tx_slots.extend(std::iter::repeat_n(stay_idle_tx.clone(), idle as usize));
                    let mut tx = BTreeMap::new();
                    nested(&tx_slots, arrivals * (s - l), 1.0, &mut tx);
                    let total: f64 = tx.values().sum();
                    (tx, total)
                } else {
                    (
                        BTreeMap::new(),
                        (1.0 - cdf(st.theta_alpha, t_sense)).powi(k as i32)
                            * (1.0 - cdf(st.theta_beta, t_sense)).powi(idle as i32),
                    )
                };
                let sense_total: f64 = sense.values().sum();
                let prob = factor * sense_total * outer;
                // joint masses: sense ⟂ tx within a hypothesis
                let sense = sense
                    .into_iter()
                    .map(|(v, w)| (v, factor * w * outer))
                    .collect();
                let tx = tx
                    .into_iter()
                    .map(|(v, w)| (v, factor * sense_total * w))
                    .collect();
                out.push(OracleCell {
                    i,
                    m,
                    k,
                    prob,
                    sense,
                    tx,
                });
            }
        }
    }
    out
}

/// `(P_d, P_f)` by summing over every configuration.
pub fn pd_pf(st: &Setup, cells: &[OracleCell], eta: f64) -> (f64, f64) {
    let (mut num1, mut den1, mut num0, mut den0) = (0.0, 0.0, 0.0, 0.0);
    for c in cells {
        for (&n, &w) in &c.sense {
            let p = detect(eta, st.l, n, st.gamma_p);
            if c.i == 0 {
                num0 += w * p;
                den0 += w;
            } else {
                num1 += w * p;
                den1 += w;
            }
        }
    }
    (num1 / den1, num0 / den0)
}

/// Case I throughput from the per-cell probabilities.
pub fn throughput_case1(st: &Setup, cells: &[OracleCell], p_d: f64, p_f: f64) -> f64 {
    let duty = (st.s - st.l) as f64 / st.s as f64;
    cells
        .iter()
        .map(|c| {
            let c_i = capacity(st.gamma_s, c.i as f64 * st.gamma_p);
            let miss = if c.i == 0 { 1.0 - p_f } else { 1.0 - p_d };
            miss * duty * c.prob * c_i
        })
        .sum()
}

/// Case II throughput from the joint interference masses.
pub fn throughput_case2(st: &Setup, cells: &[OracleCell], p_d: f64, p_f: f64) -> f64 {
    let duty = (st.s - st.l) as f64 / st.s as f64;
    let tx = (st.s - st.l) as f64;
    cells
        .iter()
        .map(|c| {
            let miss = if c.i == 0 { 1.0 - p_f } else { 1.0 - p_d };
            let avg: f64 =
                c.tx.iter()
                    .map(|(&off, &w)| w * capacity(st.gamma_s, off as f64 / tx * st.gamma_p))
                    .sum();
            miss * duty * avg
        })
        .sum()
}

/// Labeled-PU enumeration: every PU picks a start state and a flip sample (or
/// none) inside the window; configurations are bucketed by `(i, m, k)`.
/// Independent of the combinatorial factor used by [`cells`].
pub fn labeled_cells(st: &Setup, whole_frame: bool) -> BTreeMap<(u32, u32, u32), f64> {
    let window = if whole_frame { st.s } else { st.l };
    let p_b = st.theta_alpha / (st.theta_alpha + st.theta_beta);
    let t_window = window as f64 * st.t_s;
    // (initially busy, flip sample or None, mass)
    let mut options: Vec<(bool, Option<u32>, f64)> = Vec::new();
    for (busy, theta, prior) in [
        (true, st.theta_alpha, p_b),
        (false, st.theta_beta, 1.0 - p_b),
    ] {
        for j in 0..window {
            options.push((busy, Some(j), prior * pmf(theta, st.t_s, j)));
        }
        options.push((busy, None, prior * (1.0 - cdf(theta, t_window))));
    }
    let mut out = BTreeMap::new();
    let mut idx = vec![0usize; st.n_pu as usize];
    loop {
        let (mut i, mut m, mut k, mut w) = (0, 0, 0, 1.0);
        for &o in &idx {
            let (busy, flip, mass) = options[o];
            w *= mass;
            let flips_in_sense = flip.is_some_and(|j| j < st.l);
            m += busy as u32;
            let busy_end = busy ^ flips_in_sense;
            i += busy_end as u32;
            k += (busy && !flips_in_sense) as u32;
        }
        *out.entry((i, m, k)).or_insert(0.0) += w;
        // odometer
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < options.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
