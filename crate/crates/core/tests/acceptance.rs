//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any failed. Pass criterion numbers as arguments
//! to run a subset: `cargo test --test acceptance -- 3 7`.

use std::collections::HashMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use rldel::bitseq::bs;
use rldel::bitseq::{binom, edit_distance, enumerate_subsequences, lcs_len, runs, supersequence_count};
use rldel::channels::{
    make_runlength_channel, make_threshold_channel, transition_dist, transmit, ChannelSpec, Dist, TrimMode,
};
use rldel::harness::{random_message, run_bernoulli, Scheme};
use rldel::infotheory::{
    capacity_small_n_star, dg_bound, emit_curve, g_of_d, greedy_search, rll_baseline, Method, DEFAULT_BETA_STEP,
    DEFAULT_M_MAX,
};
use rldel::inner_codes::{
    blow_up, build_greedy_code, delta_budget, enumerate_s_beta, restricted_deletion_ball, ThresholdDecoder,
};
use rldel::outer_codes::{build_sync_string, match_sync, OuterPair};
use rldel::rng::{rng, subseed};
use rldel::schemes::{SchemeKind, SchemeParams, SingleTraceScheme};
use rldel::{BitString, Exec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

fn curve_tau2() -> Outcome {
    let pts = [
        (0.0, 0.6942),
        (0.1, 0.4587),
        (0.5, 0.2462),
        (0.9, 0.0550),
        (0.99, 0.0057),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, want) in pts {
        let r = greedy_search(2, d, DEFAULT_M_MAX, DEFAULT_BETA_STEP).unwrap();
        let hit = (r.rate - want).abs() <= 0.005;
        ok &= hit;
        parts.push(format!(
            "d={d}: {:.4} vs {want}{}",
            r.rate,
            if hit { "" } else { " (miss)" }
        ));
    }
    let t = Instant::now();
    let grid: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
    let rows = emit_curve(2, &grid, &[Method::Greedy]).unwrap();
    let secs = t.elapsed().as_secs_f64();
    ok &= rows.len() == 100 && secs < 300.0;
    parts.push(format!("100-point sweep {secs:.1}s"));
    outcome(ok, parts.join("; "))
}

fn curve_tau3() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, want) in [(0.1, 0.7622), (0.5, 0.697), (0.8, 0.6927)] {
        let r = greedy_search(3, d, DEFAULT_M_MAX, DEFAULT_BETA_STEP).unwrap();
        let hit = (r.rate - want).abs() <= 0.005;
        ok &= hit;
        parts.push(format!("d={d}: {:.4} vs {want}", r.rate));
    }
    let mut worst: f64 = 0.0;
    for i in 58..100 {
        let r = greedy_search(3, i as f64 / 100.0, DEFAULT_M_MAX, DEFAULT_BETA_STEP).unwrap();
        worst = worst.max((r.rate - 0.6927).abs());
    }
    ok &= worst <= 0.003;
    parts.push(format!("plateau max dev {worst:.5}"));
    let golden = ((1.0 + 5f64.sqrt()) / 2.0).log2();
    let base = rll_baseline(3);
    ok &= (base - golden).abs() <= 1e-6;
    parts.push(format!("baseline {base:.7}"));
    outcome(ok, parts.join("; "))
}

fn dg_curve() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rejected = 0;
    let mut wrongly = 0;
    let mut checked = 0;
    for tau in 1..=5usize {
        for i in 0..=100 {
            let d = i as f64 / 100.0;
            let a = d * (tau as f64 + 1.0) / (1u64 << tau) as f64;
            match dg_bound(tau, d) {
                Ok(v) if a <= 0.5 => {
                    worst = worst.max((v - (1.0 - h2(a))).abs());
                    checked += 1;
                }
                Ok(_) => wrongly += 1,
                Err(_) if a > 0.5 => rejected += 1,
                Err(_) => wrongly += 1,
            }
        }
    }
    outcome(
        worst <= 1e-9 && wrongly == 0 && rejected > 0,
        format!("{checked} points, max dev {worst:.1e}, {rejected} rejected, {wrongly} mishandled"),
    )
}

/// Code for strings of length ≤ n: 2^len + value.
fn code_of(bits: &[u8]) -> usize {
    bits.iter().fold(1usize, |acc, &b| acc * 2 + b as usize)
}

fn ball_formulas() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    // supersequence counts: tally every distinct subsequence of every x
    let mut bad_super = 0;
    for n in 0..=12usize {
        let mut count = vec![0u32; 1 << (n + 1)];
        let mut seen = vec![u32::MAX; 1 << (n + 1)];
        for (xi, x) in BitString::all_of_len(n).enumerate() {
            let xb = x.bits();
            for mask in 0u32..(1 << n) {
                let sub: Vec<u8> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| xb[i]).collect();
                let c = code_of(&sub);
                if seen[c] != xi as u32 {
                    seen[c] = xi as u32;
                    count[c] += 1;
                }
            }
        }
        for len in 0..=n {
            for y in BitString::all_of_len(len) {
                if supersequence_count(n, &y).unwrap() != count[code_of(y.bits())] as u128 {
                    bad_super += 1;
                }
            }
        }
    }
    ok &= bad_super == 0;
    let mut bad_sub = 0;
    for len in 1..=10usize {
        for s in BitString::all_of_len(len) {
            let r = runs(&s).len() as u64;
            for ell in 0..=3usize.min(len) {
                let got = enumerate_subsequences(&s, ell).unwrap().len() as u128;
                let bound = if ell == 0 {
                    1
                } else {
                    binom(r + ell as u64 - 1, ell as u64)
                };
                if got > bound {
                    bad_sub += 1;
                }
            }
        }
    }
    ok &= bad_sub == 0;
    let mut bad_ball = 0;
    let mut balls = 0;
    for n in 2..=10usize {
        for tau in 2..=3usize {
            for counts in compositions(n, tau) {
                let beta: Vec<f64> = counts.iter().map(|&k| k as f64 / n as f64).collect();
                let k_tau = counts[tau - 1] as u64;
                for budget in 1..=3usize {
                    let bound = binom(2 * k_tau + budget as u64, budget as u64);
                    for c in enumerate_s_beta(n, tau, &beta).unwrap() {
                        balls += 1;
                        if restricted_deletion_ball(&c, budget, tau).unwrap().members.len() as u128 > bound {
                            bad_ball += 1;
                        }
                    }
                }
            }
        }
    }
    ok &= bad_ball == 0;
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 120.0;
    outcome(
        ok,
        format!("supersequence mismatches {bad_super}, subsequence bound violations {bad_sub}, ball bound violations {bad_ball}/{balls}, {secs:.1}s"),
    )
}

/// Run-count vectors (k_1..k_τ) with Σ i·k_i = n.
fn compositions(n: usize, tau: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, left: usize, tau: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == tau {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for k in 0..=left / (i + 1) {
            cur.push(k);
            rec(i + 1, left - k * (i + 1), tau, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, tau, &mut Vec::new(), &mut out);
    out
}

fn greedy_codes() -> Outcome {
    let n = 12;
    let mut overlaps = 0;
    let mut codes = 0;
    for counts in compositions(n, 2) {
        let beta: Vec<f64> = counts.iter().map(|&k| k as f64 / n as f64).collect();
        for budget in 1..=3usize {
            let delta = budget as f64 / n as f64;
            let book = build_greedy_code(n, 2, &beta, delta).unwrap();
            codes += 1;
            let balls: Vec<_> = book
                .entries
                .iter()
                .map(|c| restricted_deletion_ball(c, delta_budget(n, delta), 2).unwrap().members)
                .collect();
            for i in 0..balls.len() {
                for j in i + 1..balls.len() {
                    if !balls[i].is_disjoint(&balls[j]) {
                        overlaps += 1;
                    }
                }
            }
        }
    }
    let small = build_greedy_code(3, 2, &[1.0 / 3.0, 1.0 / 3.0], 1.0 / 3.0).unwrap();
    let got: Vec<String> = small.entries.iter().map(|c| c.to_string()).collect();
    let literal = got == ["001", "110"];
    outcome(
        overlaps == 0 && literal,
        format!("{codes} codes at N=12, {overlaps} overlapping ball pairs; N=3 example gives {got:?} (expected [\"001\", \"110\"])"),
    )
}

fn threshold_decoder() -> Outcome {
    let (tau, m) = (2usize, 4usize);
    let delta = 1.0 / 3.0;
    // (N, runs of length 1, runs of length 2); no common β is integral at
    // all three lengths, so the number of τ-runs is held at 3
    let shapes = [(8usize, 2usize, 3usize), (10, 4, 3), (12, 6, 3)];
    let trials = 10_000;
    let run = |d: f64| -> Vec<usize> {
        let ch = make_threshold_channel(tau, d).unwrap();
        shapes
            .iter()
            .map(|&(n, k1, k2)| {
                let beta = [k1 as f64 / n as f64, k2 as f64 / n as f64];
                let pre = build_greedy_code(n, tau, &beta, delta).unwrap();
                let big = blow_up(&pre, tau, m).unwrap();
                let dec = ThresholdDecoder::new(&pre, tau, m, delta_budget(n, delta)).unwrap();
                run_bernoulli(Exec::default(), trials, 0xC0DE + n as u64, |s| {
                    let i = rng(s).gen_range(0..big.len());
                    let y = transmit(&ch, &big.entries[i], subseed(s, 1));
                    dec.decode(&y) != Ok(i)
                })
                .failures
            })
            .collect()
    };
    let d = 0.4;
    let alpha_max = shapes
        .iter()
        .map(|&(n, _, k2)| k2 as f64 / n as f64 * g_of_d(tau, m, d))
        .fold(0.0, f64::max);
    let fails = run(d);
    let clean = run(0.0);
    let monotone = fails.windows(2).all(|w| w[1] <= w[0]) && fails[0] > fails[2];
    outcome(
        alpha_max < delta && monotone && clean.iter().all(|&f| f == 0),
        format!(
            "d={d}, delta={delta:.3}, max alpha={alpha_max:.4}; failures/{trials} at N=8,10,12: {fails:?}; at d=0: {clean:?}"
        ),
    )
}

fn oracle_sampler() -> Outcome {
    let specs: Vec<(&str, ChannelSpec, BitString)> = vec![
        (
            "BDC-Thr(2,0.3)",
            make_threshold_channel(2, 0.3).unwrap(),
            bs("00110111"),
        ),
        (
            "table (0.1,0.2,0.4)",
            make_runlength_channel(vec![0.1, 0.2, 0.4], 0.3, 3, TrimMode::None, 1).unwrap(),
            bs("01110010"),
        ),
        (
            "BDC-Thr(3,0.5) trim00",
            make_threshold_channel(3, 0.5).unwrap().with_trim(TrimMode::Trim00),
            bs("00011101"),
        ),
    ];
    let samples = 100_000u64;
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, spec, x) in specs {
        let exact = transition_dist(&spec, &x).unwrap();
        let emp = Dist::from_samples((0..samples).map(|i| transmit(&spec, &x, subseed(99, i))));
        let tv = exact.tv(&emp);
        ok &= tv <= 0.02;
        parts.push(format!("{name}: TV {tv:.4}"));
    }
    outcome(ok, parts.join("; "))
}

fn subadditivity() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, spec) in [
        ("BDC-Thr(2,0.3)", make_threshold_channel(2, 0.3).unwrap()),
        (
            "table (0.2,0.5)",
            make_runlength_channel(vec![0.2, 0.5], 0.25, 2, TrimMode::None, 1).unwrap(),
        ),
    ] {
        let mut a = HashMap::new();
        for n in 2..=8usize {
            match capacity_small_n_star(&spec, n, 1e-7) {
                Ok(c) => {
                    a.insert(n, c);
                }
                Err(e) => return outcome(false, format!("{name}: n={n}: {e}")),
            }
        }
        let mut worst = f64::NEG_INFINITY;
        for n in 2..=4 {
            for m in 2..=4 {
                worst = worst.max(a[&(n + m)] - a[&n] - a[&m]);
            }
        }
        ok &= worst <= 1e-6;
        parts.push(format!("{name}: max a(n+m)-a(n)-a(m) = {worst:.3e}"));
    }
    outcome(ok, parts.join("; "))
}

fn adjacent_ok(s: &[u16], eta: f64) -> bool {
    let n = s.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..=n {
                if lcs_len(&s[i..j], &s[j..k]) as f64 >= eta * (k - i) as f64 / 2.0 {
                    return false;
                }
            }
        }
    }
    true
}

fn sync_suite() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, eta, q) in [
        (16usize, 0.25, 12usize),
        (16, 0.0625, 16),
        (64, 0.25, 28),
        (64, 0.0625, 56),
    ] {
        match build_sync_string(n, eta, q) {
            Ok(s) => {
                let good = adjacent_ok(&s.symbols, eta);
                ok &= good;
                parts.push(format!(
                    "n={n} eta={eta} q={q}: {}",
                    if good { "verified" } else { "INVALID" }
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("n={n} eta={eta} q={q}: {e}"));
            }
        }
    }
    let s = build_sync_string(64, 0.25, 28).unwrap().symbols;
    let mut short = 0;
    let mut r = rng(2024);
    for _ in 0..1000 {
        let mut recv: Vec<Option<u16>> = s.iter().map(|&c| Some(c)).collect();
        let edits = r.gen_range(0..=12usize);
        for _ in 0..edits {
            if r.gen_bool(0.5) && !recv.is_empty() {
                let at = r.gen_range(0..recv.len());
                recv.remove(at);
            } else {
                let at = r.gen_range(0..=recv.len());
                let sym = if r.gen_bool(0.2) {
                    None
                } else {
                    Some(r.gen_range(0..28u16))
                };
                recv.insert(at, sym);
            }
        }
        if match_sync(&s, &recv).len() + edits < s.len() {
            short += 1;
        }
    }
    ok &= short == 0;
    parts.push(format!("match_sync short in {short}/1000 corruptions"));
    outcome(ok, parts.join("; "))
}

fn single_params(m: usize, n_out: usize, d: f64) -> SchemeParams {
    let mut p = SchemeParams::single(m, n_out, 1.0, d, 1.0).unwrap();
    p.eta = 0.8;
    p.sync_alphabet = 4;
    p
}

fn multi_params(traces: usize, d: f64) -> SchemeParams {
    let mut p = SchemeParams::multi(12, 6, 64, 12, d, 1.0, traces).unwrap();
    p.eta = 0.8;
    p.sync_alphabet = 4;
    p.delta_out = 0.5;
    p
}

fn schemes() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let quiet = ChannelSpec::noiseless();
    let mut round_trip_fail = 0;
    for (kind, p) in [
        (SchemeKind::Single, single_params(12, 48, 0.0)),
        (SchemeKind::Multi, multi_params(1, 0.0)),
    ] {
        let s = Scheme::build(kind, p, &quiet).unwrap();
        round_trip_fail += run_bernoulli(Exec::default(), 100, 5, |seed| s.trial_fails(&quiet, seed)).failures;
    }
    ok &= round_trip_fail == 0;
    parts.push(format!("noiseless round-trip failures {round_trip_fail}/200"));

    let ch = make_threshold_channel(2, 0.3).unwrap();
    let st = Scheme::build(SchemeKind::Single, single_params(12, 48, 0.3), &ch).unwrap();
    let rep = run_bernoulli(Exec::default(), 1000, 11, |seed| st.trial_fails(&ch, seed));
    ok &= rep.rate() < 0.05;
    parts.push(format!("single-trace BDC-Thr(2,0.3) failure {:.3}", rep.rate()));

    let ch = make_threshold_channel(2, 0.2).unwrap();
    let one = Scheme::build(SchemeKind::Multi, multi_params(1, 0.2), &ch).unwrap();
    let three = Scheme::build(SchemeKind::Multi, multi_params(3, 0.2), &ch).unwrap();
    let r1 = run_bernoulli(Exec::default(), 1000, 12, |seed| one.trial_fails(&ch, seed));
    let r3 = run_bernoulli(Exec::default(), 1000, 12, |seed| three.trial_fails(&ch, seed));
    ok &= r3.failures <= r1.failures;
    parts.push(format!(
        "multi-trace failure T=1 {:.3}, T=3 {:.3}",
        r1.rate(),
        r3.rate()
    ));

    let (del, spur, wrong) = accounting();
    ok &= del <= 3 && spur <= 3 && wrong == (2, 2);
    parts.push(format!(
        "outer errors per event: buffer deletion max {del}, spurious buffer max {spur}, wrong codeword {}..{}",
        wrong.0, wrong.1
    ));
    outcome(ok, parts.join("; "))
}

/// Worst outer edit distance caused by a single injected event of each kind;
/// wrong-codeword events report (min, max).
fn accounting() -> (usize, usize, (usize, usize)) {
    let quiet = ChannelSpec::noiseless();
    let p = single_params(12, 16, 0.0);
    let s = SingleTraceScheme::build(p, &quiet).unwrap();
    let (m, b) = (s.params.m, s.params.b);
    let mut r = rng(77);
    let (mut del, mut spur) = (0, 0);
    let mut wrong = (usize::MAX, 0);
    for t in 0..50u64 {
        let msg = random_message(s.message_len(), s.field_size(), t);
        let sent: Vec<Option<OuterPair>> = s.outer_pairs(&msg).unwrap().into_iter().map(Some).collect();
        let x = s.encode(&msg).unwrap();
        let n = sent.len();
        let outer_err = |y: &BitString| edit_distance(&sent, &s.decode_report(y).segments);
        let block = |i: usize| i * (m + b);

        let j = r.gen_range(0..n - 1);
        let mut v = x.bits().to_vec();
        v.drain(block(j) + m..block(j + 1));
        del = del.max(outer_err(&BitString::from_bits(v)));

        let i = r.gen_range(0..n);
        let at = block(i) + r.gen_range(1..m);
        let mut v = x.bits().to_vec();
        v.splice(at..at, std::iter::repeat_n(0, b));
        spur = spur.max(outer_err(&BitString::from_bits(v)));

        let i = r.gen_range(0..n);
        let mut others: Vec<usize> = (0..s.inner.book.len()).collect();
        others.shuffle(&mut r);
        let own = s.outer.pair_to_symbol(sent[i].unwrap());
        let other = others.into_iter().find(|&k| k != own).unwrap();
        let mut v = x.bits().to_vec();
        v.splice(
            block(i)..block(i) + m,
            s.inner.book.entries[other].bits().iter().copied(),
        );
        let e = outer_err(&BitString::from_bits(v));
        wrong = (wrong.0.min(e), wrong.1.max(e));
    }
    (del, spur, wrong)
}

type Criterion = (usize, &'static str, fn() -> Outcome);

fn main() {
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [Criterion; 10] = [
        (1, "greedy bound curve, tau=2", curve_tau2),
        (2, "greedy bound curve, tau=3", curve_tau3),
        (3, "closed-form bound", dg_curve),
        (4, "ball formulas", ball_formulas),
        (5, "greedy code correctness", greedy_codes),
        (6, "threshold decoder", threshold_decoder),
        (7, "oracle/sampler agreement", oracle_sampler),
        (8, "star-channel subadditivity", subadditivity),
        (9, "sync strings", sync_suite),
        (10, "end-to-end schemes", schemes),
    ];
    let start = Instant::now();
    let mut failed = Vec::new();
    for (id, name, f) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {tag} [{:.1}s] {name}: {}",
            t.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed.push(id);
        }
    }
    let total = start.elapsed().as_secs_f64();
    println!("acceptance: {} failed {failed:?}, total {total:.1}s", failed.len());
    if total >= 1800.0 {
        println!("acceptance: total runtime exceeds 30 minutes");
        std::process::exit(1);
    }
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
