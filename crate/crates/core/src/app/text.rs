use std::fmt::Write;

use super::{AscentFlag, BetaRow, PowerFragment};
use crate::chains::ChainProfile;
use crate::classes::ClassificationReport;
use crate::gallery::{BlowupPoint, Example1Report};
use crate::harness::SuiteResult;
use crate::shifts::{ShiftPosinormality, WeightSequence};

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn num(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:.10}"),
        _ => "inf".to_string(),
    }
}

pub(super) fn classification(r: &ClassificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dimension          {}", r.dim);
    let rows = [
        ("posinormal", r.posinormal.holds),
        ("coposinormal", r.coposinormal.holds),
        ("quasiposinormal", r.quasiposinormal.holds),
        ("coquasiposinormal", r.coquasiposinormal.holds),
        ("hyponormal", r.hyponormal.holds),
        ("cohyponormal", r.cohyponormal.holds),
        ("normal", r.normal.holds),
        ("dominant", r.dominant.holds),
        ("codominant", r.codominant.holds),
        ("invertible", r.invertible.holds),
    ];
    for (name, holds) in rows {
        let _ = writeln!(s, "{name:<19}{}", yes_no(holds));
    }
    let _ = writeln!(s, "alpha_min          {}", num(r.posinormal.alpha_min));
    if !r.witnesses.is_empty() {
        let names: Vec<&str> = r.witnesses.keys().map(String::as_str).collect();
        let _ = writeln!(s, "witnesses          {}", names.join(", "));
    }
    s
}

pub(super) fn powers(
    fragments: &[PowerFragment],
    chain: &ChainProfile,
    flag: &AscentFlag,
) -> String {
    let mut s = String::from("n   posinormal  coposinormal  quasi  hypo  alpha_min\n");
    for f in fragments {
        let _ = writeln!(
            s,
            "{:<4}{:<12}{:<14}{:<7}{:<6}{}",
            f.n,
            yes_no(f.posinormal),
            yes_no(f.coposinormal),
            yes_no(f.quasiposinormal),
            yes_no(f.hyponormal),
            num(f.alpha_min)
        );
    }
    let _ = writeln!(s, "kernel dims      {:?}", chain.kernel_dims);
    let _ = writeln!(s, "ranks            {:?}", chain.range_ranks);
    let _ = writeln!(s, "ascent {}  descent {}", chain.ascent, chain.descent);
    if flag.posinormal {
        let _ = writeln!(
            s,
            "posinormal with ascent <= 1: {}",
            yes_no(flag.ascent_at_most_one)
        );
    }
    s
}

pub(super) fn shift(w: &WeightSequence, results: &[ShiftPosinormality]) -> String {
    let mut s = format!("weights {w}\n");
    if let Some(note) = w.note() {
        let _ = writeln!(s, "note: {note}");
    }
    for r in results {
        let v = &r.verdict;
        let sup = if v.infinite {
            "inf".to_string()
        } else {
            format!("{}", v.sup_value)
        };
        let _ = writeln!(
            s,
            "n = {}: s_n = {sup} ({}), s_1^(n^2) = {}, bound {}, posinormal {}",
            v.n,
            if v.closed_form {
                "exact"
            } else {
                "horizon estimate"
            },
            v.bound_n_squared,
            if v.bound_holds { "holds" } else { "fails" },
            yes_no(r.posinormal)
        );
    }
    s
}

pub(super) fn example1(betas: &[BetaRow], curve: &[BlowupPoint], r: &Example1Report) -> String {
    let mut s = String::from("k     1/k           beta\n");
    for b in betas {
        let _ = writeln!(s, "{:<6}{:<14.10}{:.10}", b.k, b.predicted, b.beta);
    }
    s.push_str("K     alpha_half    alpha_full\n");
    for p in curve {
        let _ = writeln!(
            s,
            "{:<6}{:<14.10}{:.10}",
            p.k_blocks, p.alpha_half, p.alpha_full
        );
    }
    let _ = writeln!(
        s,
        "T^2 pattern: {} ({} blocks, max error {:.3e})",
        if r.t_squared.holds { "holds" } else { "fails" },
        r.t_squared.blocks_checked,
        r.t_squared.max_pattern_error
    );
    let _ = writeln!(
        s,
        "range table: {}",
        if r.range_table_holds {
            "holds"
        } else {
            "fails"
        }
    );
    s
}

pub(super) fn check(results: &[SuiteResult]) -> String {
    let mut s = String::new();
    for r in results {
        let _ = writeln!(
            s,
            "{:<8} {}  trials {}  filtered {}  resampled {}  failures {}",
            r.suite,
            if r.passed { "PASS" } else { "FAIL" },
            r.trials,
            r.filtered,
            r.resampled,
            r.failures.len()
        );
        for f in &r.failures {
            let _ = writeln!(
                s,
                "  trial {} seed {}: {} {:?}",
                f.trial, f.seed, f.property, f.measured
            );
        }
    }
    s
}
