//! CSV rendering of results. Numbers use the shortest decimal that reads
//! back to the same double, so equal results give byte-equal files.

use std::fmt::Write;

use num_complex::Complex64;

use crate::analytics::{DegeneracyScan, EntropyTrace, SplittingReport};
use crate::classical::{DivergenceOutcome, DivergenceSeries};
use crate::observables::ObservableSeries;
use crate::spectrum::Spectrum;

/// Shortest round-trip representation (`{:?}` switches to exponent form
/// for very large or small magnitudes).
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let mut out = String::from("n,E_n,k_n,q_or_kappa,regime,C_n\n");
    for s in spectrum.states() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.index(),
            num(s.energy()),
            num(s.k()),
            num(s.decay_or_wavenumber()),
            s.regime().label(),
            num(s.norm_const())
        );
    }
    out
}

/// Rows `x,t,re_psi,im_psi,density` for one or more time slices.
pub fn density_csv<'a>(slices: impl IntoIterator<Item = (f64, &'a [f64], &'a [Complex64])>) -> String {
    let mut out = String::from("x,t,re_psi,im_psi,density\n");
    for (t, xs, psi) in slices {
        for (&x, p) in xs.iter().zip(psi) {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                num(x),
                num(t),
                num(p.re),
                num(p.im),
                num(p.norm_sqr())
            );
        }
    }
    out
}

pub fn series_csv(series: &ObservableSeries) -> String {
    let mut out = String::from("t,rhs_prob,entropy,mean_x,variance\n");
    for i in 0..series.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(series.times[i]),
            num(series.rhs_prob[i]),
            num(series.entropy[i]),
            num(series.mean_x[i]),
            num(series.variance[i])
        );
    }
    out
}

pub fn divergence_csv(series: &DivergenceSeries, t_star: DivergenceOutcome) -> String {
    let mut out = String::from("t,var_qm,var_cl,abs_diff\n");
    for i in 0..series.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(series.times[i]),
            num(series.var_qm[i]),
            num(series.var_cl[i]),
            num(series.abs_diff[i])
        );
    }
    match t_star {
        DivergenceOutcome::Reached(t) => {
            let _ = writeln!(out, "# t_star={}", num(t));
        }
        DivergenceOutcome::NotReached => out.push_str("# t_star=not_reached\n"),
    }
    out
}

/// Rows `position,n,E_n,gap_n,flag`; `gap_n = E_{n+1} - E_n` (empty for the
/// last level). Failed positions are skipped.
pub fn degeneracy_csv(scan: &DegeneracyScan) -> String {
    let mut out = String::from("position,n,E_n,gap_n,flag\n");
    for r in scan.results.iter().flatten() {
        for (i, &e) in r.energies.iter().enumerate() {
            let (gap, flag) = match (r.gaps.get(i), r.flags.get(i)) {
                (Some(&g), Some(&f)) => (num(g), u8::from(f).to_string()),
                _ => (String::new(), String::new()),
            };
            let _ = writeln!(out, "{},{},{},{},{}", num(r.position), i + 1, num(e), gap, flag);
        }
    }
    out
}

pub fn entropy_scan_csv<'a>(traces: impl IntoIterator<Item = &'a EntropyTrace>) -> String {
    let mut out = String::from("position,t,entropy\n");
    for trace in traces {
        for (&t, &s) in trace.times.iter().zip(&trace.entropy) {
            let _ = writeln!(out, "{},{},{}", num(trace.position), num(t), num(s));
        }
    }
    out
}

pub fn splitting_csv(report: &SplittingReport) -> String {
    format!(
        "pair_index,e_lower,e_upper,gap,estimate_eq11,instanton_action\n{},{},{},{},{},{}\n",
        report.pair_index,
        num(report.e_lower),
        num(report.e_upper),
        num(report.gap),
        num(report.estimate_eq11),
        num(report.instanton_action)
    )
}
