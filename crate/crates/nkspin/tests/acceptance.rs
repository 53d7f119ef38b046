//! Acceptance criteria AC1..AC8. One line per criterion; nonzero exit if any fails.
//! Runs without the libtest harness so the lines always reach the log.

use std::time::{Duration, Instant};

use nkspin::cli::{algebra_suite, render, run, Format, MetricChoice, RunConfig, Suite};
use nkspin::deform::{deform_suite, eigenspace_e};
use nkspin::homogeneous::{build_nk_geometry, build_round_geometry, curvature_suite, FrameGeometry};
use nkspin::opcalc::{default_window, hermitian_derivative_suite, weitzenboeck_suite, Mode};
use nkspin::rarita::rarita_suite;
use nkspin::report::{SuiteReport, Tolerances};
use nkspin::su3_model::model;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Line {
    ok: bool,
    detail: String,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let r = f();
    (r, t.elapsed())
}

/// All assertions with one of `ids` on one of `spaces` (empty = any) pass; every
/// (id, space) pair is present.
fn require(rep: &SuiteReport, ids: &[&str], spaces: &[&str]) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for id in ids {
        let hits: Vec<_> = rep.assertions.iter().filter(|a| a.id == *id && (spaces.is_empty() || spaces.contains(&a.space.as_str()))).collect();
        let want = if spaces.is_empty() { 1 } else { spaces.len() };
        if hits.len() < want {
            return Err(format!("{id}: {} of {want} spaces present", hits.len()));
        }
        for a in hits {
            if !a.pass {
                return Err(format!("{id} on {}: value {:e}, expected {:e} ± {:e}", a.space, a.value, a.expected, a.tolerance));
            }
            worst = worst.max((a.value - a.expected).abs());
        }
    }
    Ok(worst)
}

fn value(rep: &SuiteReport, id: &str, space: &str) -> f64 {
    rep.find(id, space).map(|a| a.value).unwrap_or(f64::NAN)
}

fn within(d: Duration, secs: u64) -> Result<(), String> {
    if d <= Duration::from_secs(secs) {
        Ok(())
    } else {
        Err(format!("runtime {:.1} s exceeds {secs} s", d.as_secs_f64()))
    }
}

fn line(r: Result<String, String>) -> Line {
    match r {
        Ok(detail) => Line { ok: true, detail },
        Err(detail) => Line { ok: false, detail },
    }
}

fn ac1() -> Line {
    let (rep, dt) = timed(|| algebra_suite(7, 100, 1e-9));
    line((|| {
        let ids = [
            "eq2.5", "eq2.6", "eq2.7", "eq2.8", "eq2.16", "eq2.17", "eq2.18", "eq2.19", "eq2.20", "eq2.21", "eq2.22", "eq2.23", "eq2.24", "eq2.25", "eq2.26", "eq2.27", "eq2.28",
        ];
        let worst = require(&rep, &ids, &[])?;
        if !rep.pass {
            return Err(format!("suite failures: {:?}", rep.failures().iter().map(|a| &a.id).collect::<Vec<_>>()));
        }
        within(dt, 5)?;
        Ok(format!("{} identities x 100 instances, max residual {worst:.1e} < 1e-9, {:.2} s < 5 s", ids.len(), dt.as_secs_f64()))
    })())
}

fn ac2(nk: &FrameGeometry) -> Line {
    let (rep, dt) = timed(|| curvature_suite(nk, &mut ChaCha8Rng::seed_from_u64(7), 1e-9));
    line((|| {
        let worst = require(&rep, &["ric", "scal", "ricbar", "eq2.9", "eq2.10", "qR-one-forms", "qRbar-tangent", "qS-Rbar"], &[])?;
        within(dt, 5)?;
        Ok(format!("Ric=5g, scal={}, Ricbar=4g, eq2.9/eq2.10, q(R), q(Rbar), q_S(Rbar): max deviation {worst:.1e}, {:.2} s < 5 s", value(&rep, "scal", "fiber"), dt.as_secs_f64()))
    })())
}

fn ac3(nk: &FrameGeometry) -> Line {
    let modes = [Mode::INVARIANT, Mode::new(1, 1)];
    let (rep, dt) = timed(|| hermitian_derivative_suite(nk, &modes, 1e-8));
    line((|| {
        let worst = require(&rep, &["eq2.12", "eq2.13", "eq2.14", "eq2.15", "eq2.29", "eq2.30", "eq2.31"], &["(0,0)", "(1/2,1/2)"])?;
        within(dt, 30)?;
        Ok(format!("7 identities on (0,0) and (1/2,1/2): max residual {worst:.1e} < 1e-8, {:.2} s < 30 s (eq2.29 in measured sign)", dt.as_secs_f64()))
    })())
}

fn ac4(nk: &FrameGeometry) -> Line {
    let modes = [Mode::INVARIANT, Mode::new(1, 0), Mode::new(0, 1), Mode::new(1, 1)];
    let (rep, dt) = timed(|| weitzenboeck_suite(nk, &modes, 1e-8));
    line((|| {
        let worst = require(&rep, &["eq3.1", "eq3.4", "eq3.6", "eq3.7"], &["(0,0)", "(1/2,0)", "(0,1/2)", "(1/2,1/2)"])?;
        within(dt, 60)?;
        Ok(format!("4 Weitzenböck relations on 4 spaces of S⊗T: max residual {worst:.1e} < 1e-8, {:.2} s < 60 s", dt.as_secs_f64()))
    })())
}

fn ac5(nk: &FrameGeometry, tol: &Tolerances) -> Line {
    let w = default_window();
    let (rep, dt) = timed(|| rarita_suite(nk, &w, tol));
    line((|| {
        require(&rep, &["dim-kernel", "kernel-without-twistor-adjoint"], &["(0,0)"])?;
        let dim = value(&rep, "kernel-without-twistor-adjoint", "(0,0)");
        let gap = value(&rep, "spectral-gap", "(0,0)");
        if gap.is_nan() || gap <= 1e6 {
            return Err(format!("spectral gap {gap:e} <= 1e6"));
        }
        let angle = require(&rep, &["harmonic-subspace-angle", "round-trip"], &["(0,0)"])?;
        if angle >= 1e-8 {
            return Err(format!("round trip {angle:e} >= 1e-8"));
        }
        let red = [
            "lemma4.1-trace", "lemma4.1-omega", "lemma4.1-vector", "lemma4.2-alpha0", "lemma4.2-alpha6", "system-b-star-d-sigma", "system-b-delta-sigma", "system-b-star-dw",
            "system-b-delta-w", "system-b-delta-phi", "final-laplacian-sigma", "final-phi", "final-w",
        ];
        let worst = require(&rep, &red, &["(0,0)"])?;
        if worst >= 1e-9 {
            return Err(format!("reduction residual {worst:e} >= 1e-9"));
        }
        let others: Vec<&str> = ["(1/2,0)", "(0,1/2)", "(1/2,1/2)", "(1,0)", "(0,1)"].to_vec();
        require(&rep, &["dim-kernel"], &others)?;
        within(dt, 60)?;
        Ok(format!(
            "dim ker(D_TM)∩ker(Π) = {dim} on invariant sections, gap {gap:.0e}, round-trip/angle {angle:.1e}, reduction residuals {worst:.1e}, other window modes 0, {:.2} s < 60 s",
            dt.as_secs_f64()
        ))
    })())
}

fn ac6(round: &FrameGeometry, tol: &Tolerances) -> Line {
    let w = default_window();
    let (rep, dt) = timed(|| rarita_suite(round, &w, tol));
    line((|| {
        let spaces: Vec<String> = w.iter().map(|m| m.to_string()).collect();
        let sp: Vec<&str> = spaces.iter().map(|s| s.as_str()).collect();
        require(&rep, &["psd-min-eigenvalue", "dim-kernel", "dim-kernel-dirac"], &sp)?;
        let min = rep.assertions.iter().filter(|a| a.id == "psd-min-eigenvalue").map(|a| a.value).fold(f64::INFINITY, f64::min);
        if min < -1e-9 {
            return Err(format!("PSD violated: {min:e}"));
        }
        within(dt, 30)?;
        Ok(format!("min eig(M†M − N†N − Id) = {min:.1e} ≥ −1e-9 on {} spaces, dim ker D_TM = 0, {:.2} s < 30 s", w.len(), dt.as_secs_f64()))
    })())
}

fn ac7(nk: &FrameGeometry, tol: &Tolerances) -> Line {
    let w = default_window();
    let (rep, dt) = timed(|| deform_suite(nk, &w, tol, 7));
    line((|| {
        let spaces: Vec<String> = w.iter().map(|m| m.to_string()).collect();
        let sp: Vec<&str> = spaces.iter().map(|s| s.as_str()).collect();
        require(&rep, &["thmB", "kplus-dim", "e12-kernel-consistency", "e12-flagged"], &sp)?;
        if value(&rep, "kplus-dim", "(0,0)") != 1.0 {
            return Err("dim K+ on invariant sections is not 1".into());
        }
        let chain = require(&rep, &["chain-identity", "chain-equivalence-random", "dphi-type"], &sp)?;
        if chain >= 1e-8 {
            return Err(format!("chain residual {chain:e}"));
        }
        // No window space carries E(12), so exercise the matcher on a known eigenvalue.
        let ctl = eigenspace_e(nk, 36.0, Mode::INVARIANT, tol).map_err(|e| e.to_string())?;
        if ctl.multiplicity == 0 || ctl.multiplicity != ctl.kernel_multiplicity || ctl.flagged != 0 {
            return Err(format!("control eigenvalue 36: multiplicity {} vs kernel {}", ctl.multiplicity, ctl.kernel_multiplicity));
        }
        let e12: usize = rep.assertions.iter().filter(|a| a.id == "deformation-from-eigenform").count();
        within(dt, 120)?;
        Ok(format!(
            "dim = dim E(12) + dim K+ on {} spaces, dim K+ = 1 on invariant, chain residuals {chain:.1e} < 1e-8, E(12) empty in window ({e12} eigenforms; 12 matching vacuous, control λ=36 matched with multiplicity {} of {}), {:.2} s < 120 s",
            w.len(),
            ctl.multiplicity,
            ctl.coclosed_dim,
            dt.as_secs_f64()
        ))
    })())
}

fn ac8() -> Line {
    let cfg = RunConfig { metric: MetricChoice::Both, suites: Suite::ALL.to_vec(), format: Format::Json, ..RunConfig::default() };
    let (pair, dt) = timed(|| {
        let a = render(&run(&cfg, 7).expect("run"), Format::Json);
        let b = render(&run(&cfg, 7).expect("run"), Format::Json);
        (a, b)
    });
    let (a, b) = pair;
    line(if a == b {
        Ok(format!("two full runs with seed 7 gave byte-identical JSON ({} bytes), {:.1} s", a.len(), dt.as_secs_f64()))
    } else {
        let at = a.bytes().zip(b.bytes()).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
        Err(format!("reports differ at byte {at}"))
    })
}

fn main() {
    let nk = build_nk_geometry(model()).expect("nearly Kähler geometry");
    let round = build_round_geometry();
    let tol = Tolerances::default();
    let lines = [ac1(), ac2(&nk), ac3(&nk), ac4(&nk), ac5(&nk, &tol), ac6(&round, &tol), ac7(&nk, &tol), ac8()];
    let mut failed = 0;
    for (i, l) in lines.iter().enumerate() {
        println!("AC{} {} {}", i + 1, if l.ok { "PASS" } else { "FAIL" }, l.detail);
        failed += usize::from(!l.ok);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
