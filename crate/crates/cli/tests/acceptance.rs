//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use nondeg_core::construct::{
    asymptotic_table, conc_family, exponentiate_loop, find_wire_n, geodesic_segment, jump_fixture, make_twist,
    manifold_wire, mollify, rotation_loop, scale_into_manifold, slide_homotopy, FrameMatching,
};
use nondeg_core::curve::{cn_distance, concat, in_lm_delta, nondeg_margin, FrameCurve, MoorePath};
use nondeg_core::manifold::{BasisPoint, ChartedManifold, Lift};
use nondeg_core::monoid::{pi0_census, stabilize, stabilized_equal_pi0};
use nondeg_core::spin::{curve_class, loop_class, SpinClass};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240611;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn c1_christoffel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for n in [2, 3] {
        for m in [ChartedManifold::sphere(n, 1.0).map_err(e)?, ChartedManifold::hyperbolic(n, 1.0).map_err(e)?] {
            let r = 0.9 * m.chart_radius();
            let mut k = 0;
            while k < 100 {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-r..r)).collect();
                if x.iter().map(|v| v * v).sum::<f64>().sqrt() >= r {
                    continue;
                }
                worst = worst.max(m.christoffel(&x).max_abs_diff(&m.christoffel_fd(&x, 1e-5)));
                k += 1;
            }
        }
    }
    ensure(worst <= 1e-6, format!("max |closed form - finite difference| = {worst:.2e} over 400 points"))
}

fn c2_degeneracy() -> Outcome {
    let mut parts = vec![];
    let mut ok = true;
    let ms = [
        ChartedManifold::euclidean(3),
        ChartedManifold::sphere(3, 1.0).map_err(e)?,
        ChartedManifold::hyperbolic(3, 1.0).map_err(e)?,
    ];
    for m in &ms {
        let g = geodesic_segment(m, &[0.0; 3], &[0.5, 0.2, -0.1]).map_err(e)?;
        let mg = nondeg_margin(m, &g, 4096.0).map_err(e)?;
        ok &= mg < 1e-8;
        parts.push(format!("{:?} geodesic {mg:.1e}", m.spec().kind));
    }
    for n in 2..=4 {
        let t = make_twist(n).map_err(e)?;
        ok &= t.margin > 1e-3;
        parts.push(format!("twist n={n} {:.3e}", t.margin));
    }
    ensure(ok, parts.join(", "))
}

fn c3_scaling() -> Outcome {
    let h = ChartedManifold::hyperbolic(3, 1.0).map_err(e)?;
    let tw = make_twist(3).map_err(e)?;
    let lams = [0.2, 0.1, 0.05, 0.025];
    let mut dev = vec![];
    for &l in &lams {
        let w = exponentiate_loop(&h, &tw.path, &[0.3, 0.0, 0.0], l).map_err(e)?;
        dev.push((nondeg_margin(&h, &w, 4096.0).map_err(e)? - tw.margin).abs());
    }
    let xs: Vec<f64> = lams.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = dev.iter().map(|d| d.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 4.0, ys.iter().sum::<f64>() / 4.0);
    let rate = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    ensure(
        decreasing(&dev) && rate >= 0.9,
        format!("|margin - flat| = {:?}, fitted rate {rate:.3}", dev.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>()),
    )
}

fn z_loop(turns: f64) -> Result<FrameCurve, String> {
    rotation_loop(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], turns, 1.0, 0.05, 1024.0).map_err(e)
}

fn c4_asymptotics() -> Outcome {
    let tw = make_twist(3).map_err(e)?;
    let rows = asymptotic_table(&z_loop(2.0)?, &tw.path, &[8, 16, 32, 64], 64).map_err(e)?;
    let mut ok = true;
    let mut parts = vec![];
    for k in 1..=3 {
        let col: Vec<f64> = rows.iter().filter(|r| r.k == k).map(|r| r.deviation).collect();
        ok &= non_increasing(&col);
        parts.push(format!("k={k}: {}", col.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>().join(" ")));
    }
    ensure(ok, parts.join("; "))
}

fn c5_wire_existence() -> Outcome {
    let tw = make_twist(3).map_err(e)?;
    let flat = ChartedManifold::euclidean(3);
    let mut ok = true;
    let mut parts = vec![];
    for (turns, expect) in [(1.0, SpinClass::Minus), (2.0, SpinClass::Plus)] {
        let a = z_loop(turns)?;
        let ca = loop_class(&a).map_err(e)?.class;
        let s = find_wire_n(&a, &tw.path, 1e-3, 256, 4096.0).map_err(e)?;
        let cw = curve_class(&flat, &s.wire, 4096.0 * s.n as f64).map_err(e)?.class;
        ok &= s.n % 2 == 0 && s.n <= 256 && ca == expect && cw == ca;
        parts.push(format!("{}pi: N={} margin {:.2e} class(A)={} class(A^[N])={}", 2.0 * turns, s.n, s.margin, ca.sign(), cw.sign()));
    }
    ensure(ok, parts.join("; "))
}

fn plane_loop(rng: &mut ChaCha8Rng, n: usize, turns: f64) -> Result<FrameCurve, String> {
    let g = DMatrix::from_fn(n, 2, |_, _| rng.random_range(-1.0..1.0));
    let q = g.qr().q();
    let (u, v): (Vec<f64>, Vec<f64>) = (q.column(0).iter().copied().collect(), q.column(1).iter().copied().collect());
    rotation_loop(&u, &v, turns, 1.0, 0.05, 1024.0).map_err(e)
}

fn random_loop(rng: &mut ChaCha8Rng) -> Result<FrameCurve, String> {
    let ta = rng.random_range(0..4) as f64;
    let a = plane_loop(rng, 3, ta)?;
    let tb = rng.random_range(0..4) as f64;
    let b = plane_loop(rng, 3, tb)?;
    Ok(FrameCurve::sample(3, 1.0, 1024.0, |t| a.frame_at(t) * b.frame_at(t)).map_err(e)?)
}

fn c6_spin() -> Outcome {
    let id = DMatrix::<f64>::identity(3, 3);
    let constant = FrameCurve::sample(3, 1.0, 64.0, |_| id.clone()).map_err(e)?;
    let c0 = loop_class(&constant).map_err(e)?.class;
    let c2 = loop_class(&z_loop(1.0)?).map_err(e)?.class;
    let c4 = loop_class(&z_loop(2.0)?).map_err(e)?.class;
    let fine = rotation_loop(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 1.0, 1.0, 0.05, 2048.0).map_err(e)?;
    let stable = loop_class(&fine).map_err(e)?.class == c2;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut additive = 0;
    for _ in 0..20 {
        let (a, b) = (random_loop(&mut rng)?, random_loop(&mut rng)?);
        let (ca, cb) = (loop_class(&a).map_err(e)?.class, loop_class(&b).map_err(e)?.class);
        let cab = loop_class(&a.concat(&b).map_err(e)?).map_err(e)?.class;
        additive += (cab == ca * cb) as usize;
    }
    ensure(
        c0 == SpinClass::Plus && c2 == SpinClass::Minus && c4 == SpinClass::Plus && stable && additive == 20,
        format!("constant {} 2pi {} 4pi {} doubling stable {stable} additivity {additive}/20", c0.sign(), c2.sign(), c4.sign()),
    )
}

/// The twist mapped linearly so that its basepoint frame is `f`.
fn twist_with_frame(tw: &MoorePath, f: &DMatrix<f64>) -> MoorePath {
    let l = f * tw.basepoint().frame.clone().try_inverse().unwrap();
    let moved = tw.map_points(|p| (&l * nalgebra::DVector::from_column_slice(p)).iter().copied().collect());
    moved.with_basepoint(BasisPoint { point: tw.basepoint().point.clone(), frame: f.clone() })
}

fn c7_census() -> Outcome {
    let flat = ChartedManifold::euclidean(3);
    let tw = make_twist(3).map_err(e)?.path;
    let ww = concat(&tw, &tw, 0.0).map_err(e)?;
    let wire = find_wire_n(&z_loop(1.0)?, &tw, 1e-3, 256, 4096.0).map_err(e)?.wire;
    let fixtures = vec![tw.clone(), ww, wire];
    let census = pi0_census(&flat, &fixtures, 4096.0 * 64.0).map_err(e)?;
    let mut certified = true;
    let mut loc = 0;
    for g in &fixtures {
        certified &= in_lm_delta(&flat, g, 0.0, 4096.0 / g.duration()).map_err(e)?.member;
        let w = twist_with_frame(&tw, &g.basepoint().frame);
        let s = stabilize(g);
        let shifted = s.shift(&w, 1e-9).map_err(e)?;
        loc += stabilized_equal_pi0(&flat, &s, &shifted, &w, 4096.0 * 64.0).map_err(e)?.equal as usize;
    }
    ensure(
        census.both_classes && certified && loc == fixtures.len(),
        format!(
            "classes {:?}, all certified {certified}, (g,0)~(w.g,1) for {loc}/{}",
            census.classes.iter().map(|c| c.sign()).collect::<Vec<_>>(),
            fixtures.len()
        ),
    )
}

/// Below the feature scale of the n = 3 twist; at 0.0035 and above its interior
/// margin starts to shrink under convolution.
const MOLLIFY_TAU: f64 = 0.002;

fn c8_mollifier() -> Outcome {
    let flat = ChartedManifold::euclidean(3);
    let tw = make_twist(3).map_err(e)?;
    let g = jump_fixture(&tw, 0.03).map_err(e)?;
    let before = in_lm_delta(&flat, &g, 0.05, 4096.0).map_err(e)?;
    let (s, r) = mollify(&flat, &g, MOLLIFY_TAU, &tw.path, 0.05).map_err(e)?;
    let after = in_lm_delta(&flat, &s, 0.0, 4096.0).map_err(e)?;
    let ok1 = before.member && before.jumps == 1 && s.pieces().len() == 1 && after.jumps == 0
        && r.margin_after > 0.0 && r.endpoint_closeness <= 1e-6;
    let (_, r2) = mollify(&flat, &tw.path, MOLLIFY_TAU, &tw.path, 0.05).map_err(e)?;
    let drift = (r2.margin_after - r2.margin_before).abs() / r2.margin_before;
    ensure(
        ok1 && drift <= 0.05,
        format!(
            "jump {:.3} -> pieces {} margin {:.3e} endpoint closeness {:.1e}; drift on twist {:.2}%",
            g.max_jump(),
            s.pieces().len(),
            r.margin_after,
            r.endpoint_closeness,
            100.0 * drift
        ),
    )
}

fn c9_manifold_wire() -> Outcome {
    let h = ChartedManifold::hyperbolic(3, 1.0).map_err(e)?;
    let tw = make_twist(3).map_err(e)?;
    let x0 = [-0.3, 0.0, 0.0];
    let (lam0, _) = scale_into_manifold(&h, &tw, &x0, 1e-3, 4096.0).map_err(e)?;
    let g = geodesic_segment(&h, &x0, &[0.6, 0.1, 0.0]).map_err(e)?;
    let lift = Lift::parallel(&h, g, &h.orthonormal_frame(&x0), 4096.0).map_err(e)?;
    let mut found = None;
    let mut close = vec![];
    let mut parts = vec![];
    for n in [8usize, 16, 32, 64, 128, 256] {
        let w = manifold_wire(&h, &lift, &tw.path, lam0, n, FrameMatching::Standard, 1024.0).map_err(e)?;
        let r = &w.report;
        close.push(r.endpoint_closeness);
        parts.push(format!("N={n}: margin {:.2e} closeness {:.3}", r.margin, r.endpoint_closeness));
        if found.is_none() && r.margin >= 1e-3 && r.endpoint_closeness <= 0.05 {
            found = Some(n);
        }
    }
    ensure(
        found.is_some() && decreasing(&close),
        format!("lambda0 {lam0}, first N {:?}; {}", found, parts.join(", ")),
    )
}

fn c10_appr2() -> Outcome {
    let h = ChartedManifold::hyperbolic(3, 1.0).map_err(e)?;
    let tw = make_twist(3).map_err(e)?;
    let base = exponentiate_loop(&h, &tw.path, &[0.0; 3], 0.01).map_err(e)?;
    let lift = Lift::frame_map(&h, base, 4096.0).map_err(e)?;
    let lam0 = 2.0;
    let tm = FrameMatching::TwistFrame;
    let mut dist = vec![];
    for n in [8usize, 16, 32, 64] {
        let w = manifold_wire(&h, &lift, &tw.path, lam0, n, tm, 256.0).map_err(e)?;
        let c = conc_family(&h, &lift, &tw.path, lam0, n, tm, f64::INFINITY).map_err(e)?;
        dist.push(cn_distance(&h, &w.path, &c, 512.0 * n as f64 / w.path.duration()).map_err(e)?);
    }
    let n = 16;
    let margins: Vec<f64> = (0..16)
        .map(|k| {
            let s = slide_homotopy(&h, &lift, &tw.path, lam0, n, tm, f64::INFINITY, Some((n / 2, k as f64 / 15.0)))?;
            nondeg_margin(&h, &s, 1024.0 * n as f64 / s.duration())
        })
        .collect::<Result<_, _>>()
        .map_err(e)?;
    let min = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(
        decreasing(&dist) && margins[0] > 0.0 && min >= 0.5 * margins[0],
        format!(
            "C^n proxy {:?}; slide margin tau=0 {:.3e}, min over grid {min:.3e}",
            dist.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>(),
            margins[0]
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let st = Command::new(env!("CARGO_BIN_EXE_nondeg"))
        .current_dir(dir)
        .env("NONDEG_CONFIG", dir.join("config.json"))
        .args(args)
        .status()
        .map_err(e)?;
    match st.code() {
        Some(0) | Some(2) => Ok(()),
        c => Err(format!("nondeg {args:?} exited with {c:?}")),
    }
}

fn snapshot(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(e)? {
        let p = entry.map_err(e)?.path();
        if p.is_file() {
            out.insert(p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).map_err(e)?);
        }
    }
    Ok(out)
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(e)?;
    let d = dir.path();
    std::fs::write(d.join("config.json"), format!(r#"{{"density": 2048, "seed": {SEED}}}"#)).map_err(e)?;
    let runs: Vec<Vec<&str>> = vec![
        vec!["gen", "twist", "--dim", "3", "--out", "w.json", "--report", "r_gen_w.json"],
        vec!["gen", "rotation-loop", "--turns", "2", "--out", "a.csv", "--report", "r_gen_a.json"],
        vec!["gen", "jump", "--out", "j.json", "--report", "r_gen_j.json"],
        vec!["gen", "circle", "--out", "c.json", "--report", "r_gen_c.json"],
        vec!["check", "c.json", "--report", "r_check.json"],
        vec!["wire", "--omega", "w.json", "--matrix", "a.csv", "--scan", "--out", "wire.json", "--report", "r_wire.json"],
        vec!["spin", "a.csv", "--report", "r_spin.json"],
        vec!["smooth", "j.json", "--reference", "w.json", "--tau", "0.01", "--eps2", "0.05", "--out", "s.json", "--report", "r_smooth.json"],
        vec!["concat", "w.json", "w.json", "--out", "ww.json", "--report", "r_concat.json"],
        vec!["asymptotics", "--matrix", "a.csv", "--omega", "w.json", "--n", "8,16", "--csv", "asym.csv", "--report", "r_asym.json"],
        vec!["loc", "equal", "w.json", "ww.json", "--omega", "w.json", "--power-b", "1", "--report", "r_loc.json"],
        vec!["manifold", "list", "--report", "r_list.json"],
    ];
    let mut snaps = vec![];
    for _ in 0..2 {
        for a in &runs {
            run_cli(d, a)?;
        }
        let s = snapshot(d)?;
        for name in s.keys().filter(|k| k.as_str() != "config.json") {
            std::fs::remove_file(d.join(name)).map_err(e)?;
        }
        snaps.push(s);
    }
    let differing: Vec<&String> = snaps[0].keys().filter(|k| snaps[1].get(*k) != snaps[0].get(*k)).collect();
    ensure(
        differing.is_empty() && snaps[0].len() == snaps[1].len(),
        format!("{} files compared, differing: {:?}", snaps[0].len(), differing),
    )
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("1 Christoffel oracle", c1_christoffel),
        ("2 geodesic degeneracy", c2_degeneracy),
        ("3 exponential scaling", c3_scaling),
        ("4 wire asymptotics", c4_asymptotics),
        ("5 wire existence and class", c5_wire_existence),
        ("6 spin ground truth", c6_spin),
        ("7 pi0 census", c7_census),
        ("8 mollifier", c8_mollifier),
        ("9 manifold telephone wire", c9_manifold_wire),
        ("10 concatenation and slide", c10_appr2),
        ("11 determinism", c11_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let total = Instant::now();
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let t = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {name}: {tag} ({:.1}s) {detail}", t.elapsed().as_secs_f64());
    }
    println!("acceptance: {failed} failed, total {:.1}s", total.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
