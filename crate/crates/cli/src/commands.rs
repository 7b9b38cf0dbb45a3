use std::path::Path;

use clap::{Subcommand, ValueEnum};
use nondeg_core::construct::{
    asymptotic_table, circle_loop, find_manifold_wire_n, find_wire_n, geodesic_segment, jump_fixture, make_twist,
    manifold_wire, matrix_wire, mollify, rotation_loop, AsymptoticRow, FrameMatching, ManifoldWire, MollifyReport,
};
use nondeg_core::curve::{concat_all, endpoint_frames, frame_closeness, in_lm_delta, nondeg_margin, FrameCurve, MoorePath};
use nondeg_core::manifold::{matrix_rows, registered_metrics, ChartedManifold, Lift};
use nondeg_core::monoid::{pi0_census, stabilized_equal_pi0, StabilizedCurve};
use nondeg_core::spin::{curve_class, frenet, loop_class, SpinClass};
use nondeg_core::{Error, Result};
use serde::Serialize;

use crate::config::RunConfig;
use crate::report::{emit, write_atomic, Report, Verdict};
use crate::WireArgs;

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Input(_) | Error::Precondition(_) => 3,
        _ => 2,
    }
}

fn read_curve(p: &Path) -> Result<MoorePath> {
    let text = std::fs::read_to_string(p).map_err(|e| Error::Input(format!("cannot read {}: {e}", p.display())))?;
    MoorePath::from_json(&text).map_err(|e| match e {
        Error::Input(s) => Error::Input(format!("{}: {s}", p.display())),
        e => Error::Input(format!("{}: {e}", p.display())),
    })
}

fn read_frames(p: &Path) -> Result<FrameCurve> {
    let f = std::fs::File::open(p).map_err(|e| Error::Input(format!("cannot read {}: {e}", p.display())))?;
    FrameCurve::read_csv(f).map_err(|e| Error::Input(format!("{}: {e}", p.display())))
}

fn write_curve(cfg: &RunConfig, p: &Path, c: &MoorePath) -> Result<()> {
    write_atomic(&cfg.resolve(p), c.to_json()?.as_bytes())
}

fn per_unit(cfg: &RunConfig, duration: f64) -> f64 {
    cfg.density / duration
}

fn finish<T: Serialize>(cfg: &RunConfig, command: &str, verdict: Verdict, result: T, rep: Option<&Path>) -> Result<Verdict> {
    emit(&Report { schema_version: crate::report::SCHEMA_VERSION, command, config: cfg, verdict, result }, rep)?;
    Ok(verdict)
}

#[derive(Serialize)]
struct CheckResult {
    manifold: nondeg_core::manifold::ManifoldSpec,
    duration: f64,
    pieces: usize,
    margin: f64,
    start_frame: Vec<Vec<f64>>,
    end_frame: Vec<Vec<f64>>,
    member_lm: bool,
    member_lm_delta: bool,
    membership: nondeg_core::curve::Membership,
}

pub fn check(cfg: &RunConfig, curve: &Path, rep: Option<&Path>) -> Result<Verdict> {
    let c = read_curve(curve)?;
    let m = c.manifold()?;
    let d = per_unit(cfg, c.duration());
    let strict = in_lm_delta(&m, &c, 0.0, d)?;
    let loose = in_lm_delta(&m, &c, cfg.delta, d)?;
    let (f0, f1) = endpoint_frames(&m, &c)?;
    let r = CheckResult {
        manifold: m.spec().clone(),
        duration: c.duration(),
        pieces: c.pieces().len(),
        margin: loose.margin,
        start_frame: matrix_rows(&f0),
        end_frame: matrix_rows(&f1),
        member_lm: strict.member,
        member_lm_delta: loose.member,
        membership: loose,
    };
    let v = Verdict::from_bool(r.member_lm_delta);
    finish(cfg, "check", v, r, rep)
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LiftKind {
    /// Parallel transport of an orthonormal frame; twist in standard coordinates.
    Parallel,
    /// The frame map of the base curve; twist matched to its initial frame.
    FrameMap,
}

#[derive(Serialize)]
struct FlatWireResult {
    #[serde(rename = "N")]
    n: usize,
    margin: f64,
    endpoint_closeness: f64,
    asymptotics: Vec<AsymptoticRow>,
    scan: Option<Vec<(usize, f64)>>,
}

#[derive(Serialize)]
struct ManifoldWireResult {
    #[serde(rename = "N")]
    n: usize,
    lambda0: f64,
    margin: f64,
    endpoint_closeness: f64,
    start_closeness: f64,
    end_closeness: f64,
    scan: Option<Vec<nondeg_core::construct::ManifoldWireReport>>,
}

pub fn wire(cfg: &RunConfig, w: &WireArgs, rep: Option<&Path>) -> Result<Verdict> {
    let omega = read_curve(&w.omega)?;
    if let Some(mp) = &w.matrix {
        let a = read_frames(mp)?;
        let flat = ChartedManifold::euclidean(omega.dim());
        let (n, path, margin, scan) = if w.scan {
            let s = find_wire_n(&a, &omega, cfg.margin_tol, cfg.n_max, cfg.density)?;
            (s.n, s.wire, s.margin, Some(s.profile))
        } else {
            let n = w.n.unwrap();
            let p = matrix_wire(&a, &omega, n)?;
            let margin = nondeg_margin(&flat, &p, cfg.density * n as f64 / a.duration())?;
            (n, p, margin, None)
        };
        let (f0, f1) = endpoint_frames(&flat, &path)?;
        let asymptotics = asymptotic_table(&a, &omega, &[n], 64)?;
        write_curve(cfg, &w.out, &path)?;
        let r = FlatWireResult { n, margin, endpoint_closeness: frame_closeness(&f0, &f1), asymptotics, scan };
        let v = Verdict::from_bool(margin >= cfg.margin_tol);
        return finish(cfg, "wire", v, r, rep);
    }
    let base = read_curve(w.curve.as_ref().unwrap())?;
    let m = base.manifold()?;
    let d = per_unit(cfg, base.duration());
    let (lift, matching) = match w.lift {
        LiftKind::Parallel => {
            let e = m.orthonormal_frame(&base.start_point());
            (Lift::parallel(&m, base, &e, d)?, FrameMatching::Standard)
        }
        LiftKind::FrameMap => (Lift::frame_map(&m, base, d)?, FrameMatching::TwistFrame),
    };
    let (wire, scan): (ManifoldWire, _) = if w.scan {
        let cands: Vec<usize> = std::iter::successors(Some(2usize), |k| Some(k * 2)).take_while(|k| *k <= cfg.n_max).collect();
        let (wire, seen) =
            find_manifold_wire_n(&m, &lift, &omega, w.lambda0, matching, cfg.margin_tol, cfg.delta, &cands, cfg.density)?;
        (wire, Some(seen))
    } else {
        (manifold_wire(&m, &lift, &omega, w.lambda0, w.n.unwrap(), matching, cfg.density)?, None)
    };
    write_curve(cfg, &w.out, &wire.path)?;
    let r = wire.report;
    let v = Verdict::from_bool(r.margin >= cfg.margin_tol && r.endpoint_closeness <= cfg.delta);
    let out = ManifoldWireResult {
        n: r.n,
        lambda0: r.lambda0,
        margin: r.margin,
        endpoint_closeness: r.endpoint_closeness,
        start_closeness: r.start_closeness,
        end_closeness: r.end_closeness,
        scan,
    };
    finish(cfg, "wire", v, out, rep)
}

#[derive(Serialize)]
struct SpinResult {
    class: SpinClass,
    residual: f64,
    samples: usize,
}

pub fn spin(cfg: &RunConfig, input: &Path, rep: Option<&Path>) -> Result<Verdict> {
    let inv = if input.extension().is_some_and(|e| e == "csv") {
        loop_class(&frenet(&read_frames(input)?)?)?
    } else {
        let c = read_curve(input)?;
        let m = c.manifold()?;
        curve_class(&m, &c, per_unit(cfg, c.duration()))?
    };
    let r = SpinResult { class: inv.class, residual: inv.residual, samples: inv.samples };
    finish(cfg, "spin", Verdict::Pass, r, rep)
}

pub fn smooth(
    cfg: &RunConfig,
    curve: &Path,
    reference: &Path,
    tau: f64,
    eps2: f64,
    out: &Path,
    rep: Option<&Path>,
) -> Result<Verdict> {
    let g = read_curve(curve)?;
    let g0 = read_curve(reference)?;
    let m = g.manifold()?;
    let (s, r): (MoorePath, MollifyReport) = mollify(&m, &g, tau, &g0, eps2)?;
    write_curve(cfg, out, &s)?;
    let v = Verdict::from_bool(r.margin_after > 0.0 && r.endpoint_closeness <= 1e-6);
    finish(cfg, "smooth", v, r, rep)
}

#[derive(Serialize)]
struct ConcatResult {
    duration: f64,
    pieces: usize,
    max_jump: f64,
    margin: f64,
}

pub fn concat(cfg: &RunConfig, curves: &[std::path::PathBuf], out: &Path, rep: Option<&Path>) -> Result<Verdict> {
    let cs: Vec<MoorePath> = curves.iter().map(|p| read_curve(p)).collect::<Result<_>>()?;
    let c = concat_all(&cs, cfg.delta)?;
    let m = c.manifold()?;
    let margin = nondeg_margin(&m, &c, cfg.density * cs.len() as f64 / c.duration())?;
    write_curve(cfg, out, &c)?;
    let r = ConcatResult { duration: c.duration(), pieces: c.pieces().len(), max_jump: c.max_jump(), margin };
    finish(cfg, "concat", Verdict::Pass, r, rep)
}

#[derive(Serialize)]
struct AsymptoticsResult {
    rows: Vec<AsymptoticRow>,
    monotone: bool,
}

pub fn asymptotics(
    cfg: &RunConfig,
    matrix: &Path,
    omega: &Path,
    ns: &[usize],
    csv: &Path,
    rep: Option<&Path>,
) -> Result<Verdict> {
    let a = read_frames(matrix)?;
    let w = read_curve(omega)?;
    let rows = asymptotic_table(&a, &w, ns, 64)?;
    let mut text = String::from("N,k,deviation\n");
    for r in &rows {
        text.push_str(&format!("{},{},{:e}\n", r.n, r.k, r.deviation));
    }
    write_atomic(&cfg.resolve(csv), text.as_bytes())?;
    let monotone = (1..=w.dim()).all(|k| {
        let col: Vec<f64> = rows.iter().filter(|r| r.k == k).map(|r| r.deviation).collect();
        col.windows(2).all(|p| p[1] <= p[0])
    });
    finish(cfg, "asymptotics", Verdict::from_bool(monotone), AsymptoticsResult { rows, monotone }, rep)
}

#[derive(Serialize)]
struct CensusResult {
    files: Vec<String>,
    census: nondeg_core::monoid::CensusReport,
}

pub fn census(cfg: &RunConfig, dim: usize, dir: &Path, rep: Option<&Path>) -> Result<Verdict> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::Input(format!("cannot list {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "json" || e == "curve"))
        .collect();
    files.sort();
    let curves: Vec<MoorePath> = files.iter().map(|p| read_curve(p)).collect::<Result<_>>()?;
    let flat = ChartedManifold::euclidean(dim);
    for (p, c) in files.iter().zip(&curves) {
        if c.manifold_spec() != flat.spec() {
            return Err(Error::Input(format!("{} is not a curve in flat R^{dim}", p.display())));
        }
    }
    let census = pi0_census(&flat, &curves, cfg.density)?;
    let names = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    finish(cfg, "pi0 census", Verdict::Pass, CensusResult { files: names, census }, rep)
}

pub fn loc_equal(
    cfg: &RunConfig,
    a: &Path,
    b: &Path,
    omega: &Path,
    power_a: u32,
    power_b: u32,
    rep: Option<&Path>,
) -> Result<Verdict> {
    let (ca, cb, w) = (read_curve(a)?, read_curve(b)?, read_curve(omega)?);
    let m = w.manifold()?;
    let sa = StabilizedCurve { curve: ca, power: power_a };
    let sb = StabilizedCurve { curve: cb, power: power_b };
    let r = stabilized_equal_pi0(&m, &sa, &sb, &w, cfg.density)?;
    finish(cfg, "loc equal", Verdict::from_bool(r.equal), r, rep)
}

#[derive(Serialize)]
struct ManifoldEntry {
    name: String,
    about: String,
}

pub fn manifold_list(cfg: &RunConfig, rep: Option<&Path>) -> Result<Verdict> {
    let mut list = vec![
        ManifoldEntry { name: "euclidean".into(), about: "flat R^n, chart radius 1e6".into() },
        ManifoldEntry {
            name: "sphere".into(),
            about: "round sphere of curvature s in stereographic coordinates, closed-form Christoffels".into(),
        },
        ManifoldEntry {
            name: "hyperbolic".into(),
            about: "Poincare ball of curvature -s, chart radius below 1/sqrt(s)".into(),
        },
    ];
    list.extend(registered_metrics().iter().map(|r| ManifoldEntry { name: format!("custom:{}", r.name), about: r.about.into() }));
    finish(cfg, "manifold list", Verdict::Pass, list, rep)
}

#[derive(Subcommand, Clone, Debug)]
pub enum Fixture {
    /// Unit circle in R^2.
    Circle,
    /// Straight segment in R^2 (degenerate).
    Segment,
    /// Certified twist in R^n.
    Twist {
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
    /// The R^3 twist with one frame jump of the given size.
    Jump {
        #[arg(long, default_value_t = 0.03)]
        target: f64,
    },
    /// Frame loop (CSV) turning in the e1 e2 plane, identity near both ends.
    RotationLoop {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        turns: f64,
    },
}

#[derive(Serialize)]
struct GenResult {
    fixture: String,
    path: String,
}

pub fn generate(cfg: &RunConfig, fixture: &Fixture, out: Option<&Path>, rep: Option<&Path>) -> Result<Verdict> {
    let out = out.ok_or_else(|| Error::Input("gen needs --out".into()))?;
    let target = cfg.resolve(out);
    match fixture {
        Fixture::Circle => write_curve(cfg, out, &circle_loop()?)?,
        Fixture::Segment => {
            let flat = ChartedManifold::euclidean(2);
            write_curve(cfg, out, &geodesic_segment(&flat, &[0.0, 0.0], &[1.0, 0.5])?)?
        }
        Fixture::Twist { dim } => write_curve(cfg, out, &make_twist(*dim)?.path)?,
        Fixture::Jump { target } => write_curve(cfg, out, &jump_fixture(&make_twist(3)?, *target)?)?,
        Fixture::RotationLoop { dim, turns } => {
            if *dim < 2 {
                return Err(Error::Input("rotation loops need dim >= 2".into()));
            }
            let e = |i: usize| (0..*dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
            let a = rotation_loop(&e(0), &e(1), *turns, 1.0, 0.05, cfg.density)?;
            let mut buf = vec![];
            a.write_csv(&mut buf)?;
            write_atomic(&target, &buf)?;
        }
    }
    let r = GenResult { fixture: format!("{fixture:?}"), path: target.display().to_string() };
    finish(cfg, "gen", Verdict::Pass, r, rep)
}
