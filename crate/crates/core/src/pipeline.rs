//! End-to-end fusion of one visible/infrared pair, file I/O helpers and the
//! manifest-driven batch runner.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{error, info};

use crate::config::{ModalityConfig, PipelineConfig};
use crate::error::{Error, Result};
use crate::imgcodec::{
    decode, decode_map, decode_signed, encode_infrared, encode_visible, read_gray, read_rgb, write_png, RasterImage,
};
use crate::metrics::{compute_metrics, MetricReport, CSV_HEADER};
use crate::qaum::enhance;
use crate::qhbf::{run_qhbf, QhbfOutput};
use crate::qlrd::{run_qlvfl, QlvflOutput};
use crate::quat::QuaternionMatrix;

#[derive(Debug, Clone)]
pub struct FusionResult {
    pub fused: RasterImage,
    pub f: QuaternionMatrix,
    pub enhanced: QuaternionMatrix,
    pub visible: QlvflOutput,
    pub infrared: QlvflOutput,
    pub qhbf: QhbfOutput,
}

fn run_modality(l: &QuaternionMatrix, cfg: &ModalityConfig) -> Result<QlvflOutput> {
    run_qlvfl(l, &cfg.qls, &cfg.qlrd)
}

/// Encode, extract features per modality, inject details, fuse, decode.
pub fn fuse_images(vis: &RasterImage, ir: &RasterImage, cfg: &PipelineConfig) -> Result<FusionResult> {
    cfg.validate()?;
    if (vis.height(), vis.width()) != (ir.height(), ir.width()) {
        return Err(Error::DimensionMismatch(format!(
            "visible is {}x{}, infrared is {}x{}",
            vis.height(),
            vis.width(),
            ir.height(),
            ir.width()
        )));
    }
    let lv = encode_visible(vis)?;
    let lf = encode_infrared(ir)?;
    let visible = run_modality(&lv, &cfg.visible)?;
    let infrared = run_modality(&lf, &cfg.infrared)?;
    let enhanced = enhance(&visible.qls.i, &infrared.decomposition.d, &visible.decomposition.d, cfg.qaum)?;
    let qhbf = run_qhbf(&enhanced, &infrared.qls.i, &cfg.qhbf)?;
    let f = qhbf.f.clone();
    Ok(FusionResult {
        fused: decode(&f),
        f,
        enhanced,
        visible,
        infrared,
        qhbf,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn dump_modality(dir: &Path, tag: &str, out: &QlvflOutput) -> Result<()> {
    let g = &out.qls.g;
    let g_mag: Vec<f64> = g
        .x
        .as_slice()
        .iter()
        .zip(g.y.as_slice())
        .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
        .collect();
    let (rows, cols) = out.qls.i.shape();
    write_png(&decode(&out.qls.i), dir.join(format!("{tag}_lighting.png")))?;
    write_png(&decode(&out.qls.bright), dir.join(format!("{tag}_glow.png")))?;
    write_png(&decode_map(rows, cols, &g_mag), dir.join(format!("{tag}_gradient.png")))?;
    write_png(&decode(&out.decomposition.z), dir.join(format!("{tag}_structure.png")))?;
    write_png(&decode_signed(&out.decomposition.d), dir.join(format!("{tag}_detail.png")))?;
    write_png(&decode_signed(&out.decomposition.e), dir.join(format!("{tag}_residual.png")))?;

    let mut qls = String::from("iteration,mu2,rel_change,feasibility,objective\n");
    for t in &out.qls.trace {
        let _ = writeln!(qls, "{},{},{:e},{:e},{:e}", t.iteration, t.mu2, t.rel_change, t.feasibility, t.objective);
    }
    write_text(&dir.join(format!("{tag}_qls_trace.csv")), &qls)?;
    let mut qlrd = String::from("iteration,mu1,rel_change,feasibility,objective\n");
    for t in &out.decomposition.trace {
        let _ = writeln!(qlrd, "{},{},{:e},{:e},{:e}", t.iteration, t.mu1, t.rel_change, t.feasibility, t.objective);
    }
    write_text(&dir.join(format!("{tag}_qlrd_trace.csv")), &qlrd)
}

/// Write every intermediate layer and convergence trace.
pub fn dump_intermediates(dir: &Path, result: &FusionResult) -> Result<()> {
    ensure_dir(dir)?;
    dump_modality(dir, "vis", &result.visible)?;
    dump_modality(dir, "ir", &result.infrared)?;
    write_png(&decode(&result.enhanced), dir.join("enhanced.png"))?;
    let mut em = String::from("iteration,eps_s,eps_q,objective,inner_iterations,inner_residual\n");
    for t in &result.qhbf.trace {
        let _ = writeln!(
            em,
            "{},{:e},{:e},{:e},{},{:e}",
            t.iteration, t.eps_s, t.eps_q, t.objective, t.inner_iterations, t.inner_residual
        );
    }
    write_text(&dir.join("qhbf_trace.csv"), &em)
}

#[derive(Debug, Clone, Default)]
pub struct FuseOptions {
    pub dump_intermediates: bool,
    pub metrics: bool,
}

#[derive(Debug, Clone)]
pub struct FuseOutcome {
    pub fused_path: PathBuf,
    pub metrics: Option<MetricReport>,
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "image".to_string(), |s| s.to_string_lossy().into_owned())
}

fn metrics_csv(rows: &[(String, MetricReport)], with_mean: bool) -> String {
    let mut csv = format!("{CSV_HEADER}\n");
    for (id, r) in rows {
        csv.push_str(&r.csv_row(id));
        csv.push('\n');
    }
    if with_mean {
        let reports: Vec<MetricReport> = rows.iter().map(|(_, r)| *r).collect();
        if let Some(mean) = MetricReport::mean(&reports) {
            csv.push_str(&mean.csv_row("mean"));
            csv.push('\n');
        }
    }
    csv
}

/// Fuse one pair from disk into `out_dir/fused.png`.
pub fn fuse_files(vis: &Path, ir: &Path, out_dir: &Path, cfg: &PipelineConfig, opts: &FuseOptions) -> Result<FuseOutcome> {
    let v = read_rgb(vis)?;
    let i = read_gray(ir)?;
    let result = fuse_images(&v, &i, cfg)?;
    ensure_dir(out_dir)?;
    let fused_path = out_dir.join("fused.png");
    write_png(&result.fused, &fused_path)?;
    if opts.dump_intermediates {
        dump_intermediates(out_dir, &result)?;
    }
    let metrics = if opts.metrics {
        let report = compute_metrics(&result.fused, &v, &i)?;
        write_text(&out_dir.join("metrics.csv"), &metrics_csv(&[(stem(vis), report)], false))?;
        Some(report)
    } else {
        None
    };
    info!("wrote {}", fused_path.display());
    Ok(FuseOutcome { fused_path, metrics })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub visible: PathBuf,
    pub infrared: PathBuf,
}

/// Tab-separated `visible<TAB>infrared` lines; `#` comments and blank lines
/// are skipped and relative paths resolve against the manifest directory.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let (Some(v), Some(i), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Config(format!(
                "manifest line {}: expected `visible<TAB>infrared`",
                lineno + 1
            )));
        };
        let resolve = |p: &str| {
            let p = Path::new(p.trim());
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        out.push(ManifestEntry {
            visible: resolve(v),
            infrared: resolve(i),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub csv_path: PathBuf,
    pub rows: Vec<(String, MetricReport)>,
    pub failures: Vec<(ManifestEntry, String)>,
}

/// Fuse every manifest pair, write `<id>_fused.png` and `metrics.csv` with a mean row.
pub fn run_batch(manifest: &Path, out_dir: &Path, cfg: &PipelineConfig) -> Result<BatchOutcome> {
    let text = fs::read_to_string(manifest).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingInput(manifest.to_path_buf())
        } else {
            Error::Io {
                path: manifest.to_path_buf(),
                source,
            }
        }
    })?;
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));
    let entries = parse_manifest(&text, base)?;
    ensure_dir(out_dir)?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (k, entry) in entries.iter().enumerate() {
        let id = format!("{:04}_{}", k + 1, stem(&entry.visible));
        let attempt = (|| -> Result<MetricReport> {
            let v = read_rgb(&entry.visible)?;
            let i = read_gray(&entry.infrared)?;
            let result = fuse_images(&v, &i, cfg)?;
            write_png(&result.fused, out_dir.join(format!("{id}_fused.png")))?;
            compute_metrics(&result.fused, &v, &i)
        })();
        match attempt {
            Ok(r) => rows.push((id, r)),
            Err(e) => {
                error!("{id}: {e}");
                failures.push((entry.clone(), e.to_string()));
            }
        }
    }
    let csv_path = out_dir.join("metrics.csv");
    write_text(&csv_path, &metrics_csv(&rows, true))?;
    Ok(BatchOutcome {
        csv_path,
        rows,
        failures,
    })
}
