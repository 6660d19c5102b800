use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use cvsteer::steering::{Direction, MonogamyReport, SweepRow};

/// Environment variable naming the directory for relative output paths.
pub const OUT_DIR_ENV: &str = "CVSTEER_OUT_DIR";

pub const SCHEMA_VERSION: u32 = 1;

/// `%.12g`-style rendering: 12 significant digits, trailing zeros dropped.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn sweep_header() -> String {
    let mut cols = vec!["eta".to_string()];
    cols.extend(Direction::ALL.iter().map(|d| d.column()));
    cols.extend(MonogamyReport::COLUMNS.iter().map(|c| c.to_string()));
    cols.join(",")
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = sweep_header();
    out.push('\n');
    for row in rows {
        let mut fields = vec![sig12(row.eta)];
        fields.extend(row.steering.values().iter().map(|&v| sig12(v)));
        fields.extend(row.monogamy.residuals.iter().map(|&v| sig12(v)));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Writes `contents` to `path` via a sibling temporary file and a rename,
/// or to stdout when no path is given.
pub fn emit(path: Option<&Path>, contents: &str) -> io::Result<()> {
    match path {
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            stdout.flush()
        }
        Some(p) => write_atomic(&resolve(p), contents.as_bytes()),
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
