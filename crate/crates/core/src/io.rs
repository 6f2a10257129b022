//! Plain-text file formats: datasets and models as ±1 token grids with a
//! one-line header, variational states as full-precision λ grids, and
//! training traces as CSV. Writers go through a temp file and rename so a
//! failed run never leaves a partial output behind.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::{Dataset, RbmModel};
use crate::train::TrainTrace;
use crate::variational::VariationalState;

/// Write `content` atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into())
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn spin_token(x: f64) -> &'static str {
    if x > 0.0 {
        "+1"
    } else {
        "-1"
    }
}

fn parse_spin(tok: &str) -> Result<f64> {
    match tok {
        "+1" | "1" => Ok(1.0),
        "-1" => Ok(-1.0),
        other => Err(Error::Parse(format!("expected ±1 token, got '{other}'"))),
    }
}

fn header_fields<'a>(line: &'a str, tag: &str) -> Result<Vec<(&'a str, &'a str)>> {
    let rest = line
        .strip_prefix(&format!("# {tag}"))
        .ok_or_else(|| Error::Parse(format!("missing '# {tag}' header in '{line}'")))?;
    rest.split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field '{kv}'")))
        })
        .collect()
}

fn header_usize(fields: &[(&str, &str)], key: &str) -> Result<usize> {
    let v = fields
        .iter()
        .find(|(k, _)| *k == key)
        .ok_or_else(|| Error::Parse(format!("header missing {key}=")))?
        .1;
    v.parse()
        .map_err(|_| Error::Parse(format!("bad {key} value '{v}'")))
}

fn header_f64(fields: &[(&str, &str)], key: &str) -> Result<f64> {
    let v = fields
        .iter()
        .find(|(k, _)| *k == key)
        .ok_or_else(|| Error::Parse(format!("header missing {key}=")))?
        .1;
    v.parse()
        .map_err(|_| Error::Parse(format!("bad {key} value '{v}'")))
}

fn token_grid(body: &[&str], rows: usize, cols: usize, what: &str) -> Result<Array2<f64>> {
    if body.len() != rows {
        return Err(Error::Parse(format!(
            "{what}: expected {rows} rows, found {}",
            body.len()
        )));
    }
    let mut grid = Array2::zeros((rows, cols));
    for (r, line) in body.iter().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != cols {
            return Err(Error::Parse(format!(
                "{what}: row {r} has {} tokens, expected {cols}",
                toks.len()
            )));
        }
        for (c, tok) in toks.iter().enumerate() {
            grid[(r, c)] = parse_spin(tok)?;
        }
    }
    Ok(grid)
}

pub fn dataset_to_string(data: &Dataset) -> String {
    let mut out = format!(
        "# binrbm-dataset N={} D={}\n",
        data.num_visible(),
        data.len()
    );
    for row in data.samples.rows() {
        let line: Vec<&str> = row.iter().map(|&x| spin_token(x)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn dataset_from_str(text: &str) -> Result<Dataset> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.is_empty() {
        return Err(Error::Parse("empty dataset file".into()));
    }
    let fields = header_fields(lines[0], "binrbm-dataset")?;
    let n = header_usize(&fields, "N")?;
    let d = header_usize(&fields, "D")?;
    let grid = token_grid(&lines[1..], d, n, "dataset")?;
    Dataset::new(grid)
}

pub fn model_to_string(model: &RbmModel) -> String {
    let mut out = format!(
        "# binrbm-model M={} N={} beta={}\n",
        model.num_hidden(),
        model.num_visible(),
        model.beta
    );
    for row in model.weights.rows() {
        let line: Vec<&str> = row.iter().map(|&x| spin_token(x)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn model_from_str(text: &str) -> Result<RbmModel> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.is_empty() {
        return Err(Error::Parse("empty model file".into()));
    }
    let fields = header_fields(lines[0], "binrbm-model")?;
    let m = header_usize(&fields, "M")?;
    let n = header_usize(&fields, "N")?;
    let beta = header_f64(&fields, "beta")?;
    let grid = token_grid(&lines[1..], m, n, "model")?;
    RbmModel::binary(grid, beta)
}

pub fn vstate_to_string(state: &VariationalState) -> String {
    let (m, n) = state.dim();
    let mut out = format!("# binrbm-vstate M={m} N={n}\n");
    for row in state.lambda().rows() {
        let line: Vec<String> = row.iter().map(|x| format!("{x:.17e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn vstate_from_str(text: &str) -> Result<VariationalState> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.is_empty() {
        return Err(Error::Parse("empty vstate file".into()));
    }
    let fields = header_fields(lines[0], "binrbm-vstate")?;
    let m = header_usize(&fields, "M")?;
    let n = header_usize(&fields, "N")?;
    let body = &lines[1..];
    if body.len() != m {
        return Err(Error::Parse(format!(
            "vstate: expected {m} rows, found {}",
            body.len()
        )));
    }
    let mut lambda = Array2::zeros((m, n));
    for (r, line) in body.iter().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != n {
            return Err(Error::Parse(format!(
                "vstate: row {r} has {} values, expected {n}",
                toks.len()
            )));
        }
        for (c, tok) in toks.iter().enumerate() {
            lambda[(r, c)] = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad λ value '{tok}'")))?;
        }
    }
    Ok(VariationalState::from_lambda(lambda))
}

pub fn trace_to_csv(trace: &TrainTrace) -> String {
    let mut out =
        String::from("epoch,elbo,overlap,clip_events,max_abs_lambda,max_abs_eta,mp_failures,wall_ms\n");
    for r in &trace.rows {
        out.push_str(&format!(
            "{},{:.9e},{:.9e},{},{:.9e},{:.9e},{},{:.9e}\n",
            r.epoch, r.elbo, r.overlap, r.clip_events, r.max_abs_lambda, r.max_abs_eta,
            r.mp_failures, r.wall_ms
        ));
    }
    out
}

/// Diagnostic dump of a message state, same numeric format as model files.
pub fn message_state_to_string(state: &crate::msgpass::MessageState) -> String {
    let (m, n) = state.u_h2v.dim();
    let mut out = format!(
        "# binrbm-messages M={m} N={n} converged={} iterations={} residual={:.9e}\n",
        state.converged, state.iterations, state.residual
    );
    for row in state.m_v2h.rows() {
        let line: Vec<String> = row.iter().map(|x| format!("{x:.17e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    for row in state.u_h2v.rows() {
        let line: Vec<String> = row.iter().map(|x| format!("{x:.17e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_teacher_student;
    use ndarray::array;

    #[test]
    fn dataset_round_trip() {
        let (_, data) = generate_teacher_student(5, 2, 7, 1.0, 2).unwrap();
        let text = dataset_to_string(&data);
        assert!(text.starts_with("# binrbm-dataset N=5 D=7\n"));
        let back = dataset_from_str(&text).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn model_round_trip() {
        let (teacher, _) = generate_teacher_student(4, 3, 1, 0.75, 9).unwrap();
        let text = model_to_string(&teacher);
        assert!(text.starts_with("# binrbm-model M=3 N=4 beta=0.75\n"));
        let back = model_from_str(&text).unwrap();
        assert_eq!(back.weights, teacher.weights);
        assert_eq!(back.beta, teacher.beta);
    }

    #[test]
    fn vstate_round_trip_is_exact() {
        let state = VariationalState::from_lambda(array![
            [0.123456789012345678, -3.0],
            [1e-12, 7.5]
        ]);
        let back = vstate_from_str(&vstate_to_string(&state)).unwrap();
        for (a, b) in back.lambda().iter().zip(state.lambda().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn parse_errors_are_reported() {
        assert!(dataset_from_str("").is_err());
        assert!(dataset_from_str("# binrbm-dataset N=2 D=1\n+1 0\n").is_err());
        assert!(dataset_from_str("# binrbm-dataset N=2 D=2\n+1 -1\n").is_err());
        assert!(model_from_str("# binrbm-model M=1 N=1\n+1\n").is_err()); // no beta
        assert!(vstate_from_str("# binrbm-vstate M=1 N=2\n0.5\n").is_err());
    }

    #[test]
    fn atomic_write_creates_file() {
        let dir = std::env::temp_dir().join("binrbm-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("data.txt");
        write_atomic(&path, "hello\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "hello\n");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
