//! Single-mode PSPLib `.sm` files.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{ModelError, Project, Resource, Time};

/// Field values above this are rejected so that sums cannot overflow.
const MAX_VALUE: i64 = 1_000_000_000;
const MAX_JOBS: usize = 100_000;

/// The semantic content of an `.sm` file. Jobs are 0-based here; the file
/// numbers them from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPsplib {
    pub capacities: Vec<i64>,
    pub durations: Vec<Time>,
    /// `requests[job][resource]`
    pub requests: Vec<Vec<i64>>,
    pub successors: Vec<Vec<usize>>,
    /// The file's own horizon header, kept for rendering only.
    pub horizon: Option<Time>,
}

impl RawPsplib {
    pub fn jobs(&self) -> usize {
        self.durations.len()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("missing section {0}")]
    MissingSection(&'static str),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: `{field}` is not an integer")]
    NotInteger { line: usize, field: String },
    #[error("line {line}: successor {successor} of job {job} is out of range")]
    SuccessorOutOfRange { line: usize, job: usize, successor: i64 },
    #[error("line {line}: {message}")]
    Unsupported { line: usize, message: String },
}

struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            lines: text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect(),
            pos: 0,
        }
    }

    /// Moves past the line starting with `title`.
    fn seek(&mut self, title: &'static str) -> Result<usize, ParseError> {
        while let Some(&(no, l)) = self.lines.get(self.pos) {
            self.pos += 1;
            if l.trim_start().starts_with(title) {
                return Ok(no);
            }
        }
        Err(ParseError::MissingSection(title))
    }

    fn next_line(&mut self, section: &'static str) -> Result<(usize, &'a str), ParseError> {
        let l = self.lines.get(self.pos).copied().ok_or(ParseError::MissingSection(section))?;
        self.pos += 1;
        Ok(l)
    }

    /// Rows up to the next separator or blank line.
    fn rows(&mut self) -> Vec<(usize, &'a str)> {
        let mut out = Vec::new();
        while let Some(&(no, l)) = self.lines.get(self.pos) {
            let t = l.trim();
            if t.is_empty() || t.starts_with('*') {
                break;
            }
            out.push((no, l));
            self.pos += 1;
        }
        out
    }
}

fn ints(line: usize, text: &str) -> Result<Vec<i64>, ParseError> {
    text.split_whitespace()
        .map(|f| match f.parse::<i64>() {
            Ok(v) if v.abs() <= MAX_VALUE => Ok(v),
            Ok(_) => Err(ParseError::Malformed {
                line,
                message: format!("value {f} is too large"),
            }),
            Err(_) => Err(ParseError::NotInteger {
                line,
                field: f.to_string(),
            }),
        })
        .collect()
}

fn header_value(lines: &Lines<'_>, key: &str) -> Result<Option<(usize, i64)>, ParseError> {
    for &(no, l) in &lines.lines {
        let t = l.trim_start();
        if t.starts_with(key) {
            let Some((_, v)) = t.split_once(':') else {
                return Err(ParseError::Malformed {
                    line: no,
                    message: format!("expected `{key} : value`"),
                });
            };
            let v = v.split_whitespace().next().unwrap_or("");
            let n = ints(no, v)?;
            return match n.first() {
                Some(&x) => Ok(Some((no, x))),
                None => Err(ParseError::Malformed {
                    line: no,
                    message: format!("no value for `{key}`"),
                }),
            };
        }
    }
    Ok(None)
}

fn job_number(line: usize, v: i64, jobs: usize) -> Result<usize, ParseError> {
    if v < 1 || v as usize > jobs {
        return Err(ParseError::Malformed {
            line,
            message: format!("job number {v} outside 1..={jobs}"),
        });
    }
    Ok(v as usize - 1)
}

/// Parses an `.sm` file. Section order is fixed as in the PSPLib archive;
/// whitespace inside rows is free.
pub fn parse_sm(text: &str) -> Result<RawPsplib, ParseError> {
    let mut lines = Lines::new(text);
    let (jobs_line, jobs) = header_value(&lines, "jobs (incl. supersource/sink )")?
        .ok_or(ParseError::MissingSection("jobs (incl. supersource/sink )"))?;
    if jobs < 1 || jobs as usize > MAX_JOBS {
        return Err(ParseError::Malformed {
            line: jobs_line,
            message: format!("job count {jobs}"),
        });
    }
    let jobs = jobs as usize;
    for key in ["- nonrenewable", "- doubly constrained"] {
        if let Some((line, v)) = header_value(&lines, key)? {
            if v != 0 {
                return Err(ParseError::Unsupported {
                    line,
                    message: format!("{} resources", key.trim_start_matches("- ")),
                });
            }
        }
    }
    let renewable = header_value(&lines, "- renewable")?;
    let horizon = header_value(&lines, "horizon")?.map(|(_, h)| h);

    lines.seek("PRECEDENCE RELATIONS:")?;
    lines.next_line("PRECEDENCE RELATIONS:")?;
    let mut successors: Vec<Option<Vec<usize>>> = vec![None; jobs];
    for (no, row) in lines.rows() {
        let v = ints(no, row)?;
        if v.len() < 3 {
            return Err(ParseError::Malformed {
                line: no,
                message: "expected jobnr, #modes, #successors".into(),
            });
        }
        let job = job_number(no, v[0], jobs)?;
        if v[1] != 1 {
            return Err(ParseError::Unsupported {
                line: no,
                message: format!("job {} has {} modes", v[0], v[1]),
            });
        }
        if v[2] < 0 || v[2] as usize != v.len() - 3 {
            return Err(ParseError::Malformed {
                line: no,
                message: format!("job {} lists {} successors, expected {}", v[0], v.len() - 3, v[2]),
            });
        }
        let mut succ = Vec::with_capacity(v.len() - 3);
        for &s in &v[3..] {
            if s < 1 || s as usize > jobs {
                return Err(ParseError::SuccessorOutOfRange {
                    line: no,
                    job: job + 1,
                    successor: s,
                });
            }
            succ.push(s as usize - 1);
        }
        if successors[job].replace(succ).is_some() {
            return Err(ParseError::Malformed {
                line: no,
                message: format!("job {} listed twice", v[0]),
            });
        }
    }

    let section = lines.seek("REQUESTS/DURATIONS:")?;
    let (header_no, header) = lines.next_line("REQUESTS/DURATIONS:")?;
    let columns = header.split_whitespace().filter(|w| w.starts_with('R') || w.starts_with('N')).count();
    let (dash_no, dashes) = lines.next_line("REQUESTS/DURATIONS:")?;
    if !dashes.trim().starts_with('-') {
        return Err(ParseError::Malformed {
            line: dash_no,
            message: "expected a dashed separator".into(),
        });
    }
    let mut durations: Vec<Option<Time>> = vec![None; jobs];
    let mut requests: Vec<Vec<i64>> = vec![Vec::new(); jobs];
    let mut width = None;
    for (no, row) in lines.rows() {
        let v = ints(no, row)?;
        if v.len() < 3 {
            return Err(ParseError::Malformed {
                line: no,
                message: "expected jobnr, mode, duration".into(),
            });
        }
        let job = job_number(no, v[0], jobs)?;
        if v[1] != 1 {
            return Err(ParseError::Unsupported {
                line: no,
                message: format!("mode {} of job {}", v[1], v[0]),
            });
        }
        if v[2..].iter().any(|&x| x < 0) {
            return Err(ParseError::Malformed {
                line: no,
                message: "negative duration or request".into(),
            });
        }
        let w = v.len() - 3;
        if *width.get_or_insert(w) != w {
            return Err(ParseError::Malformed {
                line: no,
                message: format!("{w} requests, earlier rows have {}", width.unwrap_or(0)),
            });
        }
        if durations[job].replace(v[2]).is_some() {
            return Err(ParseError::Malformed {
                line: no,
                message: format!("job {} listed twice", v[0]),
            });
        }
        requests[job] = v[3..].to_vec();
    }
    let resources = width.unwrap_or(0);
    if columns != 0 && columns != resources {
        return Err(ParseError::Malformed {
            line: header_no,
            message: format!("{columns} resource columns but rows have {resources}"),
        });
    }
    if let Some((line, r)) = renewable {
        if r as usize != resources {
            return Err(ParseError::Malformed {
                line,
                message: format!("header declares {r} renewable resources, rows have {resources}"),
            });
        }
    }

    lines.seek("RESOURCEAVAILABILITIES:")?;
    lines.next_line("RESOURCEAVAILABILITIES:")?;
    let (cap_no, cap_row) = lines.next_line("RESOURCEAVAILABILITIES:")?;
    let capacities = ints(cap_no, cap_row)?;
    if capacities.len() != resources {
        return Err(ParseError::Malformed {
            line: cap_no,
            message: format!("{} availabilities for {resources} resources", capacities.len()),
        });
    }
    if capacities.iter().any(|&c| c < 0) {
        return Err(ParseError::Malformed {
            line: cap_no,
            message: "negative availability".into(),
        });
    }

    let missing = |what: &str, i: usize| ParseError::Malformed {
        line: section,
        message: format!("job {} has no {what} row", i + 1),
    };
    let durations = durations
        .into_iter()
        .enumerate()
        .map(|(i, d)| d.ok_or_else(|| missing("duration", i)))
        .collect::<Result<Vec<_>, _>>()?;
    let successors = successors
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| missing("precedence", i)))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(RawPsplib {
        capacities,
        durations,
        requests,
        successors,
        horizon,
    })
}

/// Writes `raw` in the archive layout.
pub fn render_sm(raw: &RawPsplib) -> String {
    let stars = "*".repeat(72);
    let k = raw.capacities.len();
    let mut s = String::new();
    let _ = writeln!(s, "{stars}");
    let _ = writeln!(s, "projects                      :  1");
    let _ = writeln!(s, "jobs (incl. supersource/sink ):  {}", raw.jobs());
    if let Some(h) = raw.horizon {
        let _ = writeln!(s, "horizon                       :  {h}");
    }
    let _ = writeln!(s, "RESOURCES");
    let _ = writeln!(s, "  - renewable                 :  {k}   R");
    let _ = writeln!(s, "  - nonrenewable              :  0   N");
    let _ = writeln!(s, "  - doubly constrained        :  0   D");
    let _ = writeln!(s, "{stars}");
    let _ = writeln!(s, "PRECEDENCE RELATIONS:");
    let _ = writeln!(s, "jobnr.    #modes  #successors   successors");
    for (j, succ) in raw.successors.iter().enumerate() {
        let _ = write!(s, "{:>4}{:>9}{:>11}     ", j + 1, 1, succ.len());
        for x in succ {
            let _ = write!(s, "{:>4}", x + 1);
        }
        s.push('\n');
    }
    let _ = writeln!(s, "{stars}");
    let _ = writeln!(s, "REQUESTS/DURATIONS:");
    let _ = write!(s, "jobnr. mode duration");
    for r in 0..k {
        let _ = write!(s, "  R{:>2}", r + 1);
    }
    s.push('\n');
    let _ = writeln!(s, "{}", "-".repeat(72));
    for (j, (d, req)) in raw.durations.iter().zip(&raw.requests).enumerate() {
        let _ = write!(s, "{:>3}{:>7}{:>6}   ", j + 1, 1, d);
        for r in req {
            let _ = write!(s, "{r:>5}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "{stars}");
    let _ = writeln!(s, "RESOURCEAVAILABILITIES:");
    for r in 0..k {
        let _ = write!(s, "  R{:>2}", r + 1);
    }
    s.push('\n');
    for c in &raw.capacities {
        let _ = write!(s, "{c:>5}");
    }
    s.push('\n');
    let _ = writeln!(s, "{stars}");
    s
}

/// One start variable per job, one cumulative resource per column and the
/// successor lists as precedences. Without `horizon` the sum of all
/// durations is used; windows are `[0, H - p]`.
pub fn to_project(raw: &RawPsplib, name: &str, horizon: Option<Time>) -> Result<Project, ModelError> {
    let h = horizon.unwrap_or_else(|| raw.durations.iter().sum());
    let resources = raw
        .capacities
        .iter()
        .enumerate()
        .map(|(k, &capacity)| Resource {
            capacity,
            usages: raw.requests.iter().map(|r| r.get(k).copied().unwrap_or(0)).collect(),
        })
        .collect();
    let precedences = raw
        .successors
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
        .collect();
    let windows = raw.durations.iter().map(|&p| (0, h - p)).collect();
    Project::new(name, raw.durations.clone(), resources, precedences, windows, h)
}

/// Five activities A..E on one resource of capacity 4 with `B << D`,
/// `C << E` and deadline 10.
pub fn example1() -> Project {
    let durations = vec![3, 3, 2, 4, 1];
    let usages = vec![2, 2, 3, 2, 1];
    let horizon = 10;
    let windows = durations.iter().map(|&p| (0, horizon - p)).collect();
    Project::new(
        "example1",
        durations,
        vec![Resource { capacity: 4, usages }],
        vec![(1, 3), (2, 4)],
        windows,
        horizon,
    )
    .expect("example instance is valid")
}
