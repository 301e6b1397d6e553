//! Report tables: binned pass rates against drill grade, per-student scheme
//! rows, and a JSON summary of fits and AUCs.

use super::compare::{SchemeComparison, StudentRow};
use super::logistic::{fit_pass_probability, LogisticFit};
use super::AnalyticsError;
use crate::allocation::StudentId;
use crate::content::LectureId;
use crate::grading::{compute_grade, AnswerHistory, AnswerOutcome, GradePolicy};
use crate::sync::ExportRow;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::io;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("export line {line}: {source}")]
    Export { line: usize, source: serde_json::Error },
    #[error("duplicate student `{0}` in exam file")]
    DuplicateStudent(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PassRateBin {
    pub grade_lo: f64,
    pub grade_hi: f64,
    pub n: usize,
    pub passed: usize,
    pub rate: Option<f64>,
}

/// Bins `[0, 10]` into `bins` equal intervals; the last bin is closed.
pub fn pass_rate_table(points: &[(f64, bool)], bins: usize) -> Vec<PassRateBin> {
    let width = 10.0 / bins as f64;
    let mut out: Vec<PassRateBin> = (0..bins)
        .map(|i| PassRateBin {
            grade_lo: i as f64 * width,
            grade_hi: (i + 1) as f64 * width,
            n: 0,
            passed: 0,
            rate: None,
        })
        .collect();
    for &(g, passed) in points {
        let i = ((g / width).floor().max(0.0) as usize).min(bins - 1);
        out[i].n += 1;
        out[i].passed += passed as usize;
    }
    for b in &mut out {
        b.rate = (b.n > 0).then(|| b.passed as f64 / b.n as f64);
    }
    out
}

/// Logistic fit as reported; separation is reported, not fatal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FitSummary {
    pub beta0: f64,
    pub beta1: f64,
    pub converged: bool,
    pub iterations: usize,
    pub separated: bool,
    pub midpoint: Option<f64>,
}

impl From<LogisticFit> for FitSummary {
    fn from(f: LogisticFit) -> Self {
        FitSummary {
            beta0: f.beta0,
            beta1: f.beta1,
            converged: f.converged,
            iterations: f.iterations,
            separated: false,
            midpoint: f.midpoint(),
        }
    }
}

/// Fits pass probability; under complete separation returns the last
/// iterate, whose midpoint still locates the separating grade.
pub fn summarize_fit(points: &[(f64, bool)]) -> Result<FitSummary, AnalyticsError> {
    match fit_pass_probability(points) {
        Ok(f) => Ok(f.into()),
        Err(AnalyticsError::CompleteSeparation { beta0, beta1, iterations }) => Ok(FitSummary {
            beta0,
            beta1,
            converged: false,
            iterations,
            separated: true,
            midpoint: (beta1 != 0.0).then(|| -beta0 / beta1),
        }),
        Err(e) => Err(e),
    }
}

pub fn write_pass_rate_csv<W: io::Write>(w: W, bins: &[PassRateBin]) -> Result<(), ReportError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["grade_lo", "grade_hi", "n", "passed", "rate"])?;
    for b in bins {
        wr.write_record([
            format!("{:.2}", b.grade_lo),
            format!("{:.2}", b.grade_hi),
            b.n.to_string(),
            b.passed.to_string(),
            b.rate.map(|r| format!("{r:.6}")).unwrap_or_default(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_student_rows_csv<W: io::Write>(w: W, rows: &[StudentRow]) -> Result<(), ReportError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["scheme", "rep", "student", "guesser", "theta0", "final_theta", "mastered", "grade"])?;
    for r in rows {
        wr.write_record([
            r.scheme.clone(),
            r.rep.to_string(),
            r.student.to_string(),
            r.guesser.to_string(),
            format!("{:.6}", r.theta0),
            format!("{:.6}", r.final_theta),
            r.mastered.to_string(),
            format!("{:.6}", r.grade),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SchemeSummary {
    pub scheme: String,
    pub auc_mean: f64,
    pub auc_se: f64,
    pub auc_per_rep: Vec<f64>,
    pub fit: Option<FitSummary>,
    pub fit_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimulationSummary {
    pub students: usize,
    pub reps: usize,
    pub answers: usize,
    pub seed: u64,
    pub schemes: Vec<SchemeSummary>,
}

/// Per-scheme AUC plus a logistic fit of mastery against final grade.
pub fn summarize_comparison(cmp: &SchemeComparison, students: usize, reps: usize, answers: usize, seed: u64) -> SimulationSummary {
    let schemes = cmp
        .schemes
        .iter()
        .map(|s| {
            let points: Vec<(f64, bool)> = cmp
                .rows
                .iter()
                .filter(|r| r.scheme == s.scheme)
                .map(|r| (r.grade, r.mastered))
                .collect();
            let (fit, fit_error) = match summarize_fit(&points) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SchemeSummary {
                scheme: s.scheme.clone(),
                auc_mean: s.auc_mean,
                auc_se: s.auc_se,
                auc_per_rep: s.auc_per_rep.clone(),
                fit,
                fit_error,
            }
        })
        .collect();
    SimulationSummary {
        students,
        reps,
        answers,
        seed,
        schemes,
    }
}

pub fn parse_export(ndjson: &str) -> Result<Vec<ExportRow>, ReportError> {
    ndjson
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|source| ReportError::Export { line: i + 1, source }))
        .collect()
}

/// Overall drill grade per student: the mean over lectures of each
/// lecture's grade, recomputed from exported answers in seq order.
pub fn drill_grades(rows: &[ExportRow], policy: &GradePolicy) -> BTreeMap<StudentId, f64> {
    let mut per: BTreeMap<(StudentId, LectureId), Vec<&ExportRow>> = BTreeMap::new();
    for r in rows {
        per.entry((r.student.clone(), r.lecture.clone())).or_default().push(r);
    }
    let mut sums: BTreeMap<StudentId, (f64, usize)> = BTreeMap::new();
    for ((student, _), mut answers) in per {
        answers.sort_by_key(|r| r.seq);
        let history: AnswerHistory = answers
            .iter()
            .map(|r| AnswerOutcome::new(r.correct, r.timed_out, r.time_taken))
            .collect();
        let e = sums.entry(student).or_insert((0.0, 0));
        e.0 += compute_grade(&history, policy).value();
        e.1 += 1;
    }
    sums.into_iter().map(|(s, (sum, n))| (s, sum / n as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExamRow {
    pub student_id: String,
    pub exam_grade: f64,
    pub passed: bool,
}

pub fn read_exam_csv<R: io::Read>(r: R) -> Result<Vec<ExamRow>, ReportError> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for row in rd.deserialize() {
        let row: ExamRow = row?;
        if !seen.insert(row.student_id.clone()) {
            return Err(ReportError::DuplicateStudent(row.student_id));
        }
        out.push(row);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExamReport {
    pub matched: usize,
    pub unmatched_drill: Vec<String>,
    pub unmatched_exam: Vec<String>,
    pub bins: Vec<PassRateBin>,
    pub fit: FitSummary,
}

/// Joins drill grades to exam outcomes and fits pass probability.
pub fn exam_report(grades: &BTreeMap<StudentId, f64>, exam: &[ExamRow], bins: usize) -> Result<ExamReport, ReportError> {
    let by_id: HashMap<&str, &ExamRow> = exam.iter().map(|e| (e.student_id.as_str(), e)).collect();
    let mut points = Vec::new();
    let mut unmatched_drill = Vec::new();
    for (s, g) in grades {
        match by_id.get(s.as_str()) {
            Some(e) => points.push((*g, e.passed)),
            None => unmatched_drill.push(s.to_string()),
        }
    }
    let mut unmatched_exam: Vec<String> = exam
        .iter()
        .filter(|e| !grades.contains_key(&StudentId::from(e.student_id.as_str())))
        .map(|e| e.student_id.clone())
        .collect();
    unmatched_exam.sort();
    if points.is_empty() {
        return Err(AnalyticsError::DegenerateInput("no students matched between export and exam file".into()).into());
    }
    let fit = summarize_fit(&points)?;
    Ok(ExamReport {
        matched: points.len(),
        unmatched_drill,
        unmatched_exam,
        bins: pass_rate_table(&points, bins),
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binning() {
        let pts = [(0.0, false), (0.99, true), (5.0, true), (10.0, true), (9.99, false)];
        let t = pass_rate_table(&pts, 10);
        assert_eq!(t.len(), 10);
        assert_eq!((t[0].n, t[0].passed), (2, 1));
        assert_eq!(t[0].rate, Some(0.5));
        assert_eq!(t[5].n, 1);
        assert_eq!((t[9].n, t[9].passed), (2, 1));
        assert_eq!(t[3].rate, None);
    }

    #[test]
    fn exam_csv_duplicates_rejected() {
        let csv = "studentId,examGrade,passed\na,7.5,true\nb,3,false\na,8,true\n";
        assert!(matches!(read_exam_csv(csv.as_bytes()), Err(ReportError::DuplicateStudent(s)) if s == "a"));
        let ok = read_exam_csv("studentId,examGrade,passed\na, 7.5 ,true\n".as_bytes()).unwrap();
        assert_eq!(ok[0].exam_grade, 7.5);
    }

    #[test]
    fn empty_join_is_degenerate() {
        let err = exam_report(&BTreeMap::new(), &[], 10).unwrap_err();
        assert!(matches!(err, ReportError::Analytics(AnalyticsError::DegenerateInput(_))));
    }

    #[test]
    fn export_parse_errors_have_line_numbers() {
        let err = parse_export("\n{oops}\n").unwrap_err();
        assert!(matches!(err, ReportError::Export { line: 2, .. }));
    }

    #[test]
    fn csv_output_shape() {
        let mut buf = Vec::new();
        write_pass_rate_csv(&mut buf, &pass_rate_table(&[(1.0, true), (2.0, false)], 2)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "grade_lo,grade_hi,n,passed,rate\n0.00,5.00,2,1,0.500000\n5.00,10.00,0,0,\n");
    }
}
