use std::fmt::Write;

use super::{ClassReport, ConfusionMatrix, RocCurve};

/// Text table plus one CSV per artifact. All outputs are byte-deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedReport {
    pub text: String,
    pub confusion_csv: String,
    pub report_csv: String,
    pub roc_csv: String,
}

pub fn render_report(
    report: &ClassReport,
    cm: &ConfusionMatrix,
    rocs: &[RocCurve],
) -> RenderedReport {
    RenderedReport {
        text: render_text(report, cm, rocs),
        confusion_csv: confusion_csv(cm),
        report_csv: report_csv(report),
        roc_csv: roc_csv(rocs, &cm.class_names),
    }
}

fn render_text(report: &ClassReport, cm: &ConfusionMatrix, rocs: &[RocCurve]) -> String {
    let w = report
        .classes
        .iter()
        .map(|c| c.name.len())
        .chain([12])
        .max()
        .unwrap_or(12);
    let mut s = String::new();
    writeln!(
        s,
        "{:>w$} {:>9} {:>9} {:>9} {:>9}",
        "", "precision", "recall", "f1-score", "support"
    )
    .unwrap();
    for c in &report.classes {
        let flag = if c.precision_undefined || c.recall_undefined {
            " *"
        } else {
            ""
        };
        writeln!(
            s,
            "{:>w$} {:>9.2} {:>9.2} {:>9.2} {:>9}{flag}",
            c.name, c.precision, c.recall, c.f1, c.support
        )
        .unwrap();
    }
    s.push('\n');
    writeln!(
        s,
        "{:>w$} {:>9} {:>9} {:>9.2} {:>9}",
        "accuracy", "", "", report.accuracy, report.total
    )
    .unwrap();
    for (label, a) in [
        ("macro avg", report.macro_avg),
        ("weighted avg", report.weighted_avg),
    ] {
        writeln!(
            s,
            "{label:>w$} {:>9.2} {:>9.2} {:>9.2} {:>9}",
            a.precision, a.recall, a.f1, report.total
        )
        .unwrap();
    }
    if report
        .classes
        .iter()
        .any(|c| c.precision_undefined || c.recall_undefined)
    {
        s.push_str("\n* undefined precision or recall reported as 0\n");
    }

    s.push_str("\nconfusion matrix (rows: true, columns: predicted)\n");
    write!(s, "{:>w$}", "").unwrap();
    for n in &cm.class_names {
        write!(s, " {n:>6}").unwrap();
    }
    s.push('\n');
    for (name, row) in cm.class_names.iter().zip(&cm.counts) {
        write!(s, "{name:>w$}").unwrap();
        for v in row {
            write!(s, " {v:>6}").unwrap();
        }
        s.push('\n');
    }

    if !rocs.is_empty() {
        s.push_str("\none-vs-rest ROC AUC\n");
        for r in rocs {
            let name = cm
                .class_names
                .get(r.class)
                .map(String::as_str)
                .unwrap_or("?");
            writeln!(s, "{name:>w$} {:>9.2}", r.auc).unwrap();
        }
    }
    s
}

pub fn confusion_csv(cm: &ConfusionMatrix) -> String {
    let mut s = String::from("true\\pred");
    for n in &cm.class_names {
        write!(s, ",{n}").unwrap();
    }
    s.push('\n');
    for (name, row) in cm.class_names.iter().zip(&cm.counts) {
        s.push_str(name);
        for v in row {
            write!(s, ",{v}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn report_csv(report: &ClassReport) -> String {
    let mut s = String::from("class,precision,recall,f1,support\n");
    for c in &report.classes {
        writeln!(
            s,
            "{},{:?},{:?},{:?},{}",
            c.name, c.precision, c.recall, c.f1, c.support
        )
        .unwrap();
    }
    for (label, a) in [
        ("macro avg", report.macro_avg),
        ("weighted avg", report.weighted_avg),
    ] {
        writeln!(
            s,
            "{label},{:?},{:?},{:?},{}",
            a.precision, a.recall, a.f1, report.total
        )
        .unwrap();
    }
    writeln!(s, "accuracy,,,{:?},{}", report.accuracy, report.total).unwrap();
    s
}

pub fn roc_csv(rocs: &[RocCurve], class_names: &[String]) -> String {
    let mut s = String::from("class,fpr,tpr,threshold\n");
    for r in rocs {
        let name = class_names.get(r.class).map(String::as_str).unwrap_or("?");
        for p in &r.points {
            writeln!(s, "{name},{:?},{:?},{:?}", p.fpr, p.tpr, p.threshold).unwrap();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{class_report, roc_curve};

    fn table1_like() -> (ClassReport, ConfusionMatrix) {
        let cm = ConfusionMatrix::from_counts(vec![
            vec![15, 0, 0, 0],
            vec![0, 12, 0, 1],
            vec![0, 0, 14, 0],
            vec![0, 0, 0, 8],
        ])
        .unwrap();
        (class_report(&cm).unwrap(), cm)
    }

    fn squash(line: &str) -> String {
        line.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn g0_row_reads_all_ones() {
        let (r, cm) = table1_like();
        let out = render_report(&r, &cm, &[]);
        let g0 = out
            .text
            .lines()
            .find(|l| l.trim_start().starts_with("g0"))
            .unwrap();
        assert!(squash(g0).starts_with("g0 1.00 1.00 1.00"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let (r, cm) = table1_like();
        let roc = roc_curve(&[0.9, 0.1, 0.8, 0.3], &[0, 1, 0, 1], 0).unwrap();
        let a = render_report(&r, &cm, std::slice::from_ref(&roc));
        let b = render_report(&r, &cm, &[roc]);
        assert_eq!(a, b);
        assert!(a
            .roc_csv
            .starts_with("class,fpr,tpr,threshold\ng0,0.0,0.0,inf\n"));
    }

    #[test]
    fn small_k() {
        let cm = ConfusionMatrix::from_counts(vec![vec![5, 0], vec![1, 4]]).unwrap();
        let r = class_report(&cm).unwrap();
        let out = render_report(&r, &cm, &[]);
        let rows = out.text.lines().take_while(|l| !l.is_empty()).count();
        assert_eq!(rows, 3);
        assert_eq!(out.confusion_csv, "true\\pred,g0,g1\ng0,5,0\ng1,1,4\n");
    }
}
