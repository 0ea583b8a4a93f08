use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Respondents x questions with missing cells, survey weights, survey year and
/// categorical group labels. Stored column-friendly: one flat value buffer,
/// one vector per per-respondent attribute.
#[derive(Clone, Debug, PartialEq)]
pub struct SurveyDataset<T> {
    questions: Vec<String>,
    values: Vec<Option<T>>,
    weights: Vec<T>,
    years: Vec<i32>,
    group_vars: Vec<String>,
    labels: Vec<Vec<Option<String>>>,
}

impl<T: Scalar> SurveyDataset<T> {
    pub fn new(questions: Vec<String>) -> Self {
        Self::with_group_vars(questions, Vec::new())
    }

    pub fn with_group_vars(questions: Vec<String>, group_vars: Vec<String>) -> Self {
        let labels = vec![Vec::new(); group_vars.len()];
        SurveyDataset { questions, values: Vec::new(), weights: Vec::new(), years: Vec::new(), group_vars, labels }
    }

    /// Unit-weight, single-year dataset from complete rows; questions are named `q0, q1, ...`.
    pub fn from_complete(rows: &[Vec<T>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let mut d = Self::new((0..p).map(|j| format!("q{j}")).collect());
        for r in rows {
            let vals: Vec<Option<T>> = r.iter().copied().map(Some).collect();
            d.push_row(&vals, T::one(), 0, &[])?;
        }
        Ok(d)
    }

    pub fn push_row(&mut self, values: &[Option<T>], weight: T, year: i32, labels: &[Option<&str>]) -> Result<()> {
        let p = self.questions.len();
        if values.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: values.len() });
        }
        if labels.len() != self.group_vars.len() {
            return Err(Error::DimensionMismatch { expected: self.group_vars.len(), got: labels.len() });
        }
        let row = self.weights.len();
        if !(weight.is_finite() && weight > T::zero()) {
            return Err(Error::InvalidWeight { row, weight: weight.as_f64() });
        }
        if let Some(col) = values.iter().position(|v| v.is_some_and(|x| !x.is_finite())) {
            return Err(Error::NonFinite { row, col });
        }
        self.values.extend_from_slice(values);
        self.weights.push(weight);
        self.years.push(year);
        for (col, l) in self.labels.iter_mut().zip(labels) {
            col.push(l.map(str::to_string));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn p(&self) -> usize {
        self.questions.len()
    }

    pub fn questions(&self) -> &[String] {
        &self.questions
    }

    pub fn value(&self, row: usize, question: usize) -> Option<T> {
        self.values[row * self.p() + question]
    }

    pub fn row(&self, row: usize) -> &[Option<T>] {
        let p = self.p();
        &self.values[row * p..(row + 1) * p]
    }

    pub fn weight(&self, row: usize) -> T {
        self.weights[row]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn year(&self, row: usize) -> i32 {
        self.years[row]
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn group_vars(&self) -> &[String] {
        &self.group_vars
    }

    pub fn group_labels(&self, var: &str) -> Option<&[Option<String>]> {
        self.group_vars.iter().position(|g| g == var).map(|i| self.labels[i].as_slice())
    }

    /// Rows at `rows`, in order; repeated indices are repeated rows.
    pub fn subset(&self, rows: &[usize]) -> Self {
        let p = self.p();
        let mut values = Vec::with_capacity(rows.len() * p);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        SurveyDataset {
            questions: self.questions.clone(),
            values,
            weights: rows.iter().map(|&r| self.weights[r]).collect(),
            years: rows.iter().map(|&r| self.years[r]).collect(),
            group_vars: self.group_vars.clone(),
            labels: self.labels.iter().map(|col| rows.iter().map(|&r| col[r].clone()).collect()).collect(),
        }
    }

    /// Keeps only the question columns at `cols`, in order.
    pub fn select_questions(&self, cols: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.n() * cols.len());
        for r in 0..self.n() {
            let row = self.row(r);
            values.extend(cols.iter().map(|&c| row[c]));
        }
        SurveyDataset {
            questions: cols.iter().map(|&c| self.questions[c].clone()).collect(),
            values,
            weights: self.weights.clone(),
            years: self.years.clone(),
            group_vars: self.group_vars.clone(),
            labels: self.labels.clone(),
        }
    }

    /// Multiplies every weight by `alpha`.
    pub fn rescale_weights(&mut self, alpha: T) -> Result<()> {
        if !(alpha.is_finite() && alpha > T::zero()) {
            return Err(Error::InvalidArgument(format!("weight scale {alpha} must be positive")));
        }
        self.weights.iter_mut().for_each(|w| *w *= alpha);
        Ok(())
    }

    /// Respondents with a response to question `j`.
    pub fn responses(&self, j: usize) -> usize {
        (0..self.n()).filter(|&r| self.value(r, j).is_some()).count()
    }

    /// Kish effective sample size `(sum w)^2 / sum w^2`.
    pub fn kish_n_eff(&self) -> T {
        let s: T = self.weights.iter().copied().sum();
        let s2: T = self.weights.iter().map(|&w| w * w).sum();
        if s2 == T::zero() {
            T::zero()
        } else {
            s * s / s2
        }
    }
}
