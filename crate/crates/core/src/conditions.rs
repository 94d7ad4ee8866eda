//! Parameter arithmetic and the condition batteries that decide whether a
//! decomposition of a complete multigraph can be enclosed.

use std::fmt;

use num_rational::Ratio;

use crate::decomp::Decomposition;
use crate::error::{Error, Result};
use crate::mgraph::Multigraph;

pub type Rational = Ratio<i64>;

/// Target parameters: enclose a decomposition of lambda*K_n into k colors in
/// a 2-edge-connected r-factorization of mu*K_m.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnclosureParams {
    pub n: usize,
    pub m: usize,
    pub lambda: u32,
    pub mu: u32,
    pub r: u32,
    pub k: usize,
    /// r(2n - m)/2, kept exact.
    pub p: Rational,
}

impl EnclosureParams {
    pub fn new(n: usize, m: usize, lambda: u32, mu: u32, r: u32, k: usize) -> Result<Self> {
        if n == 0 || m == 0 || lambda == 0 || mu == 0 || k == 0 {
            return Err(Error::InvalidParams(
                "n, m, lambda, mu and k must be positive".into(),
            ));
        }
        if mu < lambda {
            return Err(Error::InvalidParams(format!(
                "mu = {mu} is smaller than lambda = {lambda}"
            )));
        }
        if m < n {
            return Err(Error::InvalidParams(format!("m = {m} is smaller than n = {n}")));
        }
        if r < 2 {
            return Err(Error::InvalidParams(format!("r = {r} is below 2")));
        }
        let p = Rational::new(r as i64 * (2 * n as i64 - m as i64), 2);
        let params = EnclosureParams {
            n,
            m,
            lambda,
            mu,
            r,
            k,
            p,
        };
        if params.degree_count_holds() && !p.is_integer() {
            return Err(Error::Inconsistency(format!(
                "p = {p} is not an integer although rk = mu(m-1) and rm is even"
            )));
        }
        Ok(params)
    }

    /// rk = mu(m-1) and rm even: the degree counts of an r-factorization.
    pub fn degree_count_holds(&self) -> bool {
        self.r as u64 * self.k as u64 == self.mu as u64 * (self.m as u64 - 1)
            && (self.r as u64 * self.m as u64) % 2 == 0
    }

    /// p as an integer when it is one.
    pub fn p_integer(&self) -> Option<i64> {
        self.p.is_integer().then(|| self.p.to_integer())
    }

    /// Number of spare edges, (mu - lambda) * n(n-1)/2.
    pub fn spare_edges(&self) -> u64 {
        (self.mu - self.lambda) as u64 * pairs(self.n)
    }

    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(self.n, self.m, self.lambda, self.mu, self.r, k)
    }
}

pub(crate) fn pairs(n: usize) -> u64 {
    (n as u64 * n.saturating_sub(1) as u64) / 2
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition {
    pub name: String,
    pub holds: bool,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConditionReport {
    pub conditions: Vec<Condition>,
}

impl ConditionReport {
    fn push(&mut self, name: &str, holds: bool, reason: String) {
        self.conditions.push(Condition {
            name: name.to_string(),
            holds,
            reason,
        });
    }

    pub fn overall(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }

    pub fn get(&self, name: &str) -> Option<bool> {
        self.conditions
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.holds)
    }

    pub fn first_failure(&self) -> Option<&Condition> {
        self.conditions.iter().find(|c| !c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| !c.holds)
    }

    /// Error naming the first failing condition, if any.
    pub fn require(&self) -> Result<()> {
        match self.first_failure() {
            None => Ok(()),
            Some(c) => Err(Error::ConditionFailed {
                name: c.name.clone(),
                reason: c.reason.clone(),
            }),
        }
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.conditions {
            writeln!(
                f,
                "{:<6} {}  {}",
                c.name,
                if c.holds { "ok  " } else { "FAIL" },
                c.reason
            )?;
        }
        Ok(())
    }
}

fn check_base(d: &Decomposition, n: usize, mult: u32, params: &EnclosureParams) -> Result<()> {
    if d.base() != &Multigraph::complete(n, mult) {
        return Err(Error::BaseMismatch {
            expected: format!("{mult}K_{n}"),
        });
    }
    if d.k() != params.k {
        return Err(Error::ClassCountMismatch {
            expected: params.k,
            found: d.k(),
        });
    }
    Ok(())
}

fn degree_count_condition(report: &mut ConditionReport, name: &str, params: &EnclosureParams) {
    let rk = params.r as u64 * params.k as u64;
    let target = params.mu as u64 * (params.m as u64 - 1);
    let rm = params.r as u64 * params.m as u64;
    report.push(
        name,
        params.degree_count_holds(),
        format!("rk = {rk}, mu(m-1) = {target}, rm = {rm}"),
    );
}

fn admissibility_condition(report: &mut ConditionReport, name: &str, d: &Decomposition, r: u32) {
    match d.admissibility(r) {
        None => report.push(name, true, format!("{r}-admissible")),
        Some(v) => report.push(name, false, format!("not {r}-admissible: {v}")),
    }
}

/// sum over integers 0 <= i <= t of (t - i) |S_i|; zero when t <= 0.
fn deficiency_sum(d: &Decomposition, t: Rational) -> Rational {
    if t <= Rational::from_integer(0) {
        return Rational::from_integer(0);
    }
    let top = t.floor().to_integer();
    (0..=top)
        .map(|i| (t - Rational::from_integer(i)) * d.s_count(i as u32) as i64)
        .sum()
}

/// Conditions for a decomposition of mu*K_n itself to be enclosed in a
/// 2-edge-connected r-factorization of mu*K_m.
pub fn check_a_prime(a: &Decomposition, params: &EnclosureParams) -> Result<ConditionReport> {
    check_base(a, params.n, params.mu, params)?;
    let mut report = ConditionReport::default();
    degree_count_condition(&mut report, "A'1", params);
    admissibility_condition(&mut report, "A'2", a, params.r);
    let smallest = a.class_sizes().into_iter().min().unwrap_or(0);
    report.push(
        "A'3",
        Rational::from_integer(smallest as i64) >= params.p,
        format!("smallest class has {smallest} edges, p = {}", params.p),
    );
    Ok(report)
}

/// The battery for m >= 2n - 1.
pub fn check_b(g: &Decomposition, params: &EnclosureParams) -> Result<ConditionReport> {
    if params.m + 1 < 2 * params.n {
        return Err(Error::Precondition(format!(
            "the B conditions need m >= 2n-1 (m = {}, n = {})",
            params.m, params.n
        )));
    }
    check_base(g, params.n, params.lambda, params)?;
    let mut report = ConditionReport::default();
    degree_count_condition(&mut report, "B1", params);
    admissibility_condition(&mut report, "B2", g, params.r);
    let lhs = deficiency_sum(g, params.p);
    let rhs = params.spare_edges() as i64;
    report.push(
        "B3",
        lhs <= Rational::from_integer(rhs),
        format!("sum (p-i)|S_i| = {lhs} against (mu-lambda)n(n-1)/2 = {rhs}"),
    );
    Ok(report)
}

/// The battery for m = 2n - 2, where p = r.
pub fn check_c(g: &Decomposition, params: &EnclosureParams) -> Result<ConditionReport> {
    if params.m + 2 != 2 * params.n {
        return Err(Error::Precondition(format!(
            "the C conditions need m = 2n-2 (m = {}, n = {})",
            params.m, params.n
        )));
    }
    check_base(g, params.n, params.lambda, params)?;
    let mut report = ConditionReport::default();
    degree_count_condition(&mut report, "C1", params);
    admissibility_condition(&mut report, "C2", g, params.r);

    let r = params.r;
    let lhs = deficiency_sum(g, Rational::from_integer(r as i64));
    let rhs = params.spare_edges() as i64;
    report.push(
        "C3",
        lhs <= Rational::from_integer(rhs),
        format!("sum (r-i)|S_i| = {lhs} against (mu-lambda)n(n-1)/2 = {rhs}"),
    );

    let bound = (params.mu - params.lambda) as i64 * (pairs(params.n) as i64 - 1);
    let s0 = g.s_count(0) as i64;
    let mut worst: Option<(i64, usize, usize)> = None;
    for u in 0..params.n {
        for v in u + 1..params.n {
            let mut lhs = s0;
            for i in 1..r {
                lhs += g.s_uv_count(i, u, v)? as i64;
            }
            if worst.is_none_or(|(w, _, _)| lhs > w) {
                worst = Some((lhs, u, v));
            }
        }
    }
    match worst {
        Some((lhs, u, v)) => report.push(
            "C4",
            lhs <= bound,
            format!(
                "max over pairs of |S_0| + sum |S_i(u,v)| = {lhs} (at {{{u},{v}}}) against {bound}"
            ),
        ),
        None => report.push("C4", true, "no vertex pairs".into()),
    }
    Ok(report)
}

/// min{(mu-lambda)/(2mu), 2 - r(mu-lambda)/mu}, defined when 2mu > r(mu-lambda).
pub fn padding_constant(mu: u32, lambda: u32, r: u32) -> Result<Rational> {
    if mu < lambda || mu == 0 {
        return Err(Error::InvalidParams(format!(
            "need mu >= lambda and mu > 0 (mu = {mu}, lambda = {lambda})"
        )));
    }
    let diff = (mu - lambda) as i64;
    let mu = mu as i64;
    if 2 * mu <= r as i64 * diff {
        return Err(Error::Precondition(format!(
            "2mu = {} does not exceed r(mu-lambda) = {}",
            2 * mu,
            r as i64 * diff
        )));
    }
    let first = Rational::new(diff, 2 * mu);
    let second = Rational::from_integer(2) - Rational::new(r as i64 * diff, mu);
    Ok(first.min(second))
}

/// The hypotheses of the (r-1)-admissible sufficiency result for smaller m.
pub fn check_proper_padding(g: &Decomposition, params: &EnclosureParams) -> Result<ConditionReport> {
    if params.r < 3 {
        return Err(Error::Precondition(format!(
            "r must be at least 3 (r = {})",
            params.r
        )));
    }
    check_base(g, params.n, params.lambda, params)?;
    let mut report = ConditionReport::default();
    degree_count_condition(&mut report, "T1", params);

    let (mu, lambda, r) = (params.mu, params.lambda, params.r);
    let lhs = 2 * mu as i64;
    let rhs = r as i64 * (mu - lambda) as i64;
    report.push(
        "T2",
        lhs > rhs,
        format!("2mu = {lhs} against r(mu-lambda) = {rhs}"),
    );
    admissibility_condition(&mut report, "T3", g, r - 1);

    match padding_constant(mu, lambda, r) {
        Ok(c) => {
            let threshold = (Rational::from_integer(2) - c) * params.n as i64 + 1;
            report.push(
                "T4",
                Rational::from_integer(params.m as i64) >= threshold,
                format!("C = {c}, (2-C)n+1 = {threshold}, m = {}", params.m),
            );
        }
        Err(_) => report.push("T4", false, "constant C undefined since T2 fails".into()),
    }

    let need = (mu - lambda) as u64 * params.n as u64;
    report.push(
        "T5",
        params.k as u64 >= need,
        format!("k = {} against (mu-lambda)n = {need}", params.k),
    );
    Ok(report)
}

/// Which sufficiency argument covers the parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// mu = lambda: the decomposition is already of mu*K_n.
    Direct,
    /// m >= 2n - 1.
    B,
    /// m = 2n - 2 and 2(r-1) >= mu > lambda.
    C,
    /// r >= 3, any m, (r-1)-admissible input.
    Padding,
}

impl Regime {
    pub fn select(params: &EnclosureParams) -> Option<Regime> {
        let (n, m) = (params.n, params.m);
        if params.mu == params.lambda {
            return (m > n).then_some(Regime::Direct);
        }
        if m + 1 >= 2 * n {
            Some(Regime::B)
        } else if m + 2 == 2 * n && 2 * (params.r - 1) >= params.mu {
            Some(Regime::C)
        } else if params.r >= 3 {
            Some(Regime::Padding)
        } else {
            None
        }
    }

    pub fn battery(&self, g: &Decomposition, params: &EnclosureParams) -> Result<ConditionReport> {
        match self {
            Regime::Direct => check_a_prime(g, params),
            Regime::B => check_b(g, params),
            Regime::C => check_c(g, params),
            Regime::Padding => check_proper_padding(g, params),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Direct => "A'",
            Regime::B => "B",
            Regime::C => "C",
            Regime::Padding => "T",
        })
    }
}
