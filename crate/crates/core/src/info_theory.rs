//! Exact information quantities on small discrete systems `Y -> G -> (Z, S)`
//! and randomized checks of the sufficiency/necessity results for
//! explanations of representations.
//!
//! Everything is computed by enumerating the joint distribution, in nats.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for inequalities between information quantities.
pub const INEQUALITY_TOL: f64 = 1e-9;
/// Tolerance for exact identities and structural zeros.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Posterior rows closer than this (max-norm) share a sufficient class.
pub const POSTERIOR_TIE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variable {
    Y,
    G,
    Z,
    S,
    /// The nuisance coordinate of `G`; only defined for systems built with one.
    GN,
}

impl Variable {
    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Cardinalities {
    pub y: usize,
    pub g: usize,
    pub z: usize,
    pub s: usize,
}

impl Default for Cardinalities {
    fn default() -> Self {
        Cardinalities {
            y: 2,
            g: 6,
            z: 4,
            s: 4,
        }
    }
}

/// `G = (signal, nuisance)` encoded as `g = signal * nuisance_card + nuisance`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Nuisance {
    pub signal_card: usize,
    pub nuisance_card: usize,
}

/// `p(y) p(g|y) p(z|g) p(s|g)`, every factor stored as row-stochastic tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteJoint {
    pub p_y: Vec<f64>,
    pub p_g_given_y: Vec<Vec<f64>>,
    pub p_z_given_g: Vec<Vec<f64>>,
    pub p_s_given_g: Vec<Vec<f64>>,
    pub nuisance: Option<Nuisance>,
}

fn check_rows(name: &str, rows: &[Vec<f64>], expected_rows: usize) -> Result<usize> {
    if rows.len() != expected_rows || rows.is_empty() {
        return Err(Error::invalid(format!(
            "{name} needs {expected_rows} rows, got {}",
            rows.len()
        )));
    }
    let width = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width || width == 0 {
            return Err(Error::invalid(format!(
                "{name} row {i} has the wrong length"
            )));
        }
        if r.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::invalid(format!(
                "{name} row {i} has a negative or non-finite entry"
            )));
        }
        let total: f64 = r.iter().sum();
        if (total - 1.0).abs() > IDENTITY_TOL {
            return Err(Error::invalid(format!("{name} row {i} sums to {total}")));
        }
    }
    Ok(width)
}

impl DiscreteJoint {
    pub fn new(
        p_y: Vec<f64>,
        p_g_given_y: Vec<Vec<f64>>,
        p_z_given_g: Vec<Vec<f64>>,
        p_s_given_g: Vec<Vec<f64>>,
        nuisance: Option<Nuisance>,
    ) -> Result<Self> {
        check_rows("p(y)", std::slice::from_ref(&p_y), 1)?;
        let g = check_rows("p(g|y)", &p_g_given_y, p_y.len())?;
        check_rows("p(z|g)", &p_z_given_g, g)?;
        check_rows("p(s|g)", &p_s_given_g, g)?;
        if let Some(n) = nuisance {
            if n.signal_card * n.nuisance_card != g || n.nuisance_card == 0 {
                return Err(Error::invalid(format!(
                    "nuisance split {}x{} does not match |G| = {g}",
                    n.signal_card, n.nuisance_card
                )));
            }
        }
        Ok(DiscreteJoint {
            p_y,
            p_g_given_y,
            p_z_given_g,
            p_s_given_g,
            nuisance,
        })
    }

    pub fn cardinalities(&self) -> Cardinalities {
        Cardinalities {
            y: self.p_y.len(),
            g: self.p_z_given_g.len(),
            z: self.p_z_given_g[0].len(),
            s: self.p_s_given_g[0].len(),
        }
    }

    fn card(&self, v: Variable) -> Result<usize> {
        let c = self.cardinalities();
        Ok(match v {
            Variable::Y => c.y,
            Variable::G => c.g,
            Variable::Z => c.z,
            Variable::S => c.s,
            Variable::GN => {
                self.nuisance
                    .ok_or_else(|| Error::invalid("this system has no nuisance coordinate"))?
                    .nuisance_card
            }
        })
    }

    /// Every outcome `[y, g, z, s, g_n]` with positive probability.
    fn outcomes(&self) -> Vec<([usize; 5], f64)> {
        let c = self.cardinalities();
        let nc = self.nuisance.map_or(1, |n| n.nuisance_card);
        let mut out = Vec::new();
        for (y, &py) in self.p_y.iter().enumerate() {
            for g in 0..c.g {
                let pyg = py * self.p_g_given_y[y][g];
                if pyg == 0.0 {
                    continue;
                }
                for (z, &pz) in self.p_z_given_g[g].iter().enumerate() {
                    if pz == 0.0 {
                        continue;
                    }
                    for (s, &ps) in self.p_s_given_g[g].iter().enumerate() {
                        let p = pyg * pz * ps;
                        if p > 0.0 {
                            out.push(([y, g, z, s, g % nc], p));
                        }
                    }
                }
            }
        }
        out
    }

    /// Total probability mass of the joint.
    pub fn total_mass(&self) -> f64 {
        self.outcomes().iter().map(|(_, p)| p).sum()
    }

    /// `p(g)`.
    pub fn p_g(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.cardinalities().g];
        for (py, row) in self.p_y.iter().zip(&self.p_g_given_y) {
            for (pg, q) in p.iter_mut().zip(row) {
                *pg += py * q;
            }
        }
        p
    }

    /// `p(y | g)` for every `g` with positive mass; `None` otherwise.
    pub fn posterior_rows(&self) -> Vec<Option<Vec<f64>>> {
        let pg = self.p_g();
        (0..pg.len())
            .map(|g| {
                (pg[g] > 0.0).then(|| {
                    self.p_y
                        .iter()
                        .zip(&self.p_g_given_y)
                        .map(|(py, row)| py * row[g] / pg[g])
                        .collect()
                })
            })
            .collect()
    }

    fn with_z_channel(&self, p_z_given_g: Vec<Vec<f64>>) -> Result<Self> {
        DiscreteJoint::new(
            self.p_y.clone(),
            self.p_g_given_y.clone(),
            p_z_given_g,
            self.p_s_given_g.clone(),
            self.nuisance,
        )
    }
}

/// Dense marginal over a list of variables, mixed-radix indexed.
struct Marginal {
    slots: Vec<usize>,
    strides: Vec<usize>,
    data: Vec<f64>,
}

impl Marginal {
    fn new(
        joint: &DiscreteJoint,
        outcomes: &[([usize; 5], f64)],
        vars: &[Variable],
    ) -> Result<Self> {
        let mut strides = Vec::with_capacity(vars.len());
        let mut size = 1;
        for &v in vars {
            strides.push(size);
            size *= joint.card(v)?;
        }
        let slots: Vec<usize> = vars.iter().map(|v| v.slot()).collect();
        let mut m = Marginal {
            slots,
            strides,
            data: vec![0.0; size],
        };
        for (o, p) in outcomes {
            let k = m.key(o);
            m.data[k] += p;
        }
        Ok(m)
    }

    fn key(&self, o: &[usize; 5]) -> usize {
        self.slots
            .iter()
            .zip(&self.strides)
            .map(|(&s, &st)| o[s] * st)
            .sum()
    }

    fn get(&self, o: &[usize; 5]) -> f64 {
        self.data[self.key(o)]
    }
}

fn check_disjoint(sets: &[&[Variable]]) -> Result<()> {
    let mut seen = Vec::new();
    for set in sets {
        for v in *set {
            if seen.contains(v) {
                return Err(Error::invalid(format!(
                    "variable {v:?} appears in more than one argument"
                )));
            }
            seen.push(*v);
        }
    }
    Ok(())
}

/// `I(A; B | C)` by direct summation of `p(a,b,c) ln[p(a,b,c) p(c) / (p(a,c) p(b,c))]`.
/// An empty `c` gives the unconditional mutual information.
pub fn mutual_information(
    joint: &DiscreteJoint,
    a: &[Variable],
    b: &[Variable],
    c: &[Variable],
) -> Result<f64> {
    check_disjoint(&[a, b, c])?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid(
            "mutual information needs non-empty variable sets",
        ));
    }
    let outcomes = joint.outcomes();
    let abc: Vec<Variable> = a.iter().chain(b).chain(c).copied().collect();
    let ac: Vec<Variable> = a.iter().chain(c).copied().collect();
    let bc: Vec<Variable> = b.iter().chain(c).copied().collect();
    let m_abc = Marginal::new(joint, &outcomes, &abc)?;
    let m_ac = Marginal::new(joint, &outcomes, &ac)?;
    let m_bc = Marginal::new(joint, &outcomes, &bc)?;
    let m_c = Marginal::new(joint, &outcomes, c)?;

    // one representative outcome per cell of the (a, b, c) marginal
    let mut reps: Vec<Option<[usize; 5]>> = vec![None; m_abc.data.len()];
    for (o, _) in &outcomes {
        let k = m_abc.key(o);
        reps[k].get_or_insert(*o);
    }
    let mut total = 0.0;
    for (k, rep) in reps.iter().enumerate() {
        if let Some(o) = rep {
            let p = m_abc.data[k];
            total += p * (p * m_c.get(o) / (m_ac.get(o) * m_bc.get(o))).ln();
        }
    }
    Ok(total)
}

/// `H(A)` in nats.
pub fn entropy(joint: &DiscreteJoint, a: &[Variable]) -> Result<f64> {
    check_disjoint(&[a])?;
    let outcomes = joint.outcomes();
    let m = Marginal::new(joint, &outcomes, a)?;
    Ok(m.data
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum())
}

/// Co-information `I(A; B; C) = I(A; B) - I(A; B | C)`.
pub fn co_information(
    joint: &DiscreteJoint,
    a: &[Variable],
    b: &[Variable],
    c: &[Variable],
) -> Result<f64> {
    Ok(mutual_information(joint, a, b, &[])? - mutual_information(joint, a, b, c)?)
}

fn dirichlet_row<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let mut row: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = row.iter().sum();
    for v in &mut row {
        *v /= total;
    }
    row
}

fn dirichlet_rows<R: Rng + ?Sized>(rows: usize, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..rows).map(|_| dirichlet_row(k, rng)).collect()
}

/// A random system with every factor row drawn from a flat Dirichlet.
pub fn sample_markov_system<R: Rng + ?Sized>(
    card: Cardinalities,
    rng: &mut R,
) -> Result<DiscreteJoint> {
    if card.y < 2 || card.g < 2 || card.z < 2 || card.s < 2 {
        return Err(Error::invalid(format!(
            "every cardinality must be at least 2, got {card:?}"
        )));
    }
    DiscreteJoint::new(
        dirichlet_row(card.y, rng),
        dirichlet_rows(card.y, card.g, rng),
        dirichlet_rows(card.g, card.z, rng),
        dirichlet_rows(card.g, card.s, rng),
        None,
    )
}

/// A random system in which `Y` is a function of the signal part of
/// `G = (signal, nuisance)`, and the nuisance is independent of `Y`.
///
/// Signal values are dealt to labels round-robin, so each label owns a
/// disjoint, non-empty block of signal values.
pub fn sample_deterministic_label_system<R: Rng + ?Sized>(
    y_card: usize,
    signal_card: usize,
    nuisance_card: usize,
    z_card: usize,
    s_card: usize,
    rng: &mut R,
) -> Result<DiscreteJoint> {
    if y_card < 2 || signal_card < y_card || nuisance_card < 1 || z_card < 1 || s_card < 2 {
        return Err(Error::invalid(
            "need |Y| >= 2, |signal| >= |Y|, |G_N| >= 1, |Z| >= 1, |S| >= 2",
        ));
    }
    let g_card = signal_card * nuisance_card;
    let p_n = dirichlet_row(nuisance_card, rng);
    let p_g_given_y = (0..y_card)
        .map(|y| {
            let block: Vec<usize> = (0..signal_card).filter(|k| k % y_card == y).collect();
            let weights = dirichlet_row(block.len(), rng);
            let mut row = vec![0.0; g_card];
            for (&sig, w) in block.iter().zip(&weights) {
                for (n, pn) in p_n.iter().enumerate() {
                    row[sig * nuisance_card + n] = w * pn;
                }
            }
            row
        })
        .collect();
    DiscreteJoint::new(
        dirichlet_row(y_card, rng),
        p_g_given_y,
        dirichlet_rows(g_card, z_card, rng),
        dirichlet_rows(g_card, s_card, rng),
        Some(Nuisance {
            signal_card,
            nuisance_card,
        }),
    )
}

/// Replaces `p(z|g)` with the map sending `g` to the class of its posterior
/// row `p(Y | G = g)`. Zero-mass `g` join class 0.
pub fn make_sufficient_z(joint: &DiscreteJoint) -> Result<DiscreteJoint> {
    let rows = joint.posterior_rows();
    let mut classes: Vec<Vec<f64>> = Vec::new();
    let mut assignment = vec![0usize; rows.len()];
    for (g, row) in rows.iter().enumerate() {
        let Some(row) = row else { continue };
        let found = classes.iter().position(|c| {
            c.iter()
                .zip(row)
                .all(|(a, b)| (a - b).abs() <= POSTERIOR_TIE)
        });
        assignment[g] = found.unwrap_or_else(|| {
            classes.push(row.clone());
            classes.len() - 1
        });
    }
    let z_card = classes.len().max(1);
    let channel = assignment
        .iter()
        .map(|&c| {
            let mut r = vec![0.0; z_card];
            r[c] = 1.0;
            r
        })
        .collect();
    joint.with_z_channel(channel)
}

/// The label `f(g)` of every positive-mass `g`, or an error if `Y` is not a
/// function of `G`.
pub fn deterministic_labels(joint: &DiscreteJoint) -> Result<Vec<usize>> {
    joint
        .posterior_rows()
        .iter()
        .enumerate()
        .map(|(g, row)| match row {
            None => Ok(0),
            Some(r) => {
                let support: Vec<usize> = (0..r.len()).filter(|&y| r[y] > 0.0).collect();
                match support.as_slice() {
                    [y] => Ok(*y),
                    _ => Err(Error::invalid(format!(
                        "G = {g} is compatible with labels {support:?}"
                    ))),
                }
            }
        })
        .collect()
}

/// Sets `Z = f(G)`, the label read off `G`.
pub fn make_necessary_z(joint: &DiscreteJoint) -> Result<DiscreteJoint> {
    let labels = deterministic_labels(joint)?;
    let y_card = joint.cardinalities().y;
    let channel = labels
        .iter()
        .map(|&y| {
            let mut r = vec![0.0; y_card];
            r[y] = 1.0;
            r
        })
        .collect();
    joint.with_z_channel(channel)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// `lhs <= rhs`; slack `rhs - lhs`.
    Inequality,
    /// `lhs == rhs`; slack `-|lhs - rhs|`.
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckOutcome {
    fn inequality(name: &str, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        CheckOutcome {
            name: name.into(),
            kind: CheckKind::Inequality,
            lhs,
            rhs,
            slack,
            tolerance: INEQUALITY_TOL,
            pass: slack >= -INEQUALITY_TOL,
        }
    }

    fn identity(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let slack = -(lhs - rhs).abs();
        CheckOutcome {
            name: name.into(),
            kind: CheckKind::Identity,
            lhs,
            rhs,
            slack,
            tolerance,
            pass: -slack <= tolerance,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Claim {
    /// Identities and structural facts that hold for every system.
    General,
    Sufficient,
    Necessary,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MICheckReport {
    pub claim: Claim,
    pub checks: Vec<CheckOutcome>,
}

impl MICheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

use Variable::{G, GN, S, Y, Z};

/// Evaluates the inequalities that apply to `joint` under `claim`.
///
/// The joint must have been prepared by the matching construction:
/// [`make_sufficient_z`] for `Sufficient`, [`make_necessary_z`] for
/// `Necessary` and `Both`.
pub fn verify_theorem(joint: &DiscreteJoint, claim: Claim) -> Result<MICheckReport> {
    let mi = |a: &[Variable], b: &[Variable], c: &[Variable]| mutual_information(joint, a, b, c);
    let mut checks = Vec::new();
    match claim {
        Claim::General => {
            checks.push(CheckOutcome::inequality(
                "I(Z;S) <= I(Z;G)",
                mi(&[Z], &[S], &[])?,
                mi(&[Z], &[G], &[])?,
            ));
            // positivity, at identity tolerance
            for (name, a, b, c) in [
                ("I(Z;S) >= 0", &[Z][..], &[S][..], &[][..]),
                ("I(G;Y|Z) >= 0", &[G], &[Y], &[Z]),
                ("I(S;Y|Z) >= 0", &[S], &[Y], &[Z]),
                ("I(S;Z|Y) >= 0", &[S], &[Z], &[Y]),
            ] {
                let v = mi(a, b, c)?;
                checks.push(CheckOutcome {
                    pass: v >= -IDENTITY_TOL,
                    ..CheckOutcome::inequality(name, 0.0, v)
                });
            }
            checks.push(CheckOutcome::identity(
                "I(Z;Y|G) = 0",
                mi(&[Z], &[Y], &[G])?,
                0.0,
                IDENTITY_TOL,
            ));
            checks.push(CheckOutcome::identity(
                "I(S;Z|G) = 0",
                mi(&[S], &[Z], &[G])?,
                0.0,
                IDENTITY_TOL,
            ));
            checks.push(CheckOutcome::identity(
                "I(Z;Y) + I(Z;G|Y) = I(Z;G,Y)",
                mi(&[Z], &[Y], &[])? + mi(&[Z], &[G], &[Y])?,
                mi(&[Z], &[G, Y], &[])?,
                IDENTITY_TOL,
            ));
            checks.push(CheckOutcome::identity(
                "I(S;Z;Y) symmetric",
                co_information(joint, &[S], &[Z], &[Y])?,
                co_information(joint, &[S], &[Y], &[Z])?,
                IDENTITY_TOL,
            ));
            // with Z independent of Y given G, I(G;Y|Z) = I(G;Y) - I(Z;Y): the two
            // sides of the sufficiency equivalence vanish together
            checks.push(CheckOutcome::identity(
                "I(G;Y|Z) = I(G;Y) - I(Z;Y)",
                mi(&[G], &[Y], &[Z])?,
                mi(&[G], &[Y], &[])? - mi(&[Z], &[Y], &[])?,
                IDENTITY_TOL,
            ));
        }
        Claim::Sufficient => {
            checks.push(CheckOutcome::inequality(
                "I(G;Y|Z) <= 0",
                mi(&[G], &[Y], &[Z])?,
                0.0,
            ));
            checks.push(CheckOutcome::identity(
                "I(Z;Y) = I(G;Y)",
                mi(&[Z], &[Y], &[])?,
                mi(&[G], &[Y], &[])?,
                INEQUALITY_TOL,
            ));
            checks.push(CheckOutcome::inequality(
                "I(S;Y|Z) <= 0",
                mi(&[S], &[Y], &[Z])?,
                0.0,
            ));
            checks.push(CheckOutcome::inequality(
                "I(S;Y) <= I(S;Z)",
                mi(&[S], &[Y], &[])?,
                mi(&[S], &[Z], &[])?,
            ));
        }
        Claim::Necessary | Claim::Both => {
            checks.push(CheckOutcome::identity(
                "I(G;Z|Y) = 0",
                mi(&[G], &[Z], &[Y])?,
                0.0,
                IDENTITY_TOL,
            ));
            if joint.nuisance.is_some() {
                checks.push(CheckOutcome::identity(
                    "I(G_N;Z) = 0",
                    mi(&[GN], &[Z], &[])?,
                    0.0,
                    IDENTITY_TOL,
                ));
            }
            checks.push(CheckOutcome::inequality(
                "I(S;Z|Y) <= 0",
                mi(&[S], &[Z], &[Y])?,
                0.0,
            ));
            checks.push(CheckOutcome::inequality(
                "I(S;Z) <= I(S;Y)",
                mi(&[S], &[Z], &[])?,
                mi(&[S], &[Y], &[])?,
            ));
            if claim == Claim::Both {
                checks.push(CheckOutcome::inequality(
                    "I(G;Y|Z) <= 0",
                    mi(&[G], &[Y], &[Z])?,
                    0.0,
                ));
                checks.push(CheckOutcome::identity(
                    "I(S;Z) = I(S;Y)",
                    mi(&[S], &[Z], &[])?,
                    mi(&[S], &[Y], &[])?,
                    INEQUALITY_TOL,
                ));
            }
        }
    }
    Ok(MICheckReport { claim, checks })
}

/// One check aggregated over many systems, keeping the worst case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateCheck {
    pub construction: String,
    pub name: String,
    pub kind: CheckKind,
    pub tolerance: f64,
    pub systems: usize,
    pub failures: usize,
    pub worst: CheckOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegativeControl {
    pub claim: String,
    pub systems: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheorySuiteReport {
    pub samples: usize,
    pub seed: u64,
    pub cardinalities: Cardinalities,
    pub checks: Vec<AggregateCheck>,
    pub negative_control: NegativeControl,
    pub assumptions: Vec<String>,
}

impl TheorySuiteReport {
    /// Every check passed and the negative control found a violation.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.failures == 0) && self.negative_control.violations > 0
    }

    /// Fixed-width pass/fail table.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<12} {:<32} {:>7} {:>9} {:>12}\n",
            "system", "check", "systems", "failures", "worst slack"
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{:<12} {:<32} {:>7} {:>9} {:>12.3e}  {}\n",
                c.construction,
                c.name,
                c.systems,
                c.failures,
                c.worst.slack,
                if c.failures == 0 { "PASS" } else { "FAIL" }
            ));
        }
        out.push_str(&format!(
            "negative control: `{}` violated in {} of {} unconstrained systems  {}\n",
            self.negative_control.claim,
            self.negative_control.violations,
            self.negative_control.systems,
            if self.negative_control.violations > 0 {
                "PASS"
            } else {
                "FAIL"
            }
        ));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn absorb(aggregates: &mut Vec<AggregateCheck>, construction: &str, report: &MICheckReport) {
    for c in &report.checks {
        let idx = match aggregates
            .iter()
            .position(|a| a.construction == construction && a.name == c.name)
        {
            Some(i) => i,
            None => {
                aggregates.push(AggregateCheck {
                    construction: construction.into(),
                    name: c.name.clone(),
                    kind: c.kind,
                    tolerance: c.tolerance,
                    systems: 0,
                    failures: 0,
                    worst: c.clone(),
                });
                aggregates.len() - 1
            }
        };
        let a = &mut aggregates[idx];
        a.systems += 1;
        a.failures += usize::from(!c.pass);
        if c.slack < a.worst.slack {
            a.worst = c.clone();
        }
    }
}

/// Runs every construction on `samples` random systems each.
///
/// * `random`: raw Dirichlet systems, general identities and Lemma-style bounds;
/// * `sufficient`: Z replaced by posterior classes;
/// * `necessary`: deterministic label with a nuisance coordinate, `Z = f(G)`
///   (which is also sufficient, so the equality case is checked too).
///
/// The negative control counts raw systems violating `I(S;Z) >= I(S;Y)`.
pub fn run_theory_suite(
    samples: usize,
    seed: u64,
    card: Cardinalities,
) -> Result<TheorySuiteReport> {
    if samples == 0 {
        return Err(Error::invalid("the theory suite needs at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut violations = 0;
    for _ in 0..samples {
        let raw = sample_markov_system(card, &mut rng)?;
        let general = verify_theorem(&raw, Claim::General)?;
        absorb(&mut checks, "random", &general);
        let i_sy = mutual_information(&raw, &[S], &[Y], &[])?;
        let i_sz = mutual_information(&raw, &[S], &[Z], &[])?;
        violations += usize::from(i_sz < i_sy - INEQUALITY_TOL);

        let suff = make_sufficient_z(&raw)?;
        absorb(
            &mut checks,
            "sufficient",
            &verify_theorem(&suff, Claim::Sufficient)?,
        );
        absorb(
            &mut checks,
            "sufficient",
            &verify_theorem(&suff, Claim::General)?,
        );

        let signal = card.g.div_ceil(2).max(card.y);
        let det = sample_deterministic_label_system(card.y, signal, 2, card.z, card.s, &mut rng)?;
        let nec = make_necessary_z(&det)?;
        absorb(
            &mut checks,
            "necessary",
            &verify_theorem(&nec, Claim::Necessary)?,
        );
        absorb(
            &mut checks,
            "necessary",
            &verify_theorem(&nec, Claim::Both)?,
        );
        absorb(
            &mut checks,
            "necessary",
            &verify_theorem(&nec, Claim::General)?,
        );
    }
    Ok(TheorySuiteReport {
        samples,
        seed,
        cardinalities: card,
        checks,
        negative_control: NegativeControl {
            claim: "I(S;Z) >= I(S;Y)".into(),
            systems: samples,
            violations,
        },
        assumptions: vec![
            "necessity is checked only where Y is a deterministic function of G; \
             the nuisance G_N is then assumed to carry all label-irrelevant information"
                .into(),
        ],
    })
}
